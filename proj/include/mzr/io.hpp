#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mzr/mesh.hpp"
#include "mzr/montecarlo.hpp"
#include "mzr/solver.hpp"

// Output emission: trajectory/MC CSV, mesh snapshot documents and the run
// manifest. Doubles are printed in shortest round-trip form so identical runs
// produce byte-identical files.

namespace mzr {

inline std::string format_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf, p);
}

inline std::string trajectory_csv(const Trajectory& traj) {
  const int nv = static_cast<int>(traj.mean.size());
  std::ostringstream os;
  os << "t";
  for (int v = 1; v <= nv; ++v) os << ",mean_" << v;
  for (int v = 1; v <= nv; ++v) os << ",var_" << v;
  os << ",n_elements\n";
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    os << format_double(traj.times[i]);
    for (int v = 0; v < nv; ++v) os << "," << format_double(traj.mean[v][i]);
    for (int v = 0; v < nv; ++v) os << "," << format_double(traj.variance[v][i]);
    os << "," << traj.n_elements[i] << "\n";
  }
  return os.str();
}

inline std::string mc_csv(const McResult& res) {
  const int nv = static_cast<int>(res.mean.size());
  std::ostringstream os;
  os << "t";
  for (int v = 1; v <= nv; ++v)
    os << ",mean_" << v << ",var_" << v << ",stderr_mean_" << v << ",stderr_var_" << v;
  os << "\n";
  for (std::size_t i = 0; i < res.times.size(); ++i) {
    os << format_double(res.times[i]);
    for (int v = 0; v < nv; ++v)
      os << "," << format_double(res.mean[v][i]) << ","
         << format_double(res.variance[v][i]) << ","
         << format_double(res.stderr_mean[v][i]) << ","
         << format_double(res.stderr_var[v][i]);
    os << "\n";
  }
  return os.str();
}

inline nlohmann::json snapshot_to_json(const Mesh& mesh, double time) {
  nlohmann::json doc;
  doc["time"] = time;
  doc["dimension"] = mesh.dimension;
  doc["elements"] = nlohmann::json::array();
  for (const auto& e : mesh.elements) {
    nlohmann::json je;
    je["id"] = e.id;
    je["bounds"] = nlohmann::json::array();
    for (int m = 0; m < e.dimension(); ++m)
      je["bounds"].push_back({e.lo[m], e.hi[m]});
    je["probability"] = e.probability;
    je["birth_time"] = e.birth_time;
    je["coefficients"] = nlohmann::json::array();
    for (int v = 0; v < e.state.n_states; ++v) {
      auto sp = e.state.var(v);
      je["coefficients"].push_back(std::vector<double>(sp.begin(), sp.end()));
    }
    doc["elements"].push_back(std::move(je));
  }
  doc["log"] = nlohmann::json::array();
  for (const auto& ev : mesh.log) {
    nlohmann::json je;
    je["time"] = ev.time;
    je["parent"] = ev.parent;
    je["dims"] = ev.dims;
    je["children"] = ev.children;
    je["degenerate"] = ev.degenerate;
    doc["log"].push_back(std::move(je));
  }
  return doc;
}

// Rebuild the mesh geometry, states and log from a snapshot. The per-element
// systems are not part of the snapshot and come back empty.
inline Mesh snapshot_from_json(const nlohmann::json& doc) {
  Mesh mesh;
  mesh.dimension = doc.at("dimension").get<int>();
  for (const auto& je : doc.at("elements")) {
    Element e;
    e.id = je.at("id").get<int>();
    for (const auto& b : je.at("bounds")) {
      e.lo.push_back(b.at(0).get<double>());
      e.hi.push_back(b.at(1).get<double>());
    }
    e.probability = je.at("probability").get<double>();
    e.birth_time = je.at("birth_time").get<double>();
    const auto& coeffs = je.at("coefficients");
    const int nv = static_cast<int>(coeffs.size());
    const int n = nv > 0 ? static_cast<int>(coeffs.at(0).size()) : 0;
    e.state = GalerkinState(nv, n);
    for (int v = 0; v < nv; ++v) {
      auto dst = e.state.var(v);
      for (int k = 0; k < n; ++k) dst[k] = coeffs.at(v).at(k).get<double>();
    }
    mesh.next_id = std::max(mesh.next_id, e.id + 1);
    mesh.elements.push_back(std::move(e));
  }
  for (const auto& je : doc.at("log")) {
    RefineEvent ev;
    ev.time = je.at("time").get<double>();
    ev.parent = je.at("parent").get<int>();
    ev.dims = je.at("dims").get<std::vector<int>>();
    ev.children = je.at("children").get<std::vector<int>>();
    ev.degenerate = je.at("degenerate").get<bool>();
    mesh.log.push_back(std::move(ev));
  }
  return mesh;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace mzr
