#pragma once

// File formats: OBJ meshes, CSV angle curves, JSON surface patterns and
// reports, and the flat key-value run configuration.

#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rigidlab/assembly.hpp"
#include "rigidlab/geometry.hpp"

namespace rigidlab {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// OBJ

inline void write_obj(const EmbeddedPolyhedron& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << std::setprecision(17);
  for (size_t i = 0; i < p.coords.size(); ++i) {
    out << "v " << p.coords[i].x << " " << p.coords[i].y << " " << p.coords[i].z << "\n";
  }
  for (const Face& f : p.surface.faces())
    out << "f " << f[0] + 1 << " " << f[1] + 1 << " " << f[2] + 1 << "\n";
  if (!out) throw Error("write failed for " + path);
}

// Reads an OBJ written by write_obj (v/f records, 1-based indices). Labels
// are not part of OBJ; vertices come back as v1, v2, ...
inline EmbeddedPolyhedron read_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  EmbeddedPolyhedron p;
  std::vector<std::array<int, 3>> faces;
  std::string line;
  int vcount = 0;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "v") {
      Vec3 v;
      ss >> v.x >> v.y >> v.z;
      p.coords.push_back(v);
      p.surface.add_vertex("v" + std::to_string(++vcount));
    } else if (tag == "f") {
      int a, b, c;
      ss >> a >> b >> c;
      faces.push_back({a - 1, b - 1, c - 1});
    }
  }
  for (auto& f : faces)
    p.surface.add_face("v" + std::to_string(f[0] + 1), "v" + std::to_string(f[1] + 1),
                       "v" + std::to_string(f[2] + 1));
  return p;
}

// ---------------------------------------------------------------------------
// surface pattern JSON: {"vertices":[labels...],"faces":[[i,j,k],...]} with
// 1-based indices in canonical enumeration order.

inline json pattern_to_json(const SimplicialSurface& s) {
  json j;
  j["vertices"] = s.labels();
  json faces = json::array();
  for (const Face& f : s.faces()) faces.push_back({f[0] + 1, f[1] + 1, f[2] + 1});
  j["faces"] = faces;
  return j;
}

inline SimplicialSurface pattern_from_json(const json& j) {
  SimplicialSurface s;
  for (const auto& l : j.at("vertices")) s.add_vertex(l.get<std::string>());
  for (const auto& f : j.at("faces"))
    s.add_face(s.labels()[f.at(0).get<int>() - 1], s.labels()[f.at(1).get<int>() - 1],
               s.labels()[f.at(2).get<int>() - 1]);
  return s;
}

// ---------------------------------------------------------------------------
// run configuration: flat key-value text with '#' comments

struct RunConfig {
  BricardConfig bricard = default_config();
  AuxPlacement placement;
  int grid = 128;                   // samples for angle curves / flex paths
  double tol = 1e-9;                // reporting tolerance knob for cmd outputs
  std::vector<int> n_list{1, 10, 100};
  std::vector<int> convergence_ns{1, 2, 5, 10, 20, 50, 100, 200, 500, 1000};
  std::string out_dir = ".";

  void validate() const {
    bricard.validate();
    placement.validate();
    if (grid < 8) throw Error("RunConfig: grid too coarse");
    if (tol <= 0) throw Error("RunConfig: tolerance must be positive");
    for (int n : n_list)
      if (n < 1) throw Error("RunConfig: n values must be >= 1");
  }
};

inline RunConfig parse_config_text(const std::string& text, RunConfig base = RunConfig{}) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ss(line);
    std::string key;
    if (!(ss >> key)) continue;
    std::string eq;
    std::string value;
    ss >> eq;
    if (eq != "=") throw Error("config line " + std::to_string(lineno) + ": expected key = value");
    ss >> value;
    auto d = [&]() { return std::stod(value); };
    if (key == "l_ab") base.bricard.l_ab = d();
    else if (key == "l_bc") base.bricard.l_bc = d();
    else if (key == "s") base.bricard.s = d();
    else if (key == "t") base.bricard.t = d();
    else if (key == "r0") base.bricard.r0 = d();
    else if (key == "t_m") base.placement.t_m = d();
    else if (key == "t_n") base.placement.t_n = d();
    else if (key == "k") base.placement.k = d();
    else if (key == "foot_x") base.placement.foot_x = d();
    else if (key == "dist_x") base.placement.dist_x = d();
    else if (key == "foot_u") base.placement.foot_u = d();
    else if (key == "dist_u") base.placement.dist_u = d();
    else if (key == "grid") base.grid = std::stoi(value);
    else if (key == "tol") base.tol = d();
    else if (key == "n_list") {
      base.n_list.clear();
      std::stringstream vs(value);
      std::string tok;
      while (std::getline(vs, tok, ',')) base.n_list.push_back(std::stoi(tok));
    } else if (key == "out_dir") base.out_dir = value;
    else throw Error("config line " + std::to_string(lineno) + ": unknown key " + key);
  }
  return base;
}

inline RunConfig load_config(const std::string& path, RunConfig base = RunConfig{}) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), base);
}

// ---------------------------------------------------------------------------
// CSV angle curves

inline void write_angle_csv(const std::string& path, const std::vector<double>& rs,
                            const std::vector<double>& alphas, const std::vector<double>& betas,
                            const std::vector<double>& gammas) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << "r,alpha,beta,gamma\n" << std::setprecision(17);
  for (size_t i = 0; i < rs.size(); ++i) {
    out << rs[i] << "," << alphas[i] << "," << betas[i];
    if (i < gammas.size()) out << "," << gammas[i];
    out << "\n";
  }
}

inline json construction_metadata(const RunConfig& rc, const EmbeddedPolyhedron& p) {
  json meta;
  meta["parameters"] = {{"l_ab", rc.bricard.l_ab}, {"l_bc", rc.bricard.l_bc},
                        {"s", rc.bricard.s},       {"t", rc.bricard.t},
                        {"r0", rc.bricard.r0},     {"t_m", rc.placement.t_m},
                        {"t_n", rc.placement.t_n}, {"k", rc.placement.k}};
  meta["vertices"] = p.surface.labels();
  json lens = json::array();
  for (auto [i, j] : p.surface.edges())
    lens.push_back({{"edge", {i + 1, j + 1}}, {"length", dist(p.coords[i], p.coords[j])}});
  meta["edge_lengths"] = lens;
  return meta;
}

}  // namespace rigidlab
