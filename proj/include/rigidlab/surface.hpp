#pragma once

// Combinatorial simplicial 2-complexes with the surgery operations needed to
// assemble closed triangulated spheres: face removal, fan retriangulation and
// boundary gluing. Purely combinatorial; coordinates live in geometry.hpp.

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace rigidlab {

class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Canonical position of a labeled vertex. Indices are 1-based in all external
// formats; internally we store 0-based offsets into the vertex list.
struct VertexId {
  std::string label;
  int index = 0;  // 1-based canonical index
};

using Face = std::array<int, 3>;  // 0-based vertex offsets, orientation-carrying

struct SphereValidationReport {
  bool closed = false;        // every edge in exactly 2 faces
  bool manifold = false;      // every vertex link a single cycle
  bool orientable = false;    // a coherent orientation exists
  int euler = 0;              // V - E + F
  int boundary_edges = 0;
  int vertex_count = 0;
  int edge_count = 0;
  int face_count = 0;
  std::vector<std::string> failures;

  bool pass() const { return closed && manifold && orientable && euler == 2; }
};

class SimplicialSurface {
public:
  SimplicialSurface() = default;

  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<Face>& faces() const { return faces_; }
  int vertex_count() const { return static_cast<int>(labels_.size()); }
  int face_count() const { return static_cast<int>(faces_.size()); }

  int index_of(const std::string& label) const {
    auto it = lookup_.find(label);
    if (it == lookup_.end()) throw Error("unknown vertex label: " + label);
    return it->second;
  }
  bool has_vertex(const std::string& label) const { return lookup_.count(label) > 0; }

  int add_vertex(const std::string& label) {
    if (lookup_.count(label)) throw Error("duplicate vertex label: " + label);
    labels_.push_back(label);
    lookup_[label] = static_cast<int>(labels_.size()) - 1;
    return lookup_[label];
  }

  void add_face(const std::string& va, const std::string& vb, const std::string& vc) {
    if (va == vb || vb == vc || va == vc)
      throw Error("degenerate face (" + va + "," + vb + "," + vc + ")");
    Face f;
    f[0] = ensure_vertex(va);
    f[1] = ensure_vertex(vb);
    f[2] = ensure_vertex(vc);
    if (find_face(f) >= 0)
      throw Error("duplicate face (" + va + "," + vb + "," + vc + ")");
    faces_.push_back(f);
  }

  void remove_face(const std::string& va, const std::string& vb, const std::string& vc) {
    Face f{index_of(va), index_of(vb), index_of(vc)};
    int at = find_face(f);
    if (at < 0) throw Error("face not present (" + va + "," + vb + "," + vc + ")");
    faces_.erase(faces_.begin() + at);
  }

  bool has_face(const std::string& va, const std::string& vb, const std::string& vc) const {
    if (!has_vertex(va) || !has_vertex(vb) || !has_vertex(vc)) return false;
    return find_face(Face{index_of(va), index_of(vb), index_of(vc)}) >= 0;
  }

  // Derived edge set, each edge as an ordered index pair (i < j).
  std::vector<std::pair<int, int>> edges() const {
    std::set<std::pair<int, int>> es;
    for (const Face& f : faces_)
      for (int k = 0; k < 3; ++k)
        es.insert(ordered(f[k], f[(k + 1) % 3]));
    return {es.begin(), es.end()};
  }

  bool has_edge(const std::string& va, const std::string& vb) const {
    if (!has_vertex(va) || !has_vertex(vb)) return false;
    auto e = ordered(index_of(va), index_of(vb));
    for (const Face& f : faces_)
      for (int k = 0; k < 3; ++k)
        if (ordered(f[k], f[(k + 1) % 3]) == e) return true;
    return false;
  }

  // Faces incident to the undirected edge (i, j).
  std::vector<int> faces_at_edge(int i, int j) const {
    std::vector<int> out;
    auto e = ordered(i, j);
    for (size_t fi = 0; fi < faces_.size(); ++fi)
      for (int k = 0; k < 3; ++k)
        if (ordered(faces_[fi][k], faces_[fi][(k + 1) % 3]) == e) {
          out.push_back(static_cast<int>(fi));
          break;
        }
    return out;
  }

  // Boundary edges (used by exactly one face), as directed pairs in face order.
  std::vector<std::pair<int, int>> boundary() const {
    std::map<std::pair<int, int>, int> use;
    for (const Face& f : faces_)
      for (int k = 0; k < 3; ++k)
        use[ordered(f[k], f[(k + 1) % 3])]++;
    std::vector<std::pair<int, int>> out;
    for (auto& [e, n] : use)
      if (n == 1) out.push_back(e);
    return out;
  }

  // Reorients faces by adjacency sweep so that shared edges are traversed in
  // opposite directions. Throws if the complex is not orientable. Faces in
  // other connected components keep their stored orientation seedwise.
  void orient() {
    if (faces_.empty()) return;
    std::map<std::pair<int, int>, std::vector<int>> at_edge;
    for (size_t fi = 0; fi < faces_.size(); ++fi)
      for (int k = 0; k < 3; ++k)
        at_edge[ordered(faces_[fi][k], faces_[fi][(k + 1) % 3])].push_back(static_cast<int>(fi));
    std::vector<int> state(faces_.size(), 0);  // 0 unseen, 1 kept, -1 flipped
    for (size_t seed = 0; seed < faces_.size(); ++seed) {
      if (state[seed] != 0) continue;
      state[seed] = 1;
      std::vector<int> stack{static_cast<int>(seed)};
      while (!stack.empty()) {
        int fi = stack.back();
        stack.pop_back();
        Face f = oriented_face(fi, state[fi]);
        for (int k = 0; k < 3; ++k) {
          std::pair<int, int> de{f[k], f[(k + 1) % 3]};
          for (int gj : at_edge.at(ordered(de.first, de.second))) {
            if (gj == fi) continue;
            int need = direction_use(faces_[gj], de) ? -1 : 1;
            if (state[gj] == 0) {
              state[gj] = need;
              stack.push_back(gj);
            } else if (state[gj] != need) {
              throw Error("orientation conflict: surface not orientable as assembled");
            }
          }
        }
      }
    }
    for (size_t fi = 0; fi < faces_.size(); ++fi)
      if (state[fi] == -1) std::swap(faces_[fi][1], faces_[fi][2]);
  }

  bool orientable() const {
    SimplicialSurface copy = *this;
    try {
      copy.orient();
    } catch (const Error&) {
      return false;
    }
    return true;
  }

private:
  int ensure_vertex(const std::string& label) {
    auto it = lookup_.find(label);
    if (it != lookup_.end()) return it->second;
    labels_.push_back(label);
    lookup_[label] = static_cast<int>(labels_.size()) - 1;
    return lookup_[label];
  }

  static std::pair<int, int> ordered(int i, int j) { return {std::min(i, j), std::max(i, j)}; }

  int find_face(const Face& f) const {
    std::array<int, 3> key = sorted(f);
    for (size_t i = 0; i < faces_.size(); ++i)
      if (sorted(faces_[i]) == key) return static_cast<int>(i);
    return -1;
  }

  static std::array<int, 3> sorted(const Face& f) {
    std::array<int, 3> s = f;
    std::sort(s.begin(), s.end());
    return s;
  }

  Face oriented_face(int fi, int st) const {
    Face f = faces_[fi];
    if (st == -1) std::swap(f[1], f[2]);
    return f;
  }

  // true iff g (as stored) traverses directed edge de in the same direction
  static bool direction_use(const Face& g, const std::pair<int, int>& de) {
    for (int k = 0; k < 3; ++k)
      if (g[k] == de.first && g[(k + 1) % 3] == de.second) return true;
    return false;
  }

  std::vector<std::string> labels_;
  std::map<std::string, int> lookup_;
  std::vector<Face> faces_;
};

// ---------------------------------------------------------------------------

inline SimplicialSurface build_surface(
    const std::vector<std::array<std::string, 3>>& faces,
    const std::vector<std::string>& vertex_order = {}) {
  SimplicialSurface s;
  for (const auto& label : vertex_order) s.add_vertex(label);
  for (const auto& f : faces) s.add_face(f[0], f[1], f[2]);
  return s;
}

inline SphereValidationReport validate_closed_sphere(const SimplicialSurface& s) {
  SphereValidationReport rep;
  rep.vertex_count = s.vertex_count();
  rep.face_count = s.face_count();
  auto es = s.edges();
  rep.edge_count = static_cast<int>(es.size());
  rep.euler = rep.vertex_count - rep.edge_count + rep.face_count;

  std::map<std::pair<int, int>, int> use;
  for (const Face& f : s.faces())
    for (int k = 0; k < 3; ++k) {
      int i = f[k], j = f[(k + 1) % 3];
      use[{std::min(i, j), std::max(i, j)}]++;
    }
  rep.boundary_edges = 0;
  bool over_used = false;
  for (auto& [e, n] : use) {
    if (n == 1) rep.boundary_edges++;
    if (n > 2) over_used = true;
  }
  rep.closed = (rep.boundary_edges == 0) && !over_used;
  if (rep.boundary_edges > 0)
    rep.failures.push_back(std::to_string(rep.boundary_edges) + " boundary edges");
  if (over_used) rep.failures.push_back("edge shared by more than 2 faces");

  // vertex links must be single cycles
  rep.manifold = rep.closed;
  if (rep.closed) {
    for (int v = 0; v < s.vertex_count(); ++v) {
      std::map<int, std::vector<int>> adj;  // link graph
      int deg = 0;
      for (const Face& f : s.faces()) {
        for (int k = 0; k < 3; ++k)
          if (f[k] == v) {
            int a = f[(k + 1) % 3], b = f[(k + 2) % 3];
            adj[a].push_back(b);
            adj[b].push_back(a);
            deg++;
          }
      }
      if (deg == 0) continue;
      bool cyc = true;
      for (auto& [node, nb] : adj)
        if (nb.size() != 2) cyc = false;
      if (cyc) {
        // single cycle: walk it
        int start = adj.begin()->first, prev = -1, cur = start, len = 0;
        do {
          int nxt = (adj[cur][0] == prev) ? adj[cur][1] : adj[cur][0];
          prev = cur;
          cur = nxt;
          len++;
        } while (cur != start && len <= static_cast<int>(adj.size()));
        cyc = (cur == start) && (len == static_cast<int>(adj.size()));
      }
      if (!cyc) {
        rep.manifold = false;
        rep.failures.push_back("vertex link not a single cycle at " + s.labels()[v]);
        break;
      }
    }
  }

  rep.orientable = rep.closed && s.orientable();
  if (rep.closed && !rep.orientable) rep.failures.push_back("not orientable");
  if (rep.euler != 2 && rep.closed)
    rep.failures.push_back("Euler characteristic " + std::to_string(rep.euler));
  return rep;
}

// Replaces `face` by the fan from `apex` along the closed boundary path.
// The boundary lists the replacement region's cycle; consecutive pairs not
// touching the apex become fan triangles. New vertices on the boundary are
// created on first use.
inline SimplicialSurface retriangulate_fan(const SimplicialSurface& s,
                                           const std::array<std::string, 3>& face,
                                           const std::string& apex,
                                           const std::vector<std::string>& boundary) {
  SimplicialSurface out = s;
  std::set<std::string> seen(boundary.begin(), boundary.end());
  if (seen.size() != boundary.size()) throw Error("fan boundary not simple");
  if (!seen.count(apex)) throw Error("fan apex must lie on the boundary");
  out.remove_face(face[0], face[1], face[2]);
  const size_t n = boundary.size();
  for (size_t i = 0; i < n; ++i) {
    const std::string& a = boundary[i];
    const std::string& b = boundary[(i + 1) % n];
    if (a == apex || b == apex) continue;
    out.add_face(apex, a, b);
  }
  out.orient();
  return out;
}

// Glues two surfaces with matching open boundary cycles. `identification`
// maps labels of s2's boundary onto labels of s1; all other s2 vertices come
// in under their own labels. Orientation is made coherent, flipping s2's
// faces as a block if needed.
inline SimplicialSurface glue_complexes(const SimplicialSurface& s1,
                                        const SimplicialSurface& s2,
                                        const std::map<std::string, std::string>& identification) {
  auto b1 = s1.boundary();
  auto b2 = s2.boundary();
  if (b1.size() != b2.size())
    throw Error("glue boundary length mismatch: " + std::to_string(b1.size()) + " vs " +
                std::to_string(b2.size()));
  SimplicialSurface out = s1;
  for (const Face& f : s2.faces()) {
    std::array<std::string, 3> lab;
    for (int k = 0; k < 3; ++k) {
      std::string l = s2.labels()[f[k]];
      auto it = identification.find(l);
      lab[k] = (it == identification.end()) ? l : it->second;
    }
    out.add_face(lab[0], lab[1], lab[2]);
  }
  out.orient();
  auto post = validate_closed_sphere(out);
  if (!post.closed) throw Error("glue produced a non-closed surface");
  return out;
}

// True iff an incidence preserving vertex bijection carries faces to faces.
// When the two label sets coincide the label map is used; otherwise vertices
// are paired by canonical index.
inline bool combinatorially_equivalent(const SimplicialSurface& s1, const SimplicialSurface& s2) {
  if (s1.vertex_count() != s2.vertex_count()) return false;
  if (s1.face_count() != s2.face_count()) return false;
  std::vector<int> map(s1.vertex_count());
  std::set<std::string> l1(s1.labels().begin(), s1.labels().end());
  std::set<std::string> l2(s2.labels().begin(), s2.labels().end());
  if (l1 == l2) {
    for (int i = 0; i < s1.vertex_count(); ++i) map[i] = s2.index_of(s1.labels()[i]);
  } else {
    for (int i = 0; i < s1.vertex_count(); ++i) map[i] = i;
  }
  auto key = [](const Face& f) {
    std::array<int, 3> k = f;
    std::sort(k.begin(), k.end());
    return k;
  };
  std::set<std::array<int, 3>> f2;
  for (const Face& f : s2.faces()) f2.insert(key(f));
  for (const Face& f : s1.faces()) {
    Face g{map[f[0]], map[f[1]], map[f[2]]};
    if (!f2.count(key(g))) return false;
  }
  return true;
}

}  // namespace rigidlab
