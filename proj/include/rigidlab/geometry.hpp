#pragma once

// Euclidean 3-space primitives: circumcircles, dihedral angles and sectors,
// labeled congruence of point sets, signed volume, integral mean curvature,
// and the coplanar containment predicates used by the assembly.

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "rigidlab/surface.hpp"

namespace rigidlab {

inline constexpr double kPi = std::numbers::pi;

struct Vec3 {
  double x = 0, y = 0, z = 0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }
inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline double dist(const Vec3& a, const Vec3& b) { return norm(a - b); }
inline Vec3 normalized(const Vec3& v) {
  double n = norm(v);
  if (n == 0.0) throw Error("cannot normalize zero vector");
  return v / n;
}

// Orthonormal frame: origin plus right-handed axes.
struct Frame {
  Vec3 origin, e1, e2, e3;
  Vec3 to_local(const Vec3& p) const {
    Vec3 d = p - origin;
    return {dot(d, e1), dot(d, e2), dot(d, e3)};
  }
  Vec3 to_world(const Vec3& c) const { return origin + e1 * c.x + e2 * c.y + e3 * c.z; }
};

// Frame anchored at `o`, first axis toward `along`, second axis the unit
// normal of the plane (o, along, up).
inline Frame frame_from(const Vec3& o, const Vec3& along, const Vec3& up) {
  Frame f;
  f.origin = o;
  f.e1 = normalized(along - o);
  f.e2 = normalized(cross(along - o, up - o));
  f.e3 = cross(f.e1, f.e2);
  return f;
}

inline Vec3 rotate_about_line(const Vec3& point, const Vec3& line_origin, const Vec3& line_dir,
                              double angle) {
  Vec3 k = normalized(line_dir);
  Vec3 v = point - line_origin;
  Vec3 vk = k * dot(v, k);
  Vec3 vp = v - vk;
  Vec3 w = cross(k, vp);
  return line_origin + vk + vp * std::cos(angle) + w * std::sin(angle);
}

// ---------------------------------------------------------------------------

struct Circumcircle {
  Vec3 center;
  double radius = 0;
};

inline Circumcircle circumcircle(const Vec3& a, const Vec3& b, const Vec3& c) {
  Vec3 ab = b - a, ac = c - a;
  Vec3 n = cross(ab, ac);
  double n2 = dot(n, n);
  double scale = std::max({norm(ab), norm(ac), 1e-300});
  if (std::sqrt(n2) < 1e-12 * scale * scale)
    throw Error("circumcircle: collinear input");
  Vec3 o = a + (cross(n, ab) * dot(ac, ac) + cross(ac, n) * dot(ab, ab)) / (2.0 * n2);
  return {o, dist(o, a)};
}

// Dihedral data at an oriented edge. `angle` is the planes-between measure in
// [0, pi]; `sector` the oriented interior measure in (0, 2 pi) when a
// reference normal is supplied (it fixes which side counts as interior).
struct DihedralSample {
  double angle = 0;
  double sector = 0;
};

namespace detail {
inline Vec3 radial_component(const Vec3& p, const Vec3& e0, const Vec3& axis) {
  Vec3 v = p - e0;
  return v - axis * dot(v, axis);
}
}  // namespace detail

inline DihedralSample dihedral(const Vec3& edge_p0, const Vec3& edge_p1, const Vec3& wing_a,
                               const Vec3& wing_b,
                               std::optional<Vec3> sector_reference = std::nullopt) {
  Vec3 axis = normalized(edge_p1 - edge_p0);
  Vec3 va = detail::radial_component(wing_a, edge_p0, axis);
  Vec3 vb = detail::radial_component(wing_b, edge_p0, axis);
  double scale = std::max(dist(edge_p0, wing_a), dist(edge_p0, wing_b));
  if (norm(va) < 1e-13 * scale || norm(vb) < 1e-13 * scale)
    throw Error("dihedral: wing on the edge line");
  va = normalized(va);
  vb = normalized(vb);
  DihedralSample out;
  out.angle = std::atan2(norm(cross(va, vb)), dot(va, vb));
  if (sector_reference) {
    // signed rotation from wing_a to wing_b about the axis, folded to (0,2pi);
    // the reference flips the axis so that "interior" is measured on its side
    Vec3 ax = axis;
    if (dot(*sector_reference, ax) < 0) ax = -ax;
    double s = std::atan2(dot(cross(va, vb), ax), dot(va, vb));
    if (s <= 0) s += 2 * kPi;
    out.sector = s;
  } else {
    out.sector = out.angle;
  }
  return out;
}

// Angular position of w's half-plane around the axis (e0, e1), measured in a
// frame fixed by ref_dir (in-plane zero direction).
inline double ray_angle(const Vec3& e0, const Vec3& e1, const Vec3& w, const Vec3& ref1,
                        const Vec3& ref2) {
  Vec3 axis = normalized(e1 - e0);
  Vec3 v = detail::radial_component(w, e0, axis);
  double a = std::atan2(dot(v, ref2), dot(v, ref1));
  if (a < 0) a += 2 * kPi;
  return a;
}

// Congruence of labeled point lists up to isometry (reflections included):
// all pairwise distances agree within tol.
inline bool labeled_congruent(const std::vector<Vec3>& xs, const std::vector<Vec3>& ys,
                              double tol) {
  if (xs.size() != ys.size()) throw Error("labeled_congruent: length mismatch");
  for (size_t i = 0; i < xs.size(); ++i)
    for (size_t j = i + 1; j < xs.size(); ++j)
      if (std::abs(dist(xs[i], xs[j]) - dist(ys[i], ys[j])) > tol) return false;
  return true;
}

enum class HalfPlaneSide { Same, Opposite, OnLine };

// Classifies `query` against the line (p0, p1) within their common plane,
// relative to the side holding `reference`. Inputs must be coplanar within
// tol_rel times the point-set diameter.
inline HalfPlaneSide half_plane_side(const Vec3& line_p0, const Vec3& line_p1,
                                     const Vec3& reference, const Vec3& query,
                                     double tol_rel = 1e-9) {
  double diam = std::max({dist(line_p0, line_p1), dist(line_p0, reference), dist(line_p0, query)});
  Vec3 axis = normalized(line_p1 - line_p0);
  Vec3 r = detail::radial_component(reference, line_p0, axis);
  Vec3 q = detail::radial_component(query, line_p0, axis);
  if (norm(r) < tol_rel * diam) throw Error("half_plane_side: reference on the line");
  Vec3 n = cross(axis, r);  // plane normal direction out of (line, reference)
  if (std::abs(dot(q, normalized(n))) > tol_rel * diam && norm(q) > tol_rel * diam)
    throw Error("half_plane_side: query not coplanar with line and reference");
  double side = dot(q, normalized(r));
  if (norm(q) < tol_rel * diam) return HalfPlaneSide::OnLine;
  double off = dot(q, normalized(r));
  double tang = norm(q - normalized(r) * off);
  if (std::abs(off) < tol_rel * diam && tang < tol_rel * diam) return HalfPlaneSide::OnLine;
  return side > 0 ? HalfPlaneSide::Same : HalfPlaneSide::Opposite;
}

// Strict interior test, coplanarity enforced within tol_rel * diameter.
inline bool point_in_triangle(const Vec3& p, const Vec3& t0, const Vec3& t1, const Vec3& t2,
                              double tol_rel = 1e-9) {
  Vec3 n = cross(t1 - t0, t2 - t0);
  double diam = std::max({dist(t0, t1), dist(t1, t2), dist(t0, p)});
  if (norm(n) < 1e-12 * diam * diam) throw Error("point_in_triangle: degenerate triangle");
  if (std::abs(dot(p - t0, normalized(n))) > tol_rel * diam)
    throw Error("point_in_triangle: point not coplanar with triangle");
  double s0 = dot(cross(t1 - t0, p - t0), n);
  double s1 = dot(cross(t2 - t1, p - t1), n);
  double s2 = dot(cross(t0 - t2, p - t2), n);
  double eps = 1e-12 * dot(n, n) / std::max(norm(n), 1e-300) * diam;
  return s0 > eps && s1 > eps && s2 > eps;
}

// ---------------------------------------------------------------------------

// A simplicial surface together with an image point per vertex; the map may
// self-intersect, only per-face nondegeneracy is required.
struct EmbeddedPolyhedron {
  SimplicialSurface surface;
  std::vector<Vec3> coords;  // indexed like surface.labels()

  const Vec3& at(const std::string& label) const { return coords[surface.index_of(label)]; }
  Vec3& at(const std::string& label) { return coords[surface.index_of(label)]; }

  double diameter() const {
    double d = 0;
    for (size_t i = 0; i < coords.size(); ++i)
      for (size_t j = i + 1; j < coords.size(); ++j) d = std::max(d, dist(coords[i], coords[j]));
    return d;
  }

  // Every face a nondegenerate triangle; coplanar adjacent faces are fine.
  void check_nondegenerate(double tol_rel = 1e-12) const {
    double diam = diameter();
    for (const Face& f : surface.faces()) {
      Vec3 n = cross(coords[f[1]] - coords[f[0]], coords[f[2]] - coords[f[0]]);
      if (norm(n) < tol_rel * diam * diam)
        throw Error("degenerate face (" + surface.labels()[f[0]] + "," + surface.labels()[f[1]] +
                    "," + surface.labels()[f[2]] + ")");
    }
  }

  std::vector<double> edge_lengths() const {
    std::vector<double> out;
    for (auto [i, j] : surface.edges()) out.push_back(dist(coords[i], coords[j]));
    return out;
  }
};

inline double signed_volume(const EmbeddedPolyhedron& p) {
  auto rep = validate_closed_sphere(p.surface);
  if (!rep.closed) throw Error("signed_volume: surface not closed");
  double v = 0;
  for (const Face& f : p.surface.faces())
    v += dot(p.coords[f[0]], cross(p.coords[f[1]], p.coords[f[2]])) / 6.0;
  return v;
}

// Signed bend angle at each edge: positive where the surface is convex with
// respect to the stored orientation. Folded-flat edges (bend == +-pi) sit on
// the branch cut; they are returned as +pi so isolated evaluations stay
// deterministic, and path-based consumers unwrap across samples.
inline std::vector<double> edge_bend_angles(const EmbeddedPolyhedron& p,
                                            const std::vector<std::pair<int, int>>& edges) {
  std::vector<double> out;
  out.reserve(edges.size());
  for (auto [i, j] : edges) {
    auto fids = p.surface.faces_at_edge(i, j);
    if (fids.size() != 2) throw Error("edge_bend_angles: open edge");
    const Face* f1 = &p.surface.faces()[fids[0]];
    const Face* f2 = &p.surface.faces()[fids[1]];
    // orient so that f1 traverses i->j
    bool f1_fwd = false;
    for (int k = 0; k < 3; ++k)
      if ((*f1)[k] == i && (*f1)[(k + 1) % 3] == j) f1_fwd = true;
    if (!f1_fwd) std::swap(f1, f2);
    Vec3 n1 = normalized(cross(p.coords[(*f1)[1]] - p.coords[(*f1)[0]],
                               p.coords[(*f1)[2]] - p.coords[(*f1)[0]]));
    Vec3 n2 = normalized(cross(p.coords[(*f2)[1]] - p.coords[(*f2)[0]],
                               p.coords[(*f2)[2]] - p.coords[(*f2)[0]]));
    Vec3 e = normalized(p.coords[j] - p.coords[i]);
    double phi = std::atan2(dot(cross(n1, n2), e), dot(n1, n2));
    if (std::abs(std::abs(phi) - kPi) < 1e-15) phi = kPi;
    out.push_back(phi);
  }
  return out;
}

// M = 1/2 sum_e l(e) (pi - theta(e)) with theta the interior sector; the 1/2
// factor is this artifact's fixed convention. Since theta = pi - bend, this
// is 1/2 sum l(e) * bend(e).
inline double integral_mean_curvature(const EmbeddedPolyhedron& p) {
  auto rep = validate_closed_sphere(p.surface);
  if (!rep.closed || !rep.orientable) throw Error("integral_mean_curvature: not closed+oriented");
  auto edges = p.surface.edges();
  auto bends = edge_bend_angles(p, edges);
  double m = 0;
  for (size_t k = 0; k < edges.size(); ++k)
    m += dist(p.coords[edges[k].first], p.coords[edges[k].second]) * bends[k] / 2.0;
  return m;
}

// ---------------------------------------------------------------------------

// A sampled one-parameter family of polyhedra with constant edge lengths.
struct FlexPath {
  std::string driving;                    // e.g. "r" or "eta"
  std::vector<double> params;
  std::vector<EmbeddedPolyhedron> configs;

  double max_edge_drift() const {
    if (configs.empty()) return 0;
    auto base = configs.front().edge_lengths();
    double d = 0;
    for (const auto& c : configs) {
      auto l = c.edge_lengths();
      for (size_t k = 0; k < l.size(); ++k) d = std::max(d, std::abs(l[k] - base[k]));
    }
    return d;
  }
};

}  // namespace rigidlab
