#pragma once

// The planar symmetric four-bar linkage and the type-2 Bricard octahedron
// B(r) built over it: the quadrilateral abcd concyclic on (O, r) with d the
// mirror of b across the perpendicular bisector of ac, apexes p and q on the
// normal through O at heights sqrt(s^2 - r^2) and sqrt(t^2 - r^2).

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "rigidlab/geometry.hpp"
#include "rigidlab/surface.hpp"

namespace rigidlab {

struct BricardConfig {
  double l_ab = 2.0;  // bar ab
  double l_bc = 3.0;  // bar bc
  double s = 2.0;     // p-side edge length
  double t = 3.0;     // q-side edge length
  double r0 = 2.0;    // reference radius

  void validate() const {
    if (!(t > s && s >= r0)) throw Error("BricardConfig: need t > s >= r0");
    if (!(2 * r0 >= l_ab && 2 * r0 >= l_bc))
      throw Error("BricardConfig: chords must fit the reference circle (2 r0 >= bars)");
    if (l_ab == l_bc)
      throw Error("BricardConfig: l_ab == l_bc rejected (rhombus branch degenerates)");
    if (l_ab <= 0 || l_bc <= 0) throw Error("BricardConfig: bar lengths must be positive");
  }
};

// Default fixture; all derived regression constants in the tests are
// computed from it.
inline BricardConfig default_config() { return BricardConfig{2.0, 3.0, 2.0, 3.0, 2.0}; }

struct PlanarQuad {
  Vec3 a, b, c, d;
  Vec3 center;     // O, at the origin by construction
  double radius = 0;
};

namespace bricard_detail {
// condition (a): a,b,c,d pairwise distinct and no three collinear. Concyclic
// points can only fail by coincidence, so distinctness is the live check;
// the collinearity test still runs for completeness.
inline void check_condition_a(const PlanarQuad& q) {
  const std::array<Vec3, 4> v{q.a, q.b, q.c, q.d};
  const char* names = "abcd";
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (dist(v[i], v[j]) < 1e-9 * q.radius)
        throw Error(std::string("condition (a) violated: vertices ") + names[i] + " and " +
                    names[j] + " coincide");
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      for (int k = j + 1; k < 4; ++k)
        if (norm(cross(v[j] - v[i], v[k] - v[i])) < 1e-12 * q.radius * q.radius)
          throw Error("condition (a) violated: three vertices collinear");
}

// condition (b): neither chord ab nor cd contains O; equivalently the lines
// ad and bc are not parallel.
inline void check_condition_b(const PlanarQuad& q) {
  auto chord_through_center = [&](const Vec3& u, const Vec3& v) {
    Vec3 dir = v - u;
    double tline = dot(q.center - u, dir) / dot(dir, dir);
    if (tline < 0 || tline > 1) return false;
    Vec3 foot = u + dir * tline;
    return dist(foot, q.center) < 1e-9 * q.radius;
  };
  if (chord_through_center(q.a, q.b) || chord_through_center(q.c, q.d))
    throw Error("condition (b) violated: chord ab or cd passes through the center");
  Vec3 ad = q.d - q.a, bc = q.c - q.b;
  if (norm(cross(ad, bc)) < 1e-9 * norm(ad) * norm(bc))
    throw Error("condition (b) violated: ad parallel to bc");
}
}  // namespace bricard_detail

// Places a, b, c on the circle of radius r about the origin (b on the arc
// strictly between a and c, fixed side) and reflects b across the
// perpendicular bisector of ac to get d.
inline PlanarQuad build_planar_quad(const BricardConfig& cfg, double r) {
  if (r <= 0) throw Error("build_planar_quad: radius must be positive");
  if (2 * r < cfg.l_ab || 2 * r < cfg.l_bc)
    throw Error("build_planar_quad: chord too long for the circle at r=" + std::to_string(r));
  double d_ab = 2 * std::asin(cfg.l_ab / (2 * r));
  double d_bc = 2 * std::asin(cfg.l_bc / (2 * r));
  double tb = kPi / 2;
  double ta = tb + d_ab;
  double tc = tb - d_bc;
  double td = ta + tc - tb;  // reflection of b across the bisector of ac
  auto on_circle = [&](double th) { return Vec3{r * std::cos(th), r * std::sin(th), 0.0}; };
  PlanarQuad q;
  q.a = on_circle(ta);
  q.b = on_circle(tb);
  q.c = on_circle(tc);
  q.d = on_circle(td);
  q.center = Vec3{0, 0, 0};
  q.radius = r;
  bricard_detail::check_condition_a(q);
  bricard_detail::check_condition_b(q);
  return q;
}

inline SimplicialSurface octahedron_pattern() {
  SimplicialSurface s = build_surface(
      {
          {"b", "a", "p"}, {"c", "b", "p"}, {"d", "c", "p"}, {"a", "d", "p"},
          {"a", "b", "q"}, {"b", "c", "q"}, {"c", "d", "q"}, {"d", "a", "q"},
      },
      {"a", "b", "c", "d", "p", "q"});
  s.orient();
  return s;
}

inline EmbeddedPolyhedron build_bricard(const BricardConfig& cfg, double r) {
  cfg.validate();
  if (r > cfg.s)
    throw Error("build_bricard: r > s, p-apex height is imaginary (r=" + std::to_string(r) + ")");
  PlanarQuad q = build_planar_quad(cfg, r);
  double hp = std::sqrt(std::max(cfg.s * cfg.s - r * r, 0.0));
  double hq = std::sqrt(cfg.t * cfg.t - r * r);
  EmbeddedPolyhedron B;
  B.surface = octahedron_pattern();
  B.coords.resize(6);
  B.at("a") = q.a;
  B.at("b") = q.b;
  B.at("c") = q.c;
  B.at("d") = q.d;
  B.at("p") = Vec3{0, 0, +hp};
  B.at("q") = Vec3{0, 0, -hq};
  B.check_nondegenerate();
  return B;
}

// alpha: dihedral at edge aq between faces abq and adq; beta: at edge dq
// between adq and dcq. Both the smallest (planes-between) measure.
inline double alpha(const BricardConfig& cfg, double r) {
  EmbeddedPolyhedron B = build_bricard(cfg, r);
  return dihedral(B.at("a"), B.at("q"), B.at("b"), B.at("d")).angle;
}

// Same angle from the q-side pyramid alone; the p-apex plays no role, so
// this extends past r = s (up to r < t), where the apex-lengthened variants
// keep flexing.
inline double alpha_q_side(const BricardConfig& cfg, double r) {
  if (!(r < cfg.t)) throw Error("alpha_q_side: r must stay below t");
  PlanarQuad q = build_planar_quad(cfg, r);
  Vec3 apex_q{0, 0, -std::sqrt(cfg.t * cfg.t - r * r)};
  return dihedral(q.a, apex_q, q.b, q.d).angle;
}

inline double beta(const BricardConfig& cfg, double r) {
  EmbeddedPolyhedron B = build_bricard(cfg, r);
  return dihedral(B.at("d"), B.at("q"), B.at("a"), B.at("c")).angle;
}

// Checks the configuration's labeling: alpha must attain its minimum at the
// endpoint r = s of the flex interval (the construction below is built
// around a minimal angle).
inline void validate_alpha_minimal_at_s(const BricardConfig& cfg, double probe_step = 1e-3) {
  double a_s = alpha(cfg, cfg.s);
  double a_in = alpha(cfg, cfg.s - probe_step * cfg.s);
  if (!(a_in > a_s))
    throw Error("configuration has the aq-angle maximal at r=s; swap the bar roles");
}

struct FlexInterval {
  double s = 0;
  double epsilon = 0;
  std::vector<double> samples;  // ascending, last == s
};

// Largest epsilon (to grid resolution) with every sampled r in (s-eps, s]
// passing construction, conditions (a)/(b) and nondegeneracy.
inline FlexInterval flex_interval(const BricardConfig& cfg, double grid_step = -1) {
  cfg.validate();
  if (grid_step <= 0) grid_step = 1e-3 * cfg.s;
  // construction at r = s must work, else the configuration is unusable
  build_bricard(cfg, cfg.s);
  int k = 1;
  while (true) {
    double r = cfg.s - k * grid_step;
    if (r <= 0) break;
    try {
      build_bricard(cfg, r);
    } catch (const Error&) {
      break;
    }
    ++k;
  }
  FlexInterval out;
  out.s = cfg.s;
  out.epsilon = (k - 1) * grid_step;
  if (out.epsilon <= 0) throw Error("flex_interval: no flex room below r = s");
  for (int j = k - 1; j >= 0; --j) out.samples.push_back(cfg.s - j * grid_step);
  return out;
}

// The analytic flex family of B over a uniform sample of (s - eps, s].
inline FlexPath flex_path_B(const BricardConfig& cfg, const FlexInterval& iv,
                            int sample_count = 128) {
  if (iv.epsilon <= 0) throw Error("flex_path_B: empty interval");
  FlexPath path;
  path.driving = "r";
  for (int i = 0; i < sample_count; ++i) {
    double r = (iv.s - iv.epsilon) + iv.epsilon * (i + 1) / static_cast<double>(sample_count);
    path.params.push_back(r);
    path.configs.push_back(build_bricard(cfg, r));
  }
  return path;
}

}  // namespace rigidlab
