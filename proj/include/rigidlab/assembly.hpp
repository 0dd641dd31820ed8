#pragma once

// Assembly of the compound polyhedra: C(r) (the octahedron with two rigid
// tetrahedral blisters near the edge aq), B'(s) (the shrunken copy rotated by
// pi about the line through mn), the glued polyhedron P, and the off-plane
// apex variants P_n. Also the sector decomposition around the midpoint w.

#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "rigidlab/bricard.hpp"
#include "rigidlab/geometry.hpp"
#include "rigidlab/surface.hpp"

namespace rigidlab {

struct AuxPlacement {
  double t_m = 0.40;  // m at a + t_m (q - a)
  double t_n = 0.60;
  std::array<double, 3> bary_y{0.20, 0.20, 0.60};  // weights on a, b, q
  std::array<double, 3> bary_v{0.20, 0.20, 0.60};  // weights on a, d, q
  double foot_x = 0.50, dist_x = 0.50;  // foot parameter on aq, distance off-line (side opposite d)
  double foot_u = 0.50, dist_u = 0.50;  // side opposite b
  double k = 0.0625;                    // homothety ratio, frozen by the halving rule

  void validate() const {
    if (!(0 < t_m && t_m < t_n && t_n < 1)) throw Error("AuxPlacement: need 0 < t_m < t_n < 1");
    for (double w : bary_y)
      if (w <= 0) throw Error("AuxPlacement: y must be strictly interior to abq");
    for (double w : bary_v)
      if (w <= 0) throw Error("AuxPlacement: v must be strictly interior to adq");
    if (std::abs(bary_y[0] + bary_y[1] + bary_y[2] - 1.0) > 1e-12 ||
        std::abs(bary_v[0] + bary_v[1] + bary_v[2] - 1.0) > 1e-12)
      throw Error("AuxPlacement: barycentric weights must sum to 1");
    if (dist_x <= 0 || dist_u <= 0) throw Error("AuxPlacement: x, u must be strictly off the line aq");
    if (!(0 < k && k < 1)) throw Error("AuxPlacement: k must lie in (0,1)");
  }
};

struct AuxPoints {
  Vec3 m, n, y, v, x, u, w;
};

// Unit vector from the line aq toward (the projection of) z.
inline Vec3 away_from_line(const Vec3& a, const Vec3& q, const Vec3& z) {
  Vec3 axis = normalized(q - a);
  Vec3 v = (z - a) - axis * dot(z - a, axis);
  return normalized(v);
}

// Places the six auxiliary points on a built octahedron and verifies their
// positional invariants numerically (interiority, half-plane sides). The
// homothety containments involving k are verified by the B' constructor.
inline AuxPoints place_aux(const EmbeddedPolyhedron& B, const AuxPlacement& placement) {
  placement.validate();
  const Vec3 a = B.at("a"), b = B.at("b"), d = B.at("d"), q = B.at("q");
  AuxPoints pts;
  pts.m = a + (q - a) * placement.t_m;
  pts.n = a + (q - a) * placement.t_n;
  pts.w = (pts.m + pts.n) * 0.5;
  pts.y = a * placement.bary_y[0] + b * placement.bary_y[1] + q * placement.bary_y[2];
  pts.v = a * placement.bary_v[0] + d * placement.bary_v[1] + q * placement.bary_v[2];
  pts.x = a + (q - a) * placement.foot_x - away_from_line(a, q, d) * placement.dist_x;
  pts.u = a + (q - a) * placement.foot_u - away_from_line(a, q, b) * placement.dist_u;

  if (!point_in_triangle(pts.y, a, b, q)) throw Error("place_aux: y not strictly inside face abq");
  if (!point_in_triangle(pts.v, a, d, q)) throw Error("place_aux: v not strictly inside face adq");
  if (half_plane_side(a, q, d, pts.x) != HalfPlaneSide::Opposite)
    throw Error("place_aux: x not on the open half-plane opposite d");
  if (half_plane_side(a, q, b, pts.u) != HalfPlaneSide::Opposite)
    throw Error("place_aux: u not on the open half-plane opposite b");
  return pts;
}

inline SimplicialSurface c_pattern() {
  SimplicialSurface s;
  for (const char* l : {"a", "b", "c", "d", "p", "q", "m", "n", "y", "x", "u", "v"})
    s.add_vertex(l);
  // untouched faces of B
  s.add_face("b", "a", "p");
  s.add_face("c", "b", "p");
  s.add_face("d", "c", "p");
  s.add_face("a", "d", "p");
  s.add_face("b", "c", "q");
  s.add_face("c", "d", "q");
  // hexagon a-b-q-n-y-m fanned from y, plus the tent over the hole mny
  s.add_face("y", "a", "b");
  s.add_face("y", "b", "q");
  s.add_face("y", "q", "n");
  s.add_face("y", "m", "a");
  s.add_face("m", "n", "x");
  s.add_face("m", "x", "y");
  s.add_face("n", "x", "y");
  // hexagon a-d-q-n-v-m fanned from v, plus the tent over the hole mnv
  s.add_face("v", "a", "d");
  s.add_face("v", "d", "q");
  s.add_face("v", "q", "n");
  s.add_face("v", "m", "a");
  s.add_face("m", "n", "u");
  s.add_face("m", "u", "v");
  s.add_face("n", "u", "v");
  s.orient();
  return s;
}

inline void orient_outward(EmbeddedPolyhedron& p) {
  p.surface.orient();
  double v = 0;
  for (const Face& f : p.surface.faces())
    v += dot(p.coords[f[0]], cross(p.coords[f[1]], p.coords[f[2]])) / 6.0;
  double tiny = 1e-12 * std::pow(p.diameter(), 3.0);
  if (v < -tiny) {
    SimplicialSurface flipped;
    for (const auto& l : p.surface.labels()) flipped.add_vertex(l);
    for (const Face& f : p.surface.faces())
      flipped.add_face(p.surface.labels()[f[0]], p.surface.labels()[f[2]],
                       p.surface.labels()[f[1]]);
    p.surface = flipped;
  }
}

// C(s): removes mny from face abq and mnv from adq, glues the pyramid tents
// (apex x over the first hole, apex u over the second), and fans the two
// hexagons from y and v.
inline EmbeddedPolyhedron build_C(const EmbeddedPolyhedron& B, const AuxPoints& aux) {
  EmbeddedPolyhedron C;
  C.surface = c_pattern();
  C.coords.resize(12);
  for (const char* l : {"a", "b", "c", "d", "p", "q"}) C.at(l) = B.at(l);
  C.at("m") = aux.m;
  C.at("n") = aux.n;
  C.at("y") = aux.y;
  C.at("x") = aux.x;
  C.at("u") = aux.u;
  C.at("v") = aux.v;
  orient_outward(C);
  C.check_nondegenerate();
  auto rep = validate_closed_sphere(C.surface);
  if (!rep.pass()) throw Error("build_C: surface validation failed");
  return C;
}

// The two blister tetrahedra stored in local frames of their host faces
// (origin m, first axis along mn, second the host-face normal). Tetrahedron
// mnxy rides with face abq, mnuv with adq.
struct BlisterFrame {
  double t_m = 0, t_n = 0;
  Vec3 local_x, local_y;  // in the abq frame
  Vec3 local_u, local_v;  // in the adq frame
  std::array<double, 6> shape_mnxy{};  // pairwise distances mn, mx, my, nx, ny, xy
  std::array<double, 6> shape_mnuv{};  // pairwise distances mn, mu, mv, nu, nv, uv
};

inline BlisterFrame make_blister_frame(const EmbeddedPolyhedron& C, const AuxPlacement& placement) {
  BlisterFrame bf;
  bf.t_m = placement.t_m;
  bf.t_n = placement.t_n;
  Frame abq = frame_from(C.at("m"), C.at("n"), C.at("b"));
  Frame adq = frame_from(C.at("m"), C.at("n"), C.at("d"));
  bf.local_x = abq.to_local(C.at("x"));
  bf.local_y = abq.to_local(C.at("y"));
  bf.local_u = adq.to_local(C.at("u"));
  bf.local_v = adq.to_local(C.at("v"));
  auto shape = [&](const char* p3, const char* p4) {
    return std::array<double, 6>{dist(C.at("m"), C.at("n")), dist(C.at("m"), C.at(p3)),
                                 dist(C.at("m"), C.at(p4)), dist(C.at("n"), C.at(p3)),
                                 dist(C.at("n"), C.at(p4)), dist(C.at(p3), C.at(p4))};
  };
  bf.shape_mnxy = shape("x", "y");
  bf.shape_mnuv = shape("u", "v");
  return bf;
}

// C(r): the octahedral vertices move as in B(r); m, n ride the segment aq at
// fixed parameters; the blister tetrahedra replay their host-face frames.
inline EmbeddedPolyhedron transport_C(const BricardConfig& cfg, const BlisterFrame& bf, double r) {
  EmbeddedPolyhedron B = build_bricard(cfg, r);
  EmbeddedPolyhedron C;
  C.surface = c_pattern();
  C.coords.resize(12);
  for (const char* l : {"a", "b", "c", "d", "p", "q"}) C.at(l) = B.at(l);
  Vec3 a = B.at("a"), q = B.at("q");
  C.at("m") = a + (q - a) * bf.t_m;
  C.at("n") = a + (q - a) * bf.t_n;
  Frame abq = frame_from(C.at("m"), C.at("n"), B.at("b"));
  Frame adq = frame_from(C.at("m"), C.at("n"), B.at("d"));
  C.at("x") = abq.to_world(bf.local_x);
  C.at("y") = abq.to_world(bf.local_y);
  C.at("u") = adq.to_world(bf.local_u);
  C.at("v") = adq.to_world(bf.local_v);
  orient_outward(C);
  C.check_nondegenerate();
  return C;
}

inline FlexPath flex_path_C(const BricardConfig& cfg, const BlisterFrame& bf,
                            const FlexInterval& iv, int sample_count = 128) {
  FlexPath path;
  path.driving = "r";
  for (int i = 0; i < sample_count; ++i) {
    double r = (iv.s - iv.epsilon) + iv.epsilon * (i + 1) / static_cast<double>(sample_count);
    path.params.push_back(r);
    path.configs.push_back(transport_C(cfg, bf, r));
  }
  return path;
}

// Dihedral of the (virtual) tetrahedron mnux at the edge mn, computed from a
// C built fresh at radius r. By the vertical-angle identity this equals
// alpha(r) for every r at which the placement is valid.
inline double gamma_at_radius(const BricardConfig& cfg, const AuxPlacement& placement, double r) {
  EmbeddedPolyhedron B = build_bricard(cfg, r);
  AuxPoints aux = place_aux(B, placement);
  return dihedral(aux.m, aux.n, aux.u, aux.x).angle;
}

// The same tetrahedron angle along the rigid transport; it equals
// 2 alpha(s) - alpha(r), not alpha(r): the transported gap narrows exactly as
// much as alpha grows, which is what pins P.
inline double transported_gap(const BricardConfig& cfg, const BlisterFrame& bf, double r) {
  EmbeddedPolyhedron C = transport_C(cfg, bf, r);
  return dihedral(C.at("m"), C.at("n"), C.at("u"), C.at("x")).angle;
}

// ---------------------------------------------------------------------------

// z' = T(h_k(z)) for every vertex z of B(s): homothety about w with ratio k,
// then rotation by pi about the line through m and n.
inline Vec3 map_to_prime(const Vec3& z, const Vec3& w, double k, const Vec3& axis_origin,
                         const Vec3& axis_dir) {
  Vec3 hz = w + (z - w) * k;
  return rotate_about_line(hz, axis_origin, axis_dir, kPi);
}

struct BPrimeCheck {
  double param_a_prime = 0, param_q_prime = 0;  // positions on aq, in (t_m, t_n)
};

// B'(s) with vertex labels a'..q'. Verifies h_k(aq) inside mn and the two
// containments b' in mnu, d' in mnx; failures say how to fix them.
inline EmbeddedPolyhedron build_B_prime(const EmbeddedPolyhedron& B, const AuxPoints& aux,
                                        double k, BPrimeCheck* check = nullptr) {
  const Vec3 a = B.at("a"), q = B.at("q");
  Vec3 axis = normalized(q - a);
  EmbeddedPolyhedron bp;
  bp.surface = build_surface(
      {
          {"b'", "a'", "p'"}, {"c'", "b'", "p'"}, {"d'", "c'", "p'"}, {"a'", "d'", "p'"},
          {"a'", "b'", "q'"}, {"b'", "c'", "q'"}, {"c'", "d'", "q'"}, {"d'", "a'", "q'"},
      },
      {"a'", "b'", "c'", "d'", "p'", "q'"});
  bp.surface.orient();
  bp.coords.resize(6);
  const char* plain[6] = {"a", "b", "c", "d", "p", "q"};
  const char* primed[6] = {"a'", "b'", "c'", "d'", "p'", "q'"};
  for (int i = 0; i < 6; ++i)
    bp.at(primed[i]) = map_to_prime(B.at(plain[i]), aux.w, k, a, axis);

  double len = dist(a, q);
  double pa = dot(bp.at("a'") - a, axis) / len;
  double pq = dot(bp.at("q'") - a, axis) / len;
  double tm = dot(aux.m - a, axis) / len;
  double tn = dot(aux.n - a, axis) / len;
  if (!(tm < pa && pa < pq && pq < tn))
    throw Error("build_B_prime: h_k(aq) not inside segment mn; diminish k");
  if (!point_in_triangle(bp.at("b'"), aux.m, aux.n, aux.u))
    throw Error("build_B_prime: b' not inside face mnu; diminish k");
  if (!point_in_triangle(bp.at("d'"), aux.m, aux.n, aux.x))
    throw Error("build_B_prime: d' not inside face mnx; diminish k");
  if (check) {
    check->param_a_prime = pa;
    check->param_q_prime = pq;
  }
  bp.check_nondegenerate();
  return bp;
}

// Halving rule for the default scale factor: halve from 0.5 until the three
// containments pass, then halve once more for margin.
inline double default_k(const EmbeddedPolyhedron& B, const AuxPoints& aux) {
  double k = 0.5;
  for (int i = 0; i < 40; ++i) {
    try {
      build_B_prime(B, aux, k);
      return k / 2.0;
    } catch (const Error&) {
      k /= 2.0;
    }
  }
  throw Error("default_k: no admissible scale factor found");
}

// ---------------------------------------------------------------------------

struct SectorAngles {
  double i = 0, ii = 0, iii = 0, iv = 0;
  double sum() const { return i + ii + iii + iv; }
};

// The four dihedral sectors around the line mn at w: (i) tetrahedron mnxy,
// (ii) B' at a'q', (iii) tetrahedron mnuv, (iv) the octahedron at aq.
inline SectorAngles sectors(const EmbeddedPolyhedron& P) {
  SectorAngles s;
  s.i = dihedral(P.at("m"), P.at("n"), P.at("y"), P.at("x")).angle;
  s.ii = dihedral(P.at("a'"), P.at("q'"), P.at("b'"), P.at("d'")).angle;
  s.iii = dihedral(P.at("m"), P.at("n"), P.at("v"), P.at("u")).angle;
  s.iv = dihedral(P.at("a"), P.at("q"), P.at("b"), P.at("d")).angle;
  return s;
}

// Verifies that the four sectors tile the full circle around the axis at w:
// the rays of b, d, u, x partition 2 pi with consecutive gaps matching the
// four defining dihedrals. Throws on overlap (wrong gluing side).
inline void check_sector_partition(const EmbeddedPolyhedron& P, double tol = 1e-9) {
  const Vec3 a = P.at("a"), q = P.at("q");
  Vec3 axis = normalized(q - a);
  Vec3 r1 = normalized((P.at("b") - a) - axis * dot(P.at("b") - a, axis));
  Vec3 r2 = cross(axis, r1);
  auto ray = [&](const char* l) { return ray_angle(a, q, P.at(l), r1, r2); };

  // coincidence of companion rays
  auto circ_dist = [](double x, double y) {
    double d = std::fmod(std::abs(x - y), 2 * kPi);
    return std::min(d, 2 * kPi - d);
  };
  if (circ_dist(ray("y"), ray("b")) > tol) throw Error("sector check: y off the b ray");
  if (circ_dist(ray("v"), ray("d")) > tol) throw Error("sector check: v off the d ray");
  if (circ_dist(ray("b'"), ray("u")) > tol) throw Error("sector check: b' off the u ray");
  if (circ_dist(ray("d'"), ray("x")) > tol) throw Error("sector check: d' off the x ray");

  SectorAngles s = sectors(P);
  if (std::abs(s.sum() - 2 * kPi) > tol)
    throw Error("sector check: sectors do not sum to 2 pi (overlap or gap)");

  // consecutive gaps of the sorted rays must reproduce the four values
  std::array<std::pair<double, double>, 4> named{{
      {ray("b"), 0.0}, {ray("d"), 0.0}, {ray("u"), 0.0}, {ray("x"), 0.0}}};
  std::array<double, 4> th{ray("b"), ray("d"), ray("u"), ray("x")};
  std::sort(th.begin(), th.end());
  std::array<double, 4> gaps;
  for (int i2 = 0; i2 < 4; ++i2) {
    double nxt = (i2 == 3) ? th[0] + 2 * kPi : th[i2 + 1];
    gaps[i2] = nxt - th[i2];
  }
  // every named sector value must appear among the gaps
  for (double val : {s.i, s.ii, s.iii, s.iv}) {
    bool found = false;
    for (double g : gaps)
      if (std::abs(g - val) < 10 * tol) found = true;
    if (!found) throw Error("sector check: a sector value does not match any ray gap");
  }
  (void)named;
}

// ---------------------------------------------------------------------------

struct Construction {
  BricardConfig cfg;
  AuxPlacement placement;
  EmbeddedPolyhedron B;        // B(s)
  AuxPoints aux;
  EmbeddedPolyhedron C;        // C(s)
  BlisterFrame blisters;
  EmbeddedPolyhedron B_prime;  // B'(s)
  EmbeddedPolyhedron P;
  FlexInterval interval;
};

inline SimplicialSurface p_pattern_from(const SimplicialSurface& c_surface) {
  SimplicialSurface s;
  for (const auto& l : c_surface.labels()) s.add_vertex(l);
  for (const char* l : {"a'", "b'", "c'", "d'", "p'", "q'"}) s.add_vertex(l);
  for (const Face& f : c_surface.faces()) {
    std::array<std::string, 3> lab{c_surface.labels()[f[0]], c_surface.labels()[f[1]],
                                   c_surface.labels()[f[2]]};
    std::array<std::string, 3> key = lab;
    std::sort(key.begin(), key.end());
    if (key == std::array<std::string, 3>{"m", "n", "u"} ||
        key == std::array<std::string, 3>{"m", "n", "x"})
      continue;  // retriangulated below
    s.add_face(lab[0], lab[1], lab[2]);
  }
  // fans over the cut hexagons m-a'-b'-q'-n-u and m-a'-d'-q'-n-x
  s.add_face("u", "m", "a'");
  s.add_face("u", "a'", "b'");
  s.add_face("u", "b'", "q'");
  s.add_face("u", "q'", "n");
  s.add_face("x", "m", "a'");
  s.add_face("x", "a'", "d'");
  s.add_face("x", "d'", "q'");
  s.add_face("x", "q'", "n");
  return s;
}

// P: remove the triangles a'b'q' and a'd'q' from the union of C(s) and
// B'(s). The cut faces mnu, mnx are fanned from u and x around the removed
// triangles; the six retained faces of B' close the hole.
inline EmbeddedPolyhedron build_P(const EmbeddedPolyhedron& C, const EmbeddedPolyhedron& B_prime) {
  // open C side: fans in place of mnu / mnx
  SimplicialSurface open_c = p_pattern_from(C.surface);
  // open B' side: the octahedron minus the two glued faces
  SimplicialSurface open_bp;
  for (const auto& l : B_prime.surface.labels()) open_bp.add_vertex(l);
  for (const Face& f : B_prime.surface.faces()) {
    std::array<std::string, 3> lab{B_prime.surface.labels()[f[0]], B_prime.surface.labels()[f[1]],
                                   B_prime.surface.labels()[f[2]]};
    std::array<std::string, 3> key = lab;
    std::sort(key.begin(), key.end());
    if (key == std::array<std::string, 3>{"a'", "b'", "q'"} ||
        key == std::array<std::string, 3>{"a'", "d'", "q'"})
      continue;
    open_bp.add_face(lab[0], lab[1], lab[2]);
  }
  SimplicialSurface glued = glue_complexes(open_c, open_bp, {});

  EmbeddedPolyhedron P;
  P.surface = glued;
  P.coords.resize(P.surface.vertex_count());
  for (const auto& l : C.surface.labels()) P.at(l) = C.at(l);
  for (const auto& l : B_prime.surface.labels()) P.at(l) = B_prime.at(l);
  orient_outward(P);
  P.check_nondegenerate();
  auto rep = validate_closed_sphere(P.surface);
  if (!rep.pass()) throw Error("build_P: surface validation failed");
  if (P.surface.has_edge("a'", "q'")) throw Error("build_P: a'q' must not be an edge of P");
  check_sector_partition(P);
  return P;
}

inline Construction build_construction(const BricardConfig& cfg = default_config(),
                                       const AuxPlacement& placement = AuxPlacement{}) {
  cfg.validate();
  validate_alpha_minimal_at_s(cfg);
  Construction out;
  out.cfg = cfg;
  out.placement = placement;
  out.B = build_bricard(cfg, cfg.s);
  out.aux = place_aux(out.B, placement);
  out.C = build_C(out.B, out.aux);
  out.blisters = make_blister_frame(out.C, placement);
  out.B_prime = build_B_prime(out.B, out.aux, placement.k);
  out.P = build_P(out.C, out.B_prime);
  out.interval = flex_interval(cfg);
  return out;
}

// P_n: identical to P except the apex p is lifted so that the four side
// edges get length s + 1/n; the vertex is renamed p_n.
inline EmbeddedPolyhedron build_Pn(const EmbeddedPolyhedron& P, const BricardConfig& cfg, int n) {
  if (n < 1) throw Error("build_Pn: n must be >= 1");
  EmbeddedPolyhedron Pn;
  for (const auto& l : P.surface.labels())
    Pn.surface.add_vertex(l == "p" ? "p_n" : l);
  for (const Face& f : P.surface.faces()) {
    std::array<std::string, 3> lab;
    for (int k = 0; k < 3; ++k) {
      std::string l = P.surface.labels()[f[k]];
      lab[k] = (l == "p") ? "p_n" : l;
    }
    Pn.surface.add_face(lab[0], lab[1], lab[2]);
  }
  Pn.coords = P.coords;
  double apex = cfg.s + 1.0 / n;
  double height = std::sqrt(apex * apex - cfg.s * cfg.s);
  Pn.at("p_n") = Vec3{0, 0, height};
  Pn.check_nondegenerate();
  return Pn;
}

// Ablation fixture for the rigidity certificate: the blister tetrahedron
// mnxy is replaced by a hinged quad (faces mxy, nxy swapped for mny, mnx),
// removing the xy edge that pins x to the abq side. The result is a valid
// closed sphere with a genuine one-parameter flex.
inline EmbeddedPolyhedron build_P_ablated(const EmbeddedPolyhedron& P) {
  EmbeddedPolyhedron A;
  for (const auto& l : P.surface.labels()) A.surface.add_vertex(l);
  for (const Face& f : P.surface.faces()) {
    std::array<std::string, 3> lab{P.surface.labels()[f[0]], P.surface.labels()[f[1]],
                                   P.surface.labels()[f[2]]};
    std::array<std::string, 3> key = lab;
    std::sort(key.begin(), key.end());
    if (key == std::array<std::string, 3>{"m", "x", "y"} ||
        key == std::array<std::string, 3>{"n", "x", "y"})
      continue;
    A.surface.add_face(lab[0], lab[1], lab[2]);
  }
  A.surface.add_face("m", "n", "y");
  A.surface.add_face("m", "n", "x");
  A.surface.orient();
  A.coords = P.coords;
  auto rep = validate_closed_sphere(A.surface);
  if (!rep.pass()) throw Error("build_P_ablated: surface validation failed");
  return A;
}

}  // namespace rigidlab
