#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "rigidlab/bricard.hpp"
#include "rigidlab/rigidity.hpp"

using namespace rigidlab;

namespace {

// Independent angle oracle: embed the tetrahedron a, q, b, d from its six
// pairwise distances (a at the origin, q on an axis) and read the dihedral
// at aq. The chord |bd| comes from central angles on the circle, a different
// route than the spatial construction under test.
double alpha_from_distances(const BricardConfig& cfg, double r) {
  double d_ab = 2 * std::asin(cfg.l_ab / (2 * r));
  double d_bc = 2 * std::asin(cfg.l_bc / (2 * r));
  double l_bd = 2 * r * std::sin(std::abs(d_ab - d_bc) / 2);
  double t = cfg.t;
  double ab = cfg.l_ab, ad = cfg.l_bc;  // |ad| equals the bc bar by mirror symmetry
  // embed: a = 0, q = (t,0,0)
  double xb = (ab * ab + t * t - t * t) / (2 * t);
  double yb = std::sqrt(ab * ab - xb * xb);
  double xd = (ad * ad + t * t - t * t) / (2 * t);
  double rho2 = ad * ad - xd * xd;
  double yd = (yb * yb + rho2 - (l_bd * l_bd - (xb - xd) * (xb - xd))) / (2 * yb);
  double zd2 = rho2 - yd * yd;
  double zd = std::sqrt(std::max(zd2, 0.0));
  return std::atan2(zd, yd);
}

constexpr double kAlphaS = 0.295296343103;  // regression constant for CFG0
constexpr double kBetaS = 2.033540749118;

}  // namespace

TEST_CASE("planar quad at the reference radius") {
  BricardConfig cfg = default_config();
  PlanarQuad q = build_planar_quad(cfg, 2.0);
  SECTION("mirror symmetry forces the cross bar lengths") {
    CHECK(dist(q.a, q.d) == Catch::Approx(cfg.l_bc).margin(1e-12));
    CHECK(dist(q.c, q.d) == Catch::Approx(cfg.l_ab).margin(1e-12));
  }
  SECTION("all four vertices concyclic") {
    for (const Vec3* v : {&q.a, &q.b, &q.c, &q.d})
      CHECK(dist(*v, q.center) == Catch::Approx(q.radius).margin(1e-13));
  }
  SECTION("midpoint of bd lies on the perpendicular bisector of ac") {
    Vec3 mid_bd = (q.b + q.d) * 0.5;
    Vec3 mid_ac = (q.a + q.c) * 0.5;
    CHECK(std::abs(dot(mid_bd - mid_ac, q.c - q.a)) < 1e-12);
  }
}

TEST_CASE("planar quad error paths") {
  SECTION("chord too long") {
    CHECK_THROWS_AS(build_planar_quad(default_config(), 1.2), Error);
  }
  SECTION("ab a diameter violates condition (b)") {
    BricardConfig cfg{3.0, 2.0, 2.0, 3.0, 2.0};  // the long bar is now ab
    CHECK_THROWS_WITH(build_planar_quad(cfg, 1.5),
                      Catch::Matchers::ContainsSubstring("condition (b)"));
  }
  SECTION("rhombus bars rejected at validation") {
    BricardConfig cfg{2.0, 2.0, 2.0, 3.0, 2.0};
    CHECK_THROWS_AS(cfg.validate(), Error);
  }
}

TEST_CASE("octahedron construction") {
  BricardConfig cfg = default_config();
  SECTION("p lies in the base plane at r = s") {
    EmbeddedPolyhedron B = build_bricard(cfg, cfg.s);
    CHECK(std::abs(B.at("p").z) < 1e-14);
  }
  SECTION("side edges have the prescribed lengths") {
    EmbeddedPolyhedron B = build_bricard(cfg, 1.99);
    for (const char* z : {"a", "b", "c", "d"}) {
      CHECK(dist(B.at(z), B.at("p")) == Catch::Approx(cfg.s).margin(1e-12));
      CHECK(dist(B.at(z), B.at("q")) == Catch::Approx(cfg.t).margin(1e-12));
    }
  }
  SECTION("r beyond s is rejected") {
    CHECK_THROWS_AS(build_bricard(cfg, 2.5), Error);
  }
  SECTION("apexes sit in opposite half-spaces") {
    EmbeddedPolyhedron B = build_bricard(cfg, 1.9);
    CHECK(B.at("p").z > 0);
    CHECK(B.at("q").z < 0);
  }
}

TEST_CASE("flex interval") {
  BricardConfig cfg = default_config();
  FlexInterval iv = flex_interval(cfg);
  SECTION("epsilon exists and is substantial for the default fixture") {
    CHECK(iv.epsilon >= 0.05);
    CHECK(iv.epsilon == Catch::Approx(0.5).margin(3e-3));  // regression value
  }
  SECTION("halving the grid moves epsilon at most one step") {
    FlexInterval coarse = flex_interval(cfg, 2e-3);
    FlexInterval fine = flex_interval(cfg, 1e-3);
    CHECK(std::abs(coarse.epsilon - fine.epsilon) <= 2e-3 + 1e-12);
  }
}

TEST_CASE("alpha and beta") {
  BricardConfig cfg = default_config();
  SECTION("regression values at r = s") {
    CHECK(alpha(cfg, cfg.s) == Catch::Approx(kAlphaS).margin(1e-9));
    CHECK(beta(cfg, cfg.s) == Catch::Approx(kBetaS).margin(1e-9));
  }
  SECTION("alpha attains its minimum at r = s, beta its maximum") {
    double a_s = alpha(cfg, cfg.s), b_s = beta(cfg, cfg.s);
    for (double r : {1.6, 1.8, 1.9, 1.99}) {
      CHECK(alpha(cfg, r) > a_s);
      CHECK(beta(cfg, r) < b_s);
    }
    CHECK_NOTHROW(validate_alpha_minimal_at_s(cfg));
  }
  SECTION("independent distance-matrix embedding agrees") {
    for (double r : {1.7, 1.9, 2.0})
      CHECK(alpha(cfg, r) == Catch::Approx(alpha_from_distances(cfg, r)).margin(1e-11));
  }
  SECTION("angles are scale-free") {
    BricardConfig scaled{2 * cfg.l_ab, 2 * cfg.l_bc, 2 * cfg.s, 2 * cfg.t, 2 * cfg.r0};
    CHECK(alpha(scaled, 3.8) == Catch::Approx(alpha(cfg, 1.9)).margin(1e-12));
  }
  SECTION("q-side evaluation extends past r = s") {
    CHECK(alpha_q_side(cfg, cfg.s) == Catch::Approx(alpha(cfg, cfg.s)).margin(1e-12));
    CHECK(alpha_q_side(cfg, 2.05) < alpha(cfg, cfg.s));
  }
}

TEST_CASE("flex path of B") {
  BricardConfig cfg = default_config();
  FlexInterval iv = flex_interval(cfg);
  FlexPath path = flex_path_B(cfg, iv, 128);
  SECTION("edge lengths frozen along the path") {
    CHECK(path.max_edge_drift() < 1e-10);
  }
  SECTION("the aq dihedral genuinely moves") {
    double amin = 1e9, amax = -1e9;
    for (const auto& c : path.configs) {
      double a = dihedral(c.at("a"), c.at("q"), c.at("b"), c.at("d")).angle;
      amin = std::min(amin, a);
      amax = std::max(amax, a);
    }
    CHECK(amax - amin > 1e-3);
  }
  SECTION("mirror-pair bar lengths hold at every sample") {
    for (size_t i = 0; i < path.configs.size(); i += 16) {
      const auto& c = path.configs[i];
      CHECK(dist(c.at("c"), c.at("d")) == Catch::Approx(cfg.l_ab).margin(1e-12));
      CHECK(dist(c.at("d"), c.at("a")) == Catch::Approx(cfg.l_bc).margin(1e-12));
    }
  }
  SECTION("distinct samples are never congruent while edges agree") {
    auto base_edges = path.configs.front().edge_lengths();
    for (size_t i = 32; i < path.configs.size(); i += 32) {
      auto edges = path.configs[i].edge_lengths();
      for (size_t e = 0; e < edges.size(); ++e)
        CHECK(edges[e] == Catch::Approx(base_edges[e]).margin(1e-10));
      CHECK_FALSE(labeled_congruent(path.configs.front().coords, path.configs[i].coords,
                                    1e-8 * path.configs.front().diameter()));
    }
  }
  SECTION("circumcircle round-trip recovers the driving radius") {
    for (size_t i = 0; i < path.configs.size(); i += 16) {
      auto cc = circumcircle(path.configs[i].at("a"), path.configs[i].at("b"),
                             path.configs[i].at("c"));
      CHECK(cc.radius == Catch::Approx(path.params[i]).margin(1e-11));
      CHECK(norm(cc.center) < 1e-11);
    }
  }
}

TEST_CASE("rigidity matrix rank along the family") {
  BricardConfig cfg = default_config();
  for (double r : {1.7, 1.9, 1.99, 2.0}) {
    EmbeddedPolyhedron B = build_bricard(cfg, r);
    ConstraintSystem cs = ConstraintSystem::from(B);
    FlexSpaceInfo fs = flex_space(B, cs);
    CHECK(fs.rank == 11);
    CHECK(fs.dim == 1);
  }
}
