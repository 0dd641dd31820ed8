#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "rigidlab/assembly.hpp"
#include "rigidlab/mechanism.hpp"

using namespace rigidlab;

namespace {
const Construction& fixture() {
  static Construction con = build_construction();
  return con;
}
}  // namespace

TEST_CASE("aux placement") {
  const Construction& con = fixture();
  SECTION("defaults satisfy every positional invariant") {
    CHECK_NOTHROW(place_aux(con.B, AuxPlacement{}));
  }
  SECTION("m must be strictly interior to aq") {
    AuxPlacement bad;
    bad.t_m = 0.0;
    CHECK_THROWS_AS(place_aux(con.B, bad), Error);
  }
  SECTION("y on an edge of abq is rejected") {
    AuxPlacement bad;
    bad.bary_y = {0.5, 0.5, 0.0};
    CHECK_THROWS_AS(place_aux(con.B, bad), Error);
  }
  SECTION("x and u land on the half-planes away from d and b") {
    CHECK(half_plane_side(con.B.at("a"), con.B.at("q"), con.B.at("d"), con.aux.x) ==
          HalfPlaneSide::Opposite);
    CHECK(half_plane_side(con.B.at("a"), con.B.at("q"), con.B.at("b"), con.aux.u) ==
          HalfPlaneSide::Opposite);
  }
}

TEST_CASE("C construction") {
  const Construction& con = fixture();
  auto rep = validate_closed_sphere(con.C.surface);
  SECTION("counts") {
    CHECK(rep.pass());
    CHECK(rep.vertex_count == 12);
    CHECK(rep.edge_count == 30);
    CHECK(rep.face_count == 20);
  }
  SECTION("the tetrahedron mnux meets the base octahedron angle at mn") {
    double g = dihedral(con.C.at("m"), con.C.at("n"), con.C.at("u"), con.C.at("x")).angle;
    CHECK(g == Catch::Approx(alpha(con.cfg, con.cfg.s)).margin(1e-10));
  }
  SECTION("ux is not an edge of C") {
    CHECK_FALSE(con.C.surface.has_edge("u", "x"));
    CHECK(con.C.surface.has_edge("m", "n"));
  }
  SECTION("every face nondegenerate") { CHECK_NOTHROW(con.C.check_nondegenerate()); }
}

TEST_CASE("transported family of C") {
  const Construction& con = fixture();
  FlexPath path = flex_path_C(con.cfg, con.blisters, con.interval, 64);
  SECTION("all edge lengths constant along the transport") {
    CHECK(path.max_edge_drift() < 1e-10);
  }
  SECTION("transport at r = s reproduces C(s) exactly") {
    EmbeddedPolyhedron back = transport_C(con.cfg, con.blisters, con.cfg.s);
    for (size_t i = 0; i < back.coords.size(); ++i)
      CHECK(dist(back.coords[i], con.C.coords[i]) < 1e-12);
  }
  SECTION("blister tetrahedra stay congruent to themselves") {
    auto tetra = [](const EmbeddedPolyhedron& c, const char* p3, const char* p4) {
      return std::vector<Vec3>{c.at("m"), c.at("n"), c.at(p3), c.at(p4)};
    };
    for (size_t i = 0; i < path.configs.size(); i += 16) {
      CHECK(labeled_congruent(tetra(con.C, "x", "y"), tetra(path.configs[i], "x", "y"), 1e-10));
      CHECK(labeled_congruent(tetra(con.C, "u", "v"), tetra(path.configs[i], "u", "v"), 1e-10));
    }
  }
  SECTION("fresh construction at radius r satisfies gamma(r) = alpha(r)") {
    for (double r : {1.7, 1.85, 1.99, 2.0})
      CHECK(gamma_at_radius(con.cfg, con.placement, r) ==
            Catch::Approx(alpha(con.cfg, r)).margin(1e-12));
  }
  SECTION("the transported gap equals 2 alpha(s) - alpha(r) and narrows") {
    double a_s = alpha(con.cfg, con.cfg.s);
    for (double r : {1.85, 1.9, 1.99}) {
      double gap = transported_gap(con.cfg, con.blisters, r);
      CHECK(gap == Catch::Approx(2 * a_s - alpha(con.cfg, r)).margin(1e-9));
      CHECK(gap < a_s);  // the gap only narrows as the carrier flexes
    }
  }
}

TEST_CASE("B prime") {
  const Construction& con = fixture();
  SECTION("homothety scales the edges by k") {
    double k = con.placement.k;
    CHECK(dist(con.B_prime.at("a'"), con.B_prime.at("p'")) ==
          Catch::Approx(k * con.cfg.s).margin(1e-12));
    CHECK(dist(con.B_prime.at("a'"), con.B_prime.at("q'")) ==
          Catch::Approx(k * con.cfg.t).margin(1e-12));
  }
  SECTION("similarity preserves the dihedral at the image of aq") {
    double d = dihedral(con.B_prime.at("a'"), con.B_prime.at("q'"), con.B_prime.at("b'"),
                        con.B_prime.at("d'")).angle;
    CHECK(d == Catch::Approx(alpha(con.cfg, con.cfg.s)).margin(1e-10));
  }
  SECTION("all corresponding dihedrals survive the similarity") {
    auto ang = [](const EmbeddedPolyhedron& p, const char* e0, const char* e1, const char* w0,
                  const char* w1) { return dihedral(p.at(e0), p.at(e1), p.at(w0), p.at(w1)).angle; };
    CHECK(ang(con.B_prime, "b'", "q'", "a'", "c'") ==
          Catch::Approx(ang(con.B, "b", "q", "a", "c")).margin(1e-10));
    CHECK(ang(con.B_prime, "a'", "b'", "p'", "q'") ==
          Catch::Approx(ang(con.B, "a", "b", "p", "q")).margin(1e-10));
  }
  SECTION("oversized k fails with the diminish hint") {
    CHECK_THROWS_WITH(build_B_prime(con.B, con.aux, 0.9),
                      Catch::Matchers::ContainsSubstring("diminish k"));
  }
  SECTION("small k passes") { CHECK_NOTHROW(build_B_prime(con.B, con.aux, 0.05)); }
  SECTION("halving rule lands on the frozen default") {
    CHECK(default_k(con.B, con.aux) == Catch::Approx(0.0625));
    CHECK(con.placement.k == Catch::Approx(0.0625));
  }
  SECTION("a' and q' sit inside mn in order") {
    BPrimeCheck chk;
    build_B_prime(con.B, con.aux, con.placement.k, &chk);
    CHECK(chk.param_a_prime > con.placement.t_m);
    CHECK(chk.param_a_prime < 0.5);
    CHECK(chk.param_q_prime > 0.5);
    CHECK(chk.param_q_prime < con.placement.t_n);
  }
}

TEST_CASE("P construction") {
  const Construction& con = fixture();
  auto rep = validate_closed_sphere(con.P.surface);
  SECTION("counts") {
    CHECK(rep.pass());
    CHECK(rep.vertex_count == 18);
    CHECK(rep.edge_count == 48);
    CHECK(rep.face_count == 32);
  }
  SECTION("a'q' is not an edge of P") { CHECK_FALSE(con.P.surface.has_edge("a'", "q'")); }
  SECTION("sector partition at w") {
    SectorAngles s = sectors(con.P);
    double a_s = alpha(con.cfg, con.cfg.s);
    CHECK(s.sum() == Catch::Approx(2 * kPi).margin(1e-9));
    CHECK(s.ii == Catch::Approx(a_s).margin(1e-9));
    CHECK(s.iv == Catch::Approx(a_s).margin(1e-9));
    CHECK(s.i == Catch::Approx(kPi - a_s).margin(1e-9));
    CHECK(s.iii == Catch::Approx(kPi - a_s).margin(1e-9));
    CHECK_NOTHROW(check_sector_partition(con.P));
  }
  SECTION("coplanar adjacent faces are not flagged") {
    CHECK_NOTHROW(con.P.check_nondegenerate());
  }
  SECTION("fan triangles wind consistently inside their host planes") {
    // star-shapedness of the cut hexagons from u and x: same-sign areas
    for (auto [apex, wing] : {std::pair{"u", "b'"}, std::pair{"x", "d'"}}) {
      Vec3 n0 = cross(con.P.at("m") - con.P.at(apex), con.P.at("a'") - con.P.at(apex));
      for (auto [f0, f1] : {std::pair{"a'", wing}, std::pair{wing, "q'"}}) {
        Vec3 ni = cross(con.P.at(f0) - con.P.at(apex), con.P.at(f1) - con.P.at(apex));
        CHECK(dot(n0, ni) > 0);
      }
    }
  }
}

TEST_CASE("P_n family") {
  const Construction& con = fixture();
  SECTION("apex edges lengthen to s + 1/n") {
    for (int n : {1, 10, 100}) {
      EmbeddedPolyhedron Pn = build_Pn(con.P, con.cfg, n);
      for (const char* z : {"a", "b", "c", "d"})
        CHECK(dist(Pn.at(z), Pn.at("p_n")) == Catch::Approx(con.cfg.s + 1.0 / n).margin(1e-12));
    }
  }
  SECTION("only the apex moves, by the closed-form height") {
    for (int n : {1, 10, 100}) {
      EmbeddedPolyhedron Pn = build_Pn(con.P, con.cfg, n);
      double expect = std::sqrt(2.0 * con.cfg.s / n + 1.0 / (double(n) * n));
      CHECK(dist(Pn.at("p_n"), con.P.at("p")) == Catch::Approx(expect).margin(1e-12));
      for (const auto& l : con.P.surface.labels())
        if (l != "p")
          CHECK(dist(Pn.at(l == "p" ? "p_n" : l), con.P.at(l)) < 1e-15);
    }
  }
  SECTION("combinatorial structure is shared") {
    EmbeddedPolyhedron Pn = build_Pn(con.P, con.cfg, 7);
    CHECK(combinatorially_equivalent(con.P.surface, Pn.surface));
  }
  SECTION("displacement decays like n^{-1/2}") {
    double d10 = dist(build_Pn(con.P, con.cfg, 10).at("p_n"), con.P.at("p"));
    double d40 = dist(build_Pn(con.P, con.cfg, 40).at("p_n"), con.P.at("p"));
    CHECK(d40 < d10);
    CHECK(d40 == Catch::Approx(d10 / 2.0).epsilon(0.05));  // quadrupling n halves it
  }
}

TEST_CASE("ablation fixture") {
  const Construction& con = fixture();
  EmbeddedPolyhedron abl = build_P_ablated(con.P);
  auto rep = validate_closed_sphere(abl.surface);
  CHECK(rep.pass());
  CHECK(rep.vertex_count == 18);
  CHECK(rep.edge_count == 48);
  CHECK(rep.face_count == 32);
  CHECK_FALSE(abl.surface.has_edge("x", "y"));  // the pinning edge is gone
  CHECK(abl.surface.has_edge("m", "n"));
}

TEST_CASE("driven glued mechanism") {
  const Construction& con = fixture();
  SECTION("P_n paths reach machine precision") {
    GluedMechanism gm = mechanism_for(con, 10);
    std::vector<double> etas;
    for (int j = 1; j <= 20; ++j) etas.push_back(j * 2.5e-4);
    auto drv = gm.drive(etas);
    REQUIRE(drv.is_path);
    for (double f : drv.floors) CHECK(f < 1e-12);
    CHECK(drv.path.max_edge_drift() < 1e-11);
    // the carrier radius rises past s while the shrunken one falls below
    CHECK(drv.r_big.back() > con.cfg.s);
    CHECK(drv.r_prime.back() < con.cfg.s);
  }
  SECTION("driving P itself hits a growing floor") {
    GluedMechanism gm = mechanism_for(con, 0);
    auto floors = gm.probe_floors({5e-3, 1e-2, 2e-2});
    CHECK(floors[0] > 1e-9);
    CHECK(floors[1] > 4.0 * floors[0]);
    CHECK(floors[2] > 4.0 * floors[1]);
    CHECK(floors[2] > 1e-8);
  }
}
