#include <catch2/catch_amalgamated.hpp>

#include "rigidlab/assembly.hpp"
#include "rigidlab/bricard.hpp"
#include "rigidlab/io.hpp"
#include "rigidlab/surface.hpp"

using namespace rigidlab;

namespace {

SimplicialSurface tetrahedron() {
  return build_surface({{"a", "b", "c"}, {"a", "c", "d"}, {"a", "d", "b"}, {"b", "d", "c"}});
}

}  // namespace

TEST_CASE("build_surface derives counts") {
  SimplicialSurface tet = tetrahedron();
  CHECK(tet.vertex_count() == 4);
  CHECK(tet.edges().size() == 6);
  CHECK(tet.face_count() == 4);

  SimplicialSurface oct = octahedron_pattern();
  CHECK(oct.vertex_count() == 6);
  CHECK(oct.edges().size() == 12);
  CHECK(oct.face_count() == 8);
}

TEST_CASE("build_surface rejects bad faces") {
  CHECK_THROWS_AS(build_surface({{"a", "b", "c"}, {"b", "a", "c"}}), Error);  // duplicate
  CHECK_THROWS_AS(build_surface({{"a", "a", "b"}}), Error);                   // degenerate
}

TEST_CASE("validate_closed_sphere") {
  SECTION("octahedron passes with chi 2") {
    auto rep = validate_closed_sphere(octahedron_pattern());
    CHECK(rep.pass());
    CHECK(rep.euler == 2);
  }
  SECTION("octahedron minus a face reports 3 boundary edges") {
    SimplicialSurface s = octahedron_pattern();
    s.remove_face("a", "b", "q");
    auto rep = validate_closed_sphere(s);
    CHECK_FALSE(rep.pass());
    CHECK(rep.boundary_edges == 3);
  }
  SECTION("the glued pattern of P passes with 18-48-32") {
    Construction con = build_construction();
    auto rep = validate_closed_sphere(con.P.surface);
    CHECK(rep.pass());
    CHECK(rep.vertex_count == 18);
    CHECK(rep.edge_count == 48);
    CHECK(rep.face_count == 32);
    CHECK(rep.euler == 2);
  }
}

TEST_CASE("retriangulate_fan produces the named fans") {
  SimplicialSurface oct = octahedron_pattern();
  for (const char* l : {"m", "n", "y"}) oct.add_vertex(l);
  SimplicialSurface fanned =
      retriangulate_fan(oct, {"a", "b", "q"}, "y", {"a", "b", "q", "n", "y", "m"});
  CHECK(fanned.has_face("y", "a", "b"));
  CHECK(fanned.has_face("y", "b", "q"));
  CHECK(fanned.has_face("y", "q", "n"));
  CHECK(fanned.has_face("y", "m", "a"));
  CHECK_FALSE(fanned.has_face("a", "b", "q"));

  SECTION("second hexagon fans from v") {
    for (const char* l : {"v"}) fanned.add_vertex(l);
    SimplicialSurface f2 =
        retriangulate_fan(fanned, {"d", "a", "q"}, "v", {"a", "d", "q", "n", "v", "m"});
    CHECK(f2.has_face("v", "a", "d"));
    CHECK(f2.has_face("v", "d", "q"));
    CHECK(f2.has_face("v", "q", "n"));
    CHECK(f2.has_face("v", "m", "a"));
  }
  SECTION("boundary must be simple") {
    CHECK_THROWS_AS(
        retriangulate_fan(fanned, {"b", "c", "q"}, "y", {"b", "c", "q", "c"}), Error);
  }
}

TEST_CASE("fan surgery then tent closure preserves the sphere") {
  // the C-pattern flow: two fans and two tents return chi to 2
  SimplicialSurface s = octahedron_pattern();
  for (const char* l : {"m", "n", "y", "x", "u", "v"}) s.add_vertex(l);
  s = retriangulate_fan(s, {"a", "b", "q"}, "y", {"a", "b", "q", "n", "y", "m"});
  s.add_face("m", "n", "x");
  s.add_face("m", "x", "y");
  s.add_face("n", "x", "y");
  s = retriangulate_fan(s, {"d", "a", "q"}, "v", {"a", "d", "q", "n", "v", "m"});
  s.add_face("m", "n", "u");
  s.add_face("m", "u", "v");
  s.add_face("n", "u", "v");
  s.orient();
  auto rep = validate_closed_sphere(s);
  CHECK(rep.pass());
  CHECK(rep.vertex_count == 12);
  CHECK(rep.edge_count == 30);
  CHECK(rep.face_count == 20);
}

TEST_CASE("glue_complexes") {
  SECTION("two tetrahedra minus a face glue to a bipyramid") {
    SimplicialSurface t1 = tetrahedron();
    t1.remove_face("b", "d", "c");
    SimplicialSurface t2 =
        build_surface({{"b", "c", "e"}, {"c", "d", "e"}, {"d", "b", "e"}});
    SimplicialSurface glued = glue_complexes(t1, t2, {});
    auto rep = validate_closed_sphere(glued);
    CHECK(rep.pass());
    CHECK(rep.vertex_count == 5);
    CHECK(rep.edge_count == 9);
    CHECK(rep.face_count == 6);
  }
  SECTION("boundary length mismatch is an error") {
    SimplicialSurface t1 = tetrahedron();
    t1.remove_face("b", "d", "c");  // boundary length 3
    SimplicialSurface quad_disk = build_surface({{"w", "x", "y"}, {"w", "y", "z"}});
    CHECK_THROWS_AS(glue_complexes(t1, quad_disk, {}), Error);  // boundary length 4
  }
}

TEST_CASE("combinatorial equivalence") {
  Construction con = build_construction();
  EmbeddedPolyhedron Pn = build_Pn(con.P, con.cfg, 10);
  SECTION("P and P_n share the structure under the canonical pairing") {
    CHECK(combinatorially_equivalent(con.P.surface, Pn.surface));
  }
  SECTION("octahedron and P differ") {
    CHECK_FALSE(combinatorially_equivalent(octahedron_pattern(), con.P.surface));
  }
  SECTION("every surface is equivalent to itself") {
    CHECK(combinatorially_equivalent(con.P.surface, con.P.surface));
    CHECK(combinatorially_equivalent(octahedron_pattern(), octahedron_pattern()));
  }
  SECTION("equivalence relation on the fixture set") {
    std::vector<SimplicialSurface> fixtures{tetrahedron(), octahedron_pattern(), con.C.surface,
                                            con.P.surface, Pn.surface};
    for (size_t i = 0; i < fixtures.size(); ++i)
      for (size_t j = 0; j < fixtures.size(); ++j) {
        bool ij = combinatorially_equivalent(fixtures[i], fixtures[j]);
        bool ji = combinatorially_equivalent(fixtures[j], fixtures[i]);
        CHECK(ij == ji);  // symmetric
        if (i == j) CHECK(ij);
        for (size_t k = 0; k < fixtures.size(); ++k) {
          bool jk = combinatorially_equivalent(fixtures[j], fixtures[k]);
          bool ik = combinatorially_equivalent(fixtures[i], fixtures[k]);
          if (ij && jk) CHECK(ik);  // transitive
        }
      }
  }
}

TEST_CASE("closed spheres satisfy the triangulation count identities") {
  Construction con = build_construction();
  for (const SimplicialSurface* s :
       {&con.B.surface, &con.C.surface, &con.P.surface}) {
    auto rep = validate_closed_sphere(*s);
    REQUIRE(rep.pass());
    CHECK(rep.edge_count == 3 * rep.vertex_count - 6);
    CHECK(rep.face_count == 2 * rep.vertex_count - 4);
  }
}

TEST_CASE("surface pattern JSON round-trip") {
  Construction con = build_construction();
  json j = pattern_to_json(con.P.surface);
  CHECK(j["vertices"].size() == 18);
  CHECK(j["faces"].size() == 32);
  // 1-based canonical ordering: a is vertex 1, p' is vertex 17
  CHECK(j["vertices"][0] == "a");
  CHECK(j["vertices"][4] == "p");
  CHECK(j["vertices"][16] == "p'");
  SimplicialSurface back = pattern_from_json(j);
  CHECK(combinatorially_equivalent(back, con.P.surface));
  CHECK(back.labels() == con.P.surface.labels());
}
