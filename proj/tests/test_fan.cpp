#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "toric/fan.hpp"

using namespace toric;

namespace {

LatticePoint e(int n, int i, int sign = 1) { return scale(sign, unit(n, i - 1)); }

FanError::Kind error_kind(const std::function<void()>& f) {
  try {
    f();
  } catch (const FanError& err) {
    return err.kind;
  }
  FAIL("no FanError raised");
  return FanError::Kind::PreconditionFailed;
}

}  // namespace

TEST_CASE("make_cone") {
  Cone c = make_cone(2, {{0, 1}, {1, 0}});
  CHECK(c.dim() == 2);
  CHECK(c.smooth);
  CHECK(c.rays.front() == LatticePoint{0, 1});
  CHECK(error_kind([] { make_cone(2, {{2, 0}}); }) == FanError::Kind::NonPrimitiveRay);
  CHECK(error_kind([] { make_cone(2, {{1, 0}, {1, 0}}); }) == FanError::Kind::DependentRays);
  CHECK(error_kind([] { make_cone(2, {{1, 1}, {-1, -1}, {1, 0}}); }) == FanError::Kind::DependentRays);
  Cone odd = make_cone(2, {{1, 0}, {1, 2}});
  CHECK(!odd.smooth);
  CHECK(make_cone(3, {}).dim() == 0);
}

TEST_CASE("cone_intersection examples") {
  auto meet = cone_intersection(make_cone(2, {{1, 0}, {0, 1}}), make_cone(2, {{1, 0}, {0, -1}}));
  CHECK(meet.rays == std::vector<LatticePoint>{{1, 0}});
  meet = cone_intersection(make_cone(2, {{1, 1}}), make_cone(2, {{1, 0}}));
  CHECK(meet.rays.empty());
  meet = cone_intersection(make_cone(2, {{1, 0}, {1, 2}}), make_cone(2, {{0, 1}, {1, 2}}));
  CHECK(meet.rays == std::vector<LatticePoint>{{1, 2}});
}

TEST_CASE("cone_intersection agrees with membership sampling") {
  // oracle: a lattice point lies in the intersection iff it lies in both cones
  const std::vector<std::vector<LatticePoint>> pool = {
      {{1, 0}, {1, 2}}, {{0, 1}, {1, 2}}, {{1, 0}, {0, 1}}, {{1, 1}, {-1, 2}},
      {{-1, 0}, {0, -1}}, {{1, -1}, {1, 1}}, {{2, 1}}, {{1, 3}, {3, 1}}};
  for (auto& a : pool)
    for (auto& b : pool) {
      Cone ca = make_cone(2, a), cb = make_cone(2, b);
      Cone meet = cone_intersection(ca, cb);
      for (int x = -3; x <= 3; ++x)
        for (int y = -3; y <= 3; ++y) {
          LatticePoint v{x, y};
          bool both = cone_contains(ca.rays, v) && cone_contains(cb.rays, v);
          bool in_meet = meet.rays.empty() ? is_zero(v) : cone_contains(meet.rays, v);
          if (meet.rays.size() > 2) continue;
          CHECK(both == in_meet);
        }
    }
}

TEST_CASE("three-dimensional intersections") {
  Cone a = make_cone(3, {e(3, 1), e(3, 2), e(3, 3)});
  Cone b = make_cone(3, {{1, 1, 0}, {0, 0, 1}, {1, -1, 0}});
  Cone meet = cone_intersection(a, b);
  CHECK(meet.rays == std::vector<LatticePoint>{{0, 0, 1}, {1, 0, 0}, {1, 1, 0}});
  for (int x = -2; x <= 2; ++x)
    for (int y = -2; y <= 2; ++y)
      for (int z = -2; z <= 2; ++z) {
        LatticePoint v{x, y, z};
        CHECK((cone_contains(a.rays, v) && cone_contains(b.rays, v)) == cone_contains(meet.rays, v));
      }
}

TEST_CASE("intersections of lower-dimensional and large-entry cones") {
  // two 2-cones in different planes of R^3 meet in a ray
  Cone a = make_cone(3, {{1, 0, 0}, {0, 1, 1}});
  Cone b = make_cone(3, {{0, 1, 1}, {0, 1, -1}});
  CHECK(cone_intersection(a, b).rays == std::vector<LatticePoint>{{0, 1, 1}});
  // coplanar 2-cones overlapping in a 2-cone
  Cone c = make_cone(3, {{1, 0, 0}, {1, 2, 0}});
  Cone d = make_cone(3, {{1, 1, 0}, {0, 1, 0}});
  CHECK(cone_intersection(c, d).rays == std::vector<LatticePoint>{{1, 1, 0}, {1, 2, 0}});
  // minors past int64 go through the multiprecision path
  const std::int64_t big = 3000000007;
  Cone p = make_cone(4, {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {big, big - 1, big + 1, 1}});
  Cone q = make_cone(4, {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}});
  Cone meet = cone_intersection(p, q);
  CHECK(meet.rays == std::vector<LatticePoint>{{0, 0, 1, 0}, {0, 1, 0, 0}, {1, 0, 0, 0}, {big, big - 1, big + 1, 1}});
}

TEST_CASE("make_fan validates") {
  Fan f = p1_power(2);
  CHECK(f.max_cones.size() == 4);
  CHECK(is_complete(f));
  CHECK(error_kind([] { make_fan(2, {{{1, 0}, {0, 1}}, {{1, 1}, {2, -1}}}); }) ==
        FanError::Kind::OverlappingCones);
  Fan g = make_fan(1, {{}});
  CHECK(g.max_cones == std::vector<RaySet>{{}});
  validate_fan(p1_power(3));
  validate_fan(projective_space(3));
}

TEST_CASE("non-maximal cones are dropped") {
  Fan f = make_fan(2, {{{1, 0}, {0, 1}}, {{1, 0}}, {}});
  CHECK(f.max_cones.size() == 1);
}

TEST_CASE("completeness") {
  for (int n = 1; n <= 4; ++n) {
    CHECK(is_complete(p1_power(n)));
    CHECK(!is_complete(affine_space(n)));
    CHECK(is_complete(projective_space(n)));
  }
  CHECK(error_kind([] { is_complete(make_fan(2, {{{1, 0}, {0, 1}}, {{-1, 0}}})); }) ==
        FanError::Kind::NotPure);
}

TEST_CASE("subdivision predicate") {
  Fan star = make_fan(2, {{{1, 0}, {1, 1}}, {{1, 1}, {0, 1}}});
  CHECK(is_subdivision(star, affine_space(2)));
  CHECK(!is_subdivision(affine_space(2), star));
  CHECK(!is_subdivision(affine_space(2), p1_power(2)));
  CHECK(!is_subdivision(p1_power(2), affine_space(2)));
  CHECK(is_subdivision(p1_power(3), p1_power(3)));
  // a fan missing one quadrant does not cover (P^1)^2
  Fan three = make_fan(2, {{{1, 0}, {0, 1}}, {{-1, 0}, {0, 1}}, {{-1, 0}, {0, -1}}});
  CHECK(!is_subdivision(three, p1_power(2)));
}

TEST_CASE("quotient fans") {
  Fan a3 = affine_space(3);
  auto q = quotient_fan(a3, {*a3.ray_index(e(3, 3))});
  CHECK(q.fan == affine_space(2));

  Fan star = make_fan(2, {{{1, 0}, {1, 1}}, {{1, 1}, {0, 1}}});
  q = quotient_fan(star, {*star.ray_index({1, 1})});
  CHECK(q.fan == p1_power(1));
  // images of e1 and e2 are opposite
  const LatticePoint img1{q.projection(0, 0).convert_to<std::int64_t>()};
  const LatticePoint img2{q.projection(0, 1).convert_to<std::int64_t>()};
  CHECK(img1 == scale(-1, img2));

  Fan p = p1_power(2);
  CHECK(quotient_fan(p, {}).fan == p);
  CHECK(error_kind([&] { quotient_fan(star, {0, 1}); }) == FanError::Kind::ConeNotInFan);
}

TEST_CASE("quotients of complete fans are complete") {
  for (const Fan& f : {p1_power(3), projective_space(3), p1_power(2)}) {
    FaceLattice lat(f);
    for (int d = 0; d <= f.rank; ++d)
      for (auto& s : lat.cones(d)) {
        auto q = quotient_fan(f, s);
        CHECK(q.fan.rank == f.rank - d);
        validate_fan(q.fan);
        CHECK(is_complete(q.fan));
        CHECK(q.correspondence.at(s).empty());
        std::size_t above = 0;
        for (int k = d; k <= f.rank; ++k)
          for (auto& t : lat.cones(k))
            if (std::includes(t.begin(), t.end(), s.begin(), s.end())) ++above;
        CHECK(q.correspondence.size() == above);
      }
  }
}

TEST_CASE("divisor fans") {
  for (int n = 1; n <= 4; ++n)
    for (int i = 1; i <= n; ++i) {
      Fan d1 = divisor_fan(p1_power(n), i, 1);
      Fan d0 = divisor_fan(p1_power(n), i, 0);
      CHECK(d1 == p1_power(n - 1));
      CHECK(d0 == p1_power(n - 1));
      CHECK(d1.axes.size() == static_cast<std::size_t>(n - 1));
      CHECK(std::find(d1.axes.begin(), d1.axes.end(), i) == d1.axes.end());
    }
  CHECK(divisor_fan(affine_space(2), 2, 1) == affine_space(1));
  CHECK(error_kind([] { divisor_fan(make_fan(2, {{{-1, 0}, {0, 1}}}), 1, 0); }) ==
        FanError::Kind::RayMissing);
  CHECK(is_i_admissible(p1_power(3), 2));
}

TEST_CASE("products with P1") {
  CHECK(product_with_p1(zero_fan(0), 1) == p1_power(1));
  CHECK(product_with_p1(p1_power(1), 2) == p1_power(2));
  Fan a = product_with_p1(affine_space(1), 2);
  CHECK(a.max_cones.size() == 2);
  CHECK(a.contains({{1, 0}, {0, 1}}));
  CHECK(a.contains({{1, 0}, {0, -1}}));
  CHECK(a.axes == std::vector<int>{1, 2});
}

TEST_CASE("(P1)^n is very r-standard") {
  for (int n = 0; n <= 4; ++n)
    for (int r = 0; r <= n; ++r) {
      auto rep = standardness_report(p1_power(n), r);
      CHECK(rep.is_r_standard);
      CHECK(rep.is_very_r_standard);
    }
  CHECK(!standardness_report(projective_space(2), 0).is_r_standard);
}

TEST_CASE("admissibility") {
  auto rep = admissibility_report(p1_power(2), {2}, {2}, {1});
  CHECK(rep.admissible());
  Fan blown = make_fan(2, {{{1, 0}, {1, 1}}, {{1, 1}, {0, 1}}, {{0, 1}, {-1, 0}},
                           {{-1, 0}, {0, -1}}, {{0, -1}, {1, 0}}});
  rep = admissibility_report(blown, {}, {}, {1});
  CHECK(rep.complete_smooth);
  CHECK(!rep.i2_unique);
}

TEST_CASE("restrict and extend") {
  Fan half = restrict_standard(p1_power(2), 1);
  CHECK(half == half_space_fan(2, 1));
  CHECK(half.max_cones.size() == 2);
  // support is the half plane x1 <= 0
  for (int x = -2; x <= 2; ++x)
    for (int y = -2; y <= 2; ++y) {
      bool in = false;
      for (auto& c : half.max_cones) in = in || cone_contains(half.cone_rays(c), {x, y});
      CHECK(in == (x <= 0));
    }
  CHECK(extend_standard(half, 1) == p1_power(2));
  for (int n = 1; n <= 3; ++n)
    for (int r = 0; r <= n; ++r) {
      CHECK(extend_standard(restrict_standard(p1_power(n), r), r) == p1_power(n));
      CHECK(restrict_standard(extend_standard(half_space_fan(n, r), r), r) == half_space_fan(n, r));
    }
}

TEST_CASE("face lattice") {
  Fan f = p1_power(2);
  FaceLattice lat(f);
  CHECK(lat.cones(0).size() == 1);
  CHECK(lat.cones(1).size() == 4);
  CHECK(lat.cones(2).size() == 4);
  CHECK(lat.total() == 9);
  CHECK(lat.cofaces(0, 0).size() == 4);
  for (std::size_t i = 0; i < lat.cones(1).size(); ++i) CHECK(lat.cofaces(1, static_cast<int>(i)).size() == 2);
}

TEST_CASE("fan JSON round trip") {
  Fan f = projective_space(3);
  std::string text = fan_to_json(f);
  CHECK(fan_from_json(text) == f);
  CHECK(text.find("\"max_cones\"") != std::string::npos);
  CHECK_THROWS(fan_from_json("{\"rank\": 2}"));
}
