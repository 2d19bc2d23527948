#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "toric/chow.hpp"
#include "toric/subdivide.hpp"

#include <functional>
#include <random>

using namespace toric;

namespace {

LatticePoint e(int n, int i, int sign = 1) { return scale(sign, unit(n, i - 1)); }
LatticePoint pt(std::initializer_list<std::int64_t> v) { return LatticePoint(v); }

long binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  long b = 1;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

// h-vector of the face numbers: rank CH^k of a smooth complete fan
std::vector<long> h_vector(const Fan& fan) {
  FaceLattice lattice(fan);
  const int n = fan.rank;
  std::vector<long> h(n + 1, 0);
  for (int k = 0; k <= n; ++k)
    for (int i = 0; i <= k; ++i)
      h[k] += ((k - i) % 2 ? -1 : 1) * binom(n - i, k - i) * static_cast<long>(lattice.cones(i).size());
  return h;
}

ChowError::Kind chow_error(const std::function<void()>& f) {
  try {
    f();
  } catch (const ChowError& err) {
    return err.kind;
  }
  FAIL("no ChowError thrown");
  return ChowError::Kind::NotAMap;
}

OrderedFan p1_ordered(int n, int r) {
  SubdivisionTrace t;
  t.input = p1_power(n);
  return build_admissible_ordering(t, r);
}

OrderedFan theta_ordered(int n, int r, std::vector<int> d) {
  return build_admissible_ordering(build_theta_trace(n, r, d), r);
}

// (P^1)^2 starred at Cone(-e1,e2) then Cone(-e1,-e2)
Fan cylinder_example() {
  Fan f = star_subdivision(p1_power(2), std::vector<LatticePoint>{pt({-1, 0}), pt({0, 1})}).fan;
  return star_subdivision(f, std::vector<LatticePoint>{pt({-1, 0}), pt({0, -1})}).fan;
}

DivisorCycle principal(const Fan& fan, const LatticePoint& m) {
  DivisorCycle x(1);
  for (auto& f : fan.rays)
    if (dot(f, m) != 0) x.add({f}, dot(f, m));
  return x;
}

}  // namespace

TEST_CASE("cycle presentation on small fans") {
  auto p1 = chow_presentation(p1_power(1), 0);
  CHECK(p1.rank() == 1);
  CHECK(p1.presentation.torsion().empty());
  // single relation [V(e1)] - [V(-e1)] up to sign
  REQUIRE(p1.presentation.relations().cols() == 1);
  IntMatrix rel = p1.presentation.relations();
  CHECK(rel(0, 0) == -rel(1, 0));
  CHECK((rel(0, 0) == 1 || rel(0, 0) == -1));

  for (int n = 1; n <= 3; ++n)
    for (int k = 0; k <= n; ++k) {
      auto g = chow_presentation(p1_power(n), k);
      CHECK(g.rank() == binom(n, k));
      CHECK(g.presentation.torsion().empty());
    }
  auto top = chow_presentation(projective_space(2), 2);
  CHECK(top.rank() == 1);
  REQUIRE(top.cones.size() == 1);
  CHECK(top.cones[0].empty());
  CHECK(chow_presentation(projective_space(2), 3).presentation.generators() == 0);
  CHECK(chow_presentation(projective_space(2), -1).presentation.generators() == 0);
  // non-complete: A^2 has CH_0 = 0
  CHECK(chow_presentation(affine_space(2), 0).rank() == 0);
  CHECK(chow_presentation(affine_space(2), 2).rank() == 1);
}

TEST_CASE("ring presentation matches the cycles and the h-vector") {
  auto p1 = sr_graded_piece(p1_power(1), 1);
  CHECK(p1.monomials.size() == 2);
  CHECK(p1.rank() == 1);
  CHECK(sr_graded_piece(p1_power(1), 0).rank() == 1);
  CHECK(sr_graded_piece(p1_power(2), 1).rank() == 2);
  CHECK(sr_graded_piece(p1_power(1), 2).rank() == 0);

  std::vector<Fan> fans{p1_power(1), p1_power(2), p1_power(3), projective_space(2), projective_space(3),
                        build_theta(2, 1, {1}), build_gamma(2, 1), build_gamma(3, 1),
                        star_subdivision(p1_power(3), std::vector<LatticePoint>{e(3, 1), e(3, 2), e(3, 3, -1)}).fan};
  for (auto& fan : fans) {
    auto h = h_vector(fan);
    for (int k = 0; k <= fan.rank; ++k) {
      auto id = sr_identification(fan, k);  // throws unless unimodular
      CHECK(id.ring.rank() == h[k]);
      CHECK(id.chow.rank() == h[k]);
      CHECK(id.ring.presentation.torsion().empty());
    }
  }
}

TEST_CASE("Fulton basis") {
  for (int n = 1; n <= 3; ++n) {
    auto b = fulton_basis(p1_ordered(n, 0));
    std::size_t total = 0;
    for (int k = 0; k <= n; ++k) {
      CHECK(b.cones[k].size() == static_cast<std::size_t>(binom(n, k)));
      total += b.cones[k].size();
    }
    CHECK(total == b.groups[0].cones.size());  // one per maximal cone
  }
  auto p1 = p1_ordered(1, 0);
  auto b = fulton_basis(p1);
  REQUIRE(b.cones[0].size() == 1);
  CHECK(p1.fan().cone_rays(p1.ess(b.cones[0][0])) == std::vector<LatticePoint>{pt({-1})});
  CHECK(p1.ess(b.cones[1][0]).empty());

  auto theta = theta_ordered(2, 1, {1});
  auto bt = fulton_basis(theta);
  std::size_t total = 0;
  for (auto& c : bt.cones) total += c.size();
  CHECK(total == theta.fan().max_cones.size());
  for (int k = 0; k <= 2; ++k) CHECK(bt.cones[k].size() == static_cast<std::size_t>(h_vector(theta.fan())[2 - k]));
}

TEST_CASE("delta on Chow: cycle, Fulton, ring and flat routes agree") {
  for (auto ordered : {p1_ordered(2, 0), p1_ordered(2, 1), p1_ordered(3, 1), theta_ordered(2, 1, {1})}) {
    const Fan& fan = ordered.fan();
    const int n = fan.rank;
    for (int pos = ordered.r(); pos < n; ++pos)
      for (int eps : {0, 1})
        for (int p = 0; p <= n; ++p) {
          auto d = delta_on_chow(ordered, fan.axes[pos], eps, p);
          CHECK(d.routes.size() == 3);
        }
  }

  // entrywise Prop-style rule on (P^1)^2: e_2 not in sigma -> 0
  auto ordered = p1_ordered(2, 0);
  auto b = fulton_basis(ordered);
  auto d = delta_on_chow(ordered, 2, 0, 1).cycle;
  for (std::size_t i = 0; i < b.cones[1].size(); ++i) {
    const RaySet& cone = ordered.fan().max_cones[b.cones[1][i]];
    const bool has_e2 = std::binary_search(cone.begin(), cone.end(), *ordered.fan().ray_index(e(2, 2)));
    IntMatrix img = d.map.matrix * b.matrix[1].col(static_cast<Eigen::Index>(i));
    if (!has_e2) CHECK(img.isZero());
    else CHECK(!img.isZero());
  }

  // the fundamental class restricts to the fundamental class; points go to 0
  for (int n = 1; n <= 3; ++n) {
    auto top = delta_on_chow(p1_ordered(n, 0), n, 1, n).cycle;
    REQUIRE(top.map.matrix.rows() == 1);
    CHECK((top.map.matrix(0, 0) == 1 || top.map.matrix(0, 0) == -1));
    CHECK(top.image.presentation.generator_coordinates() * top.map.on_generators ==
          top.map.matrix * top.source.presentation.generator_coordinates());
    auto pt0 = delta_on_chow(p1_ordered(n, 0), n, 1, 0).cycle;
    CHECK(pt0.image.presentation.generators() == 0);
  }
  // hyperplane class of (P^1)^2 on the line x_2 = 0: [V(e1)] -> point
  auto line = delta_cycle_map(p1_power(2), 2, 1, 1);
  IntMatrix x = IntMatrix::Zero(line.source.presentation.generators(), 1);
  x(line.source.index.at(*p1_power(2).find({e(2, 1)})), 0) = 1;
  IntMatrix y = line.image.presentation.coordinates(line.map.on_generators * x);
  CHECK(y.rows() == 1);
  CHECK((y(0, 0) == 1 || y(0, 0) == -1));
}

TEST_CASE("flat Chow groups three ways") {
  // (P^1)^2, r = 1: two maximal cones avoid e_2, so CH-flat has total rank 2, split 1 + 1 + 0
  const std::vector<Eigen::Index> per_p{1, 1, 0};
  Eigen::Index total = 0;
  for (int p = 0; p <= 2; ++p) {
    auto flat = chow_flat(p1_ordered(2, 1), 1, p);
    CHECK(flat.rank_kernel == per_p[p]);
    CHECK(flat.rank_fulton == per_p[p]);
    CHECK(flat.rank_flat == per_p[p]);
    total += flat.rank_flat;
  }
  CHECK(total == 2);

  for (int n = 1; n <= 3; ++n)
    for (int p = 0; p <= n; ++p) {
      auto all = chow_flat(p1_ordered(n, n), n, p);
      CHECK(all.rank_kernel == binom(n, p));
      CHECK(all.rank_flat == binom(n, p));
    }
  for (auto ordered : {p1_ordered(3, 1), p1_ordered(3, 2), theta_ordered(2, 1, {1}), theta_ordered(3, 2, {1})})
    for (int p = 0; p <= ordered.fan().rank; ++p) {
      auto f = chow_flat(ordered, ordered.r(), p);
      CHECK(f.rank_kernel == f.rank_flat);
      // census oracle: flat maximal cones with ess of dimension n - p
      auto split = sigma_split(ordered.fan(), ordered.r());
      long census = 0;
      for (int c : split.flat_max)
        census += static_cast<int>(ordered.ess(c).size()) == ordered.fan().rank - p;
      CHECK(f.rank_fulton == census);
    }
}

TEST_CASE("blow-up rank identity") {
  auto rep = blowup_rank_check(p1_power(2), *p1_power(2).find({e(2, 1), e(2, 2)}));
  CHECK(rep.ok);
  CHECK(rep.blown[1] == 3);
  CHECK(rep.base[1] == 2);
  CHECK(rep.center[1] == 1);
  CHECK(rep.blown[0] == 1);
  CHECK(rep.center[0] == 0);

  Fan theta = build_theta(3, 1, {1});
  FaceLattice lattice(theta);
  const auto& two = lattice.cones(2);
  std::mt19937 rng(20);
  for (int i = 0; i < 4; ++i) {
    const RaySet& s = two[rng() % two.size()];
    auto r = blowup_rank_check(theta, s);
    CHECK_MESSAGE(r.ok, describe(theta, s));
  }
}

TEST_CASE("divisor pullbacks") {
  // star subdivision of A^2 at Cone(e1,e2)
  auto x = pullback_star(affine_space(2), {e(2, 1), e(2, 2)}, DivisorCycle::ray(e(2, 1)));
  CHECK(x == DivisorCycle::ray(e(2, 1)) + DivisorCycle::ray(pt({1, 1})));
  Fan a2 = affine_space(2);
  Fan a2s = star_subdivision(a2, std::vector<LatticePoint>{e(2, 1), e(2, 2)}).fan;
  CHECK(pullback_subdivision(a2, a2s, DivisorCycle::ray(e(2, 1))) == x);

  Fan p12 = p1_power(2);
  CHECK(pullback_delta(p12, 1, 1, {}, DivisorCycle::ray(e(2, 1))).is_zero());
  CHECK(pullback_delta(p12, 1, 1, {}, DivisorCycle::ray(e(2, 2))) == DivisorCycle::ray(pt({1})));
  CHECK(pullback_delta(p12, 2, 0, {2}, DivisorCycle::ray(e(2, 1))) == DivisorCycle::ray(pt({1})));
  CHECK(pullback_delta(p12, 2, 0, {2}, DivisorCycle::ray(e(2, 2, -1))).is_zero());
  CHECK(chow_error([&] { pullback_delta(p12, 2, 0, {2}, DivisorCycle::ray(e(2, 2))); }) ==
        ChowError::Kind::UnsupportedRay);
  CHECK(chow_error([&] { pullback_pi(p12, DivisorCycle::ray(pt({1, 1}))); }) == ChowError::Kind::UnsupportedRay);

  // pi then delta_t is the identity, also on Sym^2
  Fan prod = product_with_p1(p12, 3);
  auto sq = DivisorCycle::ray(e(2, 1)) * (DivisorCycle::ray(e(2, 2)) - DivisorCycle::ray(e(2, 1, -1)));
  CHECK(sq.degree() == 2);
  for (int eps : {0, 1}) CHECK(pullback_delta(prod, 3, eps, {3}, pullback_pi(p12, sq)) == sq);

  // principal divisors pull back to principal divisors
  for (auto [coarse, fine] : {std::pair{p1_power(2), build_theta(2, 1, {1})},
                              std::pair{p1_power(3), build_gamma(3, 1)},
                              std::pair{p1_power(3), build_theta(3, 1, {1})}}) {
    for (int i = 1; i <= coarse.rank; ++i) {
      auto m = e(coarse.rank, i);
      m[0] += 2;
      CHECK(pullback_subdivision(coarse, fine, principal(coarse, m)) == principal(fine, m));
    }
  }
}

TEST_CASE("pullback identities") {
  CHECK(verify_pullback_identities(p1_power(2), {2}, {2}, {1}).ok());
  for (int n = 1; n <= 3; ++n)
    for (int r = 0; r <= 1; ++r) {
      std::set<int> hi, lo;
      for (int i = 1; i <= n; ++i) (i <= r ? lo : hi).insert(i);
      auto rep = verify_pullback_identities(p1_power(n), hi, hi, lo);
      CHECK(rep.checked > 0);
      CHECK_MESSAGE(rep.ok(), (rep.failures.empty() ? "" : rep.failures[0]));
    }
  CHECK(verify_pullback_identities(zero_fan(1), {}, {}, {}).ok());
  auto theta = build_theta(2, 1, {1});
  CHECK(verify_pullback_identities(theta, {2}, {2}, {1}).ok());
}

TEST_CASE("divisors generate the Chow ring") {
  for (int n = 1; n <= 3; ++n)
    for (int p = 0; p <= n; ++p) {
      std::set<int> hi;
      for (int i = 2; i <= n; ++i) hi.insert(i);
      CHECK(sym_surjectivity(p1_power(n), hi, p));
    }
  CHECK(sym_surjectivity(build_theta(2, 1, {1}), {2}, 1));
  CHECK(sym_surjectivity(build_theta(2, 1, {1}), {2}, 2));

  // cycle_class agrees with the identification on squarefree monomials
  Fan fan = build_gamma(2, 1);
  auto id = sr_identification(fan, 2);
  for (std::size_t c = 0; c < id.chow.cones.size(); ++c) {
    auto rays = fan.cone_rays(id.chow.cones[c]);
    auto x = DivisorCycle::ray(rays[0]) * DivisorCycle::ray(rays[1]);
    CHECK(cycle_class(fan, id.ring, x) ==
          id.ring.presentation.coordinates(id.map.on_generators.col(static_cast<Eigen::Index>(c))));
  }
}

TEST_CASE("cylinder lift") {
  Fan sigma = cylinder_example();
  CHECK(admissibility_report(sigma, {2}, {2}, {1}).admissible());

  auto zero = cylinder_lift(sigma, DivisorCycle(1), {2}, {2}, {1}, 3);
  CHECK(zero.lifted.is_zero());
  CHECK(zero.f == std::vector<LatticePoint>{pt({-1, -1, 0}), pt({-1, 0, 0}), pt({-1, 1, 0}), pt({0, -1, 0})});

  // [V((-1,1))] - [V((-1,-1))] meets V(e2): delta_{2,0} gives [V(-e1)]
  auto bad = DivisorCycle::ray(pt({-1, 1})) - DivisorCycle::ray(pt({-1, -1}));
  CHECK(pullback_delta(sigma, 2, 0, {2}, bad) == DivisorCycle::ray(pt({-1})));
  CHECK(chow_error([&] { cylinder_lift(sigma, bad, {2}, {2}, {1}, 3); }) == ChowError::Kind::PreconditionFailed);

  auto x = DivisorCycle::ray(pt({-1, -1})) - DivisorCycle::ray(pt({0, -1}));
  for (auto& cyc : {x, x * x, Integer(3) * x * DivisorCycle::ray(pt({-1, -1}))}) {
    auto lift = cylinder_lift(sigma, cyc, {2}, {2}, {1}, 3);
    // independent re-evaluation of the conclusions
    CHECK(pullback_delta(lift.fan, 3, 1, {2, 3}, lift.lifted) == cyc);
    CHECK(pullback_delta(lift.fan, 3, 0, {2, 3}, lift.lifted).is_zero());
    CHECK(pullback_delta(lift.fan, 2, 0, {2, 3}, lift.lifted).is_zero());
    CHECK(pullback_delta(lift.fan, 2, 1, {2, 3}, lift.lifted).is_zero());
    CHECK(lift.lifted.degree() == cyc.degree());
  }
}
