#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "toric/ordering.hpp"

#include <functional>
#include <random>

using namespace toric;

namespace {

LatticePoint e(int n, int i, int sign = 1) { return scale(sign, unit(n, i - 1)); }

RaySet cone_of(const Fan& f, std::vector<LatticePoint> rays) {
  auto c = f.find(rays);
  REQUIRE(c.has_value());
  return *c;
}

FanError::Kind error_kind(const std::function<void()>& f) {
  try {
    f();
  } catch (const FanError& err) {
    return err.kind;
  }
  FAIL("no FanError thrown");
  return FanError::Kind::PreconditionFailed;
}

SubdivisionTrace gamma_trace(int n, int r) {
  SubdivisionTrace t;
  t.input = p1_power(n);
  std::vector<LatticePoint> eta, avoid;
  for (int i = 1; i <= n; ++i) (i <= r ? avoid : eta).push_back(e(n, i));
  t.steps.push_back(excluded_barycentric(t.input, eta, select_avoiding(t.input, avoid)));
  return t;
}

// Geometric check of condition (i): every ray of ess(sigma) lies in tau as a point set.
bool fulton_upward_closed(const OrderedFan& o) {
  const Fan& f = o.fan();
  for (std::size_t s = 0; s < f.max_cones.size(); ++s) {
    auto ess = f.cone_rays(o.ess(static_cast<int>(s)));
    for (std::size_t t = 0; t < f.max_cones.size(); ++t) {
      if (s == t) continue;
      auto tau = f.cone_rays(f.max_cones[t]);
      bool inside = std::all_of(ess.begin(), ess.end(),
                                [&](const LatticePoint& v) { return cone_contains(tau, v); });
      if (inside && !o.less(static_cast<int>(s), static_cast<int>(t))) return false;
    }
  }
  return true;
}

// Literal Sigma-open test on every cone: Cone(sigma, e_i) is a cone for some i > r.
std::set<RaySet> open_by_definition(const Fan& f, int r) {
  std::set<RaySet> out;
  SigmaSplit any = sigma_split(f, 0);  // every face, via the r = 0 split plus flat part
  std::set<RaySet> faces(any.open.cones.begin(), any.open.cones.end());
  faces.insert(any.flat.begin(), any.flat.end());
  for (const RaySet& c : faces)
    for (int i = r + 1; i <= f.rank; ++i) {
      auto idx = f.ray_index(e(f.rank, i));
      if (!idx) continue;
      RaySet g = c;
      if (!std::binary_search(g.begin(), g.end(), *idx)) g.insert(std::lower_bound(g.begin(), g.end(), *idx), *idx);
      if (f.contains_set(g)) {
        out.insert(c);
        break;
      }
    }
  return out;
}

}  // namespace

TEST_CASE("wall neighbors") {
  Fan p2 = p1_power(2);
  RaySet s = cone_of(p2, {e(2, 1), e(2, 2)});
  CHECK(p2.cone_rays(wall_neighbor(p2, s, *p2.ray_index(e(2, 1)))) ==
        p2.cone_rays(cone_of(p2, {e(2, 1, -1), e(2, 2)})));

  Fan p1 = p1_power(1);
  CHECK(p1.cone_rays(wall_neighbor(p1, {*p1.ray_index(e(1, 1))}, *p1.ray_index(e(1, 1)))) ==
        std::vector<LatticePoint>{e(1, 1, -1)});

  // map-based table against the scanning lookup
  for (const Fan& f : {build_gamma(3, 1), build_theta(2, 1, {1})}) {
    auto table = wall_neighbors(f);
    for (std::size_t c = 0; c < f.max_cones.size(); ++c) {
      CHECK(table[c].size() == 3 - (f.rank == 2 ? 1 : 0));
      for (std::size_t k = 0; k < f.max_cones[c].size(); ++k) {
        RaySet nb = wall_neighbor(f, f.max_cones[c], f.max_cones[c][k]);
        CHECK(f.max_cones[table[c][k]] == nb);
        CHECK(!std::binary_search(nb.begin(), nb.end(), f.max_cones[c][k]));
      }
    }
  }

  Fan a2 = affine_space(2);
  CHECK(error_kind([&] { wall_neighbors(a2); }) == FanError::Kind::NotComplete);
  CHECK(error_kind([&] { wall_neighbor(a2, a2.max_cones[0], a2.max_cones[0][0]); }) ==
        FanError::Kind::NotComplete);
}

TEST_CASE("sign-vector order on (P^1)^n") {
  Fan p1 = p1_power(1);
  OrderedFan o1(p1, 0, sign_vector_sequence(p1));
  CHECK(p1.cone_rays(p1.max_cones[o1.sequence()[0]]) == std::vector<LatticePoint>{e(1, 1)});
  CHECK(p1.cone_rays(p1.max_cones[o1.sequence()[1]]) == std::vector<LatticePoint>{e(1, 1, -1)});
  CHECK(o1.ess(o1.sequence()[0]).empty());
  CHECK(o1.ess(o1.sequence()[1]) == p1.max_cones[o1.sequence()[1]]);

  Fan p2 = p1_power(2);
  OrderedFan o2(p2, 0, sign_vector_sequence(p2));
  CHECK(p2.max_cones[o2.sequence().front()] == cone_of(p2, {e(2, 1), e(2, 2)}));
  CHECK(p2.max_cones[o2.sequence().back()] == cone_of(p2, {e(2, 1, -1), e(2, 2, -1)}));

  // oracle: eta_x > eta_y iff x_i < y_i at the first difference
  for (int n = 1; n <= 3; ++n) {
    Fan p = p1_power(n);
    OrderedFan o(p, 0, sign_vector_sequence(p));
    auto signs = [&](int c) {
      std::vector<int> x(n);
      for (int v : p.max_cones[c])
        for (int i = 0; i < n; ++i)
          if (p.rays[v][i] != 0) x[i] = static_cast<int>(p.rays[v][i]);
      return x;
    };
    for (std::size_t a = 0; a < p.max_cones.size(); ++a) {
      auto x = signs(static_cast<int>(a));
      std::vector<LatticePoint> expect;
      for (int i = 0; i < n; ++i)
        if (x[i] == -1) expect.push_back(e(n, i + 1, -1));
      std::sort(expect.begin(), expect.end());
      CHECK(p.cone_rays(o.ess(static_cast<int>(a))) == expect);
      for (std::size_t b = 0; b < p.max_cones.size(); ++b) {
        if (a == b) continue;
        auto y = signs(static_cast<int>(b));
        int i = 0;
        while (x[i] == y[i]) ++i;
        CHECK(o.less(static_cast<int>(b), static_cast<int>(a)) == (x[i] < y[i]));
      }
    }
    auto rep = verify_ordering(o, n);
    CHECK_MESSAGE(rep.preadmissible(), rep.summary());
    CHECK(fulton_upward_closed(o));
  }

  CHECK(error_kind([] { sign_vector_sequence(build_gamma(2, 1)); }) == FanError::Kind::MissingProvenance);
}

TEST_CASE("reversed order breaks the least-element condition") {
  Fan p2 = p1_power(2);
  auto seq = sign_vector_sequence(p2);
  std::reverse(seq.begin(), seq.end());
  OrderedFan o(p2, 0, seq);
  auto rep = verify_ordering(o, 0);
  CHECK_FALSE(rep.condition[1].ok);
  CHECK_FALSE(rep.preadmissible());
  CHECK(!rep.condition[1].witness.empty());
}

TEST_CASE("orderings must be permutations") {
  Fan p2 = p1_power(2);
  CHECK_THROWS_AS(OrderedFan(p2, 0, {0, 1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(OrderedFan(p2, 0, {0, 1, 1, 2}), std::invalid_argument);
}

TEST_CASE("sigma split") {
  Fan p2 = p1_power(2);
  auto s = sigma_split(p2, 1);
  std::set<RaySet> open_max;
  for (int c : s.open_max) open_max.insert(p2.max_cones[c]);
  CHECK(open_max == std::set<RaySet>{cone_of(p2, {e(2, 1), e(2, 2)}), cone_of(p2, {e(2, 1, -1), e(2, 2)})});
  CHECK(s.flat_max.size() == 2);

  auto none = sigma_split(p2, 2);
  CHECK(none.open.cones.empty());
  CHECK(none.open_max.empty());
  CHECK(none.flat_max.size() == 4);

  Fan theta = build_theta(2, 1, {1});
  auto ts = sigma_split(theta, 1);
  const int e2 = *theta.ray_index(e(2, 2));
  std::size_t with_e2 = 0;
  for (auto& c : theta.max_cones) with_e2 += std::binary_search(c.begin(), c.end(), e2);
  CHECK(ts.flat_max.size() == theta.max_cones.size() - with_e2);

  // literal definition on every cone, and the open part is closed under faces
  struct Case { Fan f; int r; };
  for (const Case& k : {Case{theta, 1}, Case{build_gamma(3, 1), 1}, Case{build_theta(3, 1, {1}), 1},
                        Case{build_theta(3, 2, {1}), 2}, Case{build_theta(3, 0, {1}), 0}}) {
    auto sp = sigma_split(k.f, k.r);
    CHECK(sp.open.cones == open_by_definition(k.f, k.r));
    for (const RaySet& c : sp.open.cones)
      for (std::size_t j = 0; j < c.size(); ++j) {
        RaySet face = c;
        face.erase(face.begin() + static_cast<long>(j));
        CHECK(sp.open.cones.count(face) == 1);
      }
    for (const RaySet& c : sp.flat) CHECK(sp.open.cones.count(c) == 0);
  }
}

TEST_CASE("admissible orderings along the Theta pipeline") {
  struct Case { int n, r; std::vector<int> d; };
  for (const Case& k : {Case{1, 0, {}}, Case{1, 1, {1}}, Case{2, 1, {}}, Case{2, 1, {1}}, Case{2, 0, {1}},
                        Case{2, 2, {1}}, Case{2, 1, {1, 2}}, Case{3, 1, {1}}, Case{3, 0, {1}},
                        Case{3, 2, {1}}, Case{3, 1, {2}}}) {
    CAPTURE(k.n);
    CAPTURE(k.r);
    CAPTURE(k.d.size());
    auto trace = build_theta_trace(k.n, k.r, k.d);
    OrderedFan pre = build_preadmissible_ordering(trace, k.r);
    auto pre_rep = verify_ordering(pre, k.r);
    CHECK_MESSAGE(pre_rep.preadmissible(), pre_rep.summary());

    OrderedFan adm = build_admissible_ordering(trace, k.r);
    auto rep = verify_ordering(adm, k.r);
    CHECK_MESSAGE(rep.admissible(), rep.summary());
    CHECK(adm.fan() == trace.output());
    if (k.n <= 3 && adm.fan().max_cones.size() <= 200) CHECK(fulton_upward_closed(adm));

    // the partition keeps ess: wall comparisons agree between the two orders
    for (std::size_t c = 0; c < adm.fan().max_cones.size(); ++c)
      CHECK(adm.ess(static_cast<int>(c)) == pre.ess(static_cast<int>(c)));

    // condition (iv) directly
    for (std::size_t c = 0; c < adm.fan().max_cones.size(); ++c)
      for (std::size_t j = 0; j < adm.fan().max_cones[c].size(); ++j) {
        const LatticePoint& v = adm.fan().rays[adm.fan().max_cones[c][j]];
        for (int i = k.r + 1; i <= k.n; ++i)
          if (v == e(k.n, i)) CHECK(adm.less(static_cast<int>(c), adm.neighbor(static_cast<int>(c), static_cast<int>(j))));
      }
  }
}

TEST_CASE("Gamma orderings") {
  for (auto [n, r] : {std::pair{2, 1}, {3, 1}, {3, 2}, {3, 0}, {2, 0}}) {
    CAPTURE(n);
    CAPTURE(r);
    auto trace = gamma_trace(n, r);
    CHECK(trace.output() == build_gamma(n, r));
    OrderedFan o = build_admissible_ordering(trace, r);
    auto rep = verify_ordering(o, r);
    CHECK_MESSAGE(rep.admissible(), rep.summary());
    CHECK(fulton_upward_closed(o));
  }
  Fan g = build_gamma(3, 1);
  for (auto& row : wall_neighbors(g)) CHECK(row.size() == 3);
}

TEST_CASE("ordering needs a (P^1)^n trace") {
  SubdivisionTrace bare;
  bare.input = build_gamma(2, 1);
  CHECK(error_kind([&] { build_admissible_ordering(bare, 1); }) == FanError::Kind::MissingProvenance);

  auto trace = build_theta_trace(2, 1, {1});
  trace.steps[0].splits.pop_back();
  CHECK(error_kind([&] { build_admissible_ordering(trace, 1); }) == FanError::Kind::MissingProvenance);
}

TEST_CASE("children of one parent stay contiguous") {
  auto trace = build_theta_trace(3, 1, {1});
  OrderedFan o = build_preadmissible_ordering(trace, 1);
  const BaryResult& last = trace.steps.back();
  std::vector<int> parents;
  for (int c : o.sequence()) parents.push_back(last.parent[c]);
  std::set<int> closed;
  for (std::size_t k = 0; k < parents.size(); ++k) {
    if (k > 0 && parents[k] != parents[k - 1]) closed.insert(parents[k - 1]);
    CHECK(closed.count(parents[k]) == 0);
  }
  CHECK(o.fan().cone_rays(o.fan().max_cones[o.sequence().front()]) ==
        std::vector<LatticePoint>{e(3, 3), e(3, 2), e(3, 1)});
}

TEST_CASE("perturbed orderings are rejected") {
  auto trace = build_theta_trace(3, 1, {1});
  OrderedFan good = build_admissible_ordering(trace, 1);
  std::mt19937 rng(48);
  int rejected = 0;
  for (int trial = 0; trial < 20; ++trial) {
    auto seq = good.sequence();
    std::shuffle(seq.begin() + 1, seq.end(), rng);
    if (verify_ordering(OrderedFan(good.fan(), 1, seq), 1).admissible()) continue;
    ++rejected;
  }
  CHECK(rejected == 20);

  // one flat cone pulled in front of the open block
  auto split = sigma_split(good.fan(), 1);
  auto seq = good.sequence();
  auto it = std::find(seq.begin(), seq.end(), split.flat_max.front());
  std::rotate(seq.begin() + 1, it, it + 1);
  auto rep = verify_ordering(OrderedFan(good.fan(), 1, seq), 1);
  CHECK_FALSE(rep.condition[5].ok);
}
