// One line per acceptance criterion: PASS/FAIL, wall time, limit.
//
// A criterion listed in `known_red` is one that cannot be met as stated; it
// still runs in full and prints FAIL. The process exit code is nonzero only
// for failures outside that list, or when a known-red criterion fails in a
// way other than the documented one.

#include "toric/chow.hpp"
#include "toric/complexes.hpp"
#include "toric/ordering.hpp"
#include "toric/subdivide.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>

using namespace toric;

namespace {

struct Outcome {
  bool ok = false;
  std::string note;
  // for a known-red criterion: true when it failed exactly as documented
  bool expected_failure = false;
};

LatticePoint e(int n, int i, int sign = 1) { return scale(sign, unit(n, i - 1)); }

std::vector<LatticePoint> axes(int n, int count) {
  std::vector<LatticePoint> out;
  for (int i = 1; i <= count; ++i) out.push_back(e(n, i));
  return out;
}

long binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  long b = 1;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

SubdivisionTrace p1_trace(int n) {
  SubdivisionTrace t;
  t.input = p1_power(n);
  return t;
}

Outcome example_barycentric() {
  Fan a3 = affine_space(3);
  auto res = excluded_barycentric(a3, axes(3, 2), select_all(a3));
  std::set<std::vector<LatticePoint>> got, want;
  for (auto& c : res.fan.max_cones) got.insert(res.fan.cone_rays(c));
  for (auto c : std::vector<std::vector<LatticePoint>>{{e(3, 1), e(3, 2), {1, 1, 1}},
                                                        {e(3, 1), {1, 0, 1}, {1, 1, 1}},
                                                        {e(3, 2), {0, 1, 1}, {1, 1, 1}},
                                                        {e(3, 3), {1, 0, 1}, {1, 1, 1}},
                                                        {e(3, 3), {0, 1, 1}, {1, 1, 1}}}) {
    std::sort(c.begin(), c.end());
    want.insert(c);
  }
  const std::set<Permutation> listed{{1, 2, 3}, {1, 3, 2}, {2, 3, 1}, {3, 1, 2}, {3, 2, 1}};
  auto perms = t_admissible_permutations(2, 3);
  std::set<Permutation> tags(res.alpha.begin(), res.alpha.end());
  const bool ok = got == want && std::set<Permutation>(perms.begin(), perms.end()) == listed && tags == listed &&
                  perms.size() == 5 && res.fan.max_cones.size() == 5;
  return {ok, std::to_string(got.size()) + " cones, " + std::to_string(tags.size()) + " permutations"};
}

Outcome gamma_and_ordering() {
  Fan g = build_gamma(3, 1);
  auto rep = verify_ordering(build_admissible_ordering(build_theta_trace(3, 1, {1}), 1), 1);
  int bad = 0;
  for (auto& c : rep.condition) bad += !c.ok;
  std::ostringstream note;
  note << g.max_cones.size() << " maximal cones in Gamma_{3,1}; conditions failing: " << bad;
  if (!rep.admissible()) note << " (" << rep.summary() << ")";
  return {g.max_cones.size() == 30 && rep.admissible(), note.str()};
}

Outcome closed_form_vs_stars() {
  int compared = 0;
  for (int n = 0; n <= 4; ++n)
    for (int m = 0; m <= n; ++m)
      for (int t = 0; t <= m; ++t) {
        Fan a = affine_space(n);
        auto sel = select_inside(a, {axes(n, m)});
        if (!(excluded_barycentric(a, axes(n, t), sel).fan == excluded_barycentric_by_stars(a, axes(n, t), sel)))
          return {false, "n=" + std::to_string(n) + " m=" + std::to_string(m) + " t=" + std::to_string(t)};
        ++compared;
      }
  return {true, std::to_string(compared) + " (n,m,t) triples"};
}

Outcome chow_ranks() {
  int checked = 0;
  for (int n = 1; n <= 3; ++n) {
    auto fulton = fulton_basis(build_admissible_ordering(p1_trace(n), 0));
    for (int k = 0; k <= n; ++k) {
      auto ch = chow_presentation(p1_power(n), k);
      const long want = binom(n, k);
      if (ch.rank() != want || !ch.presentation.torsion().empty() ||
          static_cast<long>(fulton.cones[k].size()) != want || sr_graded_piece(p1_power(n), n - k).rank() != want)
        return {false, "n=" + std::to_string(n) + " k=" + std::to_string(k)};
      ++checked;
    }
  }
  return {true, std::to_string(checked) + " groups"};
}

std::vector<std::pair<std::string, Fan>> slice_fans() {
  std::vector<std::pair<std::string, Fan>> fans;
  for (int n = 1; n <= 3; ++n) fans.emplace_back("(P1)^" + std::to_string(n), p1_power(n));
  fans.emplace_back("Gamma_{2,1}", build_gamma(2, 1));
  fans.emplace_back("Gamma_{3,1}", build_gamma(3, 1));
  for (int n = 1; n <= 3; ++n) fans.emplace_back("Theta_{" + std::to_string(n) + ",1,(1)}", build_theta(n, 1, {1}));
  return fans;
}

Outcome differentials() {
  int slices = 0;
  for (auto& [name, fan] : slice_fans())
    for (int p = 0; p <= fan.rank; ++p)
      for (bool flat : {false, true}) {
        try {
          ZSlice a = build_z_slice(fan, p, flat, 1, true, 0);
          ZSlice b = build_z_slice(fan, p, flat, 1, false, 1);
          for (int q = 1; q <= a.top(); ++q)
            if (a.d[q] != b.d[q]) return {false, name + " p=" + std::to_string(p) + ": bases disagree"};
          for (int q = 2; q <= a.top(); ++q)
            if (!(a.d[q - 1] * a.d[q]).isZero()) return {false, name + " p=" + std::to_string(p) + ": d o d != 0"};
        } catch (const ComplexError& err) {
          return {false, name + " p=" + std::to_string(p) + ": " + err.what()};
        }
        ++slices;
      }
  return {true, std::to_string(slices) + " slices"};
}

Outcome resolutions() {
  int checked = 0;
  for (int n = 1; n <= 3; ++n) {
    auto ordered = build_admissible_ordering(build_theta_trace(n, 1, {1}), 1);
    const Fan& fan = ordered.fan();
    for (int p = 0; p <= n; ++p)
      for (bool flat : {false, true}) {
        const std::string where = "n=" + std::to_string(n) + " p=" + std::to_string(p) + (flat ? " flat" : "");
        ZSlice z = build_z_slice(fan, p, flat, 1);
        auto h = homology(z);
        for (std::size_t q = 1; q < h.size(); ++q)
          if (!h[q].zero()) return {false, where + ": H_" + std::to_string(q) + " != 0"};
        const Eigen::Index want = flat ? chow_flat(ordered, 1, p).rank_flat : chow_presentation(fan, p).rank();
        if (z.top() < 0) {
          if (want != 0) return {false, where + ": empty slice against a nonzero Chow group"};
          continue;
        }
        try {
          auto id = identify_h0(z);
          if (h[0].rank != want || id.forward.matrix.rows() != want || !h[0].torsion.empty())
            return {false, where + ": H_0 rank " + std::to_string(h[0].rank)};
        } catch (const ComplexError& err) {
          return {false, where + ": " + err.what()};
        }
        ++checked;
      }
  }
  return {true, std::to_string(checked) + " identifications"};
}

Outcome simplicial() {
  auto rep = verify_simplicial_identities(1, {1}, 3);
  return {rep.ok() && !rep.instances.empty(), rep.summary()};
}

Outcome acyclicity() {
  auto rep = verify_acyclicity(1, {1}, 0, 2);
  std::ostringstream note;
  note << "CH-flat route " << (rep.chow_exact ? "exact" : "NOT exact") << ", Z-flat route "
       << (rep.z_exact ? "exact" : "not exact per q (degree 0 keeps a class)") << ", total homology "
       << (rep.total_matches_chow ? "matches" : "differs");
  Outcome out{rep.hypothesis_met && rep.square_zero && rep.chow_exact && rep.agree(), note.str()};
  // documented: the CH statement holds, only the per-q Z rows disagree
  out.expected_failure = rep.square_zero && rep.chow_exact && rep.total_matches_chow && !rep.z_exact;
  return out;
}

Outcome blowups() {
  std::vector<std::pair<const Fan*, RaySet>> centers;
  static const std::vector<Fan> fans{p1_power(3), build_gamma(3, 1), build_theta(3, 1, {1})};
  for (auto& f : fans) {
    FaceLattice lattice(f);
    for (auto& c : lattice.cones(2)) centers.emplace_back(&f, c);
  }
  std::mt19937 rng(20);
  std::shuffle(centers.begin(), centers.end(), rng);
  centers.resize(20);
  for (auto& [fan, sigma] : centers) {
    auto rep = blowup_rank_check(*fan, sigma);
    if (!rep.ok) return {false, describe(*fan, sigma) + ": " + rep.failures[0]};
  }
  return {true, "20 centers over (P1)^3, Gamma_{3,1}, Theta_{3,1,(1)}"};
}

Outcome pullbacks() {
  int generators = 0;
  for (int n = 1; n <= 3; ++n)
    for (int r = 0; r <= 1; ++r) {
      std::set<int> hi, lo;
      for (int i = 1; i <= n; ++i) (i <= r ? lo : hi).insert(i);
      auto rep = verify_pullback_identities(p1_power(n), hi, hi, lo);
      if (!rep.ok()) return {false, rep.failures[0]};
      generators += rep.checked;
    }
  // the worked example: (P1)^2 starred at Cone(-e1,e2), then at Cone(-e1,-e2)
  Fan f = star_subdivision(p1_power(2), std::vector<LatticePoint>{{-1, 0}, {0, 1}}).fan;
  f = star_subdivision(f, std::vector<LatticePoint>{{-1, 0}, {0, -1}}).fan;
  auto x = DivisorCycle::ray({-1, -1}) - DivisorCycle::ray({0, -1});
  int lifts = 0;
  for (auto& cyc : {x, x * x, x * DivisorCycle::ray({-1, -1})}) {
    auto lift = cylinder_lift(f, cyc, {2}, {2}, {1}, 3);
    if (!(pullback_delta(lift.fan, 3, 1, {2, 3}, lift.lifted) == cyc) ||
        !pullback_delta(lift.fan, 3, 0, {2, 3}, lift.lifted).is_zero() ||
        !pullback_delta(lift.fan, 2, 0, {2, 3}, lift.lifted).is_zero() ||
        !pullback_delta(lift.fan, 2, 1, {2, 3}, lift.lifted).is_zero())
      return {false, "cylinder lift conclusions fail"};
    ++lifts;
  }
  return {true, std::to_string(generators) + " generator checks, " + std::to_string(lifts) + " cylinder lifts"};
}

Outcome flat_axis() {
  const int n = 3, r = 1;
  Fan fan = build_theta(n, r, {1});
  // oracle: walk the 2-cones directly
  FaceLattice lattice(fan);
  int bad = 0, candidates = 0;
  for (auto& c : lattice.cones(2))
    for (int k = 0; k < 2; ++k) {
      const LatticePoint& a = fan.rays[c[k]];
      const LatticePoint& other = fan.rays[c[1 - k]];
      bool ok_a = std::none_of(a.begin(), a.begin() + r, [](auto v) { return v > 0; });
      for (int i = 1; i <= n; ++i) ok_a = ok_a && a != e(n, i);
      for (int s = r + 1; s <= n; ++s)
        if (ok_a && a[s - 1] == 0 && other == e(n, s)) ++bad;
    }
  for (auto& a : fan.rays)
    for (int s = r + 1; s <= n; ++s) candidates += a[s - 1] == 0;
  const bool ok = bad == 0 && flat_axis_violations(fan, r).empty();
  return {ok, std::to_string(candidates) + " (ray, s) pairs with a zero s-coordinate, " + std::to_string(bad) + " violations"};
}

Outcome orbit() {
  auto pts = barycentric_orbit(20);
  if (pts.size() != 20) return {false, "wrong number of iterates"};
  bool ok = pts[0].x == 2 && pts[0].y == 1 && pts[0].z == 1;
  // oracle: apply the cone map to the generators
  LatticePoint f2 = e(3, 2), f3 = e(3, 3);
  const LatticePoint e1 = e(3, 1);
  for (int m = 0; m < 20 && ok; ++m) {
    LatticePoint g2 = add(scale(2, e1), add(f2, f3));
    LatticePoint g3 = add(scale(3, e1), add(scale(2, f2), f3));
    f2 = g2;
    f3 = g3;
    ok = pts[m].x == f2[0] && pts[m].y == f2[1] && pts[m].z == f2[2];
    // y/x > 1/10 as an exact comparison
    ok = ok && pts[m].y * 10 > pts[m].x;
  }
  std::ostringstream note;
  note << "y_20/x_20 = " << pts.back().y << "/" << pts.back().x;
  return {ok, note.str()};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "eta-excluded barycentric of A^3: cones and permutations", 1, example_barycentric},
      {2, "Gamma_{3,1} has 30 cones; Theta_{3,1,(1)} ordering admissible", 30, gamma_and_ordering},
      {3, "closed form equals star sequence, t <= m <= n <= 4", 60, closed_form_vs_stars},
      {4, "Chow ranks of (P1)^n three ways", 60, chow_ranks},
      {5, "d o d = 0 and basis independence", 120, differentials},
      {6, "resolutions of CH_p and flat CH_p on Theta_{n,1,(1)}", 300, resolutions},
      {7, "simplicial identities, r=1, d=(1), n <= 3", 120, simplicial},
      {8, "acyclicity, r=1, d=(1), p=0, m <= 2; Z route agrees", 300, acyclicity},
      {9, "blow-up rank identity at 20 centers", 300, blowups},
      {10, "pullback identities and cylinder lift", 60, pullbacks},
      {11, "no flat ray cones with its axis ray on Theta_{3,1,(1)}", 30, flat_axis},
      {12, "barycentric orbit stays away from [1:0:0]", 1, orbit},
  };
  const std::set<int> known_red{8};

  int unexpected = 0;
  for (auto& c : criteria) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& err) {
      out = {false, std::string("exception: ") + err.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.limit;
    const bool pass = out.ok && in_time;
    std::string tag;
    if (!in_time) out.note += "; over the time limit";
    if (!pass && known_red.count(c.id)) {
      if (out.expected_failure && in_time)
        tag = " [known red, see README]";
      else
        ++unexpected;
    } else if (!pass) {
      ++unexpected;
    }
    std::printf("%s %2d %-62s %8.2fs (limit %gs) %s%s\n", pass ? "PASS" : "FAIL", c.id, c.name, secs, c.limit,
                out.note.c_str(), tag.c_str());
    std::fflush(stdout);
  }
  return unexpected == 0 ? 0 : 1;
}
