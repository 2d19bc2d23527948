#include "toric/subdivide.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <stdexcept>

namespace toric {

namespace {

std::vector<LatticePoint> axis_rays(int n, int from, int to) {
  std::vector<LatticePoint> out;
  for (int i = from; i < to; ++i) out.push_back(unit(n, i));
  return out;
}

std::set<int> indices_of(const Fan& fan, const std::vector<LatticePoint>& rays) {
  std::set<int> out;
  for (auto& v : rays)
    if (auto i = fan.ray_index(v)) out.insert(*i);
  return out;
}

std::vector<RaySet> all_cones(const FaceLattice& lattice) {
  std::vector<RaySet> out;
  for (int d = 0; d <= lattice.fan().max_dim(); ++d)
    for (auto& c : lattice.cones(d)) out.push_back(c);
  return out;
}

RaySet subset(const RaySet& c, unsigned mask) {
  RaySet s;
  for (std::size_t i = 0; i < c.size(); ++i)
    if (mask >> i & 1u) s.push_back(c[i]);
  return s;
}

int max_cone_position(const Fan& fan, const RaySet& c) {
  auto it = std::lower_bound(fan.max_cones.begin(), fan.max_cones.end(), c);
  if (it == fan.max_cones.end() || *it != c) return -1;
  return static_cast<int>(it - fan.max_cones.begin());
}

}  // namespace

StarResult star_subdivision(const Fan& fan, const RaySet& sigma) {
  if (!fan.contains_set(sigma))
    throw FanError(FanError::Kind::ConeNotInFan, "star center is not a cone of the fan");
  if (sigma.size() < 2)
    throw FanError(FanError::Kind::DimensionTooLow, "star subdivision needs a cone of dimension >= 2");
  LatticePoint center(fan.rank, 0);
  for (int v : sigma) center = add(center, fan.rays[v]);
  const std::int64_t g = content(center);
  for (auto& x : center) x /= g;

  std::vector<std::vector<LatticePoint>> cones;
  std::vector<std::vector<std::vector<LatticePoint>>> pieces(fan.max_cones.size());
  for (std::size_t k = 0; k < fan.max_cones.size(); ++k) {
    const RaySet& m = fan.max_cones[k];
    if (!std::includes(m.begin(), m.end(), sigma.begin(), sigma.end())) {
      pieces[k].push_back(fan.cone_rays(m));
      continue;
    }
    for (int f : sigma) {
      std::vector<LatticePoint> c;
      for (int v : m)
        if (v != f) c.push_back(fan.rays[v]);
      c.push_back(center);
      pieces[k].push_back(std::move(c));
    }
  }
  for (auto& p : pieces) cones.insert(cones.end(), p.begin(), p.end());

  StarResult out;
  out.fan = make_fan(fan.rank, cones, false, fan.axes);
  out.center = center;
  for (std::size_t k = 0; k < fan.max_cones.size(); ++k) {
    auto& dst = out.replaced[fan.max_cones[k]];
    for (auto& c : pieces[k]) dst.push_back(*out.fan.find(c));
  }
  return out;
}

StarResult star_subdivision(const Fan& fan, const std::vector<LatticePoint>& sigma) {
  auto s = fan.find(sigma);
  if (!s) throw FanError(FanError::Kind::ConeNotInFan, "star center is not a cone of the fan");
  return star_subdivision(fan, *s);
}

std::vector<Permutation> t_admissible_permutations(int t, int m) {
  if (t < 0 || t > m) throw std::invalid_argument("need 0 <= t <= m");
  Permutation p(m);
  std::iota(p.begin(), p.end(), 1);
  if (t == m) return {p};
  std::vector<Permutation> out;
  do {
    const int c = leading_block(t, m, p);
    if (std::is_sorted(p.begin(), p.begin() + c)) out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

int leading_block(int t, int m, const Permutation& alpha) {
  if (t == m) return m;
  int c = 0;
  while (c < m && alpha[c] <= t) ++c;
  return c;
}

std::vector<LatticePoint> alpha_cone(const std::vector<LatticePoint>& f, int t, int m,
                                     const Permutation& alpha) {
  const int c = leading_block(t, m, alpha);
  std::vector<LatticePoint> out;
  LatticePoint sum(f.empty() ? 0 : f[0].size(), 0);
  for (int i = 0; i < m; ++i) {
    const LatticePoint& v = f[alpha[i] - 1];
    sum = add(sum, v);
    out.push_back(i < c ? v : sum);
  }
  for (std::size_t i = m; i < f.size(); ++i) out.push_back(f[i]);
  return out;
}

SubfanSelection select_all(const Fan& fan) {
  FaceLattice lattice(fan);
  SubfanSelection s;
  for (auto& c : all_cones(lattice)) s.cones.insert(c);
  return s;
}

SubfanSelection select_avoiding(const Fan& fan, const std::vector<LatticePoint>& excluded) {
  const auto bad = indices_of(fan, excluded);
  FaceLattice lattice(fan);
  SubfanSelection s;
  for (auto& c : all_cones(lattice))
    if (std::none_of(c.begin(), c.end(), [&](int v) { return bad.count(v) > 0; })) s.cones.insert(c);
  return s;
}

SubfanSelection select_inside(const Fan& fan, const std::vector<std::vector<LatticePoint>>& containers,
                              const std::vector<LatticePoint>& excluded) {
  const auto bad = indices_of(fan, excluded);
  // which containers hold each ray
  std::vector<std::vector<char>> holders(fan.rays.size(), std::vector<char>(containers.size(), 0));
  for (std::size_t v = 0; v < fan.rays.size(); ++v)
    for (std::size_t k = 0; k < containers.size(); ++k)
      holders[v][k] = cone_contains(containers[k], fan.rays[v]);
  FaceLattice lattice(fan);
  SubfanSelection s;
  for (auto& c : all_cones(lattice)) {
    if (std::any_of(c.begin(), c.end(), [&](int v) { return bad.count(v) > 0; })) continue;
    bool inside = c.empty();
    for (std::size_t k = 0; k < containers.size() && !inside; ++k)
      inside = std::all_of(c.begin(), c.end(), [&](int v) { return holders[v][k] != 0; });
    if (inside) s.cones.insert(c);
  }
  return s;
}

BaryResult excluded_barycentric(const Fan& fan, const std::vector<LatticePoint>& eta,
                                const SubfanSelection& selection) {
  if (!fan.contains(eta)) throw FanError(FanError::Kind::ConeNotInFan, "eta is not a cone of the fan");
  const auto eta_idx = indices_of(fan, eta);

  BaryResult out;
  std::vector<std::vector<LatticePoint>> cones;
  std::vector<std::pair<int, Permutation>> tags;
  for (std::size_t k = 0; k < fan.max_cones.size(); ++k) {
    const RaySet& sigma = fan.max_cones[k];
    RaySet a;
    for (unsigned mask = 0; mask < (1u << sigma.size()); ++mask) {
      RaySet s = subset(sigma, mask);
      if (!selection.contains(s)) continue;
      RaySet merged;
      std::set_union(a.begin(), a.end(), s.begin(), s.end(), std::back_inserter(merged));
      a = std::move(merged);
    }
    // a union lying inside eta is never subdivided, so it need not be selected
    const bool inside_eta = std::all_of(a.begin(), a.end(), [&](int v) { return eta_idx.count(v) > 0; });
    if (!selection.contains(a) && !inside_eta)
      throw FanError(FanError::Kind::InvalidSelection,
                     "no largest selected face inside " + describe(fan, sigma));

    ConeSplit split;
    split.cone = sigma;
    RaySet first, second, rest;
    for (int v : sigma) {
      const bool in_a = std::binary_search(a.begin(), a.end(), v);
      if (in_a && eta_idx.count(v)) first.push_back(v);
      else if (in_a) second.push_back(v);
      else rest.push_back(v);
    }
    for (auto* g : {&first, &second, &rest})
      for (int v : *g) split.f.push_back(fan.rays[v]);
    split.t = static_cast<int>(first.size());
    split.m = static_cast<int>(first.size() + second.size());
    for (auto& alpha : t_admissible_permutations(split.t, split.m)) {
      cones.push_back(alpha_cone(split.f, split.t, split.m, alpha));
      tags.emplace_back(static_cast<int>(k), alpha);
    }
    out.splits.push_back(std::move(split));
  }

  out.fan = make_fan(fan.rank, cones, false, fan.axes);
  if (out.fan.max_cones.size() != cones.size())
    throw std::logic_error("closed-form cones are not all maximal");
  out.parent.assign(cones.size(), -1);
  out.alpha.assign(cones.size(), {});
  for (std::size_t i = 0; i < cones.size(); ++i) {
    const int pos = max_cone_position(out.fan, *out.fan.find(cones[i]));
    out.parent[pos] = tags[i].first;
    out.alpha[pos] = tags[i].second;
  }
  return out;
}

Fan excluded_barycentric_by_stars(const Fan& fan, const std::vector<LatticePoint>& eta,
                                  const SubfanSelection& selection) {
  const auto eta_idx = indices_of(fan, eta);
  std::vector<std::vector<LatticePoint>> centers;
  for (auto& c : selection.cones) {
    if (c.size() < 2) continue;
    if (std::all_of(c.begin(), c.end(), [&](int v) { return eta_idx.count(v) > 0; })) continue;
    centers.push_back(fan.cone_rays(c));
  }
  std::stable_sort(centers.begin(), centers.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a < b;
  });
  Fan cur = fan;
  for (auto& c : centers) cur = star_subdivision(cur, c).fan;
  return cur;
}

SubdivisionTrace sd_operator(const Fan& fan, const std::vector<LatticePoint>& eta, int u, int d,
                             int iterations, const std::vector<LatticePoint>& excluded) {
  if (u < 1 || d < 1 || iterations < 0) throw std::invalid_argument("sd needs u >= 1, d >= 1");
  SubdivisionTrace trace;
  trace.input = fan;
  Fan cur = fan;
  for (int it = 0; it < iterations; ++it) {
    const Fan start = cur;
    std::vector<std::vector<LatticePoint>> containers;
    if (u <= start.max_dim()) {
      const auto bad = indices_of(start, excluded);
      FaceLattice lattice(start);
      for (auto& c : lattice.cones(u))
        if (std::none_of(c.begin(), c.end(), [&](int v) { return bad.count(v) > 0; }))
          containers.push_back(start.cone_rays(c));
    }
    for (int k = 1; k <= d; ++k) {
      SubfanSelection sel = k == 1 ? select_avoiding(cur, excluded) : select_inside(cur, containers, excluded);
      trace.steps.push_back(excluded_barycentric(cur, eta, sel));
      cur = trace.steps.back().fan;
    }
  }
  return trace;
}

Fan build_gamma(int n, int r) {
  if (r < 0 || r > n) throw std::invalid_argument("need 0 <= r <= n");
  Fan p = p1_power(n);
  return excluded_barycentric(p, axis_rays(n, r, n), select_avoiding(p, axis_rays(n, 0, r))).fan;
}

namespace {

// Apply the Theta recipe to `start`; rightmost operator first.
SubdivisionTrace theta_route(const Fan& start, int n, int r, const std::vector<int>& d,
                             const std::vector<LatticePoint>& excluded) {
  SubdivisionTrace trace;
  trace.input = start;
  const int s = static_cast<int>(d.size()) + 1;
  const auto eta = axis_rays(n, r, n);
  Fan cur = start;
  for (int j = s; j >= 2; --j) {
    const int u = std::min(j, n - r + 1);
    const int iterations = r + s + 1 - j;
    auto part = sd_operator(cur, eta, u, d[j - 2], iterations, excluded);
    for (auto& st : part.steps) trace.steps.push_back(std::move(st));
    cur = trace.output();
  }
  return trace;
}

}  // namespace

SubdivisionTrace build_theta_trace(int n, int r, const std::vector<int>& d) {
  if (r < 0 || r > n) throw std::invalid_argument("need 0 <= r <= n");
  for (int x : d)
    if (x < 1) throw std::invalid_argument("d entries must be positive");
  auto full = theta_route(p1_power(n), n, r, d, axis_rays(n, 0, r));
  auto half = theta_route(half_space_fan(n, r), n, r, d, {});
  if (extend_standard(half.output(), r) != full.output())
    throw std::logic_error("full-fan and half-space constructions of Theta disagree");
  return full;
}

Fan build_theta(int n, int r, const std::vector<int>& d) { return build_theta_trace(n, r, d).output(); }

bool is_rigid_ray(const LatticePoint& f, const std::vector<int>& rigid_set) {
  for (int i : rigid_set)
    if (f[i - 1] != f[rigid_set.front() - 1]) return false;
  return true;
}

RigidityReport rigidity_halfspace_check(const std::vector<LatticePoint>& rays,
                                        const std::vector<int>& rigid_set,
                                        const std::optional<HalfspaceSpec>& halfspace) {
  RigidityReport rep;
  if (rays.empty()) return rep;
  const int n = static_cast<int>(rays.front().size());
  rep.rigid = true;
  for (int i : rigid_set)
    if (std::find(rays.begin(), rays.end(), unit(n, i - 1)) == rays.end()) rep.rigid = false;
  for (auto& f : rays) {
    const bool axis = std::any_of(rigid_set.begin(), rigid_set.end(),
                                  [&](int i) { return f == unit(n, i - 1); });
    if (!axis && !is_rigid_ray(f, rigid_set)) rep.rigid = false;
  }
  rep.in_orthant = std::all_of(rays.begin(), rays.end(), [](const LatticePoint& f) {
    return std::all_of(f.begin(), f.end(), [](std::int64_t x) { return x >= 0; });
  });
  if (halfspace) {
    rep.in_halfspace = rep.in_orthant;
    for (auto& f : rays) {
      Integer head = 0, tail = 0;
      for (int i = 0; i < n; ++i) (i < halfspace->t ? head : tail) += f[i];
      const Integer lhs = halfspace->eps_num * head, rhs = halfspace->eps_den * tail;
      switch (halfspace->side) {
        case HalfspaceSpec::Side::Plus: rep.in_halfspace = rep.in_halfspace && lhs >= rhs; break;
        case HalfspaceSpec::Side::Minus: rep.in_halfspace = rep.in_halfspace && lhs <= rhs; break;
        case HalfspaceSpec::Side::Zero: rep.in_halfspace = rep.in_halfspace && lhs == rhs; break;
      }
    }
  }
  return rep;
}

bool has_flag_structure(const std::vector<LatticePoint>& rays, int n) {
  if (static_cast<int>(rays.size()) != n) return false;
  std::vector<int> axes;
  std::vector<LatticePoint> others;
  for (auto& f : rays) {
    if (std::any_of(f.begin(), f.end(), [](std::int64_t x) { return x < 0; })) return false;
    bool axis = false;
    for (int i = 0; i < n; ++i)
      if (f == unit(n, i)) {
        axes.push_back(i + 1);
        axis = true;
      }
    if (!axis) others.push_back(f);
  }
  for (auto& f : others)
    if (!axes.empty() && !is_rigid_ray(f, axes)) return false;
  auto support = [](const LatticePoint& f, std::vector<char>& mask) {
    int added = 0;
    for (std::size_t i = 0; i < f.size(); ++i)
      if (f[i] != 0 && !mask[i]) {
        mask[i] = 1;
        ++added;
      }
    return added;
  };
  std::sort(others.begin(), others.end());
  do {
    std::vector<char> mask(n, 0);
    for (int i : axes) mask[i - 1] = 1;
    int covered = static_cast<int>(axes.size());
    bool ok = true;
    for (std::size_t k = 0; k < others.size() && ok; ++k) {
      const int index = static_cast<int>(axes.size() + k) + 1;
      const auto nonzero = std::count_if(others[k].begin(), others[k].end(), [](std::int64_t x) { return x != 0; });
      covered += support(others[k], mask);
      ok = nonzero >= index && covered <= index;
    }
    if (ok) return true;
  } while (std::next_permutation(others.begin(), others.end()));
  return false;
}

std::vector<std::pair<LatticePoint, int>> flat_axis_violations(const Fan& fan, int r) {
  const int n = fan.rank;
  std::vector<std::pair<LatticePoint, int>> out;
  for (auto& a : fan.rays) {
    bool skip = false;
    for (int i = 0; i < r; ++i) skip = skip || a[i] > 0;
    for (int i = 0; i < n; ++i) skip = skip || a == unit(n, i);
    if (skip) continue;
    for (int s = r; s < n; ++s)
      if (a[s] == 0 && fan.contains({a, unit(n, s)})) out.emplace_back(a, s + 1);
  }
  return out;
}

LiftResult lift_subdivision_along_ray(const Fan& fan, const LatticePoint& ray,
                                      const std::vector<std::vector<LatticePoint>>& plan) {
  if (!fan.ray_index(ray)) throw FanError(FanError::Kind::RayMissing, "ray " + to_string(ray) + " is not in the fan");
  LiftResult out;
  out.fan = fan;
  out.downstairs = quotient_fan(fan, {*fan.ray_index(ray)}).fan;
  for (auto& target : plan) {
    if (target.size() != 2) throw FanError(FanError::Kind::LiftFailed, "planned cones must be 2-dimensional");
    try {
      out.downstairs = star_subdivision(out.downstairs, target).fan;
    } catch (const FanError& e) {
      throw FanError(FanError::Kind::LiftFailed, std::string("planned cone is not a cone downstairs: ") + e.what());
    }
    const int a = *out.fan.ray_index(ray);
    auto q = quotient_fan(out.fan, {a});
    std::vector<LatticePoint> want = target;
    std::sort(want.begin(), want.end());
    std::optional<RaySet> found;
    for (auto& [up, down] : q.correspondence)
      if (up.size() == 3 && q.fan.cone_rays(down) == want) {
        if (found) throw FanError(FanError::Kind::LiftFailed, "lifted 2-cone is not unique");
        RaySet s;
        for (int v : up)
          if (v != a) s.push_back(v);
        found = s;
      }
    if (!found) throw FanError(FanError::Kind::LiftFailed, "no 2-cone upstairs maps onto the planned cone");
    out.fan = star_subdivision(out.fan, *found).fan;
  }
  out.quotient = quotient_fan(out.fan, {*out.fan.ray_index(ray)}).fan;
  if (out.quotient != out.downstairs)
    throw FanError(FanError::Kind::PropertyViolated, "quotient of the lifted fan differs from the planned subdivision");
  return out;
}

CylinderResult cylinder_subdivision(const Fan& fan, int t, const std::set<int>& i0,
                                    const std::set<int>& i2,
                                    const std::optional<std::vector<LatticePoint>>& order) {
  const int n = fan.rank;
  std::set<LatticePoint> skipped;
  for (const auto* labels : {&i0, &i2})
    for (int label : *labels) skipped.insert(unit(n, fan.axis_position(label)));
  std::vector<LatticePoint> candidates;
  for (auto& v : fan.rays)
    if (!skipped.count(v)) candidates.push_back(v);
  std::vector<LatticePoint> chosen = candidates;
  if (order) {
    chosen = *order;
    std::vector<LatticePoint> sorted = chosen;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != candidates)
      throw FanError(FanError::Kind::PreconditionFailed, "ray order is not a permutation of the eligible rays");
  }

  CylinderResult out;
  const LatticePoint et = unit(n + 1, n);
  for (auto& v : chosen) out.f.push_back(insert_coordinate(v, n));
  out.fan = product_with_p1(fan, t);
  for (auto it = out.f.rbegin(); it != out.f.rend(); ++it) out.fan = star_subdivision(out.fan, {*it, et}).fan;

  // the cones inside the old hyperplane are exactly the old fan
  std::vector<std::vector<LatticePoint>> flat, old;
  FaceLattice lattice(out.fan);
  for (auto& c : all_cones(lattice)) {
    auto rays = out.fan.cone_rays(c);
    if (std::all_of(rays.begin(), rays.end(), [&](const LatticePoint& v) { return v[n] == 0; }))
      flat.push_back(std::move(rays));
  }
  for (auto& m : fan.max_cones) {
    std::vector<LatticePoint> c;
    for (int v : m) c.push_back(insert_coordinate(fan.rays[v], n));
    old.push_back(std::move(c));
  }
  if (make_fan(n + 1, flat, false) != make_fan(n + 1, old, false))
    throw FanError(FanError::Kind::PropertyViolated, "cones in the base hyperplane differ from the input fan");

  // no cone away from the excluded axes spans a cone with e_t
  FaceLattice base(fan);
  for (auto& c : all_cones(base)) {
    if (c.empty()) continue;
    auto rays = fan.cone_rays(c);
    if (std::any_of(rays.begin(), rays.end(), [&](const LatticePoint& v) { return skipped.count(v) > 0; })) continue;
    std::vector<LatticePoint> up;
    for (auto& v : rays) up.push_back(insert_coordinate(v, n));
    up.push_back(et);
    if (out.fan.contains(up))
      throw FanError(FanError::Kind::PropertyViolated, "Cone(" + describe(fan, c) + ", e_t) survived");
  }
  return out;
}

std::vector<OrbitPoint> barycentric_orbit(int m_max) {
  using M2 = std::array<Integer, 4>;  // row-major 2x2
  auto mul = [](const M2& a, const M2& b) {
    return M2{a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
              a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
  };
  const M2 step{1, 1, 2, 1};
  M2 power{1, 0, 0, 1};    // M^m
  M2 partial{0, 0, 0, 0};  // M^0 + ... + M^{m-1}
  std::vector<OrbitPoint> out;
  for (int m = 1; m <= m_max; ++m) {
    for (int i = 0; i < 4; ++i) partial[i] += power[i];
    power = mul(power, step);
    OrbitPoint p;
    p.x = partial[0] * 2 + partial[1] * 3;
    p.x2 = partial[2] * 2 + partial[3] * 3;
    p.y = power[0];
    p.y2 = power[2];
    p.z = power[1];
    p.z2 = power[3];
    out.push_back(p);
  }
  return out;
}

}  // namespace toric
