#include "toric/fan.hpp"

#include "toric/exactlin.hpp"

#include <json.hpp>

#include <algorithm>
#include <climits>
#include <functional>
#include <numeric>
#include <queue>
#include <sstream>

namespace toric {

namespace {

std::vector<LatticePoint> without(const std::vector<LatticePoint>& v, std::size_t skip) {
  std::vector<LatticePoint> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (i != skip) out.push_back(v[i]);
  return out;
}

// Equalities E x = 0 and inequalities L x >= 0 cutting out a simplicial cone.
struct HalfspaceForm {
  std::vector<LatticePoint> equalities;
  std::vector<LatticePoint> inequalities;
};

// Laplace expansion along rows row.. of the columns in `cols`; false on int64 overflow.
bool laplace(const std::vector<LatticePoint>& rows, int row, unsigned cols, int width,
             std::int64_t& out) {
  if (cols == 0) {
    out = 1;
    return true;
  }
  std::int64_t total = 0;
  int sign = 1;
  for (int j = 0; j < width; ++j) {
    if (!(cols >> j & 1)) continue;
    const std::int64_t a = rows[row][j];
    if (a != 0) {
      std::int64_t minor, term;
      if (!laplace(rows, row + 1, cols & ~(1u << j), width, minor)) return false;
      if (__builtin_mul_overflow(a, minor, &term)) return false;
      if (sign < 0 && __builtin_sub_overflow(total, term, &total)) return false;
      if (sign > 0 && __builtin_add_overflow(total, term, &total)) return false;
    }
    sign = -sign;
  }
  out = total;
  return true;
}

// Kernel of an (n-1) x n integer matrix via signed maximal minors, made primitive.
// Zero when the rows are dependent.
LatticePoint minor_kernel(const std::vector<LatticePoint>& rows, int n) {
  LatticePoint v(n, 0);
  if (n <= 6) {
    std::int64_t g = 0;
    bool fits = true;
    for (int skip = 0; skip < n && fits; ++skip) {
      const unsigned cols = ((1u << n) - 1) & ~(1u << skip);
      fits = laplace(rows, 0, cols, n, v[skip]) && v[skip] != INT64_MIN;
      if (skip % 2 == 1) v[skip] = -v[skip];
      g = std::gcd(g, v[skip]);
    }
    if (fits) {
      if (g != 0)
        for (auto& x : v) x /= g;
      return v;
    }
    std::fill(v.begin(), v.end(), 0);
  }
  std::vector<Integer> minors(n);
  Integer g = 0;
  IntMatrix sub(n - 1, n - 1);
  for (int skip = 0; skip < n; ++skip) {
    for (int i = 0; i < n - 1; ++i)
      for (int j = 0, c = 0; j < n; ++j)
        if (j != skip) sub(i, c++) = rows[i][j];
    minors[skip] = exactlin::determinant(sub);
    if (skip % 2 == 1) minors[skip] = -minors[skip];
    g = boost::multiprecision::gcd(g, minors[skip]);
  }
  if (g == 0) return v;
  for (int j = 0; j < n; ++j) v[j] = static_cast<std::int64_t>(minors[j] / g);
  return v;
}

HalfspaceForm halfspace_form(const Cone& c) {
  const int n = c.ambient_rank;
  HalfspaceForm h;
  if (static_cast<int>(c.rays.size()) == n && n > 0) {
    // full cone: facet normals straight from the minors
    for (std::size_t i = 0; i < c.rays.size(); ++i) {
      LatticePoint l = minor_kernel(without(c.rays, i), n);
      if (is_zero(l)) throw FanError(FanError::Kind::DependentRays, "linearly dependent rays");
      h.inequalities.push_back(dot(l, c.rays[i]) > 0 ? l : scale(-1, l));
    }
    return h;
  }
  IntMatrix perp = orthogonal_basis(c.rays, n);
  for (Eigen::Index j = 0; j < perp.cols(); ++j) h.equalities.push_back(column_point(perp, j));
  // normal to the other rays and to the equalities lies in the span of the cone
  for (std::size_t i = 0; i < c.rays.size(); ++i) {
    std::vector<LatticePoint> rows = without(c.rays, i);
    rows.insert(rows.end(), h.equalities.begin(), h.equalities.end());
    LatticePoint l = minor_kernel(rows, n);
    if (is_zero(l)) throw FanError(FanError::Kind::DependentRays, "linearly dependent rays");
    h.inequalities.push_back(dot(l, c.rays[i]) > 0 ? l : scale(-1, l));
  }
  return h;
}

Cone intersect_forms(int n, const HalfspaceForm& a, const HalfspaceForm& b) {
  std::vector<LatticePoint> all_eq = a.equalities;
  all_eq.insert(all_eq.end(), b.equalities.begin(), b.equalities.end());
  std::vector<LatticePoint> ineq = a.inequalities;
  ineq.insert(ineq.end(), b.inequalities.begin(), b.inequalities.end());

  Cone out;
  out.ambient_rank = n;
  // independent subset of the equalities
  std::vector<LatticePoint> eq;
  for (auto& row : all_eq) {
    eq.push_back(row);
    if (exactlin::rank(rows_matrix(eq, n)) < static_cast<Eigen::Index>(eq.size())) eq.pop_back();
  }
  const int e = static_cast<int>(eq.size());
  if (e >= n) return out;
  const int s = n - 1 - e;
  std::set<LatticePoint> found;
  std::vector<int> pick(s);
  // active sets of size s among the inequalities
  std::function<void(int, int)> walk = [&](int start, int depth) {
    if (depth == s) {
      std::vector<LatticePoint> rows = eq;
      for (int i : pick) rows.push_back(ineq[i]);
      LatticePoint v = minor_kernel(rows, n);
      if (is_zero(v)) return;
      for (int sign : {1, -1}) {
        LatticePoint w = scale(sign, v);
        bool ok = true;
        for (auto& l : ineq)
          if (dot(l, w) < 0) {
            ok = false;
            break;
          }
        if (ok) found.insert(w);
      }
      return;
    }
    for (int i = start; i < static_cast<int>(ineq.size()); ++i) {
      pick[depth] = i;
      walk(i + 1, depth + 1);
    }
  };
  walk(0, 0);
  out.rays.assign(found.begin(), found.end());
  const IntMatrix R = columns_matrix(out.rays, n);
  out.simplicial = exactlin::rank(R) == static_cast<Eigen::Index>(out.rays.size());
  if (out.simplicial) {
    for (auto& d : exactlin::smith_diagonal(R))
      if (d != 1) out.smooth = false;
  } else {
    out.smooth = false;
  }
  return out;
}

}  // namespace

Cone make_cone(int ambient_rank, std::vector<LatticePoint> rays) {
  for (auto& r : rays) {
    if (static_cast<int>(r.size()) != ambient_rank)
      throw std::invalid_argument("ray " + to_string(r) + " has wrong length");
    if (content(r) != 1)
      throw FanError(FanError::Kind::NonPrimitiveRay, "non-primitive ray " + to_string(r));
  }
  std::sort(rays.begin(), rays.end());
  if (std::adjacent_find(rays.begin(), rays.end()) != rays.end())
    throw FanError(FanError::Kind::DependentRays, "repeated ray");
  Cone c;
  c.ambient_rank = ambient_rank;
  c.rays = std::move(rays);
  const IntMatrix R = columns_matrix(c.rays, ambient_rank);
  if (exactlin::rank(R) != static_cast<Eigen::Index>(c.rays.size()))
    throw FanError(FanError::Kind::DependentRays, "linearly dependent rays");
  for (auto& d : exactlin::smith_diagonal(R))
    if (d != 1) c.smooth = false;
  return c;
}

std::optional<RationalCoords> span_coordinates(const std::vector<LatticePoint>& rays,
                                               const LatticePoint& v) {
  const int n = static_cast<int>(v.size());
  const int k = static_cast<int>(rays.size());
  if (k == 0) {
    if (!is_zero(v)) return std::nullopt;
    return RationalCoords{{}, Integer(1)};
  }
  const IntMatrix R = columns_matrix(rays, n);
  // greedy choice of k independent rows
  std::vector<int> chosen;
  IntMatrix sub(0, k);
  for (int i = 0; i < n && static_cast<int>(chosen.size()) < k; ++i) {
    IntMatrix trial(sub.rows() + 1, k);
    trial << sub, R.row(i);
    if (exactlin::rank(trial) > sub.rows()) {
      sub = trial;
      chosen.push_back(i);
    }
  }
  if (static_cast<int>(chosen.size()) < k) throw FanError(FanError::Kind::DependentRays, "dependent rays");
  IntVector rhs(k);
  for (int i = 0; i < k; ++i) rhs(i) = v[chosen[i]];
  Integer den = exactlin::determinant(sub);
  std::vector<Integer> num(k);
  for (int c = 0; c < k; ++c) {
    IntMatrix m = sub;
    m.col(c) = rhs;
    num[c] = exactlin::determinant(m);
  }
  if (den < 0) {
    den = -den;
    for (auto& x : num) x = -x;
  }
  for (int i = 0; i < n; ++i) {
    Integer s = 0;
    for (int c = 0; c < k; ++c) s += R(i, c) * num[c];
    if (s != den * v[i]) return std::nullopt;
  }
  return RationalCoords{std::move(num), std::move(den)};
}

bool cone_contains(const std::vector<LatticePoint>& rays, const LatticePoint& v) {
  auto c = span_coordinates(rays, v);
  if (!c) return false;
  for (auto& x : c->numerators)
    if (x < 0) return false;
  return true;
}

Cone cone_intersection(const Cone& a, const Cone& b) {
  if (a.ambient_rank != b.ambient_rank) throw std::invalid_argument("ambient ranks differ");
  return intersect_forms(a.ambient_rank, halfspace_form(a), halfspace_form(b));
}

IntMatrix orthogonal_basis(const std::vector<LatticePoint>& rays, int ambient_rank) {
  return exactlin::saturated_kernel_basis(rows_matrix(rays, ambient_rank));
}

std::optional<int> Fan::ray_index(const LatticePoint& v) const {
  auto it = std::lower_bound(rays.begin(), rays.end(), v);
  if (it == rays.end() || *it != v) return std::nullopt;
  return static_cast<int>(it - rays.begin());
}

std::vector<LatticePoint> Fan::cone_rays(const RaySet& c) const {
  std::vector<LatticePoint> out;
  for (int i : c) out.push_back(rays[i]);
  return out;
}

Cone Fan::cone(const RaySet& c) const {
  Cone out;
  out.ambient_rank = rank;
  out.rays = cone_rays(c);
  const IntMatrix R = columns_matrix(out.rays, rank);
  for (auto& d : exactlin::smith_diagonal(R))
    if (d != 1) out.smooth = false;
  return out;
}

std::optional<RaySet> Fan::find(const std::vector<LatticePoint>& cr) const {
  RaySet s;
  for (auto& v : cr) {
    auto i = ray_index(v);
    if (!i) return std::nullopt;
    s.push_back(*i);
  }
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  if (!contains_set(s)) return std::nullopt;
  return s;
}

bool Fan::contains_set(const RaySet& c) const {
  for (auto& m : max_cones)
    if (std::includes(m.begin(), m.end(), c.begin(), c.end())) return true;
  return false;
}

int Fan::axis_position(int label) const {
  auto it = std::find(axes.begin(), axes.end(), label);
  if (it == axes.end()) throw std::invalid_argument("no axis labelled " + std::to_string(label));
  return static_cast<int>(it - axes.begin());
}

int Fan::max_dim() const {
  int d = 0;
  for (auto& c : max_cones) d = std::max(d, static_cast<int>(c.size()));
  return d;
}

Fan make_fan(int rank, const std::vector<std::vector<LatticePoint>>& cones, bool validate,
             std::vector<int> axes) {
  Fan f;
  f.rank = rank;
  std::set<LatticePoint> all;
  std::vector<Cone> made;
  for (auto& c : cones) {
    made.push_back(make_cone(rank, c));
    all.insert(made.back().rays.begin(), made.back().rays.end());
  }
  f.rays.assign(all.begin(), all.end());
  std::vector<RaySet> sets;
  for (auto& c : made) {
    RaySet s;
    for (auto& r : c.rays) s.push_back(*f.ray_index(r));
    std::sort(s.begin(), s.end());
    sets.push_back(std::move(s));
  }
  std::sort(sets.begin(), sets.end());
  sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
  // larger cones first so subsets can be dropped in one pass
  std::vector<RaySet> by_size = sets;
  std::stable_sort(by_size.begin(), by_size.end(),
                   [](const RaySet& a, const RaySet& b) { return a.size() > b.size(); });
  std::vector<RaySet> kept;
  for (auto& s : by_size) {
    bool inside = false;
    for (auto& k : kept)
      if (k.size() > s.size() && std::includes(k.begin(), k.end(), s.begin(), s.end())) {
        inside = true;
        break;
      }
    if (!inside) kept.push_back(s);
  }
  std::sort(kept.begin(), kept.end());
  if (kept.empty()) kept.push_back({});
  f.max_cones = std::move(kept);
  if (axes.empty()) {
    axes.resize(rank);
    std::iota(axes.begin(), axes.end(), 1);
  }
  if (static_cast<int>(axes.size()) != rank) throw std::invalid_argument("axis labels do not match rank");
  f.axes = std::move(axes);
  if (validate) validate_fan(f);
  return f;
}

void validate_fan(const Fan& fan) {
  std::vector<HalfspaceForm> forms;
  for (auto& c : fan.max_cones) forms.push_back(halfspace_form(fan.cone(c)));
  for (std::size_t a = 0; a < fan.max_cones.size(); ++a)
    for (std::size_t b = a + 1; b < fan.max_cones.size(); ++b) {
      RaySet common;
      std::set_intersection(fan.max_cones[a].begin(), fan.max_cones[a].end(),
                            fan.max_cones[b].begin(), fan.max_cones[b].end(),
                            std::back_inserter(common));
      Cone meet = intersect_forms(fan.rank, forms[a], forms[b]);
      if (meet.rays != fan.cone_rays(common))
        throw FanError(FanError::Kind::OverlappingCones,
                       "cones " + describe(fan, fan.max_cones[a]) + " and " +
                           describe(fan, fan.max_cones[b]) + " meet outside a common face");
    }
}

bool is_smooth(const Fan& fan) {
  for (auto& c : fan.max_cones)
    if (!fan.cone(c).smooth) return false;
  return true;
}

FaceLattice::FaceLattice(const Fan& fan) : fan_(&fan) {
  const int top = fan.max_dim();
  std::vector<std::set<RaySet>> faces(top + 1);
  for (auto& c : fan.max_cones) {
    const int k = static_cast<int>(c.size());
    for (unsigned mask = 0; mask < (1u << k); ++mask) {
      RaySet s;
      for (int i = 0; i < k; ++i)
        if (mask & (1u << i)) s.push_back(c[i]);
      faces[s.size()].insert(std::move(s));
    }
  }
  by_dim_.resize(top + 2);
  lookup_.resize(top + 2);
  for (int d = 0; d <= top; ++d) {
    by_dim_[d].assign(faces[d].begin(), faces[d].end());
    for (std::size_t i = 0; i < by_dim_[d].size(); ++i) lookup_[d][by_dim_[d][i]] = static_cast<int>(i);
  }
  cofaces_.resize(top + 2);
  for (int d = 0; d <= top; ++d) cofaces_[d].resize(by_dim_[d].size());
  for (int d = 1; d <= top; ++d)
    for (std::size_t t = 0; t < by_dim_[d].size(); ++t) {
      const RaySet& tau = by_dim_[d][t];
      for (std::size_t j = 0; j < tau.size(); ++j) {
        RaySet facet = tau;
        facet.erase(facet.begin() + j);
        cofaces_[d - 1][lookup_[d - 1].at(facet)].emplace_back(static_cast<int>(t), tau[j]);
      }
    }
}

const std::vector<RaySet>& FaceLattice::cones(int dim) const {
  static const std::vector<RaySet> none;
  if (dim < 0 || dim >= static_cast<int>(by_dim_.size())) return none;
  return by_dim_[dim];
}

std::optional<int> FaceLattice::index(const RaySet& c) const {
  if (c.size() >= lookup_.size()) return std::nullopt;
  auto it = lookup_[c.size()].find(c);
  if (it == lookup_[c.size()].end()) return std::nullopt;
  return it->second;
}

const std::vector<std::pair<int, int>>& FaceLattice::cofaces(int dim, int idx) const {
  return cofaces_.at(dim).at(idx);
}

std::size_t FaceLattice::total() const {
  std::size_t t = 0;
  for (auto& d : by_dim_) t += d.size();
  return t;
}

Fan p1_power(int n) {
  std::vector<std::vector<LatticePoint>> cones;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    std::vector<LatticePoint> c;
    for (int i = 0; i < n; ++i) c.push_back(scale(mask & (1u << i) ? -1 : 1, unit(n, i)));
    cones.push_back(std::move(c));
  }
  return make_fan(n, cones, false);
}

Fan affine_space(int n) {
  std::vector<LatticePoint> c;
  for (int i = 0; i < n; ++i) c.push_back(unit(n, i));
  return make_fan(n, {c}, false);
}

Fan half_space_fan(int n, int r) {
  std::vector<std::vector<LatticePoint>> cones;
  for (unsigned mask = 0; mask < (1u << (n - r)); ++mask) {
    std::vector<LatticePoint> c;
    for (int i = 0; i < r; ++i) c.push_back(scale(-1, unit(n, i)));
    for (int i = r; i < n; ++i) c.push_back(scale(mask & (1u << (i - r)) ? -1 : 1, unit(n, i)));
    cones.push_back(std::move(c));
  }
  return make_fan(n, cones, false);
}

Fan projective_space(int n) {
  std::vector<LatticePoint> gens;
  for (int i = 0; i < n; ++i) gens.push_back(unit(n, i));
  gens.push_back(LatticePoint(n, -1));
  std::vector<std::vector<LatticePoint>> cones;
  for (int skip = 0; skip <= n; ++skip) cones.push_back(without(gens, skip));
  return make_fan(n, cones, false);
}

Fan zero_fan(int n) { return make_fan(n, {}, false); }

bool is_complete(const Fan& fan) {
  const int n = fan.rank;
  for (auto& c : fan.max_cones)
    if (static_cast<int>(c.size()) != n)
      throw FanError(FanError::Kind::NotPure, "maximal cone " + describe(fan, c) + " is not full-dimensional");
  std::map<RaySet, std::vector<int>> walls;
  for (std::size_t m = 0; m < fan.max_cones.size(); ++m)
    for (std::size_t j = 0; j < fan.max_cones[m].size(); ++j) {
      RaySet w = fan.max_cones[m];
      w.erase(w.begin() + j);
      walls[w].push_back(static_cast<int>(m));
    }
  for (auto& [w, owners] : walls)
    if (owners.size() != 2) return false;
  std::vector<std::vector<int>> adj(fan.max_cones.size());
  for (auto& [w, owners] : walls) {
    adj[owners[0]].push_back(owners[1]);
    adj[owners[1]].push_back(owners[0]);
  }
  std::vector<bool> seen(fan.max_cones.size(), false);
  std::queue<int> q;
  q.push(0);
  seen[0] = true;
  std::size_t count = 1;
  while (!q.empty()) {
    int c = q.front();
    q.pop();
    for (int d : adj[c])
      if (!seen[d]) {
        seen[d] = true;
        ++count;
        q.push(d);
      }
  }
  return count == fan.max_cones.size();
}

bool is_subdivision(const Fan& fine, const Fan& coarse) {
  if (fine.rank != coarse.rank) return false;
  const std::size_t nc = coarse.max_cones.size();
  std::vector<std::vector<LatticePoint>> coarse_rays(nc);
  for (std::size_t c = 0; c < nc; ++c) coarse_rays[c] = coarse.cone_rays(coarse.max_cones[c]);
  std::vector<std::vector<int>> inside(nc);
  for (std::size_t f = 0; f < fine.max_cones.size(); ++f) {
    auto rays = fine.cone_rays(fine.max_cones[f]);
    bool placed = false;
    for (std::size_t c = 0; c < nc; ++c) {
      bool all = std::all_of(rays.begin(), rays.end(),
                             [&](const LatticePoint& v) { return cone_contains(coarse_rays[c], v); });
      if (!all) continue;
      inside[c].push_back(static_cast<int>(f));
      if (coarse_rays[c].size() == rays.size()) placed = true;
    }
    if (!placed) return false;
  }
  for (std::size_t c = 0; c < nc; ++c) {
    const std::size_t k = coarse_rays[c].size();
    std::map<RaySet, int> facet_count;
    bool any = false;
    for (int f : inside[c]) {
      const RaySet& s = fine.max_cones[f];
      if (s.size() != k) continue;
      any = true;
      for (std::size_t j = 0; j < s.size(); ++j) {
        RaySet w = s;
        w.erase(w.begin() + j);
        ++facet_count[w];
      }
    }
    if (!any) return false;
    for (auto& [w, cnt] : facet_count) {
      if (cnt > 2) return false;
      if (cnt == 2) continue;
      // a facet used once must lie on the boundary of the coarse cone
      bool boundary = false;
      std::vector<RationalCoords> coords;
      for (int v : w) coords.push_back(*span_coordinates(coarse_rays[c], fine.rays[v]));
      for (std::size_t i = 0; i < k && !boundary; ++i) {
        boundary = std::all_of(coords.begin(), coords.end(),
                               [&](const RationalCoords& x) { return x.numerators[i] == 0; });
      }
      if (!boundary) return false;
    }
  }
  return true;
}

LatticePoint drop_coordinate(const LatticePoint& v, int pos) {
  LatticePoint out = v;
  out.erase(out.begin() + pos);
  return out;
}

LatticePoint insert_coordinate(const LatticePoint& v, int pos, std::int64_t value) {
  LatticePoint out = v;
  out.insert(out.begin() + pos, value);
  return out;
}

QuotientFan quotient_fan(const Fan& fan, const RaySet& sigma) {
  if (!fan.contains_set(sigma))
    throw FanError(FanError::Kind::ConeNotInFan, describe(fan, sigma) + " is not a cone of the fan");
  QuotientFan out;
  const auto srays = fan.cone_rays(sigma);
  out.projection = orthogonal_basis(srays, fan.rank).transpose();
  const int qr = static_cast<int>(out.projection.rows());
  auto project = [&](const LatticePoint& v) {
    LatticePoint w(qr);
    for (int i = 0; i < qr; ++i) {
      Integer s = 0;
      for (int j = 0; j < fan.rank; ++j) s += out.projection(i, j) * v[j];
      w[i] = to_int64(s);
    }
    std::int64_t g = content(w);
    if (g > 1)
      for (auto& x : w) x /= g;
    return w;
  };
  std::vector<std::vector<LatticePoint>> cones;
  for (auto& m : fan.max_cones) {
    if (!std::includes(m.begin(), m.end(), sigma.begin(), sigma.end())) continue;
    std::vector<LatticePoint> c;
    for (int v : m)
      if (!std::binary_search(sigma.begin(), sigma.end(), v)) c.push_back(project(fan.rays[v]));
    cones.push_back(std::move(c));
  }
  std::vector<int> axes;
  if (sigma.size() == 1) {
    const LatticePoint& u = fan.rays[sigma[0]];
    for (int i = 0; i < fan.rank; ++i)
      if (u == unit(fan.rank, i)) {
        axes = fan.axes;
        axes.erase(axes.begin() + i);
      }
  }
  out.fan = make_fan(qr, cones, false, axes);
  for (auto& m : fan.max_cones) {
    if (!std::includes(m.begin(), m.end(), sigma.begin(), sigma.end())) continue;
    RaySet rest;
    for (int v : m)
      if (!std::binary_search(sigma.begin(), sigma.end(), v)) rest.push_back(v);
    const int k = static_cast<int>(rest.size());
    for (unsigned mask = 0; mask < (1u << k); ++mask) {
      RaySet up = sigma, down;
      for (int i = 0; i < k; ++i)
        if (mask & (1u << i)) {
          up.push_back(rest[i]);
          down.push_back(*out.fan.ray_index(project(fan.rays[rest[i]])));
        }
      std::sort(up.begin(), up.end());
      std::sort(down.begin(), down.end());
      out.correspondence[up] = down;
    }
  }
  return out;
}

Fan divisor_fan(const Fan& fan, int axis, int epsilon) {
  const int pos = fan.axis_position(axis);
  const int n = fan.rank;
  std::vector<int> axes = fan.axes;
  axes.erase(axes.begin() + pos);
  if (epsilon == 0) {
    auto idx = fan.ray_index(unit(n, pos));
    if (!idx)
      throw FanError(FanError::Kind::RayMissing, "e_" + std::to_string(axis) + " is not a ray");
    Fan q = quotient_fan(fan, {*idx}).fan;
    q.axes = axes;
    return q;
  }
  if (epsilon != 1) throw std::invalid_argument("epsilon must be 0 or 1");
  std::vector<std::vector<LatticePoint>> cones;
  for (auto& m : fan.max_cones) {
    std::vector<LatticePoint> c;
    for (int v : m)
      if (fan.rays[v][pos] == 0) c.push_back(drop_coordinate(fan.rays[v], pos));
    cones.push_back(std::move(c));
  }
  return make_fan(n - 1, cones, false, axes);
}

bool is_i_admissible(const Fan& fan, int axis) {
  try {
    return is_complete(divisor_fan(fan, axis, 1));
  } catch (const FanError& e) {
    if (e.kind == FanError::Kind::NotPure) return false;
    throw;
  }
}

Fan product_with_p1(const Fan& fan, int axis_label) {
  const int n = fan.rank;
  std::vector<std::vector<LatticePoint>> cones;
  for (auto& m : fan.max_cones)
    for (int sign : {1, -1}) {
      std::vector<LatticePoint> c;
      for (int v : m) c.push_back(insert_coordinate(fan.rays[v], n));
      c.push_back(scale(sign, unit(n + 1, n)));
      cones.push_back(std::move(c));
    }
  std::vector<int> axes = fan.axes;
  axes.push_back(axis_label);
  return make_fan(n + 1, cones, false, axes);
}

StandardnessReport standardness_report(const Fan& fan, int r) {
  StandardnessReport rep;
  const int n = fan.rank;
  rep.smooth = is_smooth(fan);
  if (!rep.smooth) rep.witnesses.push_back("fan is not smooth");
  rep.subdivision_of_p1n = is_subdivision(fan, p1_power(n));
  if (!rep.subdivision_of_p1n) rep.witnesses.push_back("not a subdivision of (P^1)^n");
  rep.axis_condition = true;
  for (int i = 0; i < r; ++i) {
    if (!fan.ray_index(unit(n, i))) {
      rep.axis_condition = false;
      rep.witnesses.push_back("e_" + std::to_string(i + 1) + " is not a ray");
      continue;
    }
    for (auto& v : fan.rays)
      if (v[i] > 0 && v != unit(n, i)) {
        rep.axis_condition = false;
        rep.witnesses.push_back("ray " + to_string(v) + " has positive coordinate " + std::to_string(i + 1));
      }
  }
  std::vector<LatticePoint> eta;
  for (int i = r; i < n; ++i) eta.push_back(unit(n, i));
  rep.eta_condition = fan.contains(eta);
  if (!rep.eta_condition) rep.witnesses.push_back("Cone(e_{r+1},...,e_n) is not a cone");
  rep.is_r_standard = rep.smooth && rep.subdivision_of_p1n && rep.axis_condition && rep.eta_condition;

  bool closure = true;
  std::vector<std::optional<int>> axis_ray(n);
  for (int i = 0; i < n; ++i) axis_ray[i] = fan.ray_index(unit(n, i));
  FaceLattice lattice(fan);
  for (int d = 0; d <= fan.max_dim(); ++d)
    for (auto& s : lattice.cones(d)) {
      bool has_axis = false;
      for (int i = 0; i < n; ++i)
        if (axis_ray[i] && std::binary_search(s.begin(), s.end(), *axis_ray[i])) has_axis = true;
      if (has_axis) continue;
      RaySet joined = s;
      for (int i = r; i < n; ++i) {
        if (!axis_ray[i]) continue;
        RaySet t = s;
        t.push_back(*axis_ray[i]);
        std::sort(t.begin(), t.end());
        if (lattice.contains(t)) joined.push_back(*axis_ray[i]);
      }
      std::sort(joined.begin(), joined.end());
      if (!lattice.contains(joined)) {
        closure = false;
        rep.witnesses.push_back("closure fails at " + describe(fan, s));
      }
    }
  rep.is_very_r_standard = rep.is_r_standard && closure;
  return rep;
}

AdmissibilityReport admissibility_report(const Fan& fan, const std::set<int>& i0,
                                         const std::set<int>& i1, const std::set<int>& i2) {
  AdmissibilityReport rep;
  const int n = fan.rank;
  try {
    rep.complete_smooth = is_complete(fan) && is_smooth(fan);
  } catch (const FanError&) {
    rep.complete_smooth = false;
  }
  if (!rep.complete_smooth) rep.witnesses.push_back("(i) fails: not complete and smooth");
  std::vector<LatticePoint> c0;
  for (int a : i0) c0.push_back(unit(n, fan.axis_position(a)));
  rep.i0_cone = fan.contains(c0);
  if (!rep.i0_cone) rep.witnesses.push_back("(ii) fails: Cone(e_i : i in I0) is not a cone");
  rep.i1_complete = true;
  for (int a : i1)
    if (!is_i_admissible(fan, a)) {
      rep.i1_complete = false;
      rep.witnesses.push_back("(iii) fails at axis " + std::to_string(a));
    }
  rep.i2_unique = true;
  for (int a : i2) {
    const int pos = fan.axis_position(a);
    const LatticePoint e = unit(n, pos);
    bool ok = fan.ray_index(e).has_value();
    for (auto& v : fan.rays)
      if (v[pos] > 0 && v != e) ok = false;
    if (!ok) {
      rep.i2_unique = false;
      rep.witnesses.push_back("(iv) fails at axis " + std::to_string(a));
    }
  }
  return rep;
}

Fan restrict_standard(const Fan& fan, int r) {
  const int n = fan.rank;
  for (int i = 0; i < r; ++i)
    for (auto& v : fan.rays)
      if (v[i] > 0 && v != unit(n, i))
        throw FanError(FanError::Kind::PreconditionFailed,
                       "ray " + to_string(v) + " breaks the axis condition");
  std::vector<std::vector<LatticePoint>> cones;
  for (auto& m : fan.max_cones) {
    std::vector<LatticePoint> c;
    for (int v : m) {
      bool axis = false;
      for (int i = 0; i < r; ++i)
        if (fan.rays[v] == unit(n, i)) axis = true;
      if (!axis) c.push_back(fan.rays[v]);
    }
    cones.push_back(std::move(c));
  }
  return make_fan(n, cones, false, fan.axes);
}

Fan extend_standard(const Fan& restricted, int r) {
  const int n = restricted.rank;
  for (auto& v : restricted.rays)
    for (int i = 0; i < r; ++i)
      if (v[i] > 0)
        throw FanError(FanError::Kind::PreconditionFailed,
                       "ray " + to_string(v) + " leaves the half space");
  std::vector<LatticePoint> eta;
  for (int i = r; i < n; ++i) eta.push_back(unit(n, i));
  if (!restricted.contains(eta))
    throw FanError(FanError::Kind::PreconditionFailed, "Cone(e_{r+1},...,e_n) is missing");
  FaceLattice lattice(restricted);
  std::vector<std::vector<LatticePoint>> cones;
  for (int d = 0; d <= restricted.max_dim(); ++d)
    for (auto& s : lattice.cones(d)) {
      auto c = restricted.cone_rays(s);
      for (int i = 0; i < r; ++i)
        if (std::all_of(c.begin(), c.end(), [&](const LatticePoint& v) { return v[i] == 0; }))
          c.push_back(unit(n, i));
      cones.push_back(std::move(c));
    }
  return make_fan(n, cones, false, restricted.axes);
}

std::string fan_to_json(const Fan& fan) {
  nlohmann::json j;
  j["rank"] = fan.rank;
  j["rays"] = fan.rays;
  j["max_cones"] = fan.max_cones;
  return j.dump() + "\n";
}

Fan fan_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  if (!j.is_object() || !j.contains("rank") || !j.contains("rays") || !j.contains("max_cones"))
    throw std::invalid_argument("fan JSON needs rank, rays and max_cones");
  const int n = j.at("rank").get<int>();
  auto rays = j.at("rays").get<std::vector<LatticePoint>>();
  std::vector<std::vector<LatticePoint>> cones;
  for (auto& c : j.at("max_cones")) {
    std::vector<LatticePoint> cr;
    for (auto& idx : c) {
      const int i = idx.get<int>();
      if (i < 0 || i >= static_cast<int>(rays.size())) throw std::invalid_argument("ray index out of range");
      cr.push_back(rays[i]);
    }
    cones.push_back(std::move(cr));
  }
  return make_fan(n, cones, true);
}

std::string describe(const Fan& fan, const RaySet& c) {
  std::ostringstream os;
  os << "Cone(";
  for (std::size_t i = 0; i < c.size(); ++i) os << (i ? "," : "") << to_string(fan.rays[c[i]]);
  os << ')';
  return os.str();
}

}  // namespace toric
