#include "toric/complexes.hpp"

#include "toric/ordering.hpp"
#include "toric/subdivide.hpp"

#include <json.hpp>

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

namespace toric {

namespace {

using exactlin::solve;
using exactlin::sparse_product;

bool all_zero(const IntMatrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (m(i, j) != 0) return false;
  return true;
}

Integer minor(const IntMatrix& a, const std::vector<int>& rows, const std::vector<int>& cols) {
  if (rows.empty()) return 1;
  IntMatrix s(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) s(i, j) = a(rows[i], cols[j]);
  if (rows.size() == 1) return s(0, 0);
  if (rows.size() == 2) return s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0);
  return exactlin::determinant(s);
}

// wedge^q of a (rows x cols) matrix on lex subset bases
IntMatrix wedge_power(const IntMatrix& a, int q) {
  auto rs = wedge_subsets(static_cast<int>(a.rows()), q);
  auto cs = wedge_subsets(static_cast<int>(a.cols()), q);
  IntMatrix out(rs.size(), cs.size());
  for (std::size_t i = 0; i < rs.size(); ++i)
    for (std::size_t j = 0; j < cs.size(); ++j) out(i, j) = minor(a, rs[i], cs[j]);
  return out;
}

IntMatrix column_of(const LatticePoint& v) {
  IntMatrix c(v.size(), 1);
  for (std::size_t i = 0; i < v.size(); ++i) c(i, 0) = v[i];
  return c;
}

std::string subset_label(const std::vector<int>& s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out + "}";
}

bool in_hyperplane(const Fan& fan, const RaySet& c, int pos) {
  return std::all_of(c.begin(), c.end(), [&](int v) { return fan.rays[v][pos] == 0; });
}

}  // namespace

std::vector<std::vector<int>> wedge_subsets(int a, int q) {
  std::vector<std::vector<int>> out;
  if (q < 0 || q > a) return out;
  std::vector<int> s(q);
  for (int i = 0; i < q; ++i) s[i] = i;
  while (true) {
    out.push_back(s);
    int k = q - 1;
    while (k >= 0 && s[k] == a - q + k) --k;
    if (k < 0) break;
    ++s[k];
    for (int j = k + 1; j < q; ++j) s[j] = s[j - 1] + 1;
  }
  return out;
}

// ---------------------------------------------------------------- slices

Eigen::Index ZSlice::size(int q) const {
  if (q < 0 || q > top()) return 0;
  return degrees[q].size;
}

std::vector<std::string> ZSlice::labels(int q) const {
  std::vector<std::string> out;
  if (q < 0 || q > top()) return out;
  const ZDegree& g = degrees[q];
  for (auto& c : g.cones)
    for (auto& s : g.subsets) out.push_back(describe(fan, c) + "^" + subset_label(s));
  return out;
}

IntMatrix contraction_matrix(const IntMatrix& sigma_dual, const IntMatrix& tau_dual,
                             const LatticePoint& u, int q, int variant) {
  const int a = static_cast<int>(sigma_dual.cols());
  if (tau_dual.cols() != a - 1)
    throw ComplexError(ComplexError::Kind::AdaptedBasisFailure, "M(tau) must have corank one in M(sigma)");
  auto c = solve(sigma_dual, tau_dual);
  if (!c) throw ComplexError(ComplexError::Kind::AdaptedBasisFailure, "M(tau) is not inside M(sigma)");
  IntMatrix pairing = column_of(u).transpose() * sigma_dual;
  IntMatrix one(1, 1);
  one(0, 0) = 1;
  auto m0 = solve(pairing, one);
  if (!m0) throw ComplexError(ComplexError::Kind::AdaptedBasisFailure, "no m0 with <u, m0> = 1");

  IntMatrix basis_tau = *c;
  IntMatrix w = IntMatrix::Identity(a - 1, a - 1);
  if (variant != 0) {
    // shift m0 by M(tau) and use an upper unitriangular change of the M(tau) basis
    for (int i = 0; i < a - 1; ++i)
      for (int j = i; j < a - 1; ++j) w(i, j) = 1;
    *m0 += basis_tau * IntMatrix::Ones(a - 1, 1);
    basis_tau = basis_tau * w;
  }
  IntMatrix adapted(a, a);
  adapted.col(0) = m0->col(0);
  adapted.rightCols(a - 1) = basis_tau;
  auto inv = solve(adapted, IntMatrix(IntMatrix::Identity(a, a)));
  if (!inv) throw ComplexError(ComplexError::Kind::AdaptedBasisFailure, "adapted basis is not a basis");

  // alpha = sum_T det(inv[T, S]) p_T; u _| p_T = p_{T - 0} when 0 in T, else 0
  auto src = wedge_subsets(a, q);
  auto dst = wedge_subsets(a - 1, q - 1);
  IntMatrix out(dst.size(), src.size());
  for (std::size_t j = 0; j < src.size(); ++j)
    for (std::size_t i = 0; i < dst.size(); ++i) {
      std::vector<int> rows{0};
      for (int x : dst[i]) rows.push_back(x + 1);
      out(i, j) = minor(*inv, rows, src[j]);
    }
  if (variant != 0) out = wedge_power(w, q - 1) * out;
  return out;
}

ZSlice build_z_slice(const Fan& fan, int p, bool flat, int r, bool check_basis, int variant) {
  ZSlice s;
  s.fan = fan;
  s.p = p;
  s.flat = flat;
  s.r = r;
  const int n = fan.rank;
  if (p < 0 || p > n) return s;

  FaceLattice lattice(fan);
  std::set<RaySet> flat_cones;
  if (flat)
    for (auto& c : sigma_split(fan, r).flat) flat_cones.insert(c);

  for (int q = 0; q <= n - p; ++q) {
    ZDegree g;
    const int k = n - p - q;
    for (auto& c : lattice.cones(k))
      if (!flat || flat_cones.count(c)) g.cones.push_back(c);
    std::sort(g.cones.begin(), g.cones.end());
    g.subsets = wedge_subsets(n - k, q);
    for (std::size_t i = 0; i < g.cones.size(); ++i) {
      g.index[g.cones[i]] = static_cast<int>(i);
      g.dual.push_back(orthogonal_basis(fan.cone_rays(g.cones[i]), n));
      g.offset.push_back(g.size);
      g.size += static_cast<Eigen::Index>(g.subsets.size());
    }
    s.degrees.push_back(std::move(g));
  }

  s.d.push_back(IntMatrix(0, s.degrees[0].size));
  for (int q = 1; q <= n - p; ++q) {
    const ZDegree& src = s.degrees[q];
    const ZDegree& dst = s.degrees[q - 1];
    const int k = n - p - q;
    IntMatrix d = IntMatrix::Zero(dst.size, src.size);
    for (std::size_t i = 0; i < src.cones.size(); ++i) {
      const int li = *lattice.index(src.cones[i]);
      for (auto [tau_idx, extra] : lattice.cofaces(k, li)) {
        const RaySet& tau = lattice.cones(k + 1)[tau_idx];
        auto it = dst.index.find(tau);
        if (it == dst.index.end())
          throw ComplexError(ComplexError::Kind::NotAComplex,
                             "flat part not closed: " + describe(fan, src.cones[i]) + " < " + describe(fan, tau));
        const int t = it->second;
        IntMatrix block = contraction_matrix(src.dual[i], dst.dual[t], fan.rays[extra], q, variant);
        if (check_basis &&
            block != contraction_matrix(src.dual[i], dst.dual[t], fan.rays[extra], q, 1 - variant))
          throw ComplexError(ComplexError::Kind::BasisDependence,
                             "u _| depends on the adapted basis at " + describe(fan, src.cones[i]) + " < " +
                                 describe(fan, tau));
        d.block(dst.offset[t], src.offset[i], block.rows(), block.cols()) = block;
      }
    }
    s.d.push_back(std::move(d));
  }
  for (int q = 2; q <= n - p; ++q)
    if (!all_zero(sparse_product(s.d[q - 1], s.d[q])))
      throw ComplexError(ComplexError::Kind::NotAComplex, "d o d != 0 at q = " + std::to_string(q));
  return s;
}

// ---------------------------------------------------------------- homology

ChainComplex as_complex(const ZSlice& slice) {
  ChainComplex c;
  for (int q = 0; q <= slice.top(); ++q) {
    c.sizes.push_back(slice.size(q));
    c.boundary.push_back(slice.d[q]);
  }
  return c;
}

std::vector<HomologyGroup> homology(const ChainComplex& c) {
  const int top = static_cast<int>(c.sizes.size()) - 1;
  std::vector<Eigen::Index> rank(top + 2, 0);
  std::vector<std::vector<Integer>> torsion(top + 2);
  for (int k = 1; k <= top; ++k) {
    const IntMatrix& b = c.boundary[k];
    if (b.rows() == 0 || b.cols() == 0) continue;
    auto diag = exactlin::smith_diagonal(b);
    rank[k] = static_cast<Eigen::Index>(diag.size());
    for (auto& x : diag)
      if (x > 1) torsion[k].push_back(x);
  }
  std::vector<HomologyGroup> out(top + 1);
  for (int k = 0; k <= top; ++k) {
    HomologyGroup& h = out[k];
    h.rank = c.sizes[k] - rank[k] - rank[k + 1];
    h.torsion = torsion[k + 1];
    if (h.zero()) continue;
    IntMatrix ker = (k == 0 || c.boundary[k].rows() == 0)
                        ? IntMatrix(IntMatrix::Identity(c.sizes[k], c.sizes[k]))
                        : exactlin::saturated_kernel_basis(c.boundary[k]);
    for (Eigen::Index j = 0; j < ker.cols(); ++j) {
      IntMatrix col = ker.col(j);
      const bool boundary = k < top && c.boundary[k + 1].cols() > 0 && solve(c.boundary[k + 1], col).has_value();
      if (!boundary) {
        h.witness = col;
        break;
      }
    }
  }
  return out;
}

std::vector<HomologyGroup> homology(const ZSlice& slice) { return homology(as_complex(slice)); }

H0Identification identify_h0(const ZSlice& slice) {
  if (slice.top() < 0) throw std::invalid_argument("empty slice has no H_0");
  H0Identification id;
  const ZDegree& g = slice.degrees[0];
  IntMatrix rel = slice.top() >= 1 ? slice.d[1] : IntMatrix(g.size, 0);
  id.h0 = Presentation(slice.labels(0), rel);
  id.chow = slice.flat ? chow_presentation_on(slice.fan, slice.p, sigma_split(slice.fan, slice.r).flat)
                       : chow_presentation(slice.fan, slice.p);
  if (static_cast<Eigen::Index>(id.chow.cones.size()) != g.size)
    throw ComplexError(ComplexError::Kind::IdentificationFailed, "generator counts differ");
  IntMatrix perm = IntMatrix::Zero(g.size, g.size);
  for (std::size_t i = 0; i < g.cones.size(); ++i) {
    auto it = id.chow.index.find(g.cones[i]);
    if (it == id.chow.index.end())
      throw ComplexError(ComplexError::Kind::IdentificationFailed, "cone missing from CH: " + describe(slice.fan, g.cones[i]));
    perm(it->second, static_cast<Eigen::Index>(i)) = 1;
  }
  try {
    id.forward = make_map(id.h0, id.chow.presentation, perm);
    id.backward = make_map(id.chow.presentation, id.h0, perm.transpose());
  } catch (const ChowError& e) {
    throw ComplexError(ComplexError::Kind::IdentificationFailed, std::string("H_0 vs CH: ") + e.what());
  }
  const Eigen::Index rk = id.h0.rank();
  if (id.chow.rank() != rk || id.h0.torsion() != id.chow.presentation.torsion() ||
      id.forward.matrix * id.backward.matrix != IntMatrix::Identity(rk, rk) ||
      id.backward.matrix * id.forward.matrix != IntMatrix::Identity(rk, rk))
    throw ComplexError(ComplexError::Kind::IdentificationFailed, "H_0 and CH are not identified");
  return id;
}

// ---------------------------------------------------------------- chain maps

namespace {

// phi : N(target) -> N(source); the form part is m -> phi^T m
struct Term {
  RaySet target;
  IntMatrix phi;
};
using TermFn = std::function<std::vector<Term>(const RaySet&)>;

IntMatrix insert_matrix(int n, int pos) {  // Z^{n-1} -> Z^n, zero at pos
  IntMatrix m = IntMatrix::Zero(n, n - 1);
  for (int c = 0; c < n - 1; ++c) m(c < pos ? c : c + 1, c) = 1;
  return m;
}
IntMatrix drop_matrix(int n, int pos) { return insert_matrix(n, pos).transpose(); }  // Z^n -> Z^{n-1}
IntMatrix merge_matrix(int n, int pos) {  // Z^{n+1} -> Z^n, x_pos + x_{pos+1}
  IntMatrix m = IntMatrix::Zero(n, n + 1);
  for (int c = 0; c <= n; ++c) m(c <= pos ? c : c - 1, c) = 1;
  return m;
}

RaySet image_cone(const ZSlice& source, const ZSlice& target, const RaySet& sigma,
                  const std::function<LatticePoint(const LatticePoint&)>& move) {
  std::vector<LatticePoint> rays;
  for (int v : sigma) rays.push_back(move(source.fan.rays[v]));
  auto found = target.fan.find(rays);
  if (!found)
    throw ComplexError(ComplexError::Kind::FamilyMismatch,
                       "no image of " + describe(source.fan, sigma) + " in the target fan");
  return *found;
}

ChainMap term_map(const ZSlice& source, const ZSlice& target, const TermFn& terms) {
  ChainMap out;
  for (int q = 0; q <= std::max(source.top(), target.top()); ++q) {
    IntMatrix f = IntMatrix::Zero(target.size(q), source.size(q));
    if (q <= target.top() && q <= source.top()) {
      const ZDegree& sg = source.degrees[q];
      const ZDegree& tg = target.degrees[q];
      for (std::size_t i = 0; i < sg.cones.size(); ++i)
        for (const Term& t : terms(sg.cones[i])) {
          auto it = tg.index.find(t.target);
          if (it == tg.index.end())
            throw ComplexError(ComplexError::Kind::MembershipViolation,
                               describe(target.fan, t.target) + " (image of " + describe(source.fan, sg.cones[i]) +
                                   ") is not in the target basis");
          const int j = it->second;
          auto k = solve(tg.dual[j], IntMatrix(t.phi.transpose() * sg.dual[i]));
          if (!k)
            throw ComplexError(ComplexError::Kind::NotAChainMap,
                               "forms on " + describe(source.fan, sg.cones[i]) + " do not pull back");
          IntMatrix w = wedge_power(*k, q);
          f.block(tg.offset[j], sg.offset[i], w.rows(), w.cols()) += w;
        }
    }
    out.f.push_back(std::move(f));
  }
  return out;
}

void require_divisor(const Fan& fan, int i, const Fan& expected) {
  if (i < 1 || i > fan.rank || !(divisor_fan(fan, fan.axes[i - 1], 1) == expected))
    throw ComplexError(ComplexError::Kind::FamilyMismatch,
                       "D_{" + std::to_string(i) + ",1} of the larger fan is not the smaller fan");
}

}  // namespace

ChainMap structure_map(StructureKind kind, int i, const ZSlice& source, const ZSlice& target) {
  const int pos = i - 1;
  const int p_shift = kind == StructureKind::Delta ? -1 : 1;
  if (target.p != source.p + p_shift)
    throw ComplexError(ComplexError::Kind::FamilyMismatch, "slice degrees do not match the map");
  TermFn terms;
  switch (kind) {
    case StructureKind::Delta: {
      require_divisor(source.fan, i, target.fan);
      const IntMatrix phi = insert_matrix(source.fan.rank, pos);
      terms = [&, phi](const RaySet& s) -> std::vector<Term> {
        if (!in_hyperplane(source.fan, s, pos)) return {};
        auto drop = [pos](const LatticePoint& v) { return drop_coordinate(v, pos); };
        return {{image_cone(source, target, s, drop), phi}};
      };
      break;
    }
    case StructureKind::Rho: {
      require_divisor(target.fan, i, source.fan);
      const IntMatrix phi = drop_matrix(target.fan.rank, pos);
      terms = [&, phi](const RaySet& s) -> std::vector<Term> {
        auto ins = [pos](const LatticePoint& v) { return insert_coordinate(v, pos); };
        return {{image_cone(source, target, s, ins), phi}};
      };
      break;
    }
    case StructureKind::Nu: {
      require_divisor(target.fan, i, source.fan);
      require_divisor(target.fan, i + 1, source.fan);
      const int n1 = target.fan.rank;
      const IntMatrix merge = merge_matrix(n1 - 1, pos);
      const IntMatrix drop_i = drop_matrix(n1, pos), drop_next = drop_matrix(n1, pos + 1);
      terms = [&, merge, drop_i, drop_next](const RaySet& s) -> std::vector<Term> {
        auto ins = [pos](const LatticePoint& v) { return insert_coordinate(v, pos); };
        auto ins_next = [pos](const LatticePoint& v) { return insert_coordinate(v, pos + 1); };
        if (in_hyperplane(source.fan, s, pos)) return {{image_cone(source, target, s, ins), merge}};
        return {{image_cone(source, target, s, ins), drop_i}, {image_cone(source, target, s, ins_next), drop_next}};
      };
      break;
    }
  }
  ChainMap f = term_map(source, target, terms);
  f.commutes_with_d = commutes(f, source, target);
  if (kind == StructureKind::Delta && !f.commutes_with_d)
    throw ComplexError(ComplexError::Kind::NotAChainMap, "delta does not commute with d");
  return f;
}

ChainMap inclusion_map(const ZSlice& flat, const ZSlice& full) {
  if (!(flat.fan == full.fan) || flat.p != full.p)
    throw ComplexError(ComplexError::Kind::FamilyMismatch, "inclusion between different slices");
  const IntMatrix id = IntMatrix::Identity(flat.fan.rank, flat.fan.rank);
  return term_map(flat, full, [&](const RaySet& s) { return std::vector<Term>{{s, id}}; });
}

// Degrees past the end of a map are between zero groups on one side.
ChainMap compose(const ChainMap& outer, const ChainMap& inner) {
  ChainMap out;
  out.commutes_with_d = outer.commutes_with_d && inner.commutes_with_d;
  for (std::size_t q = 0; q < std::max(outer.f.size(), inner.f.size()); ++q) {
    if (q >= inner.f.size())
      out.f.push_back(IntMatrix(outer.f[q].rows(), 0));
    else if (q >= outer.f.size())
      out.f.push_back(IntMatrix(0, inner.f[q].cols()));
    else
      out.f.push_back(sparse_product(outer.f[q], inner.f[q]));
  }
  return out;
}

ChainMap add(const ChainMap& a, const ChainMap& b) {
  if (a.f.size() != b.f.size()) throw std::invalid_argument("chain maps of different length");
  ChainMap out;
  out.commutes_with_d = a.commutes_with_d && b.commutes_with_d;
  for (std::size_t q = 0; q < a.f.size(); ++q) out.f.push_back(a.f[q] + b.f[q]);
  return out;
}

ChainMap scaled(const Integer& c, const ChainMap& a) {
  ChainMap out = a;
  for (auto& m : out.f) m *= c;
  return out;
}

ChainMap identity_map(const ZSlice& slice) {
  ChainMap out;
  for (int q = 0; q <= slice.top(); ++q) out.f.push_back(IntMatrix::Identity(slice.size(q), slice.size(q)));
  return out;
}

ChainMap zero_map(const ZSlice& source, const ZSlice& target) {
  ChainMap out;
  for (int q = 0; q <= std::max(source.top(), target.top()); ++q)
    out.f.push_back(IntMatrix::Zero(target.size(q), source.size(q)));
  return out;
}

bool operator==(const ChainMap& a, const ChainMap& b) {
  for (std::size_t q = 0; q < std::max(a.f.size(), b.f.size()); ++q) {
    if (q >= a.f.size() || q >= b.f.size()) {
      const IntMatrix& m = q < a.f.size() ? a.f[q] : b.f[q];
      if (m.size() != 0) return false;
      continue;
    }
    if (a.f[q].rows() != b.f[q].rows() || a.f[q].cols() != b.f[q].cols()) return false;
    if (a.f[q] != b.f[q]) return false;
  }
  return true;
}

namespace {
IntMatrix boundary_or_zero(const ZSlice& s, int q) {
  if (q >= 1 && q <= s.top()) return s.d[q];
  return IntMatrix::Zero(s.size(q - 1), s.size(q));
}
}  // namespace

bool commutes(const ChainMap& f, const ZSlice& source, const ZSlice& target) {
  for (int q = 1; q < static_cast<int>(f.f.size()); ++q)
    if (sparse_product(boundary_or_zero(target, q), f.f[q]) !=
        sparse_product(f.f[q - 1], boundary_or_zero(source, q)))
      return false;
  return true;
}

// ---------------------------------------------------------------- Theta family

const Fan& ThetaFamily::fan(int n) {
  auto it = fans_.find(n);
  if (it == fans_.end()) {
    if (n < r_) throw ComplexError(ComplexError::Kind::FamilyMismatch, "Theta_{n,r} needs n >= r");
    it = fans_.emplace(n, build_theta(n, r_, d_)).first;
  }
  return it->second;
}

const ZSlice& ThetaFamily::slice(int n, int p, bool flat) {
  auto key = std::make_tuple(n, p, flat);
  auto it = slices_.find(key);
  if (it == slices_.end())
    it = slices_.emplace(key, std::make_unique<ZSlice>(build_z_slice(fan(n), p, flat, r_))).first;
  return *it->second;
}

bool IdentityReport::ok() const {
  return std::all_of(instances.begin(), instances.end(), [](auto& i) { return i.ok; });
}

std::string IdentityReport::summary() const {
  int pass = 0, full = 0;
  for (auto& i : instances) {
    pass += i.ok;
    full += i.via_full;
  }
  std::ostringstream os;
  os << pass << "/" << instances.size() << " identities hold";
  if (full) os << " (" << full << " checked in the full complex after a rho membership violation)";
  for (auto& i : instances)
    if (!i.ok) os << "; FAIL " << i.name;
  return os.str();
}

namespace {

// Runs one identity on flat slices; if some rho image leaves the flat part,
// the composites are rebuilt with full slices after the first map.
void run_identity(IdentityReport& report, const std::string& name,
                  const std::function<std::pair<ChainMap, ChainMap>(bool)>& sides) {
  IdentityInstance inst;
  inst.name = name;
  try {
    auto [l, r] = sides(true);
    inst.ok = l == r;
  } catch (const ComplexError& e) {
    if (e.kind != ComplexError::Kind::MembershipViolation) throw;
    inst.violation = e.what();
    inst.via_full = true;
    ++report.membership_violations;
    auto [l, r] = sides(false);
    inst.ok = l == r;
  }
  report.instances.push_back(std::move(inst));
}

}  // namespace

IdentityReport verify_simplicial_identities(int r, const std::vector<int>& d, int n_max) {
  ThetaFamily fam(r, d);
  IdentityReport report;
  using K = StructureKind;

  // delta_i rho_j on Z^flat_p(Theta_{n-1}), through Theta_n
  for (int n = r + 1; n <= n_max; ++n)
    for (int p = 0; p <= n - 2; ++p)
      for (int i = r + 1; i <= n; ++i)
        for (int j = r + 1; j <= n; ++j) {
          std::ostringstream nm;
          nm << "delta_" << i << " rho_" << j << " on Z(Theta_" << n - 1 << "), p=" << p;
          run_identity(report, nm.str(), [&](bool flat) {
            const ZSlice& src = fam.slice(n - 1, p, true);
            const ZSlice& mid = fam.slice(n, p + 1, flat);
            const ZSlice& tgt = fam.slice(n - 1, p, flat);
            ChainMap lhs = compose(structure_map(K::Delta, i, mid, tgt), structure_map(K::Rho, j, src, mid));
            ChainMap rhs;
            if (j == i) {
              rhs = flat ? identity_map(src) : inclusion_map(src, tgt);
            } else {
              const int di = j < i ? i - 1 : i;
              const int rj = j < i ? j : j - 1;
              const ZSlice& low = fam.slice(n - 2, p - 1, true);
              rhs = compose(structure_map(K::Rho, rj, low, tgt), structure_map(K::Delta, di, src, low));
            }
            return std::make_pair(lhs, rhs);
          });
        }

  // delta_i nu_j on Z^flat_p(Theta_n), through Theta_{n+1}
  for (int n = r + 1; n + 1 <= n_max; ++n)
    for (int p = 0; p <= n - 1; ++p)
      for (int i = r + 1; i <= n + 1; ++i)
        for (int j = r + 1; j <= n; ++j) {
          std::ostringstream nm;
          nm << "delta_" << i << " nu_" << j << " on Z(Theta_" << n << "), p=" << p;
          run_identity(report, nm.str(), [&](bool flat) {
            const ZSlice& src = fam.slice(n, p, true);
            const ZSlice& mid = fam.slice(n + 1, p + 1, flat);
            const ZSlice& tgt = fam.slice(n, p, flat);
            ChainMap lhs = compose(structure_map(K::Delta, i, mid, tgt), structure_map(K::Nu, j, src, mid));
            ChainMap rhs;
            if (j == i - 1 || j == i) {
              rhs = flat ? identity_map(src) : inclusion_map(src, tgt);
            } else {
              const int di = j < i - 1 ? i - 1 : i;
              const int nj = j < i - 1 ? j : j - 1;
              const ZSlice& low = fam.slice(n - 1, p - 1, true);
              rhs = compose(structure_map(K::Nu, nj, low, tgt), structure_map(K::Delta, di, src, low));
            }
            return std::make_pair(lhs, rhs);
          });
        }
  return report;
}

ChainMap delta_star(ThetaFamily& family, int n, int p) {
  const ZSlice& src = family.slice(n, p, true);
  if (n <= family.r()) throw std::invalid_argument("delta* on Theta_{r,r} has no target");
  const ZSlice& tgt = family.slice(n - 1, p - 1, true);
  ChainMap sum = zero_map(src, tgt);
  for (int i = family.r() + 1; i <= n; ++i) {
    const Integer sign = (i - family.r()) % 2 == 0 ? 1 : -1;
    sum = add(sum, scaled(sign, structure_map(StructureKind::Delta, i, src, tgt)));
  }
  return sum;
}

SquareReport delta_star_squares_to_zero(ThetaFamily& family, int n, int p) {
  const int r = family.r();
  if (n < r + 2) throw std::invalid_argument("delta* o delta* needs n >= r + 2");
  const Fan& top = family.fan(n);
  const Fan& mid = family.fan(n - 1);
  const Fan& low = family.fan(n - 2);
  const auto flat_mid = sigma_split(mid, r).flat;
  const std::set<RaySet> mid_flat(flat_mid.begin(), flat_mid.end());
  SquareReport rep;

  auto moved = [](const Fan& from, const Fan& to, const RaySet& c, int pos) {
    std::vector<LatticePoint> rays;
    for (int v : c) rays.push_back(drop_coordinate(from.rays[v], pos));
    auto found = to.find(rays);
    if (!found) throw ComplexError(ComplexError::Kind::FamilyMismatch, "hyperplane cone missing below");
    return *found;
  };
  // forms of `sigma` pulled back to `image` (drop a coordinate), in canonical bases
  auto pull = [](const IntMatrix& from, const IntMatrix& to, int pos) {
    IntMatrix dropped(from.rows() - 1, from.cols());
    for (Eigen::Index i = 0, k = 0; i < from.rows(); ++i)
      if (i != pos) dropped.row(k++) = from.row(i);
    auto x = solve(to, dropped);
    if (!x) throw ComplexError(ComplexError::Kind::NotAChainMap, "forms do not restrict");
    return *x;
  };

  for (const RaySet& sigma : sigma_split(top, r).flat) {
    const int k = static_cast<int>(sigma.size());
    const int q = n - p - k;
    if (q < 0) continue;
    const IntMatrix b_top = orthogonal_basis(top.cone_rays(sigma), n);
    std::map<RaySet, IntMatrix> sum;
    for (int i = r + 1; i <= n; ++i) {
      if (!in_hyperplane(top, sigma, i - 1)) continue;
      const RaySet s1 = moved(top, mid, sigma, i - 1);
      if (!mid_flat.count(s1))
        throw ComplexError(ComplexError::Kind::MembershipViolation, "delta of a flat cone is not flat");
      const IntMatrix b_mid = orthogonal_basis(mid.cone_rays(s1), n - 1);
      const IntMatrix k1 = pull(b_top, b_mid, i - 1);
      for (int j = r + 1; j <= n - 1; ++j) {
        if (!in_hyperplane(mid, s1, j - 1)) continue;
        const RaySet s2 = moved(mid, low, s1, j - 1);
        const IntMatrix k2 = pull(b_mid, orthogonal_basis(low.cone_rays(s2), n - 2), j - 1);
        const int sign = ((i - r) + (j - r)) % 2 == 0 ? 1 : -1;
        IntMatrix w = Integer(sign) * wedge_power(IntMatrix(k2 * k1), q);
        auto it = sum.find(s2);
        if (it == sum.end())
          sum.emplace(s2, std::move(w));
        else
          it->second += w;
        ++rep.images;
      }
    }
    for (auto& [cone, m] : sum)
      if (!all_zero(m) && rep.ok) {
        rep.ok = false;
        rep.witness = describe(top, sigma) + " -> " + describe(low, cone);
      }
  }
  return rep;
}

// ---------------------------------------------------------------- acyclicity

namespace {

nlohmann::json homology_json(const std::vector<DegreeHomology>& hs) {
  auto a = nlohmann::json::array();
  for (auto& h : hs) {
    nlohmann::json j;
    j["degree"] = h.degree;
    j["inner"] = h.inner;
    j["rank"] = h.group.rank;
    auto t = nlohmann::json::array();
    for (auto& x : h.group.torsion) t.push_back(x.str());
    j["torsion"] = t;
    if (h.group.witness.size() > 0) {
      auto w = nlohmann::json::array();
      for (Eigen::Index i = 0; i < h.group.witness.rows(); ++i) w.push_back(h.group.witness(i, 0).str());
      j["witness"] = w;
    }
    a.push_back(j);
  }
  return a;
}

std::vector<DegreeHomology> tag(const std::vector<HomologyGroup>& hs, int m_max) {
  std::vector<DegreeHomology> out;
  for (std::size_t k = 0; k < hs.size(); ++k)
    out.push_back({static_cast<int>(k), static_cast<int>(k) < m_max, hs[k]});
  return out;
}

bool exact_inner(const std::vector<DegreeHomology>& hs) {
  return std::all_of(hs.begin(), hs.end(), [](auto& h) { return !h.inner || h.group.zero(); });
}

}  // namespace

std::string AcyclicityReport::to_json() const {
  nlohmann::json j;
  j["r"] = r;
  j["d"] = d;
  j["p"] = p;
  j["m_max"] = m_max;
  j["hypothesis_met"] = hypothesis_met;
  j["square_zero"] = square_zero;
  j["z_exact"] = z_exact;
  j["chow_exact"] = chow_exact;
  j["agree"] = agree();
  j["total_matches_chow"] = total_matches_chow;
  j["ok"] = ok();
  auto rows = nlohmann::json::array();
  for (auto& row : z_rows) rows.push_back(homology_json(row));
  j["z_rows"] = rows;
  j["chow"] = homology_json(chow);
  j["total"] = homology_json(total);
  j["notes"] = notes;
  return j.dump(2);
}

AcyclicityReport verify_acyclicity(int r, const std::vector<int>& d, int p, int m_max) {
  AcyclicityReport rep;
  rep.r = r;
  rep.d = d;
  rep.p = p;
  rep.m_max = m_max;
  rep.hypothesis_met = 0 <= p && p <= r - 1;
  if (!rep.hypothesis_met) rep.notes.push_back("p outside 0 <= p <= r-1: exactness is not claimed");
  ThetaFamily fam(r, d);

  std::vector<const ZSlice*> col;  // column m: Z^flat_{p+m, .}(Theta_{r+m})
  std::vector<ChainMap> dstar(m_max + 1);
  int q_max = -1;
  for (int m = 0; m <= m_max; ++m) {
    col.push_back(&fam.slice(r + m, p + m, true));
    q_max = std::max(q_max, col[m]->top());
    if (m >= 1) dstar[m] = delta_star(fam, r + m, p + m);
  }
  auto zero_at = [&](int m, int q) { return IntMatrix(0, col[m]->size(q)); };

  // Z level, per q
  for (int m = 2; m <= m_max; ++m) {
    ChainMap sq = compose(dstar[m - 1], dstar[m]);
    for (auto& f : sq.f)
      if (!all_zero(f)) rep.square_zero = false;
  }
  for (int q = 0; q <= q_max; ++q) {
    ChainComplex c;
    for (int m = 0; m <= m_max; ++m) {
      c.sizes.push_back(col[m]->size(q));
      if (m == 0 || q > col[m]->top())
        c.boundary.push_back(m == 0 ? zero_at(0, q) : IntMatrix::Zero(col[m - 1]->size(q), col[m]->size(q)));
      else
        c.boundary.push_back(dstar[m].f[q]);
    }
    rep.z_rows.push_back(tag(homology(c), m_max));
    if (!exact_inner(rep.z_rows.back())) rep.z_exact = false;
  }

  // CH^flat level through H_0 of each column
  std::vector<Presentation> groups;
  for (int m = 0; m <= m_max; ++m) {
    if (col[m]->top() < 0) {
      groups.emplace_back(std::vector<std::string>{}, IntMatrix(0, 0));
      continue;
    }
    groups.push_back(identify_h0(*col[m]).h0);
    if (!groups.back().torsion().empty()) rep.notes.push_back("torsion in column " + std::to_string(m));
  }
  ChainComplex chow;
  std::vector<IntMatrix> induced(m_max + 1);
  for (int m = 0; m <= m_max; ++m) {
    chow.sizes.push_back(groups[m].rank());
    if (m == 0) {
      chow.boundary.push_back(IntMatrix(0, groups[0].rank()));
      continue;
    }
    IntMatrix on_gens = col[m]->top() >= 0 && col[m - 1]->top() >= 0
                            ? dstar[m].f[0]
                            : IntMatrix(IntMatrix::Zero(groups[m - 1].generators(), groups[m].generators()));
    induced[m] = make_map(groups[m], groups[m - 1], on_gens).matrix;
    chow.boundary.push_back(induced[m]);
    if (m >= 2 && !all_zero(induced[m - 1] * induced[m])) rep.square_zero = false;
  }
  rep.chow = tag(homology(chow), m_max);
  rep.chow_exact = exact_inner(rep.chow);

  // total complex of A_{m,q}, D = delta* + (-1)^m d
  const int k_max = m_max + std::max(q_max, 0);
  std::vector<std::map<int, Eigen::Index>> offset(k_max + 1);  // degree k: m -> offset
  ChainComplex tot;
  for (int k = 0; k <= k_max; ++k) {
    Eigen::Index size = 0;
    for (int m = 0; m <= std::min(k, m_max); ++m) {
      offset[k][m] = size;
      size += col[m]->size(k - m);
    }
    tot.sizes.push_back(size);
  }
  tot.boundary.push_back(IntMatrix(0, tot.sizes[0]));
  for (int k = 1; k <= k_max; ++k) {
    IntMatrix b = IntMatrix::Zero(tot.sizes[k - 1], tot.sizes[k]);
    for (int m = 0; m <= std::min(k, m_max); ++m) {
      const int q = k - m;
      const Eigen::Index cols = col[m]->size(q);
      if (cols == 0) continue;
      if (m >= 1 && q <= col[m - 1]->top() && q <= col[m]->top()) {
        const IntMatrix& h = dstar[m].f[q];
        b.block(offset[k - 1][m - 1], offset[k][m], h.rows(), h.cols()) = h;
      }
      if (q >= 1 && q <= col[m]->top()) {
        const IntMatrix& v = col[m]->d[q];
        b.block(offset[k - 1][m], offset[k][m], v.rows(), v.cols()) = (m % 2 == 0 ? 1 : -1) * v;
      }
    }
    tot.boundary.push_back(std::move(b));
  }
  for (int k = 2; k <= k_max; ++k)
    if (!all_zero(sparse_product(tot.boundary[k - 1], tot.boundary[k]))) rep.square_zero = false;
  rep.total = tag(homology(tot), m_max);
  for (int k = 0; k <= k_max; ++k) {
    const HomologyGroup& t = rep.total[k].group;
    if (k <= m_max) {
      const HomologyGroup& c = rep.chow[k].group;
      if (t.rank != c.rank || t.torsion != c.torsion) rep.total_matches_chow = false;
    } else if (!t.zero()) {
      rep.total_matches_chow = false;
    }
  }
  if (!rep.total_matches_chow) rep.notes.push_back("double complex homology differs from the CH complex");
  if (!rep.agree()) rep.notes.push_back("the Z-level and CH-level verdicts differ");
  return rep;
}

}  // namespace toric
