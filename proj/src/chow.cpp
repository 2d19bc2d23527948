#include "toric/chow.hpp"

#include "toric/subdivide.hpp"

#include <json.hpp>

#include <algorithm>
#include <functional>
#include <sstream>

namespace toric {

namespace {

using exactlin::solve;

bool all_zero(const IntMatrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (m(i, j) != 0) return false;
  return true;
}

bool unimodular(const IntMatrix& m) {
  if (m.rows() != m.cols()) return false;
  if (m.rows() == 0) return true;
  Integer d = exactlin::determinant(m);
  return d == 1 || d == -1;
}

std::string diag_string(const IntMatrix& m) {
  std::ostringstream os;
  os << "[";
  auto d = exactlin::smith_diagonal(m);
  for (std::size_t i = 0; i < d.size(); ++i) os << (i ? " " : "") << d[i];
  os << "] on a " << m.rows() << "x" << m.cols() << " matrix";
  return os.str();
}

RaySet with(RaySet s, int v) {
  s.insert(std::lower_bound(s.begin(), s.end(), v), v);
  return s;
}

int unit_ray(const Fan& fan, int label) {
  auto idx = fan.ray_index(unit(fan.rank, fan.axis_position(label)));
  if (!idx) throw FanError(FanError::Kind::RayMissing, "e_" + std::to_string(label) + " is not a ray");
  return *idx;
}

IntMatrix stack_rows(const std::vector<IntMatrix>& blocks, Eigen::Index cols) {
  Eigen::Index rows = 0;
  for (auto& b : blocks) rows += b.rows();
  IntMatrix out(rows, cols);
  Eigen::Index at = 0;
  for (auto& b : blocks) {
    out.middleRows(at, b.rows()) = b;
    at += b.rows();
  }
  return out;
}

// relations for sigma in `lower` with cofaces inside `upper_index`
IntMatrix chow_relations(const Fan& fan, const FaceLattice& lattice, int lower_dim,
                         const std::vector<RaySet>& lower, const std::map<RaySet, int>& upper_index) {
  std::vector<std::vector<std::pair<int, Integer>>> cols;
  for (auto& sigma : lower) {
    IntMatrix basis = orthogonal_basis(fan.cone_rays(sigma), fan.rank);
    auto sidx = lattice.index(sigma);
    const auto& co = lattice.cofaces(lower_dim, *sidx);
    for (Eigen::Index c = 0; c < basis.cols(); ++c) {
      std::vector<std::pair<int, Integer>> col;
      for (auto [tau_idx, extra] : co) {
        const RaySet& tau = lattice.cones(lower_dim + 1)[tau_idx];
        auto it = upper_index.find(tau);
        if (it == upper_index.end())
          throw std::invalid_argument("cone family is not closed under cofaces at " + describe(fan, tau));
        Integer pairing = 0;
        for (int j = 0; j < fan.rank; ++j) pairing += basis(j, c) * fan.rays[extra][j];
        if (pairing != 0) col.emplace_back(it->second, pairing);
      }
      cols.push_back(std::move(col));
    }
  }
  IntMatrix rel = IntMatrix::Zero(static_cast<Eigen::Index>(upper_index.size()),
                                  static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c)
    for (auto& [r, v] : cols[c]) rel(r, static_cast<Eigen::Index>(c)) += v;
  return rel;
}

using Polynomial = std::map<Monomial, Integer>;
using LinearForm = std::vector<std::pair<int, Integer>>;

Polynomial multiply(const Polynomial& a, const LinearForm& l) {
  Polynomial out;
  for (auto& [m, c] : a)
    for (auto& [v, d] : l) {
      Monomial w = with(m, v);
      Integer& slot = out[w];
      slot += c * d;
      if (slot == 0) out.erase(w);
    }
  return out;
}

// Multiplicative extension of a ray map to Sym^p.
DivisorCycle map_rays(const DivisorCycle& x, const std::function<DivisorCycle(const LatticePoint&)>& f) {
  std::map<LatticePoint, DivisorCycle> cache;
  DivisorCycle out(x.degree());
  for (auto& [term, c] : x.terms()) {
    DivisorCycle prod(0);
    prod.add({}, 1);
    for (auto& v : term) {
      auto it = cache.find(v);
      if (it == cache.end()) it = cache.emplace(v, f(v)).first;
      prod = prod * it->second;
    }
    out = out + c * prod;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- presentations

Presentation::Presentation(std::vector<std::string> labels, IntMatrix relations)
    : labels_(std::move(labels)),
      relations_(std::move(relations)),
      coords_(std::make_shared<exactlin::CokernelCoordinates<Integer>>(relations_)) {
  if (static_cast<Eigen::Index>(labels_.size()) != relations_.rows())
    throw std::invalid_argument("one label per generator expected");
}

IntMatrix Presentation::generator_coordinates() const {
  return coords_->snf.U.bottomRows(rank());
}

bool Presentation::is_zero(const IntMatrix& x) const {
  if (torsion().empty()) return all_zero(coordinates(x));
  return solve(relations_, x).has_value();
}

std::string Presentation::to_json() const {
  nlohmann::json j;
  j["generators"] = labels_;
  j["rank"] = rank();
  auto t = nlohmann::json::array();
  for (auto& x : torsion()) t.push_back(x.str());
  j["torsion"] = t;
  return j.dump();
}

AbelianMap make_map(const Presentation& source, const Presentation& target, IntMatrix on_generators) {
  if (on_generators.rows() != target.generators() || on_generators.cols() != source.generators())
    throw std::invalid_argument("map matrix has the wrong shape");
  if (!target.is_zero(exactlin::sparse_product(on_generators, source.relations())))
    throw ChowError(ChowError::Kind::NotAMap, "a relation is not sent into the target relations");
  AbelianMap m;
  m.matrix = target.coordinates(exactlin::sparse_product(on_generators, source.lift()));
  m.on_generators = std::move(on_generators);
  return m;
}

ChowGroup chow_presentation_on(const Fan& fan, int p, const std::vector<RaySet>& cones) {
  FaceLattice lattice(fan);
  const int d = fan.rank - p;
  ChowGroup g;
  g.p = p;
  for (auto& c : cones)
    if (static_cast<int>(c.size()) == d) g.cones.push_back(c);
  std::sort(g.cones.begin(), g.cones.end());
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < g.cones.size(); ++i) {
    g.index[g.cones[i]] = static_cast<int>(i);
    labels.push_back(describe(fan, g.cones[i]));
  }
  std::vector<RaySet> lower;
  for (auto& c : cones)
    if (static_cast<int>(c.size()) == d - 1) lower.push_back(c);
  std::sort(lower.begin(), lower.end());
  IntMatrix rel = d >= 1 ? chow_relations(fan, lattice, d - 1, lower, g.index)
                         : IntMatrix(static_cast<Eigen::Index>(g.cones.size()), 0);
  g.presentation = Presentation(std::move(labels), std::move(rel));
  return g;
}

ChowGroup chow_presentation(const Fan& fan, int p) {
  FaceLattice lattice(fan);
  std::vector<RaySet> cones;
  for (int d : {fan.rank - p, fan.rank - p - 1})
    for (auto& c : lattice.cones(d)) cones.push_back(c);
  return chow_presentation_on(fan, p, cones);
}

std::string monomial_label(const Fan& fan, const Monomial& m) {
  if (m.empty()) return "1";
  std::string s;
  for (std::size_t i = 0; i < m.size();) {
    std::size_t j = i;
    while (j < m.size() && m[j] == m[i]) ++j;
    if (!s.empty()) s += "*";
    s += "x" + to_string(fan.rays[m[i]]);
    if (j - i > 1) s += "^" + std::to_string(j - i);
    i = j;
  }
  return s;
}

namespace {

// Monomials of degree p whose support is a cone.
std::vector<Monomial> face_monomials(const FaceLattice& lattice, int p) {
  std::vector<Monomial> out;
  if (p == 0) return {Monomial{}};
  for (int j = 1; j <= p; ++j)
    for (auto& c : lattice.cones(j)) {
      // exponents e_1..e_j >= 1 summing to p
      std::vector<int> e(j, 1);
      e[j - 1] = p - j + 1;
      std::function<void(int, int)> rec = [&](int at, int left) {
        if (at == j - 1) {
          Monomial m;
          for (int a = 0; a < j - 1; ++a) m.insert(m.end(), e[a], c[a]);
          m.insert(m.end(), left, c[j - 1]);
          out.push_back(std::move(m));
          return;
        }
        for (int k = 1; k <= left - (j - 1 - at); ++k) {
          e[at] = k;
          rec(at + 1, left - k);
        }
      };
      rec(0, p);
    }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

SrPiece sr_graded_piece(const Fan& fan, int p) {
  FaceLattice lattice(fan);
  SrPiece s;
  s.degree = p;
  s.monomials = face_monomials(lattice, p);
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < s.monomials.size(); ++i) {
    s.index[s.monomials[i]] = static_cast<int>(i);
    labels.push_back(monomial_label(fan, s.monomials[i]));
  }
  std::vector<std::vector<std::pair<int, Integer>>> cols;
  if (p >= 1)
    for (auto& mu : face_monomials(lattice, p - 1))
      for (int c = 0; c < fan.rank; ++c) {
        std::vector<std::pair<int, Integer>> col;
        for (std::size_t f = 0; f < fan.rays.size(); ++f) {
          const auto coeff = fan.rays[f][c];
          if (coeff == 0) continue;
          auto it = s.index.find(with(mu, static_cast<int>(f)));
          if (it != s.index.end()) col.emplace_back(it->second, Integer(coeff));
        }
        if (!col.empty()) cols.push_back(std::move(col));
      }
  IntMatrix rel = IntMatrix::Zero(static_cast<Eigen::Index>(s.monomials.size()),
                                  static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c)
    for (auto& [r, v] : cols[c]) rel(r, static_cast<Eigen::Index>(c)) += v;
  s.presentation = Presentation(std::move(labels), std::move(rel));
  return s;
}

SrIdentification sr_identification(const Fan& fan, int k) {
  SrIdentification id{chow_presentation(fan, fan.rank - k), sr_graded_piece(fan, k), {}};
  IntMatrix g = IntMatrix::Zero(id.ring.presentation.generators(), id.chow.presentation.generators());
  for (std::size_t i = 0; i < id.chow.cones.size(); ++i)
    g(id.ring.index.at(id.chow.cones[i]), static_cast<Eigen::Index>(i)) = 1;
  id.map = make_map(id.chow.presentation, id.ring.presentation, std::move(g));
  if (!unimodular(id.map.matrix))
    throw ChowError(ChowError::Kind::NotABasis,
                    "cycles do not match the ring in degree " + std::to_string(k) + ": " +
                        diag_string(id.map.matrix));
  return id;
}

// ---------------------------------------------------------------- Fulton basis

namespace {

struct FultonDegree {
  std::vector<int> cones;
  IntMatrix matrix;
};

FultonDegree fulton_degree(const OrderedFan& ordered, const ChowGroup& group) {
  const Fan& fan = ordered.fan();
  const int want = fan.rank - group.p;
  FultonDegree out;
  for (int c : ordered.sequence())
    if (static_cast<int>(ordered.ess(c).size()) == want) out.cones.push_back(c);
  if (!group.presentation.torsion().empty())
    throw ChowError(ChowError::Kind::Torsion, "CH_" + std::to_string(group.p) + " has torsion");
  IntMatrix coords = group.presentation.generator_coordinates();
  out.matrix = IntMatrix(coords.rows(), static_cast<Eigen::Index>(out.cones.size()));
  for (std::size_t i = 0; i < out.cones.size(); ++i)
    out.matrix.col(static_cast<Eigen::Index>(i)) = coords.col(group.index.at(ordered.ess(out.cones[i])));
  if (!unimodular(out.matrix))
    throw ChowError(ChowError::Kind::NotABasis,
                    "ess classes are not a basis of CH_" + std::to_string(group.p) + ": " +
                        std::to_string(out.cones.size()) + " classes, rank " +
                        std::to_string(coords.rows()) + ", invariant factors " + diag_string(out.matrix));
  return out;
}

}  // namespace

IntMatrix FultonBasis::basis_coefficients(int k, const IntMatrix& coords) const {
  auto x = solve(matrix[k], coords);
  if (!x) throw ChowError(ChowError::Kind::NotABasis, "coordinates not in the span of the basis");
  return *x;
}

FultonBasis fulton_basis(const OrderedFan& ordered) {
  FultonBasis b;
  for (int k = 0; k <= ordered.fan().rank; ++k) {
    b.groups.push_back(chow_presentation(ordered.fan(), k));
    auto d = fulton_degree(ordered, b.groups.back());
    b.cones.push_back(std::move(d.cones));
    b.matrix.push_back(std::move(d.matrix));
  }
  return b;
}

// ---------------------------------------------------------------- delta on Chow

DeltaMap delta_cycle_map(const Fan& fan, int axis, int epsilon, int p) {
  const int pos = fan.axis_position(axis);
  DeltaMap out{divisor_fan(fan, axis, epsilon), chow_presentation(fan, p), {}, {}};
  out.image = chow_presentation(out.target, p - 1);
  const auto& src = out.source;
  IntMatrix g = IntMatrix::Zero(out.image.presentation.generators(), src.presentation.generators());
  if (epsilon == 0) {
    const int ie = unit_ray(fan, axis);
    const auto q = quotient_fan(fan, {ie});
    FaceLattice lattice(fan);
    for (std::size_t c = 0; c < src.cones.size(); ++c) {
      const RaySet& tau = src.cones[c];
      const auto col = static_cast<Eigen::Index>(c);
      if (!std::binary_search(tau.begin(), tau.end(), ie)) {
        RaySet up = with(tau, ie);
        if (lattice.contains(up)) g(out.image.index.at(q.correspondence.at(up)), col) += 1;
        continue;
      }
      // V(tau) inside the divisor: move e_i off tau with m in M(tau - e_i), <e_i, m> = 1
      auto rays = fan.cone_rays(tau);
      IntVector rhs = IntVector::Zero(static_cast<Eigen::Index>(rays.size()));
      rhs(std::find(rays.begin(), rays.end(), fan.rays[ie]) - rays.begin()) = 1;
      auto m = solve(rows_matrix(rays, fan.rank), rhs);
      if (!m) throw ChowError(ChowError::Kind::RouteMismatch, "no dual vector on " + describe(fan, tau));
      const auto& co = lattice.cofaces(static_cast<int>(tau.size()), *lattice.index(tau));
      for (auto [rho_idx, extra] : co) {
        const RaySet& rho = lattice.cones(static_cast<int>(tau.size()) + 1)[rho_idx];
        Integer pairing = 0;
        for (int j = 0; j < fan.rank; ++j) pairing += (*m)(j, 0) * fan.rays[extra][j];
        g(out.image.index.at(q.correspondence.at(rho)), col) -= pairing;
      }
    }
  } else {
    for (std::size_t c = 0; c < src.cones.size(); ++c) {
      auto rays = fan.cone_rays(src.cones[c]);
      if (!std::all_of(rays.begin(), rays.end(), [&](const LatticePoint& v) { return v[pos] == 0; }))
        continue;
      std::vector<LatticePoint> down;
      for (auto& v : rays) down.push_back(drop_coordinate(v, pos));
      auto found = out.target.find(down);
      if (!found) throw ChowError(ChowError::Kind::RouteMismatch, "hyperplane cone missing downstairs");
      g(out.image.index.at(*found), static_cast<Eigen::Index>(c)) = 1;
    }
  }
  out.map = make_map(src.presentation, out.image.presentation, std::move(g));
  return out;
}

DeltaMap delta_ring_map(const Fan& fan, int axis, int epsilon, int p, const std::set<int>& normalized) {
  const int n = fan.rank;
  const int pos = fan.axis_position(axis);
  const int k = n - p;
  Fan target = divisor_fan(fan, axis, epsilon);
  auto src = sr_identification(fan, k);
  auto tgt = sr_identification(target, k);

  const int m = static_cast<int>(fan.rays.size());
  std::vector<LinearForm> image(m);
  std::set<int> rewrite;
  if (epsilon == 0) {
    const int ie = unit_ray(fan, axis);
    const auto q = quotient_fan(fan, {ie});
    FaceLattice lattice(fan);
    for (int j = 0; j < m; ++j) {
      if (j == ie) continue;
      RaySet up = with({j}, ie);
      if (lattice.contains(up)) image[j].emplace_back(q.correspondence.at(up)[0], 1);
    }
    rewrite.insert(axis);
  } else {
    for (int j = 0; j < m; ++j)
      if (fan.rays[j][pos] == 0)
        image[j].emplace_back(*target.ray_index(drop_coordinate(fan.rays[j], pos)), 1);
  }
  for (int a : normalized)
    if (a != axis) rewrite.insert(a);
  // [V(e_a)] = -sum_{f != e_a} <f, e_a> [V(f)]
  std::vector<LinearForm> naive = image;
  for (int a : rewrite) {
    const int pa = fan.axis_position(a);
    const int ia = unit_ray(fan, a);
    std::map<int, Integer> acc;
    for (int j = 0; j < m; ++j) {
      if (j == ia || fan.rays[j][pa] == 0) continue;
      for (auto& [v, c] : naive[j]) acc[v] -= c * fan.rays[j][pa];
    }
    image[ia].clear();
    for (auto& [v, c] : acc)
      if (c != 0) image[ia].emplace_back(v, c);
  }

  // squarefree generator monomials of CH_p, pushed through the ring map
  const auto& gens = src.chow.cones;
  IntMatrix ring = IntMatrix::Zero(tgt.ring.presentation.generators(), static_cast<Eigen::Index>(gens.size()));
  for (std::size_t c = 0; c < gens.size(); ++c) {
    Polynomial poly{{Monomial{}, Integer(1)}};
    for (int v : gens[c]) poly = multiply(poly, image[v]);
    for (auto& [mono, coeff] : poly) {
      auto it = tgt.ring.index.find(mono);
      if (it != tgt.ring.index.end()) ring(it->second, static_cast<Eigen::Index>(c)) += coeff;
    }
  }
  IntMatrix ring_coords = tgt.ring.presentation.coordinates(ring);
  auto chow_coords = solve(tgt.map.matrix, ring_coords);
  if (!chow_coords) throw ChowError(ChowError::Kind::RouteMismatch, "ring image outside the cycle lattice");
  // back to generators of the target presentation
  IntMatrix on_gens = tgt.chow.presentation.lift() * *chow_coords;
  DeltaMap out{std::move(target), std::move(src.chow), std::move(tgt.chow), {}};
  out.map = make_map(out.source.presentation, out.image.presentation, std::move(on_gens));
  return out;
}

OrderedFan induced_divisor_ordering(const OrderedFan& ordered, int axis) {
  const Fan& fan = ordered.fan();
  const int ie = unit_ray(fan, axis);
  const auto q = quotient_fan(fan, {ie});
  Fan target = divisor_fan(fan, axis, 0);
  std::vector<int> seq;
  for (int c : ordered.sequence()) {
    const RaySet& cone = fan.max_cones[c];
    if (!std::binary_search(cone.begin(), cone.end(), ie)) continue;
    const RaySet& down = q.correspondence.at(cone);
    seq.push_back(static_cast<int>(std::lower_bound(target.max_cones.begin(), target.max_cones.end(), down) -
                                   target.max_cones.begin()));
  }
  return OrderedFan(std::move(target), ordered.r(), std::move(seq));
}

DeltaOnChow delta_on_chow(const OrderedFan& ordered, int axis, int epsilon, int p, bool ring_check) {
  const Fan& fan = ordered.fan();
  const int r = ordered.r();
  DeltaOnChow out{delta_cycle_map(fan, axis, epsilon, p), {"cycle"}};
  const auto& cyc = out.cycle;
  auto mismatch = [&](const std::string& route) {
    throw ChowError(ChowError::Kind::RouteMismatch, "delta_{" + std::to_string(axis) + "," +
                                                         std::to_string(epsilon) + "} on CH_" +
                                                         std::to_string(p) + ": " + route);
  };

  if (epsilon == 0) {
    // Fulton classes: [V(ess s)] -> [V(ess s-bar)] when e_i in s, else 0
    const int ie = unit_ray(fan, axis);
    const auto q = quotient_fan(fan, {ie});
    OrderedFan down = induced_divisor_ordering(ordered, axis);
    auto src = fulton_degree(ordered, cyc.source);
    IntMatrix expected = IntMatrix::Zero(cyc.image.rank(), static_cast<Eigen::Index>(src.cones.size()));
    IntMatrix tcoords = cyc.image.presentation.generator_coordinates();
    for (std::size_t i = 0; i < src.cones.size(); ++i) {
      const RaySet& cone = fan.max_cones[src.cones[i]];
      if (!std::binary_search(cone.begin(), cone.end(), ie)) continue;
      const RaySet& bar = q.correspondence.at(cone);
      const RaySet& ess_down = down.ess(bar);
      if (q.correspondence.at(with(ordered.ess(src.cones[i]), ie)) != ess_down)
        mismatch("ess of the image cone is not the image of ess");
      expected.col(static_cast<Eigen::Index>(i)) = tcoords.col(cyc.image.index.at(ess_down));
    }
    if (cyc.map.matrix * src.matrix != expected) mismatch("Fulton projection");
    out.routes.push_back("fulton");
  } else {
    // flat cones go to flat cones
    auto split_up = sigma_split(fan, r);
    auto split_down = sigma_split(cyc.target, r);
    ChowGroup flat_up = chow_presentation_on(fan, p, split_up.flat);
    ChowGroup flat_down = chow_presentation_on(cyc.target, p - 1, split_down.flat);
    const int pos = fan.axis_position(axis);
    IntMatrix g = IntMatrix::Zero(flat_down.presentation.generators(), flat_up.presentation.generators());
    IntMatrix up_incl = IntMatrix::Zero(cyc.source.presentation.generators(), flat_up.presentation.generators());
    IntMatrix down_incl = IntMatrix::Zero(cyc.image.presentation.generators(), flat_down.presentation.generators());
    for (std::size_t c = 0; c < flat_up.cones.size(); ++c) {
      up_incl(cyc.source.index.at(flat_up.cones[c]), static_cast<Eigen::Index>(c)) = 1;
      auto rays = fan.cone_rays(flat_up.cones[c]);
      if (!std::all_of(rays.begin(), rays.end(), [&](const LatticePoint& v) { return v[pos] == 0; })) continue;
      std::vector<LatticePoint> dr;
      for (auto& v : rays) dr.push_back(drop_coordinate(v, pos));
      auto found = cyc.target.find(dr);
      auto it = found ? flat_down.index.find(*found) : flat_down.index.end();
      if (it == flat_down.index.end()) mismatch("a flat cone leaves the flat part downstairs");
      g(it->second, static_cast<Eigen::Index>(c)) = 1;
    }
    for (std::size_t c = 0; c < flat_down.cones.size(); ++c)
      down_incl(cyc.image.index.at(flat_down.cones[c]), static_cast<Eigen::Index>(c)) = 1;
    auto flat_map = make_map(flat_up.presentation, flat_down.presentation, g);
    auto inc_up = make_map(flat_up.presentation, cyc.source.presentation, up_incl);
    auto inc_down = make_map(flat_down.presentation, cyc.image.presentation, down_incl);
    if (inc_down.matrix * flat_map.matrix != cyc.map.matrix * inc_up.matrix) mismatch("flat route");
    out.routes.push_back("flat");
  }

  if (ring_check) {
    std::set<int> normalized;
    for (int pos = r; pos < fan.rank; ++pos) normalized.insert(fan.axes[pos]);
    auto ring = delta_ring_map(fan, axis, epsilon, p, normalized);
    if (ring.target != cyc.target || ring.map.matrix != cyc.map.matrix) mismatch("ring map");
    out.routes.push_back("ring");
  }
  return out;
}

// ---------------------------------------------------------------- CH flat

FlatChow chow_flat(const OrderedFan& ordered, int r, int p) {
  const Fan& fan = ordered.fan();
  const int n = fan.rank;
  FlatChow out;
  out.full = chow_presentation(fan, p);
  auto split = sigma_split(fan, r);
  out.flat = chow_presentation_on(fan, p, split.flat);
  if (!out.full.presentation.torsion().empty() || !out.flat.presentation.torsion().empty())
    throw ChowError(ChowError::Kind::Torsion, "torsion in CH_" + std::to_string(p));
  const Eigen::Index full_rank = out.full.rank();

  // (a)
  std::vector<IntMatrix> blocks;
  for (int pos = r; pos < n; ++pos) blocks.push_back(delta_cycle_map(fan, fan.axes[pos], 0, p).map.matrix);
  if (blocks.empty())
    out.kernel = IntMatrix::Identity(full_rank, full_rank);
  else
    out.kernel = exactlin::saturated_kernel_basis(stack_rows(blocks, full_rank));
  out.rank_kernel = out.kernel.cols();

  // (b)
  auto fd = fulton_degree(ordered, out.full);
  std::vector<int> flat_max = split.flat_max;
  std::sort(flat_max.begin(), flat_max.end());
  IntMatrix fcols(full_rank, 0);
  for (std::size_t i = 0; i < fd.cones.size(); ++i)
    if (std::binary_search(flat_max.begin(), flat_max.end(), fd.cones[i])) {
      out.fulton.push_back(fd.cones[i]);
      fcols.conservativeResize(Eigen::NoChange, fcols.cols() + 1);
      fcols.col(fcols.cols() - 1) = fd.matrix.col(static_cast<Eigen::Index>(i));
    }
  out.rank_fulton = static_cast<Eigen::Index>(out.fulton.size());

  // (c)
  out.rank_flat = out.flat.rank();

  auto disagree = [&](const std::string& why) {
    throw ChowError(ChowError::Kind::MethodDisagreement,
                    "CH_" + std::to_string(p) + " flat: " + why + " (kernel " + std::to_string(out.rank_kernel) +
                        ", fulton " + std::to_string(out.rank_fulton) + ", flat cycles " +
                        std::to_string(out.rank_flat) + ")");
  };
  if (out.rank_kernel != out.rank_fulton || out.rank_kernel != out.rank_flat) disagree("ranks differ");

  IntMatrix incl = IntMatrix::Zero(out.full.presentation.generators(), out.flat.presentation.generators());
  for (std::size_t c = 0; c < out.flat.cones.size(); ++c)
    incl(out.full.index.at(out.flat.cones[c]), static_cast<Eigen::Index>(c)) = 1;
  out.inclusion = make_map(out.flat.presentation, out.full.presentation, std::move(incl));
  auto via_cycles = solve(out.kernel, out.inclusion.matrix);
  if (!via_cycles || !unimodular(*via_cycles)) disagree("flat cycles are not a basis of the kernel");
  auto via_fulton = solve(out.kernel, fcols);
  if (!via_fulton || !unimodular(*via_fulton)) disagree("flat ess classes are not a basis of the kernel");
  return out;
}

// ---------------------------------------------------------------- blow-up

BlowupReport blowup_rank_check(const Fan& fan, const RaySet& sigma) {
  BlowupReport rep;
  const int n = fan.rank;
  Fan blown = star_subdivision(fan, sigma).fan;
  Fan center = quotient_fan(fan, sigma).fan;
  for (int d = 0; d <= n; ++d) {
    auto a = chow_presentation(blown, d);
    auto b = chow_presentation(fan, d);
    Eigen::Index c_rank = 0;
    bool torsion = !a.presentation.torsion().empty() || !b.presentation.torsion().empty();
    if (d >= 1 && d - 1 <= center.rank) {
      auto c = chow_presentation(center, d - 1);
      c_rank = c.rank();
      torsion = torsion || !c.presentation.torsion().empty();
    }
    rep.blown.push_back(a.rank());
    rep.base.push_back(b.rank());
    rep.center.push_back(c_rank);
    if (torsion) rep.failures.push_back("torsion at d=" + std::to_string(d));
    if (a.rank() != b.rank() + c_rank)
      rep.failures.push_back("d=" + std::to_string(d) + ": " + std::to_string(a.rank()) + " != " +
                             std::to_string(b.rank()) + " + " + std::to_string(c_rank));
  }
  rep.ok = rep.failures.empty();
  return rep;
}

// ---------------------------------------------------------------- divisor cycles

DivisorCycle DivisorCycle::ray(const LatticePoint& f, const Integer& c) {
  DivisorCycle x(1);
  x.add({f}, c);
  return x;
}

void DivisorCycle::add(Term term, const Integer& c) {
  if (static_cast<int>(term.size()) != degree_) throw std::invalid_argument("term of the wrong degree");
  std::sort(term.begin(), term.end());
  Integer& slot = terms_[term];
  slot += c;
  if (slot == 0) terms_.erase(term);
}

std::set<LatticePoint> DivisorCycle::support() const {
  std::set<LatticePoint> s;
  for (auto& [t, c] : terms_) s.insert(t.begin(), t.end());
  return s;
}

DivisorCycle DivisorCycle::operator+(const DivisorCycle& o) const {
  if (is_zero()) {
    DivisorCycle r = o;
    if (o.is_zero()) r.degree_ = std::max(degree_, o.degree_);
    return r;
  }
  if (o.is_zero()) return *this;
  if (degree_ != o.degree_) throw std::invalid_argument("adding cycles of different degrees");
  DivisorCycle r = *this;
  for (auto& [t, c] : o.terms_) r.add(t, c);
  return r;
}

DivisorCycle DivisorCycle::operator-(const DivisorCycle& o) const { return *this + Integer(-1) * o; }

DivisorCycle operator*(const Integer& c, const DivisorCycle& x) {
  DivisorCycle r(x.degree_);
  if (c == 0) return r;
  for (auto& [t, v] : x.terms_) r.terms_[t] = v * c;
  return r;
}

DivisorCycle DivisorCycle::operator*(const DivisorCycle& o) const {
  DivisorCycle r(degree_ + o.degree_);
  for (auto& [a, c] : terms_)
    for (auto& [b, d] : o.terms_) {
      Term t = a;
      t.insert(t.end(), b.begin(), b.end());
      r.add(std::move(t), c * d);
    }
  return r;
}

std::string DivisorCycle::to_string() const {
  if (terms_.empty()) return "0";
  std::string s;
  for (auto& [t, c] : terms_) {
    if (!s.empty()) s += " + ";
    s += c.str();
    for (auto& v : t) s += "[V" + toric::to_string(v) + "]";
  }
  return s;
}

void check_support(const Fan& fan, const std::set<int>& excluded, const DivisorCycle& x) {
  std::set<LatticePoint> bad;
  for (int a : excluded) bad.insert(unit(fan.rank, fan.axis_position(a)));
  for (auto& v : x.support()) {
    if (!fan.ray_index(v))
      throw ChowError(ChowError::Kind::UnsupportedRay, to_string(v) + " is not a ray of the fan");
    if (bad.count(v)) throw ChowError(ChowError::Kind::UnsupportedRay, to_string(v) + " is excluded");
  }
}

DivisorCycle pullback_star(const Fan& fan, const std::vector<LatticePoint>& sigma, const DivisorCycle& x) {
  check_support(fan, {}, x);
  auto star = star_subdivision(fan, sigma);
  return map_rays(x, [&](const LatticePoint& f) {
    DivisorCycle y = DivisorCycle::ray(f);
    if (std::find(sigma.begin(), sigma.end(), f) != sigma.end()) y = y + DivisorCycle::ray(star.center);
    return y;
  });
}

DivisorCycle pullback_subdivision(const Fan& coarse, const Fan& fine, const DivisorCycle& x) {
  check_support(coarse, {}, x);
  if (!is_subdivision(fine, coarse))
    throw ChowError(ChowError::Kind::PreconditionFailed, "not a subdivision");
  // each fine ray in coordinates of a coarse cone containing it
  std::vector<std::map<LatticePoint, Integer>> value(fine.rays.size());
  for (std::size_t v = 0; v < fine.rays.size(); ++v) {
    bool placed = false;
    for (auto& m : coarse.max_cones) {
      auto rays = coarse.cone_rays(m);
      if (!cone_contains(rays, fine.rays[v])) continue;
      auto coords = span_coordinates(rays, fine.rays[v]);
      if (!coords || coords->denominator != 1)
        throw ChowError(ChowError::Kind::PreconditionFailed, "coarse fan is not smooth");
      for (std::size_t j = 0; j < rays.size(); ++j)
        if (coords->numerators[j] != 0) value[v][rays[j]] = coords->numerators[j];
      placed = true;
      break;
    }
    if (!placed) throw ChowError(ChowError::Kind::PreconditionFailed, "fine ray outside the coarse support");
  }
  return map_rays(x, [&](const LatticePoint& f) {
    DivisorCycle y(1);
    for (std::size_t v = 0; v < fine.rays.size(); ++v) {
      auto it = value[v].find(f);
      if (it != value[v].end()) y.add({fine.rays[v]}, it->second);
    }
    return y;
  });
}

DivisorCycle pullback_delta(const Fan& fan, int axis, int epsilon, const std::set<int>& excluded,
                            const DivisorCycle& x) {
  check_support(fan, excluded, x);
  const int pos = fan.axis_position(axis);
  if (epsilon == 0) {
    const int ie = unit_ray(fan, axis);
    if (x.support().count(fan.rays[ie]))
      throw ChowError(ChowError::Kind::UnsupportedRay, "delta_{i,0} of [V(e_i)] is not defined here");
    const auto q = quotient_fan(fan, {ie});
    FaceLattice lattice(fan);
    return map_rays(x, [&](const LatticePoint& f) {
      RaySet up = with({*fan.ray_index(f)}, ie);
      if (!lattice.contains(up)) return DivisorCycle(1);
      return DivisorCycle::ray(q.fan.rays[q.correspondence.at(up)[0]]);
    });
  }
  if (epsilon != 1) throw std::invalid_argument("epsilon must be 0 or 1");
  return map_rays(x, [&](const LatticePoint& f) {
    return f[pos] == 0 ? DivisorCycle::ray(drop_coordinate(f, pos)) : DivisorCycle(1);
  });
}

DivisorCycle pullback_pi(const Fan& fan, const DivisorCycle& x) {
  check_support(fan, {}, x);
  return map_rays(x, [&](const LatticePoint& f) { return DivisorCycle::ray(insert_coordinate(f, fan.rank)); });
}

IntMatrix cycle_class(const Fan& fan, const SrPiece& piece, const DivisorCycle& x) {
  check_support(fan, {}, x);
  IntMatrix v = IntMatrix::Zero(piece.presentation.generators(), 1);
  if (!x.is_zero() && x.degree() != piece.degree) throw std::invalid_argument("degree mismatch");
  for (auto& [t, c] : x.terms()) {
    Monomial m;
    for (auto& ray : t) m.push_back(*fan.ray_index(ray));
    std::sort(m.begin(), m.end());
    auto it = piece.index.find(m);
    if (it != piece.index.end()) v(it->second, 0) += c;
  }
  return piece.presentation.coordinates(v);
}

PullbackReport verify_pullback_identities(const Fan& fan, const std::set<int>& i0, const std::set<int>& i1,
                                          const std::set<int>& i2) {
  PullbackReport rep;
  std::set<LatticePoint> excluded_rays;
  for (int a : i0) excluded_rays.insert(unit(fan.rank, fan.axis_position(a)));
  std::vector<DivisorCycle> gens;
  for (auto& f : fan.rays)
    if (!excluded_rays.count(f)) gens.push_back(DivisorCycle::ray(f));
  auto fail = [&](const std::string& what, const DivisorCycle& x) {
    rep.failures.push_back(what + " on " + x.to_string());
  };
  auto minus = [](std::set<int> s, int a) {
    s.erase(a);
    return s;
  };
  std::vector<std::pair<int, int>> faces;
  for (int a : i0) faces.emplace_back(a, 0);
  for (int a : i1) faces.emplace_back(a, 1);

  // (1) along star subdivisions at 2-cones that keep admissibility
  FaceLattice lattice(fan);
  for (auto& tau : lattice.cones(2)) {
    Fan fine = star_subdivision(fan, tau).fan;
    if (!admissibility_report(fine, i0, i1, i2).admissible()) continue;
    for (auto& x : gens) {
      ++rep.checked;
      if (pullback_star(fan, fan.cone_rays(tau), x) != pullback_subdivision(fan, fine, x))
        fail("(1) star formula vs support function at " + describe(fan, tau), x);
    }
    for (auto [a, eps] : faces) {
      Fan down = divisor_fan(fan, a, eps), down_fine = divisor_fan(fine, a, eps);
      if (!is_subdivision(down_fine, down)) {
        rep.failures.push_back("(1) divisor of the subdivision is not a subdivision at " + describe(fan, tau));
        continue;
      }
      for (auto& x : gens) {
        ++rep.checked;
        auto lhs = pullback_delta(fine, a, eps, i0, pullback_subdivision(fan, fine, x));
        auto rhs = pullback_subdivision(down, down_fine, pullback_delta(fan, a, eps, i0, x));
        if (lhs != rhs) fail("(1) at " + describe(fan, tau) + " axis " + std::to_string(a), x);
      }
    }
  }

  // (2) and (3)
  auto two_step = [&](int a, int ea, int b, int eb, const DivisorCycle& x, Fan& where) {
    auto y = pullback_delta(fan, b, eb, i0, x);
    Fan mid = divisor_fan(fan, b, eb);
    where = divisor_fan(mid, a, ea);
    return pullback_delta(mid, a, ea, minus(i0, b), y);
  };
  auto commute = [&](const std::string& tag, int a, int ea, int b, int eb) {
    for (auto& x : gens) {
      ++rep.checked;
      Fan f1, f2;
      auto lhs = two_step(a, ea, b, eb, x, f1);
      auto rhs = two_step(b, eb, a, ea, x, f2);
      if (!(f1 == f2) || lhs != rhs) fail(tag + " axes " + std::to_string(a) + "," + std::to_string(b), x);
    }
  };
  for (int eps : {0, 1}) {
    const auto& s = eps == 0 ? i0 : i1;
    for (int a : s)
      for (int b : s)
        if (a < b) commute("(2)", a, eps, b, eps);
  }
  for (int a : i0)
    for (int b : i1)
      if (a != b) commute("(3)", b, 1, a, 0);

  // (4) and (5)
  const int t = *std::max_element(fan.axes.begin(), fan.axes.end()) + 1;
  Fan prod = product_with_p1(fan, t);
  auto i0t = i0;
  i0t.insert(t);
  for (int eps : {0, 1}) {
    if (!(divisor_fan(prod, t, eps) == fan)) rep.failures.push_back("(4) D_t of the product is not the fan");
    for (auto& x : gens) {
      ++rep.checked;
      if (pullback_delta(prod, t, eps, i0t, pullback_pi(fan, x)) != x) fail("(4) eps " + std::to_string(eps), x);
    }
  }
  for (auto [a, eps] : faces) {
    Fan down = divisor_fan(fan, a, eps);
    if (!(divisor_fan(prod, a, eps) == product_with_p1(down, t)))
      rep.failures.push_back("(5) fans differ at axis " + std::to_string(a));
    for (auto& x : gens) {
      ++rep.checked;
      auto lhs = pullback_delta(prod, a, eps, i0, pullback_pi(fan, x));
      auto rhs = pullback_pi(down, pullback_delta(fan, a, eps, i0, x));
      if (lhs != rhs) fail("(5) axis " + std::to_string(a), x);
    }
  }
  return rep;
}

bool sym_surjectivity(const Fan& fan, const std::set<int>& excluded, int p) {
  auto piece = sr_graded_piece(fan, p);
  std::set<int> bad;
  for (int a : excluded) bad.insert(unit_ray(fan, a));
  IntMatrix gens = piece.presentation.generator_coordinates();
  IntMatrix allowed(gens.rows(), 0);
  for (std::size_t i = 0; i < piece.monomials.size(); ++i) {
    const auto& m = piece.monomials[i];
    if (std::any_of(m.begin(), m.end(), [&](int v) { return bad.count(v) > 0; })) continue;
    allowed.conservativeResize(Eigen::NoChange, allowed.cols() + 1);
    allowed.col(allowed.cols() - 1) = gens.col(static_cast<Eigen::Index>(i));
  }
  return solve(allowed, IntMatrix::Identity(gens.rows(), gens.rows())).has_value();
}

CylinderLift cylinder_lift(const Fan& fan, const DivisorCycle& x, const std::set<int>& i0,
                           const std::set<int>& i1, const std::set<int>& i2, int t) {
  auto pre = [&](const std::string& why) { throw ChowError(ChowError::Kind::PreconditionFailed, why); };
  auto concl = [&](const std::string& why) { throw ChowError(ChowError::Kind::ConclusionFailed, why); };
  if (std::find(fan.axes.begin(), fan.axes.end(), t) != fan.axes.end()) pre("t is already an axis");
  auto adm = admissibility_report(fan, i0, i1, i2);
  if (!adm.admissible()) pre("input fan is not admissible");
  check_support(fan, i0, x);
  for (int a : i0)
    if (!pullback_delta(fan, a, 0, i0, x).is_zero()) pre("delta_{" + std::to_string(a) + ",0} does not vanish");
  for (int a : i1)
    if (!pullback_delta(fan, a, 1, i0, x).is_zero()) pre("delta_{" + std::to_string(a) + ",1} does not vanish");

  auto cyl = cylinder_subdivision(fan, t, i0, i2);
  CylinderLift out{cyl.fan, DivisorCycle(x.degree()), cyl.f};
  const Fan& up = out.fan;
  for (auto& [term, c] : x.terms()) {
    DivisorCycle::Term lifted;
    for (auto& v : term) {
      auto w = insert_coordinate(v, fan.rank);
      if (!up.ray_index(w)) concl(to_string(v) + " has no copy in the cylinder");
      lifted.push_back(std::move(w));
    }
    out.lifted.add(std::move(lifted), c);
  }
  auto i0t = i0, i1t = i1;
  i0t.insert(t);
  i1t.insert(t);
  if (!admissibility_report(up, i0t, i1t, i2).admissible()) concl("the cylinder is not admissible");
  try {
    check_support(up, i0t, out.lifted);
  } catch (const ChowError& e) {
    concl(std::string("lift leaves Z^1 of the enlarged index set: ") + e.what());
  }
  for (int a : i0t)
    if (!pullback_delta(up, a, 0, i0t, out.lifted).is_zero())
      concl("delta_{" + std::to_string(a) + ",0} of the lift is not zero");
  for (int a : i1)
    if (!pullback_delta(up, a, 1, i0t, out.lifted).is_zero())
      concl("delta_{" + std::to_string(a) + ",1} of the lift is not zero");
  if (!(divisor_fan(up, t, 1) == fan)) concl("the section at t is not the input fan");
  if (pullback_delta(up, t, 1, i0t, out.lifted) != x) concl("delta_{t,1} of the lift is not the input");
  return out;
}

}  // namespace toric
