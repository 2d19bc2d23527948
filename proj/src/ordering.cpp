#include "toric/ordering.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

namespace toric {

namespace {

bool is_subset(const RaySet& small, const RaySet& big) {
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

std::vector<int> positions_of(const std::vector<int>& sequence) {
  std::vector<int> pos(sequence.size(), -1);
  for (std::size_t k = 0; k < sequence.size(); ++k) {
    const int c = sequence[k];
    if (c < 0 || c >= static_cast<int>(pos.size()) || pos[c] != -1)
      throw std::invalid_argument("ordering is not a permutation of the maximal cones");
    pos[c] = static_cast<int>(k);
  }
  return pos;
}

// ray indices of e_i for axis labels r+1..n that are rays of the fan
std::vector<int> upper_axis_rays(const Fan& fan, int r) {
  std::vector<int> out;
  // positional: after dropping an axis the labels are no longer 1..n
  for (int pos = r; pos < fan.rank; ++pos) {
    auto idx = fan.ray_index(unit(fan.rank, pos));
    if (idx) out.push_back(*idx);
  }
  return out;
}

std::string cone_text(const Fan& fan, const RaySet& c) { return describe(fan, c); }

}  // namespace

std::vector<std::vector<int>> wall_neighbors(const Fan& fan) {
  std::map<RaySet, std::vector<int>> facets;
  for (std::size_t c = 0; c < fan.max_cones.size(); ++c) {
    const RaySet& cone = fan.max_cones[c];
    for (std::size_t k = 0; k < cone.size(); ++k) {
      RaySet facet = cone;
      facet.erase(facet.begin() + static_cast<long>(k));
      facets[facet].push_back(static_cast<int>(c));
    }
  }
  std::vector<std::vector<int>> out(fan.max_cones.size());
  for (std::size_t c = 0; c < fan.max_cones.size(); ++c) {
    const RaySet& cone = fan.max_cones[c];
    if (static_cast<int>(cone.size()) != fan.rank)
      throw FanError(FanError::Kind::NotPure, "maximal cone " + cone_text(fan, cone) + " is not full");
    for (std::size_t k = 0; k < cone.size(); ++k) {
      RaySet facet = cone;
      facet.erase(facet.begin() + static_cast<long>(k));
      const auto& owners = facets[facet];
      if (owners.size() == 1)
        throw FanError(FanError::Kind::NotComplete,
                       "facet " + cone_text(fan, facet) + " lies in a single maximal cone");
      if (owners.size() > 2)
        throw FanError(FanError::Kind::OverlappingCones,
                       "facet " + cone_text(fan, facet) + " lies in more than two maximal cones");
      out[c].push_back(owners[0] == static_cast<int>(c) ? owners[1] : owners[0]);
    }
  }
  return out;
}

RaySet wall_neighbor(const Fan& fan, const RaySet& sigma, int ray) {
  auto it = std::lower_bound(fan.max_cones.begin(), fan.max_cones.end(), sigma);
  if (it == fan.max_cones.end() || *it != sigma)
    throw FanError(FanError::Kind::ConeNotInFan, cone_text(fan, sigma) + " is not a maximal cone");
  auto k = std::find(sigma.begin(), sigma.end(), ray);
  if (k == sigma.end()) throw FanError(FanError::Kind::RayMissing, "ray is not in the cone");
  RaySet facet = sigma;
  facet.erase(facet.begin() + (k - sigma.begin()));
  for (const RaySet& other : fan.max_cones)
    if (other != sigma && is_subset(facet, other)) return other;
  throw FanError(FanError::Kind::NotComplete, "no maximal cone across " + cone_text(fan, facet));
}

Cone ess_by_intersection(const Fan& fan, const std::vector<int>& positions,
                         const std::vector<std::vector<int>>& neighbors, int cone) {
  // rays only; smoothness of fan cones is known and not needed here
  auto plain = [&](int c) { return Cone{fan.rank, fan.cone_rays(fan.max_cones[c])}; };
  Cone acc = plain(cone);
  for (int nb : neighbors[cone])
    if (positions[nb] > positions[cone]) acc = cone_intersection(acc, plain(nb));
  return acc;
}

RaySet ess_by_faces(const Fan& fan, const std::vector<int>& positions,
                    const std::vector<std::vector<int>>& neighbors, int cone) {
  RaySet out;
  const RaySet& c = fan.max_cones[cone];
  for (std::size_t k = 0; k < c.size(); ++k)
    if (positions[neighbors[cone][k]] < positions[cone]) out.push_back(c[k]);
  return out;
}

OrderedFan::OrderedFan(Fan fan, int r, std::vector<int> sequence)
    : fan_(std::move(fan)), r_(r), sequence_(std::move(sequence)) {
  if (sequence_.size() != fan_.max_cones.size())
    throw std::invalid_argument("ordering length differs from the number of maximal cones");
  position_ = positions_of(sequence_);
  neighbors_ = wall_neighbors(fan_);
  ess_.resize(fan_.max_cones.size());
  for (std::size_t c = 0; c < fan_.max_cones.size(); ++c) {
    const int ci = static_cast<int>(c);
    RaySet face = ess_by_faces(fan_, position_, neighbors_, ci);
    Cone literal = ess_by_intersection(fan_, position_, neighbors_, ci);
    if (literal.rays != fan_.cone_rays(face))
      throw FanError(FanError::Kind::EssNotFace,
                     "ess of " + cone_text(fan_, fan_.max_cones[c]) +
                         " differs between the intersection and the face formula");
    ess_[c] = std::move(face);
  }
}

int OrderedFan::index_of(const RaySet& sigma) const {
  auto it = std::lower_bound(fan_.max_cones.begin(), fan_.max_cones.end(), sigma);
  if (it == fan_.max_cones.end() || *it != sigma)
    throw FanError(FanError::Kind::ConeNotInFan, cone_text(fan_, sigma) + " is not a maximal cone");
  return static_cast<int>(it - fan_.max_cones.begin());
}

const RaySet& OrderedFan::ess(const RaySet& sigma) const { return ess_[index_of(sigma)]; }

std::vector<int> sign_vector_sequence(const Fan& p1n) {
  if (!(p1n == p1_power(p1n.rank)))
    throw FanError(FanError::Kind::MissingProvenance, "sign-vector order needs (P^1)^n");
  // key: 0 for +e_i, 1 for -e_i, coordinate by coordinate
  std::vector<std::pair<std::vector<int>, int>> keyed;
  for (std::size_t c = 0; c < p1n.max_cones.size(); ++c) {
    std::vector<int> key(p1n.rank, 0);
    for (int idx : p1n.max_cones[c]) {
      const LatticePoint& v = p1n.rays[idx];
      for (int i = 0; i < p1n.rank; ++i)
        if (v[i] != 0) key[i] = v[i] < 0 ? 1 : 0;
    }
    keyed.emplace_back(key, static_cast<int>(c));
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<int> seq;
  for (auto& [key, c] : keyed) seq.push_back(c);
  return seq;
}

namespace {

// Within-parent order for one relative barycentric step. Relabels the
// non-eta rays of a(sigma) so those with a greater wall neighbor come first,
// rewrites alpha accordingly and compares at the last differing entry.
std::vector<int> refine_step(const Fan& input, const std::vector<int>& input_pos,
                             const BaryResult& step) {
  const auto nbrs = wall_neighbors(input);
  const std::size_t n_in = input.max_cones.size();
  if (step.splits.size() != n_in)
    throw FanError(FanError::Kind::MissingProvenance, "trace step does not match its input fan");

  // relabel[k][old label - 1] = new label
  std::vector<std::vector<int>> relabel(n_in);
  for (std::size_t k = 0; k < n_in; ++k) {
    const ConeSplit& split = step.splits[k];
    if (split.cone != input.max_cones[k])
      throw FanError(FanError::Kind::MissingProvenance, "trace split does not match its input cone");
    const RaySet& cone = input.max_cones[k];
    auto greater_across = [&](const LatticePoint& f) {
      const int idx = *input.ray_index(f);
      const auto pos = std::find(cone.begin(), cone.end(), idx) - cone.begin();
      return input_pos[nbrs[k][pos]] > input_pos[k];
    };
    std::vector<int> up, down;
    for (int j = split.t; j < split.m; ++j) (greater_across(split.f[j]) ? up : down).push_back(j);
    std::vector<int> map(split.f.size());
    std::iota(map.begin(), map.end(), 1);
    int next = split.t + 1;
    for (int j : up) map[j] = next++;
    for (int j : down) map[j] = next++;
    relabel[k] = std::move(map);
  }

  const std::size_t n_out = step.fan.max_cones.size();
  std::vector<Permutation> relabelled(n_out);
  for (std::size_t c = 0; c < n_out; ++c) {
    const int p = step.parent[c];
    const ConeSplit& split = step.splits[p];
    Permutation a;
    for (int v : step.alpha[c]) a.push_back(relabel[p][v - 1]);
    const int lead = leading_block(split.t, split.m, a);
    std::sort(a.begin(), a.begin() + lead);
    relabelled[c] = std::move(a);
  }

  std::vector<int> seq(n_out);
  std::iota(seq.begin(), seq.end(), 0);
  std::sort(seq.begin(), seq.end(), [&](int x, int y) {
    const int px = step.parent[x], py = step.parent[y];
    if (px != py) return input_pos[px] < input_pos[py];
    const Permutation& a = relabelled[x];
    const Permutation& b = relabelled[y];
    for (int j = static_cast<int>(a.size()) - 1; j >= 0; --j)
      if (a[j] != b[j]) return a[j] > b[j];
    return false;
  });
  return seq;
}

}  // namespace

namespace {

std::vector<int> preadmissible_sequence(const SubdivisionTrace& trace) {
  const Fan* current = &trace.input;
  std::vector<int> seq = sign_vector_sequence(trace.input);
  for (const BaryResult& step : trace.steps) {
    seq = refine_step(*current, positions_of(seq), step);
    current = &step.fan;
  }
  return seq;
}

}  // namespace

OrderedFan build_preadmissible_ordering(const SubdivisionTrace& trace, int r) {
  return OrderedFan(trace.output(), r, preadmissible_sequence(trace));
}

OrderedFan build_admissible_ordering(const SubdivisionTrace& trace, int r) {
  std::vector<int> seq = preadmissible_sequence(trace);
  const SigmaSplit split = sigma_split(trace.output(), r);
  std::vector<char> open(trace.output().max_cones.size(), 0);
  for (int c : split.open_max) open[c] = 1;
  std::stable_partition(seq.begin(), seq.end(), [&](int c) { return open[c] != 0; });
  return OrderedFan(trace.output(), r, std::move(seq));
}

bool OrderingReport::preadmissible() const {
  return std::all_of(condition, condition + 5, [](const OrderingCheck& c) { return c.ok; });
}

bool OrderingReport::admissible() const { return preadmissible() && condition[5].ok; }

std::string OrderingReport::summary() const {
  static const char* names[] = {"i", "ii", "iii", "iv", "v", "vi"};
  std::ostringstream os;
  for (int k = 0; k < 6; ++k) {
    os << '(' << names[k] << ") " << (condition[k].ok ? "ok" : "FAIL");
    if (!condition[k].ok) os << ": " << condition[k].witness;
    os << '\n';
  }
  return os.str();
}

OrderingReport verify_ordering(const OrderedFan& ordered, int r) {
  OrderingReport rep;
  const Fan& fan = ordered.fan();
  const int n = fan.rank;
  const std::size_t count = fan.max_cones.size();
  auto fail = [&](int k, const std::string& why) {
    if (rep.condition[k].ok) {
      rep.condition[k].ok = false;
      rep.condition[k].witness = why;
    }
  };
  auto text = [&](int c) { return cone_text(fan, fan.max_cones[c]); };

  // (i), read for tau != sigma; candidates share the rarest ray of ess
  std::vector<std::vector<int>> by_ray(fan.rays.size());
  for (std::size_t c = 0; c < count; ++c)
    for (int v : fan.max_cones[c]) by_ray[v].push_back(static_cast<int>(c));
  for (std::size_t c = 0; c < count && rep.condition[0].ok; ++c) {
    const RaySet& e = ordered.ess(static_cast<int>(c));
    std::vector<int> all;
    const std::vector<int>* pool = nullptr;
    if (e.empty()) {
      all.resize(count);
      std::iota(all.begin(), all.end(), 0);
      pool = &all;
    } else {
      int best = e[0];
      for (int v : e)
        if (by_ray[v].size() < by_ray[best].size()) best = v;
      pool = &by_ray[best];
    }
    for (int t : *pool)
      if (t != static_cast<int>(c) && is_subset(e, fan.max_cones[t]) && !ordered.less(static_cast<int>(c), t)) {
        fail(0, "ess(" + text(static_cast<int>(c)) + ") lies in smaller " + text(t));
        break;
      }
  }

  // (ii)
  std::vector<LatticePoint> basis;
  for (int i = 0; i < n; ++i) basis.push_back(unit(n, i));
  auto least = fan.find(basis);
  if (!least || count == 0)
    fail(1, "Cone(e_1,...,e_n) is not a cone");
  else if (fan.max_cones[ordered.sequence().front()] != *least)
    fail(1, "least element is " + text(ordered.sequence().front()));

  // (iii)
  for (std::size_t c = 0; c < count; ++c) {
    if (least && fan.max_cones[c] == *least) continue;
    const auto& nb = ordered.neighbors()[c];
    if (std::none_of(nb.begin(), nb.end(), [&](int t) { return ordered.less(t, static_cast<int>(c)); }))
      fail(2, text(static_cast<int>(c)) + " has no smaller wall neighbor");
  }

  // (iv) and (v)
  const std::vector<int> upper = upper_axis_rays(fan, r);
  for (std::size_t c = 0; c < count; ++c) {
    const RaySet& cone = fan.max_cones[c];
    for (int ei : upper) {
      auto k = std::find(cone.begin(), cone.end(), ei);
      if (k != cone.end()) {
        const int across = ordered.neighbor(static_cast<int>(c), static_cast<int>(k - cone.begin()));
        if (!ordered.less(static_cast<int>(c), across))
          fail(3, text(static_cast<int>(c)) + " is not below its neighbor across " + to_string(fan.rays[ei]));
      } else {
        RaySet gen = ordered.ess(static_cast<int>(c));
        gen.insert(std::lower_bound(gen.begin(), gen.end(), ei), ei);
        if (fan.contains_set(gen))
          fail(4, "Cone(" + to_string(fan.rays[ei]) + ", ess(" + text(static_cast<int>(c)) + ")) is a cone");
      }
    }
  }

  // (vi)
  const SigmaSplit split = sigma_split(fan, r);
  int last_open = -1, first_flat = static_cast<int>(count);
  for (int c : split.open_max) last_open = std::max(last_open, ordered.positions()[c]);
  for (int c : split.flat_max) first_flat = std::min(first_flat, ordered.positions()[c]);
  if (last_open > first_flat)
    fail(5, text(ordered.sequence()[first_flat]) + " precedes " + text(ordered.sequence()[last_open]));
  return rep;
}

SigmaSplit sigma_split(const Fan& fan, int r) {
  SigmaSplit out;
  const std::vector<int> upper = upper_axis_rays(fan, r);
  std::set<RaySet> all;
  for (std::size_t c = 0; c < fan.max_cones.size(); ++c) {
    const RaySet& cone = fan.max_cones[c];
    const bool open = std::any_of(upper.begin(), upper.end(), [&](int v) {
      return std::binary_search(cone.begin(), cone.end(), v);
    });
    (open ? out.open_max : out.flat_max).push_back(static_cast<int>(c));
    const std::size_t k = cone.size();
    for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
      RaySet face;
      for (std::size_t j = 0; j < k; ++j)
        if (mask >> j & 1) face.push_back(cone[j]);
      if (open) out.open.cones.insert(face);
      all.insert(std::move(face));
    }
  }
  for (const RaySet& c : all)
    if (!out.open.cones.count(c)) out.flat.push_back(c);
  return out;
}

}  // namespace toric
