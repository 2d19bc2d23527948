#pragma once

#include "toric/fan.hpp"
#include "toric/subdivide.hpp"

#include <optional>
#include <string>
#include <vector>

namespace toric {

// neighbors[c][k]: index of the maximal cone across the facet of max_cones[c]
// opposite its k-th ray. Throws NotComplete on a boundary facet.
std::vector<std::vector<int>> wall_neighbors(const Fan& fan);
RaySet wall_neighbor(const Fan& fan, const RaySet& sigma, int ray);

// Total order on the maximal cones plus everything derived from it.
class OrderedFan {
 public:
  // `sequence` lists max-cone indices from least to greatest.
  OrderedFan(Fan fan, int r, std::vector<int> sequence);

  const Fan& fan() const { return fan_; }
  int r() const { return r_; }
  const std::vector<int>& sequence() const { return sequence_; }
  // position of each maximal cone in the order, aligned with fan().max_cones
  const std::vector<int>& positions() const { return position_; }
  bool less(int a, int b) const { return position_[a] < position_[b]; }
  int neighbor(int cone, int k) const { return neighbors_[cone][k]; }
  const std::vector<std::vector<int>>& neighbors() const { return neighbors_; }
  // ray indices of ess, a face of the cone
  const RaySet& ess(int cone) const { return ess_[cone]; }
  const RaySet& ess(const RaySet& sigma) const;
  int index_of(const RaySet& sigma) const;

 private:
  Fan fan_;
  int r_;
  std::vector<int> sequence_;
  std::vector<int> position_;
  std::vector<std::vector<int>> neighbors_;
  std::vector<RaySet> ess_;
};

// The intersection of sigma with its greater wall neighbors, computed with
// cone_intersection (so not assumed to be a face). Sigma itself when no neighbor is greater.
Cone ess_by_intersection(const Fan& fan, const std::vector<int>& positions,
                         const std::vector<std::vector<int>>& neighbors, int cone);
// Rays f of the cone whose wall neighbor across f is smaller.
RaySet ess_by_faces(const Fan& fan, const std::vector<int>& positions,
                    const std::vector<std::vector<int>>& neighbors, int cone);

// Sign-vector order on (P^1)^n: more leading +1 entries is smaller.
std::vector<int> sign_vector_sequence(const Fan& p1n);

// Ordering of the output of a (P^1)^n trace: sign-vector order, then each
// relative barycentric step refines every parent block, then the cones
// containing some e_i (i > r) are moved to the front.
OrderedFan build_admissible_ordering(const SubdivisionTrace& trace, int r);
// The same without the final partition.
OrderedFan build_preadmissible_ordering(const SubdivisionTrace& trace, int r);

struct OrderingCheck {
  bool ok = true;
  std::string witness;
};
struct OrderingReport {
  OrderingCheck condition[6];  // (i)..(vi)
  bool preadmissible() const;
  bool admissible() const;
  std::string summary() const;
};
OrderingReport verify_ordering(const OrderedFan& ordered, int r);

struct SigmaSplit {
  SubfanSelection open;           // cones sharing a cone with some e_i, i > r
  std::vector<RaySet> flat;       // the other cones
  std::vector<int> open_max;      // max-cone indices containing some e_i, i > r
  std::vector<int> flat_max;
};
SigmaSplit sigma_split(const Fan& fan, int r);

}  // namespace toric
