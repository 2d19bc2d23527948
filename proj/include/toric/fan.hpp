#pragma once

#include "toric/integer.hpp"

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace toric {

class FanError : public std::runtime_error {
 public:
  enum class Kind {
    NonPrimitiveRay,
    DependentRays,
    OverlappingCones,
    ConeNotInFan,
    RayMissing,
    NotPure,
    NotComplete,
    PreconditionFailed,
    DimensionTooLow,
    InvalidSelection,
    LiftFailed,
    PropertyViolated,
    MissingProvenance,
    EssNotFace,
  };
  FanError(Kind kind, const std::string& what) : std::runtime_error(what), kind(kind) {}
  Kind kind;
};

// Simplicial cone on primitive rays sorted lexicographically. Cones returned by
// cone_intersection may have more rays than their dimension; `simplicial`
// records which kind this is.
struct Cone {
  int ambient_rank = 0;
  std::vector<LatticePoint> rays;
  bool simplicial = true;
  bool smooth = true;

  int dim() const { return static_cast<int>(rays.size()); }
  bool operator==(const Cone& o) const {
    return ambient_rank == o.ambient_rank && rays == o.rays;
  }
};

Cone make_cone(int ambient_rank, std::vector<LatticePoint> rays);

// Rational coordinates of v in the basis `rays` (numerators, denominator > 0),
// if v lies in their span.
struct RationalCoords {
  std::vector<Integer> numerators;
  Integer denominator;
};
std::optional<RationalCoords> span_coordinates(const std::vector<LatticePoint>& rays,
                                               const LatticePoint& v);
bool cone_contains(const std::vector<LatticePoint>& rays, const LatticePoint& v);

Cone cone_intersection(const Cone& a, const Cone& b);

// Basis of M(sigma) = sigma^perp as columns (canonical, HNF-transposed).
IntMatrix orthogonal_basis(const std::vector<LatticePoint>& rays, int ambient_rank);

using RaySet = std::vector<int>;  // sorted indices into Fan::rays

struct Fan {
  int rank = 0;
  std::vector<LatticePoint> rays;  // sorted
  std::vector<RaySet> max_cones;   // sorted
  std::vector<int> axes;           // coordinate labels, 1..rank unless relabelled

  std::optional<int> ray_index(const LatticePoint& v) const;
  std::vector<LatticePoint> cone_rays(const RaySet& c) const;
  Cone cone(const RaySet& c) const;
  // exact ray-set lookup; nullopt if some ray is missing or the set is not a cone
  std::optional<RaySet> find(const std::vector<LatticePoint>& cone_rays) const;
  bool contains(const std::vector<LatticePoint>& cone_rays) const { return find(cone_rays).has_value(); }
  bool contains_set(const RaySet& c) const;
  int axis_position(int label) const;
  int max_dim() const;

  bool operator==(const Fan& o) const {
    return rank == o.rank && rays == o.rays && max_cones == o.max_cones;
  }
};

// Canonicalizes, drops non-maximal cones, validates pairwise intersections when asked.
Fan make_fan(int rank, const std::vector<std::vector<LatticePoint>>& cones, bool validate = true,
             std::vector<int> axes = {});

// Throws OverlappingCones naming the first bad pair.
void validate_fan(const Fan& fan);
bool is_smooth(const Fan& fan);

// All cones of a fan, grouped by dimension.
class FaceLattice {
 public:
  explicit FaceLattice(const Fan& fan);

  const Fan& fan() const { return *fan_; }
  int rank() const { return fan_->rank; }
  const std::vector<RaySet>& cones(int dim) const;
  std::optional<int> index(const RaySet& c) const;
  bool contains(const RaySet& c) const { return index(c).has_value(); }
  // (index in cones(dim + 1), extra ray) for every tau with sigma a facet of tau
  const std::vector<std::pair<int, int>>& cofaces(int dim, int idx) const;
  std::size_t total() const;

 private:
  const Fan* fan_;
  std::vector<std::vector<RaySet>> by_dim_;
  std::vector<std::map<RaySet, int>> lookup_;
  std::vector<std::vector<std::vector<std::pair<int, int>>>> cofaces_;
};

// Standard fans.
Fan p1_power(int n);                 // (P^1)^n
Fan affine_space(int n);             // A^n
Fan half_space_fan(int n, int r);    // (P^1 - 0)^r x (P^1)^{n-r}
Fan projective_space(int n);         // P^n
Fan zero_fan(int n);                 // the zero cone alone

bool is_complete(const Fan& fan);
bool is_subdivision(const Fan& fine, const Fan& coarse);

struct QuotientFan {
  Fan fan;
  IntMatrix projection;                // rows: canonical basis of M(sigma)
  std::map<RaySet, RaySet> correspondence;  // upstairs cone containing sigma -> downstairs cone
};
QuotientFan quotient_fan(const Fan& fan, const RaySet& sigma);

// D_{i,0} and D_{i,1}; `axis` is a coordinate label.
Fan divisor_fan(const Fan& fan, int axis, int epsilon);
bool is_i_admissible(const Fan& fan, int axis);

Fan product_with_p1(const Fan& fan, int axis_label);

// Drop / insert coordinate at a 0-based position.
LatticePoint drop_coordinate(const LatticePoint& v, int pos);
LatticePoint insert_coordinate(const LatticePoint& v, int pos, std::int64_t value = 0);

struct StandardnessReport {
  bool smooth = false;
  bool subdivision_of_p1n = false;
  bool axis_condition = false;    // e_1..e_r unique positive rays on their axes
  bool eta_condition = false;     // Cone(e_{r+1},...,e_n) is a cone
  bool is_r_standard = false;
  bool is_very_r_standard = false;
  std::vector<std::string> witnesses;
};
StandardnessReport standardness_report(const Fan& fan, int r);

struct AdmissibilityReport {
  bool complete_smooth = false;
  bool i0_cone = false;
  bool i1_complete = false;
  bool i2_unique = false;
  bool admissible() const { return complete_smooth && i0_cone && i1_complete && i2_unique; }
  std::vector<std::string> witnesses;
};
// Index sets are axis labels.
AdmissibilityReport admissibility_report(const Fan& fan, const std::set<int>& i0,
                                         const std::set<int>& i1, const std::set<int>& i2);

Fan restrict_standard(const Fan& fan, int r);
Fan extend_standard(const Fan& restricted, int r);

// JSON interchange: {"rank", "rays", "max_cones"}.
std::string fan_to_json(const Fan& fan);
Fan fan_from_json(const std::string& text);

std::string describe(const Fan& fan, const RaySet& c);

}  // namespace toric
