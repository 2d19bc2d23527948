#pragma once

#include "toric/fan.hpp"

#include <map>
#include <optional>
#include <set>
#include <vector>

namespace toric {

struct StarResult {
  Fan fan;
  LatticePoint center;
  // old maximal cone -> the maximal cones replacing it (untouched cones map to themselves)
  std::map<RaySet, std::vector<RaySet>> replaced;
};
StarResult star_subdivision(const Fan& fan, const RaySet& sigma);
StarResult star_subdivision(const Fan& fan, const std::vector<LatticePoint>& sigma);

// Permutations of {1..m} (1-based values), lexicographic.
using Permutation = std::vector<int>;
std::vector<Permutation> t_admissible_permutations(int t, int m);

// Number of leading generators kept as plain rays: the smallest c with alpha(c+1) > t,
// or m when t == m.
int leading_block(int t, int m, const Permutation& alpha);

// Generators f_{alpha(1)},...,f_{alpha(c)}, partial sums up to m, then f_{m+1},...
std::vector<LatticePoint> alpha_cone(const std::vector<LatticePoint>& f, int t, int m,
                                     const Permutation& alpha);

// A subfan given by its cones (ray index sets of the parent fan).
struct SubfanSelection {
  std::set<RaySet> cones;
  bool contains(const RaySet& c) const { return c.empty() || cones.count(c) > 0; }
};
SubfanSelection select_all(const Fan& fan);
SubfanSelection select_avoiding(const Fan& fan, const std::vector<LatticePoint>& excluded);
// cones avoiding `excluded` whose rays all lie in one of `containers`
SubfanSelection select_inside(const Fan& fan, const std::vector<std::vector<LatticePoint>>& containers,
                              const std::vector<LatticePoint>& excluded = {});

// How a maximal cone was labelled for the closed form: f = rays of eta in a(sigma),
// then the other rays of a(sigma), then the remaining rays, each group sorted.
struct ConeSplit {
  RaySet cone;
  std::vector<LatticePoint> f;
  int t = 0;
  int m = 0;
};

struct BaryResult {
  Fan fan;
  std::vector<ConeSplit> splits;   // one per input maximal cone, same order
  std::vector<int> parent;         // per output maximal cone: index into splits
  std::vector<Permutation> alpha;  // per output maximal cone
};
BaryResult excluded_barycentric(const Fan& fan, const std::vector<LatticePoint>& eta,
                                const SubfanSelection& selection);
// Literal sequence of star subdivisions, largest faces first.
Fan excluded_barycentric_by_stars(const Fan& fan, const std::vector<LatticePoint>& eta,
                                  const SubfanSelection& selection);

struct SubdivisionTrace {
  Fan input;
  std::vector<BaryResult> steps;
  const Fan& output() const { return steps.empty() ? input : steps.back().fan; }
};

// `iterations` applications of sd_{eta,u,d}. Rays in `excluded` and the cones
// containing them are never selected (used for the full-fan route of Theta).
SubdivisionTrace sd_operator(const Fan& fan, const std::vector<LatticePoint>& eta, int u, int d,
                             int iterations, const std::vector<LatticePoint>& excluded = {});

Fan build_gamma(int n, int r);

// Full-fan trace starting at (P^1)^n; cross-checked against the half-space route.
SubdivisionTrace build_theta_trace(int n, int r, const std::vector<int>& d);
Fan build_theta(int n, int r, const std::vector<int>& d);

struct HalfspaceSpec {
  enum class Side { Plus, Minus, Zero };
  int t = 1;
  Integer eps_num = 1;
  Integer eps_den = 1;
  Side side = Side::Plus;
};
struct RigidityReport {
  bool rigid = false;
  bool in_orthant = false;
  bool in_halfspace = false;
};
// `rigid_set` holds 1-based coordinates.
bool is_rigid_ray(const LatticePoint& f, const std::vector<int>& rigid_set);
RigidityReport rigidity_halfspace_check(const std::vector<LatticePoint>& rays,
                                        const std::vector<int>& rigid_set,
                                        const std::optional<HalfspaceSpec>& halfspace = {});

// Cone(e_{i_1},...,e_{i_s}, f_{s+1},...,f_n) with the nested-support flag condition
// and rigidity on {i_1,...,i_s}; nonnegative cones of rank n only.
bool has_flag_structure(const std::vector<LatticePoint>& rays, int n);

// Rays a with a_1..a_r <= 0, a not an axis ray, a_s = 0 for some s > r, such that
// Cone(a, e_s) is a cone.
std::vector<std::pair<LatticePoint, int>> flat_axis_violations(const Fan& fan, int r);

struct LiftResult {
  Fan fan;
  Fan quotient;    // V of the lifted ray
  Fan downstairs;  // the planned subdivision of V(ray)
};
LiftResult lift_subdivision_along_ray(const Fan& fan, const LatticePoint& ray,
                                      const std::vector<std::vector<LatticePoint>>& plan);

struct CylinderResult {
  Fan fan;
  std::vector<LatticePoint> f;  // rays whose cones with e_t were starred, in processing order f_1..f_m
};
// `order`, when given, fixes f_1..f_m (rays of fan); default is lexicographic.
CylinderResult cylinder_subdivision(const Fan& fan, int t, const std::set<int>& i0,
                                    const std::set<int>& i2,
                                    const std::optional<std::vector<LatticePoint>>& order = {});

struct OrbitPoint {
  Integer x, y, z;        // second generator
  Integer x2, y2, z2;     // third generator
};
// Iterates of Cone(e1,f2,f3) -> Cone(e1, 2e1+f2+f3, 3e1+2f2+f3) under plain barycentric
// subdivision of A^3, from the closed-form matrix recurrence.
std::vector<OrbitPoint> barycentric_orbit(int m_max);

}  // namespace toric
