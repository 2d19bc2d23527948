#pragma once

#include "toric/exactlin.hpp"
#include "toric/fan.hpp"
#include "toric/ordering.hpp"

#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace toric {

class ChowError : public std::runtime_error {
 public:
  enum class Kind {
    NotABasis,
    RouteMismatch,
    MethodDisagreement,
    UnsupportedRay,
    PreconditionFailed,
    ConclusionFailed,
    Torsion,
    NotAMap,
  };
  ChowError(Kind kind, const std::string& what) : std::runtime_error(what), kind(kind) {}
  Kind kind;
};

// Z^generators / (column span of the relation matrix).
class Presentation {
 public:
  Presentation() : Presentation({}, IntMatrix(0, 0)) {}
  Presentation(std::vector<std::string> labels, IntMatrix relations);

  const std::vector<std::string>& labels() const { return labels_; }
  const IntMatrix& relations() const { return relations_; }
  Eigen::Index generators() const { return relations_.rows(); }
  Eigen::Index rank() const { return coords_->free_rank(); }
  std::vector<Integer> torsion() const { return coords_->torsion(); }
  // columns indexed by generators -> coordinates on the free part
  IntMatrix coordinates(const IntMatrix& x) const { return coords_->project(x); }
  IntMatrix generator_coordinates() const;  // rank x generators
  // generators x rank, a section of coordinates()
  IntMatrix lift() const { return coords_->lift(); }
  // exact membership in the relation span (torsion-aware)
  bool is_zero(const IntMatrix& x) const;
  std::string to_json() const;

 private:
  std::vector<std::string> labels_;
  IntMatrix relations_;
  std::shared_ptr<const exactlin::CokernelCoordinates<Integer>> coords_;
};

// Homomorphism given on generators; `matrix` acts on free coordinates.
struct AbelianMap {
  IntMatrix on_generators;  // target generators x source generators
  IntMatrix matrix;         // target rank x source rank
};
// Throws NotAMap if some relation is not sent into the target relations.
AbelianMap make_map(const Presentation& source, const Presentation& target, IntMatrix on_generators);

// CH_p: generators [V(tau)] for tau of dimension n - p.
struct ChowGroup {
  int p = 0;
  std::vector<RaySet> cones;
  std::map<RaySet, int> index;
  Presentation presentation;
  Eigen::Index rank() const { return presentation.rank(); }
};
ChowGroup chow_presentation(const Fan& fan, int p);
// Same relations, only cones from `cones` (an upward closed family).
ChowGroup chow_presentation_on(const Fan& fan, int p, const std::vector<RaySet>& cones);

// Degree-p piece of Z[x_f]/(I + J), on monomials supported on cones.
using Monomial = std::vector<int>;  // sorted ray indices with repetition
struct SrPiece {
  int degree = 0;
  std::vector<Monomial> monomials;
  std::map<Monomial, int> index;
  Presentation presentation;
  Eigen::Index rank() const { return presentation.rank(); }
};
SrPiece sr_graded_piece(const Fan& fan, int p);

// [V(tau)] -> x_tau, from CH_{n-k} to the degree-k SR piece; certified to be
// an isomorphism (unimodular on free parts).
struct SrIdentification {
  ChowGroup chow;
  SrPiece ring;
  AbelianMap map;
};
SrIdentification sr_identification(const Fan& fan, int k);

struct FultonBasis {
  // per k = 0..n: maximal cones whose ess has dimension n - k, in order
  std::vector<std::vector<int>> cones;
  std::vector<ChowGroup> groups;   // CH_k
  std::vector<IntMatrix> matrix;   // CH_k free coordinates of the basis classes (square, unimodular)
  // free coordinates -> coefficients on the basis
  IntMatrix basis_coefficients(int k, const IntMatrix& coords) const;
};
// Throws NotABasis / Torsion.
FultonBasis fulton_basis(const OrderedFan& ordered);

// Cycle-level delta_{i,eps}^* : CH_p(fan) -> CH_{p-1}(D_{i,eps}(fan)), intersection
// with the divisor (eps = 0) or the transverse hyperplane section (eps = 1).
struct DeltaMap {
  Fan target;
  ChowGroup source;
  ChowGroup image;
  AbelianMap map;
};
DeltaMap delta_cycle_map(const Fan& fan, int axis, int epsilon, int p);

// The same through the ring: restriction of SR generators, [V(e_j)] for j in
// `normalized` (and e_i for eps = 0) rewritten through J first.
DeltaMap delta_ring_map(const Fan& fan, int axis, int epsilon, int p,
                        const std::set<int>& normalized = {});

// delta on CH_p of an r-standard ordered fan, with cross-checks: Fulton
// projection (eps = 0), ring map (both), flat-cone formula (eps = 1).
struct DeltaOnChow {
  DeltaMap cycle;
  std::vector<std::string> routes;  // the routes that were compared
};
DeltaOnChow delta_on_chow(const OrderedFan& ordered, int axis, int epsilon, int p,
                          bool ring_check = true);

// Ordering on D_{i,0} induced from the maximal cones containing e_i.
OrderedFan induced_divisor_ordering(const OrderedFan& ordered, int axis);

struct FlatChow {
  ChowGroup full;
  ChowGroup flat;              // (c) generators in the flat part
  IntMatrix kernel;            // (a) basis of the kernel intersection, full free coordinates
  std::vector<int> fulton;     // (b) flat maximal cones with dim ess = n - p
  Eigen::Index rank_kernel = 0, rank_fulton = 0, rank_flat = 0;
  // flat presentation -> CH_p, certified to land on the kernel isomorphically
  AbelianMap inclusion;
};
// Throws MethodDisagreement or Torsion.
FlatChow chow_flat(const OrderedFan& ordered, int r, int p);

struct BlowupReport {
  bool ok = true;
  std::vector<Eigen::Index> blown, base, center;  // rank CH_d per d = 0..n
  std::vector<std::string> failures;
};
BlowupReport blowup_rank_check(const Fan& fan, const RaySet& sigma);

// Elements of Sym^p Z^1: integer combinations of multisets of rays.
class DivisorCycle {
 public:
  using Term = std::vector<LatticePoint>;  // sorted

  DivisorCycle() = default;
  explicit DivisorCycle(int degree) : degree_(degree) {}
  static DivisorCycle ray(const LatticePoint& f, const Integer& c = 1);

  int degree() const { return degree_; }
  const std::map<Term, Integer>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  void add(Term term, const Integer& c);
  std::set<LatticePoint> support() const;

  DivisorCycle operator+(const DivisorCycle& o) const;
  DivisorCycle operator-(const DivisorCycle& o) const;
  DivisorCycle operator*(const DivisorCycle& o) const;  // Sym product
  friend DivisorCycle operator*(const Integer& c, const DivisorCycle& x);
  bool operator==(const DivisorCycle& o) const { return degree_ == o.degree_ && terms_ == o.terms_; }

  std::string to_string() const;

 private:
  int degree_ = 1;
  std::map<Term, Integer> terms_;
};

// Throws UnsupportedRay if the cycle uses a non-ray or some e_i, i in `excluded` (labels).
void check_support(const Fan& fan, const std::set<int>& excluded, const DivisorCycle& x);

// Pullbacks, applied ray by ray and multiplicatively on Sym^p.
DivisorCycle pullback_star(const Fan& fan, const std::vector<LatticePoint>& sigma, const DivisorCycle& x);
// General subdivision: coefficient of a fine ray is the value of the coarse
// piecewise linear support function.
DivisorCycle pullback_subdivision(const Fan& coarse, const Fan& fine, const DivisorCycle& x);
// Lands on divisor_fan(fan, axis, epsilon). `excluded` is I_0 (labels).
DivisorCycle pullback_delta(const Fan& fan, int axis, int epsilon, const std::set<int>& excluded,
                            const DivisorCycle& x);
// Lands on product_with_p1(fan, t).
DivisorCycle pullback_pi(const Fan& fan, const DivisorCycle& x);

// Class of a Sym^p cycle in the degree-p SR piece (free coordinates).
IntMatrix cycle_class(const Fan& fan, const SrPiece& piece, const DivisorCycle& x);

struct PullbackReport {
  int checked = 0;
  std::vector<std::string> failures;
  bool ok() const { return failures.empty(); }
};
PullbackReport verify_pullback_identities(const Fan& fan, const std::set<int>& i0,
                                          const std::set<int>& i1, const std::set<int>& i2);

// Every CH^p class lifts to Sym^p of divisors avoiding e_i, i in `excluded`.
bool sym_surjectivity(const Fan& fan, const std::set<int>& excluded, int p);

struct CylinderLift {
  Fan fan;
  DivisorCycle lifted;
  std::vector<LatticePoint> f;
};
// Throws PreconditionFailed / ConclusionFailed.
CylinderLift cylinder_lift(const Fan& fan, const DivisorCycle& x, const std::set<int>& i0,
                           const std::set<int>& i1, const std::set<int>& i2, int t);

std::string monomial_label(const Fan& fan, const Monomial& m);

}  // namespace toric
