#pragma once

#include "toric/chow.hpp"
#include "toric/fan.hpp"

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace toric {

class ComplexError : public std::runtime_error {
 public:
  enum class Kind {
    AdaptedBasisFailure,
    NotAComplex,
    BasisDependence,
    NotAChainMap,
    MembershipViolation,
    IdentificationFailed,
    FamilyMismatch,
  };
  ComplexError(Kind kind, const std::string& what) : std::runtime_error(what), kind(kind) {}
  Kind kind;
};

// q-subsets of {0..a-1}, lexicographic.
std::vector<std::vector<int>> wedge_subsets(int a, int q);

// Z_{p,q} = sum over cones of dimension n-p-q of wedge^q M(sigma).
struct ZDegree {
  std::vector<RaySet> cones;           // sorted
  std::vector<IntMatrix> dual;         // basis of M(sigma), columns
  std::vector<Eigen::Index> offset;    // first basis index of each cone
  std::map<RaySet, int> index;
  std::vector<std::vector<int>> subsets;  // shared by all cones of this degree
  Eigen::Index size = 0;
};

struct ZSlice {
  Fan fan;
  int p = 0;
  bool flat = false;
  int r = 0;
  std::vector<ZDegree> degrees;  // q = 0..n-p (empty when p is out of range)
  std::vector<IntMatrix> d;      // d[q] : Z_q -> Z_{q-1}; d[0] has zero rows

  int top() const { return static_cast<int>(degrees.size()) - 1; }
  Eigen::Index size(int q) const;
  std::vector<std::string> labels(int q) const;
};

// Builds d from adapted bases, asserts d o d = 0 and, if `check_basis`, that a
// second adapted basis gives the same matrices. `variant` picks the basis.
ZSlice build_z_slice(const Fan& fan, int p, bool flat, int r, bool check_basis = true, int variant = 0);

// Matrix of u _| on wedge^q M(sigma) -> wedge^{q-1} M(tau), computed from the
// adapted basis numbered `variant`. Rows follow wedge_subsets(rank M(tau), q-1).
IntMatrix contraction_matrix(const IntMatrix& sigma_dual, const IntMatrix& tau_dual,
                             const LatticePoint& u, int q, int variant = 0);

// ---------------------------------------------------------------- homology

struct HomologyGroup {
  Eigen::Index rank = 0;
  std::vector<Integer> torsion;
  IntMatrix witness;  // a cycle that is not a boundary (one column), empty if zero
  bool zero() const { return rank == 0 && torsion.empty(); }
};

// Degrees 0..N; boundary[k] : C_k -> C_{k-1}, boundary[0] has zero rows.
struct ChainComplex {
  std::vector<Eigen::Index> sizes;
  std::vector<IntMatrix> boundary;
};
std::vector<HomologyGroup> homology(const ChainComplex& c);
std::vector<HomologyGroup> homology(const ZSlice& slice);
ChainComplex as_complex(const ZSlice& slice);

// H_0 = Z_{p,0} / d(Z_{p,1}) against CH_p (or the flat CH_p), identity on
// generators both ways, certified unimodular.
struct H0Identification {
  Presentation h0;
  ChowGroup chow;
  AbelianMap forward;   // H_0 -> CH
  AbelianMap backward;  // CH -> H_0
};
H0Identification identify_h0(const ZSlice& slice);

// ---------------------------------------------------------------- chain maps

enum class StructureKind { Delta, Rho, Nu };

// Per degree q: matrix Z_{p,q}(source) -> Z_{p',q}(target).
struct ChainMap {
  std::vector<IntMatrix> f;
  bool commutes_with_d = true;  // as checked when built
};

// delta_{i,1}^*: Z(fan) -> Z(D_{i,1} fan), p -> p-1
// rho_i^*:       Z(D_{i,1} fan) -> Z(fan), p -> p+1
// nu_i^*:        Z(fan) -> Z(fan'), p -> p+1, where D_{i,1} and D_{i+1,1} of fan' are fan
// `i` is a 1-based coordinate. Fans are checked to be related as stated
// (FamilyMismatch). Into a flat target, every image cone must be flat
// (MembershipViolation). Commutation with d is checked and stored; only delta
// is required to commute (NotAChainMap), rho and nu are maps of graded groups.
ChainMap structure_map(StructureKind kind, int i, const ZSlice& source, const ZSlice& target);

// Flat slice into the full slice of the same fan and p.
ChainMap inclusion_map(const ZSlice& flat, const ZSlice& full);

ChainMap compose(const ChainMap& outer, const ChainMap& inner);
ChainMap add(const ChainMap& a, const ChainMap& b);
ChainMap scaled(const Integer& c, const ChainMap& a);
ChainMap identity_map(const ZSlice& slice);
ChainMap zero_map(const ZSlice& source, const ZSlice& target);
bool operator==(const ChainMap& a, const ChainMap& b);
// d' f = f d in every degree
bool commutes(const ChainMap& f, const ZSlice& source, const ZSlice& target);

// ---------------------------------------------------------------- Theta family

// Slices of Theta_{n,r,d}, built on demand and kept.
class ThetaFamily {
 public:
  ThetaFamily(int r, std::vector<int> d) : r_(r), d_(std::move(d)) {}
  int r() const { return r_; }
  const std::vector<int>& d() const { return d_; }
  const Fan& fan(int n);
  const ZSlice& slice(int n, int p, bool flat = true);

 private:
  int r_;
  std::vector<int> d_;
  std::map<int, Fan> fans_;
  std::map<std::tuple<int, int, bool>, std::unique_ptr<ZSlice>> slices_;
};

struct IdentityInstance {
  std::string name;
  bool ok = false;
  // the flat composite needed a rho image outside the flat part; checked in
  // the full complex instead
  bool via_full = false;
  std::string violation;
};
struct IdentityReport {
  std::vector<IdentityInstance> instances;
  int membership_violations = 0;
  bool ok() const;
  std::string summary() const;
};
IdentityReport verify_simplicial_identities(int r, const std::vector<int>& d, int n_max);

// delta* = sum_{i=r+1}^n (-1)^{i-r} delta_{i,1}^* on Z^flat_{p,.}(Theta_n).
ChainMap delta_star(ThetaFamily& family, int n, int p);

// delta* o delta* = 0 on Z^flat_{p,.}(Theta_n), cone by cone without
// assembling matrices (for fans too large for dense slices).
struct SquareReport {
  long long images = 0;  // (cone, i, j) paths followed
  bool ok = true;
  std::string witness;
};
SquareReport delta_star_squares_to_zero(ThetaFamily& family, int n, int p);

struct DegreeHomology {
  int degree = 0;
  bool inner = true;
  HomologyGroup group;
};
struct AcyclicityReport {
  int r = 0, p = 0, m_max = 0;
  std::vector<int> d;
  bool hypothesis_met = false;  // 0 <= p <= r-1
  bool square_zero = true;      // delta* o delta* = 0, Z level every q and CH level
  std::vector<std::vector<DegreeHomology>> z_rows;  // per q, degrees 0..m_max
  std::vector<DegreeHomology> chow;                 // CH-flat complex, degrees 0..m_max
  std::vector<DegreeHomology> total;                // double complex, degrees 0..m_max
  bool total_matches_chow = true;
  bool z_exact = true;     // every q, inner degrees
  bool chow_exact = true;  // inner degrees
  std::vector<std::string> notes;

  bool agree() const { return z_exact == chow_exact; }
  bool ok() const { return square_zero && total_matches_chow && z_exact && chow_exact; }
  std::string to_json() const;
};
AcyclicityReport verify_acyclicity(int r, const std::vector<int>& d, int p, int m_max);

}  // namespace toric
