#pragma once

#include "toric/integer.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace toric::exactlin {

template <typename Scalar>
struct SmithDecomposition {
  Mat<Scalar> S;
  Mat<Scalar> U;
  Mat<Scalar> V;
  Mat<Scalar> U_inv;  // kept so cokernel lifts need no second solve
  Eigen::Index rank = 0;

  std::vector<Scalar> diagonal() const {
    std::vector<Scalar> d;
    for (Eigen::Index i = 0; i < rank; ++i) d.push_back(S(i, i));
    return d;
  }
};

namespace detail {

template <typename Scalar>
Scalar magnitude(const Scalar& x) {
  return x < 0 ? Scalar(-x) : x;
}

// g = s*a + t*b, g >= 0
template <typename Scalar>
Scalar extended_gcd(const Scalar& a, const Scalar& b, Scalar& s, Scalar& t) {
  Scalar r0 = a, r1 = b, s0 = 1, s1 = 0, t0 = 0, t1 = 1;
  while (r1 != 0) {
    Scalar q = r0 / r1;
    Scalar tmp = r0 - q * r1;
    r0 = r1;
    r1 = tmp;
    tmp = s0 - q * s1;
    s0 = s1;
    s1 = tmp;
    tmp = t0 - q * t1;
    t0 = t1;
    t1 = tmp;
  }
  if (r0 < 0) {
    r0 = -r0;
    s0 = -s0;
    t0 = -t0;
  }
  s = s0;
  t = t0;
  return r0;
}

template <typename Scalar>
class Eliminator {
 public:
  Eliminator(const Mat<Scalar>& a, bool track) : A(a), track_(track) {
    if (track_) {
      U = Mat<Scalar>::Identity(A.rows(), A.rows());
      U_inv = U;
      V = Mat<Scalar>::Identity(A.cols(), A.cols());
    }
  }

  void swap_rows(Eigen::Index i, Eigen::Index j) {
    if (i == j) return;
    A.row(i).swap(A.row(j));
    if (track_) {
      U.row(i).swap(U.row(j));
      U_inv.col(i).swap(U_inv.col(j));
    }
  }
  void swap_cols(Eigen::Index i, Eigen::Index j) {
    if (i == j) return;
    A.col(i).swap(A.col(j));
    if (track_) V.col(i).swap(V.col(j));
  }
  // row_i += c * row_j. The loops skip zeros: presentation matrices are
  // sparse and dense GMP temporaries cost an allocation per entry.
  void add_row(Eigen::Index i, Eigen::Index j, const Scalar& c) {
    axpy_row(A, i, j, c);
    if (track_) {
      axpy_row(U, i, j, c);
      axpy_col(U_inv, j, i, Scalar(-c));
    }
  }
  void add_col(Eigen::Index i, Eigen::Index j, const Scalar& c) {
    axpy_col(A, i, j, c);
    if (track_) axpy_col(V, i, j, c);
  }
  void negate_row(Eigen::Index i) {
    A.row(i) = -A.row(i);
    if (track_) {
      U.row(i) = -U.row(i);
      U_inv.col(i) = -U_inv.col(i);
    }
  }
  // Rows i, j replaced by [[s, t], [-b/g, a/g]] times themselves and columns
  // i, j by themselves times [[1, -t b/g], [1, s a/g]]; turns diag(a, b) into
  // diag(g, ab/g).
  void gcd_merge(Eigen::Index i, Eigen::Index j) {
    Scalar a = A(i, i), b = A(j, j), s, t;
    Scalar g = extended_gcd(a, b, s, t);
    Scalar ag = a / g, bg = b / g;
    apply_rows(i, j, s, t, Scalar(-bg), ag);
    if (track_) {
      Vec<Scalar> ci = U_inv.col(i), cj = U_inv.col(j);
      U_inv.col(i) = ci * ag + cj * bg;
      U_inv.col(j) = ci * Scalar(-t) + cj * s;
    }
    Vec<Scalar> ci = A.col(i), cj = A.col(j);
    A.col(i) = ci + cj;
    A.col(j) = ci * Scalar(-t * bg) + cj * Scalar(s * ag);
    if (track_) {
      Vec<Scalar> vi = V.col(i), vj = V.col(j);
      V.col(i) = vi + vj;
      V.col(j) = vi * Scalar(-t * bg) + vj * Scalar(s * ag);
    }
  }

  Mat<Scalar> A, U, V, U_inv;

 private:
  static void axpy_row(Mat<Scalar>& m, Eigen::Index i, Eigen::Index j, const Scalar& c) {
    for (Eigen::Index k = 0; k < m.cols(); ++k)
      if (m(j, k) != 0) m(i, k) += c * m(j, k);
  }
  static void axpy_col(Mat<Scalar>& m, Eigen::Index i, Eigen::Index j, const Scalar& c) {
    for (Eigen::Index k = 0; k < m.rows(); ++k)
      if (m(k, j) != 0) m(k, i) += c * m(k, j);
  }
  void apply_rows(Eigen::Index i, Eigen::Index j, const Scalar& a11,
                  const Scalar& a12, const Scalar& a21, const Scalar& a22) {
    Eigen::Matrix<Scalar, 1, Eigen::Dynamic> ri = A.row(i), rj = A.row(j);
    A.row(i) = ri * a11 + rj * a12;
    A.row(j) = ri * a21 + rj * a22;
    if (track_) {
      Eigen::Matrix<Scalar, 1, Eigen::Dynamic> ui = U.row(i), uj = U.row(j);
      U.row(i) = ui * a11 + uj * a12;
      U.row(j) = ui * a21 + uj * a22;
    }
  }
  bool track_;
};

template <typename Scalar>
SmithDecomposition<Scalar> smith(const Mat<Scalar>& input, bool track) {
  Eliminator<Scalar> e(input, track);
  auto& A = e.A;
  const Eigen::Index m = A.rows(), n = A.cols();
  Eigen::Index k = 0;
  for (; k < std::min(m, n); ++k) {
    // smallest magnitude nonzero in the trailing block, ties by position
    Eigen::Index pi = -1, pj = -1;
    Scalar best;
    for (Eigen::Index i = k; i < m && !(pi >= 0 && best == 1); ++i)
      for (Eigen::Index j = k; j < n; ++j) {
        if (A(i, j) == 0) continue;
        Scalar v = magnitude(A(i, j));
        if (pi < 0 || v < best) {
          best = v;
          pi = i;
          pj = j;
          if (best == 1) break;
        }
      }
    if (pi < 0) break;
    e.swap_rows(k, pi);
    e.swap_cols(k, pj);
    for (;;) {
      bool clean = true;
      for (Eigen::Index i = k + 1; i < m; ++i) {
        if (A(i, k) == 0) continue;
        Scalar q = A(i, k) / A(k, k);
        if (q != 0) e.add_row(i, k, Scalar(-q));
        if (A(i, k) != 0) clean = false;
      }
      for (Eigen::Index j = k + 1; j < n; ++j) {
        if (A(k, j) == 0) continue;
        Scalar q = A(k, j) / A(k, k);
        if (q != 0) e.add_col(j, k, Scalar(-q));
        if (A(k, j) != 0) clean = false;
      }
      if (clean) break;
      // a remainder survived: bring the smallest entry of row/column k to the pivot
      Eigen::Index bi = k, bj = k;
      Scalar b = magnitude(A(k, k));
      for (Eigen::Index i = k + 1; i < m; ++i)
        if (A(i, k) != 0 && magnitude(A(i, k)) < b) {
          b = magnitude(A(i, k));
          bi = i;
          bj = k;
        }
      for (Eigen::Index j = k + 1; j < n; ++j)
        if (A(k, j) != 0 && magnitude(A(k, j)) < b) {
          b = magnitude(A(k, j));
          bi = k;
          bj = j;
        }
      e.swap_rows(k, bi);
      e.swap_cols(k, bj);
    }
  }
  const Eigen::Index rank = k;
  for (Eigen::Index i = 0; i < rank; ++i)
    for (Eigen::Index j = i + 1; j < rank; ++j)
      if (A(j, j) % A(i, i) != 0) e.gcd_merge(i, j);
  for (Eigen::Index i = 0; i < rank; ++i)
    if (A(i, i) < 0) e.negate_row(i);

  SmithDecomposition<Scalar> out;
  out.S = std::move(e.A);
  out.U = std::move(e.U);
  out.V = std::move(e.V);
  out.U_inv = std::move(e.U_inv);
  out.rank = rank;
  return out;
}

}  // namespace detail

// U * A * V = S with S diagonal, d1 | d2 | ..., all d_i > 0.
template <typename Derived>
SmithDecomposition<typename Derived::Scalar> smith_normal_form(
    const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  return detail::smith<Scalar>(Mat<Scalar>(a), true);
}

// Invariant factors only.
template <typename Derived>
std::vector<typename Derived::Scalar> smith_diagonal(
    const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  return detail::smith<Scalar>(Mat<Scalar>(a), false).diagonal();
}

template <typename Derived>
Eigen::Index rank(const Eigen::MatrixBase<Derived>& a) {
  // fraction-free elimination
  using Scalar = typename Derived::Scalar;
  Mat<Scalar> m = a;
  Eigen::Index r = 0;
  Scalar prev = 1;
  for (Eigen::Index c = 0; c < m.cols() && r < m.rows(); ++c) {
    Eigen::Index p = r;
    while (p < m.rows() && m(p, c) == 0) ++p;
    if (p == m.rows()) continue;
    m.row(r).swap(m.row(p));
    for (Eigen::Index i = r + 1; i < m.rows(); ++i) {
      for (Eigen::Index j = c + 1; j < m.cols(); ++j)
        m(i, j) = (m(r, c) * m(i, j) - m(i, c) * m(r, j)) / prev;
      m(i, c) = 0;
    }
    prev = m(r, c);
    ++r;
  }
  return r;
}

// Bareiss; square input.
template <typename Derived>
typename Derived::Scalar determinant(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  Mat<Scalar> m = a;
  const Eigen::Index n = m.rows();
  Scalar prev = 1, sign = 1;
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::Index p = k;
    while (p < n && m(p, k) == 0) ++p;
    if (p == n) return Scalar(0);
    if (p != k) {
      m.row(k).swap(m.row(p));
      sign = -sign;
    }
    for (Eigen::Index i = k + 1; i < n; ++i)
      for (Eigen::Index j = k + 1; j < n; ++j)
        m(i, j) = (m(k, k) * m(i, j) - m(i, k) * m(k, j)) / prev;
    prev = m(k, k);
  }
  return n == 0 ? Scalar(1) : Scalar(sign * m(n - 1, n - 1));
}

// Row-style Hermite normal form: rows of the result span the row lattice of
// `a`, echelon shape, positive pivots, entries above a pivot in [0, pivot).
// Zero rows are dropped.
template <typename Derived>
Mat<typename Derived::Scalar> hermite_normal_form(
    const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  using detail::magnitude;
  Mat<Scalar> h = a;
  Eigen::Index r = 0;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pivots;
  for (Eigen::Index c = 0; c < h.cols() && r < h.rows(); ++c) {
    for (;;) {
      Eigen::Index p = -1;
      for (Eigen::Index i = r; i < h.rows(); ++i)
        if (h(i, c) != 0 && (p < 0 || magnitude(h(i, c)) < magnitude(h(p, c))))
          p = i;
      if (p < 0) break;
      h.row(r).swap(h.row(p));
      bool clean = true;
      for (Eigen::Index i = r + 1; i < h.rows(); ++i) {
        if (h(i, c) == 0) continue;
        Scalar q = h(i, c) / h(r, c);
        h.row(i) -= q * h.row(r);
        if (h(i, c) != 0) clean = false;
      }
      if (clean) break;
    }
    if (r < h.rows() && h(r, c) != 0) {
      if (h(r, c) < 0) h.row(r) = -h.row(r);
      pivots.emplace_back(r, c);
      ++r;
    }
  }
  for (auto [pr, pc] : pivots)
    for (Eigen::Index i = 0; i < pr; ++i) {
      Scalar q = h(i, pc) / h(pr, pc);
      if (h(i, pc) - q * h(pr, pc) < 0) q -= 1;
      if (q != 0) h.row(i) -= q * h.row(pr);
    }
  return h.topRows(r);
}

// Basis of {x : a x = 0} over Z, as columns. The integer kernel of a matrix is
// always saturated; the basis is canonical (its transpose is in HNF).
template <typename Derived>
Mat<typename Derived::Scalar> saturated_kernel_basis(
    const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  auto snf = smith_normal_form(a);
  const Eigen::Index n = a.cols();
  Mat<Scalar> k = snf.V.rightCols(n - snf.rank);
  if (k.cols() == 0) return Mat<Scalar>(n, 0);
  return hermite_normal_form(k.transpose()).transpose();
}

template <typename Scalar>
struct CokernelInvariants {
  Eigen::Index rank = 0;
  std::vector<Scalar> torsion;
  bool operator==(const CokernelInvariants&) const = default;
};

// coker(a : Z^cols -> Z^rows)
template <typename Derived>
CokernelInvariants<typename Derived::Scalar> cokernel_invariants(
    const Eigen::MatrixBase<Derived>& a) {
  auto d = smith_diagonal(a);
  CokernelInvariants<typename Derived::Scalar> out;
  out.rank = a.rows() - static_cast<Eigen::Index>(d.size());
  for (auto& x : d)
    if (x > 1) out.torsion.push_back(x);
  return out;
}

// a * b, skipping zero entries of both; presentation matrices are mostly zeros.
template <typename Scalar>
Mat<Scalar> sparse_product(const Mat<Scalar>& a, const Mat<Scalar>& b) {
  std::vector<std::vector<std::pair<Eigen::Index, Scalar>>> acols(a.cols());
  for (Eigen::Index k = 0; k < a.cols(); ++k)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (a(i, k) != 0) acols[k].emplace_back(i, a(i, k));
  Mat<Scalar> out = Mat<Scalar>::Zero(a.rows(), b.cols());
  for (Eigen::Index j = 0; j < b.cols(); ++j)
    for (Eigen::Index k = 0; k < b.rows(); ++k) {
      if (b(k, j) == 0) continue;
      const Scalar& c = b(k, j);
      for (auto& [i, v] : acols[k]) out(i, j) += v * c;
    }
  return out;
}

// Integer solution X of a X = b (column by column), if one exists.
template <typename DA, typename DB>
std::optional<Mat<typename DA::Scalar>> solve(const Eigen::MatrixBase<DA>& a,
                                              const Eigen::MatrixBase<DB>& b) {
  using Scalar = typename DA::Scalar;
  auto snf = smith_normal_form(a);
  Mat<Scalar> y = sparse_product<Scalar>(snf.U, Mat<Scalar>(b));
  Mat<Scalar> z = Mat<Scalar>::Zero(a.cols(), b.cols());
  for (Eigen::Index c = 0; c < b.cols(); ++c) {
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      if (i < snf.rank) {
        if (y(i, c) % snf.S(i, i) != 0) return std::nullopt;
        z(i, c) = y(i, c) / snf.S(i, i);
      } else if (y(i, c) != 0) {
        return std::nullopt;
      }
    }
  }
  return Mat<Scalar>(snf.V * z);
}

// Coordinates on coker(relations) = Z^g / im(relations): the free part is
// read off rows rank.. of U, and lifted back through the matching columns of
// U^{-1}.
template <typename Scalar>
struct CokernelCoordinates {
  SmithDecomposition<Scalar> snf;
  Eigen::Index generators = 0;

  explicit CokernelCoordinates(const Mat<Scalar>& relations)
      : snf(smith_normal_form(relations)), generators(relations.rows()) {}

  Eigen::Index free_rank() const { return generators - snf.rank; }
  std::vector<Scalar> torsion() const {
    std::vector<Scalar> t;
    for (Eigen::Index i = 0; i < snf.rank; ++i)
      if (snf.S(i, i) > 1) t.push_back(snf.S(i, i));
    return t;
  }
  // generators x k  ->  free_rank x k
  Mat<Scalar> project(const Mat<Scalar>& x) const {
    return sparse_product<Scalar>(snf.U.bottomRows(free_rank()), x);
  }
  // generators x free_rank
  Mat<Scalar> lift() const { return snf.U_inv.rightCols(free_rank()); }
};

}  // namespace toric::exactlin
