#include "toric/integer.hpp"

#include <numeric>
#include <sstream>
#include <stdexcept>

namespace toric {

namespace {
std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("lattice coordinate overflow");
  return r;
}
std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("lattice coordinate overflow");
  return r;
}
}  // namespace

LatticePoint add(const LatticePoint& a, const LatticePoint& b) {
  LatticePoint r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = checked_add(a[i], b[i]);
  return r;
}

LatticePoint sub(const LatticePoint& a, const LatticePoint& b) {
  LatticePoint r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = checked_add(a[i], checked_mul(-1, b[i]));
  return r;
}

LatticePoint scale(std::int64_t c, const LatticePoint& a) {
  LatticePoint r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = checked_mul(c, a[i]);
  return r;
}

std::int64_t dot(const LatticePoint& a, const LatticePoint& b) {
  std::int64_t s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s = checked_add(s, checked_mul(a[i], b[i]));
  return s;
}

std::int64_t content(const LatticePoint& a) {
  std::int64_t g = 0;
  for (auto x : a) g = std::gcd(g, x);
  return g;
}

bool is_zero(const LatticePoint& a) {
  for (auto x : a)
    if (x != 0) return false;
  return true;
}

LatticePoint unit(int n, int i) {
  LatticePoint e(n, 0);
  e[i] = 1;
  return e;
}

std::string to_string(const LatticePoint& a) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < a.size(); ++i) os << (i ? "," : "") << a[i];
  os << ')';
  return os.str();
}

std::int64_t to_int64(const Integer& x) {
  if (x > Integer(INT64_MAX) || x < Integer(INT64_MIN))
    throw std::overflow_error("integer does not fit a lattice coordinate");
  return x.convert_to<std::int64_t>();
}

IntMatrix columns_matrix(const std::vector<LatticePoint>& cols, int rows) {
  IntMatrix m(rows, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = cols[j][i];
  return m;
}

IntMatrix rows_matrix(const std::vector<LatticePoint>& rows, int cols) {
  IntMatrix m(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rows[i][j];
  return m;
}

LatticePoint column_point(const IntMatrix& m, Eigen::Index c) {
  LatticePoint p(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) p[i] = to_int64(m(i, c));
  return p;
}

LatticePoint row_point(const IntMatrix& m, Eigen::Index r) {
  LatticePoint p(m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) p[j] = to_int64(m(r, j));
  return p;
}

}  // namespace toric
