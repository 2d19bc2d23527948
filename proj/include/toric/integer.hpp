#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/eigen.hpp>
#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace toric {

using Integer = boost::multiprecision::number<boost::multiprecision::gmp_int,
                                              boost::multiprecision::et_off>;

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using IntMatrix = Mat<Integer>;
using IntVector = Vec<Integer>;

// Small exact lattice vectors. Arithmetic on them is overflow-checked; anything
// that feeds elimination is converted to IntMatrix first.
using LatticePoint = std::vector<std::int64_t>;

LatticePoint add(const LatticePoint& a, const LatticePoint& b);
LatticePoint sub(const LatticePoint& a, const LatticePoint& b);
LatticePoint scale(std::int64_t c, const LatticePoint& a);
std::int64_t dot(const LatticePoint& a, const LatticePoint& b);
std::int64_t content(const LatticePoint& a);  // gcd of coordinates, 0 for zero
bool is_zero(const LatticePoint& a);
LatticePoint unit(int n, int i);  // 0-based coordinate
std::string to_string(const LatticePoint& a);

std::int64_t to_int64(const Integer& x);

// Columns of the result are the given points.
IntMatrix columns_matrix(const std::vector<LatticePoint>& cols, int rows);
// Rows of the result are the given points.
IntMatrix rows_matrix(const std::vector<LatticePoint>& rows, int cols);
LatticePoint column_point(const IntMatrix& m, Eigen::Index c);
LatticePoint row_point(const IntMatrix& m, Eigen::Index r);

}  // namespace toric
