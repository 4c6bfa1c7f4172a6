#ifndef MUCS_TYPES_HPP
#define MUCS_TYPES_HPP

#include <Eigen/Core>

namespace mucs {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
// Measurement matrices are dense and row-major: AMP sweeps F*a row by row and
// accumulates F^T*r over the same rows.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mucs

#endif
