#pragma once

#include <Eigen/Dense>

namespace fpa {

template <typename Scalar>
using FieldT = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

// Phase-space samples f(x_i, v_j): one row per spatial node, velocity contiguous.
template <typename Scalar>
using PhaseArrayT = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Field = FieldT<double>;
using PhaseArray = PhaseArrayT<double>;
using Mask = Eigen::Array<bool, Eigen::Dynamic, 1>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

}  // namespace fpa
