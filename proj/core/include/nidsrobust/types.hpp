#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace nidsrobust {

// Samples are rows, features are columns. Everything is 64-bit.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

using Seed = std::uint64_t;

}  // namespace nidsrobust
