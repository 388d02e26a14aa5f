#pragma once

#include <complex>

#include <Eigen/Core>

namespace isac {

using Complex = std::complex<double>;

// Data symbols H (N x M), known at the radar receiver.
using SymbolMatrix = Eigen::MatrixXcd;
// Received baseband frame R (N x M).
using ReceivedFrame = Eigen::MatrixXcd;
// Stacked observation y (length N*M): frame columns r_0..r_{M-1} in order.
using ObservationVector = Eigen::VectorXcd;

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

}  // namespace isac
