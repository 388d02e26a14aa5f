#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "isac/frame.hpp"
#include "isac/types.hpp"

namespace isac {

// Matched-filter power map over the hypothesis grid (linear units, >= 0).
struct RangeDopplerMap {
  Eigen::MatrixXd values;  // n_delay x n_doppler
  DelayDopplerGrid grid;
};

struct CfarConfig {
  double pfa = 1e-3;  // per-cell false-alarm probability
  int train = 16;     // training cells per side
  int guard = 4;      // guard cells per side

  void validate() const;
};

struct Detection {
  int delay_bin = 0;
  int doppler_bin = 0;
  double statistic = 0.0;
  std::optional<Complex> amplitude;  // filled by the subspace detector
};

// Normalized matched-filter statistic
//   map(l, p) = |s(tau_l, nu_p)^H y|^2 / sum |h|^2.
// Equals sigma2 times the first-iteration subspace statistic.
RangeDopplerMap matched_rd_map(const ReceivedFrame& R, const SymbolMatrix& H,
                               const FrameConfig& cfg,
                               const DelayDopplerGrid& grid);

// Exact CA-CFAR multiplier for exponentially distributed cell powers:
// alpha = T (pfa^{-1/T} - 1) with T total training cells.
double cfar_threshold_factor(double pfa, int train_total);

// Cell-averaging CFAR: a cell is declared when its value exceeds
// alpha * mean(training cells). Training cells sit beyond the guard cells,
// wrapping around at the edges; 1-D along delay for single-symbol maps,
// cross-shaped in 2-D otherwise.
std::vector<Detection> ca_cfar(const RangeDopplerMap& map,
                               const CfarConfig& cfar);

std::vector<Detection> detect_fft_cfar(const ReceivedFrame& R,
                                       const SymbolMatrix& H,
                                       const FrameConfig& cfg,
                                       const DelayDopplerGrid& grid,
                                       const CfarConfig& cfar);

}  // namespace isac
