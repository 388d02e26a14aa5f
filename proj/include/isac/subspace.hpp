#pragma once

#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "isac/frame.hpp"
#include "isac/rng.hpp"
#include "isac/types.hpp"

namespace isac {

// Interference-plus-noise covariance C = sigma2 I + sum_i s_i v_i s_i^H,
// held as sigma2 plus an ordered list of rank-one terms (one per previously
// detected target, variance v_i = |alpha_hat_i|^2). The dense NM x NM matrix
// is never formed: C^{-1} x is evaluated through the Woodbury identity
//   C^{-1} = sigma2^{-1} (I - U W^{-1} U^H),  W = sigma2 D^{-1} + U^H U,
// at O(NM q + q^3) cost. Zero-variance terms stay in the list but drop out
// of the small system.
class CovarianceState {
 public:
  explicit CovarianceState(double sigma2);

  double sigma2() const { return sigma2_; }
  int term_count() const { return static_cast<int>(terms_.size()); }
  const Eigen::VectorXcd& term_signature(int i) const { return terms_[i].s; }
  double term_variance(int i) const { return terms_[i].variance; }

  void add_term(Eigen::VectorXcd signature, double variance);

  Eigen::VectorXcd apply_inverse(const Eigen::VectorXcd& v) const;

  // Active terms (variance > 0) backing the Woodbury small system.
  int active_count() const { return static_cast<int>(u_.cols()); }
  const Eigen::MatrixXcd& active_signatures() const { return u_; }
  Eigen::VectorXcd small_solve(const Eigen::VectorXcd& rhs) const;
  Eigen::MatrixXcd small_inverse() const;

 private:
  struct Term {
    Eigen::VectorXcd s;
    double variance;
  };

  void rebuild_();

  double sigma2_ = 1.0;
  std::vector<Term> terms_;
  Eigen::MatrixXcd u_;  // NM x active_count
  // Computed (empty) up front so copies of term-free states are well defined.
  Eigen::LDLT<Eigen::MatrixXcd> w_ldlt_{Eigen::MatrixXcd{0, 0}};
};

// Appends the plug-in rank-one term (s_hat, |alpha_hat|^2).
CovarianceState augment(const CovarianceState& state,
                        const Eigen::VectorXcd& s_hat, Complex alpha_hat);

struct GicValue {
  double statistic = 0.0;   // J = |s^H C^{-1} y|^2 / (s^H C^{-1} s)
  Complex amplitude{0, 0};  // ML estimate (s^H C^{-1} s)^{-1} s^H C^{-1} y
};

// Whitened matched-filter statistic and ML amplitude at one hypothesis.
GicValue gic_statistic(const ObservationVector& y, double tau_s, double nu,
                       const SymbolMatrix& H, const FrameConfig& cfg,
                       const CovarianceState& state);

// Grid cells barred from the argmax (detections plus their neighborhoods).
class GridMask {
 public:
  GridMask(int n_delay, int n_doppler);

  void exclude(int delay_bin, int doppler_bin);
  // Chebyshev box of the given radius; the Doppler axis wraps when the grid
  // spans a full period, the delay axis clamps.
  void exclude_box(int delay_bin, int doppler_bin, int radius,
                   bool doppler_wraps);
  bool excluded(int delay_bin, int doppler_bin) const;
  bool all_excluded() const;

 private:
  int nd_ = 0;
  int np_ = 0;
  int excluded_count_ = 0;
  std::vector<std::uint8_t> mask_;
};

// Statistic and ML amplitude at every grid point (FFT path over the grid).
struct GicMaps {
  Eigen::MatrixXd statistic;    // n_delay x n_doppler
  Eigen::MatrixXcd amplitude;
};

GicMaps gic_maps(const ObservationVector& y, const DelayDopplerGrid& grid,
                 const SymbolMatrix& H, const FrameConfig& cfg,
                 const CovarianceState& state);

struct GridScan {
  int delay_bin = 0;
  int doppler_bin = 0;
  double statistic = 0.0;
  Complex amplitude{0, 0};
};

// Non-excluded grid point maximizing the statistic. Ties break to the
// smallest delay bin, then the smallest Doppler bin.
GridScan scan_grid(const ObservationVector& y, const DelayDopplerGrid& grid,
                   const SymbolMatrix& H, const FrameConfig& cfg,
                   const CovarianceState& state,
                   const GridMask* excluded = nullptr);

struct DetectorConfig {
  double gamma = 0.0;        // per-scan threshold on the grid maximum
  int max_iter = 10;
  int exclusion_radius = 1;  // cells barred around each detection

  void validate() const;
};

enum class Termination { BelowThreshold, MaxIterations };

struct SubspaceDetection {
  int delay_bin = 0;
  int doppler_bin = 0;
  double tau_s = 0.0;
  double nu = 0.0;
  Complex amplitude{0, 0};
  double statistic = 0.0;
  int iteration = 0;  // 1-based
};

struct DetectionReport {
  std::vector<SubspaceDetection> detections;  // discovery order
  Termination terminated_by = Termination::BelowThreshold;
};

// Iterative detection: scan, and while the maximum exceeds gamma, record the
// detection, bar its neighborhood from later scans, absorb it into the
// covariance, and scan again. Noise power sigma2 is known to the detector.
DetectionReport detect_iterative(const ObservationVector& y,
                                 const DelayDopplerGrid& grid,
                                 const SymbolMatrix& H, const FrameConfig& cfg,
                                 const DetectorConfig& det, double sigma2);

// Optional fallback when the noise floor is not known: the median of the
// first-iteration map cells, scaled for exponential cell powers (median =
// sigma2 ln 2). Isolated peaks do not move the median, so this reads the
// noise power under PSK frames or in target-free scans; under QAM frames
// with strong echoes it reads the interference-plus-noise floor instead,
// since data-dependent sidelobes raise every cell. Detectors do not call
// this themselves.
double estimate_noise_floor(const ObservationVector& y,
                            const DelayDopplerGrid& grid,
                            const SymbolMatrix& H, const FrameConfig& cfg);

// Single-target benchmark: the indexed target's echo plus fresh noise, all
// other echoes ideally removed, then one detection iteration.
DetectionReport glrt_cd_benchmark(const Scene& scene, int target_index,
                                  const SymbolMatrix& H, const FrameConfig& cfg,
                                  const DelayDopplerGrid& grid,
                                  const DetectorConfig& det, RandomStream& rng);

}  // namespace isac
