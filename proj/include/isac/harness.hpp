#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "isac/constellation.hpp"
#include "isac/frame.hpp"
#include "isac/rdmap.hpp"
#include "isac/subspace.hpp"
#include "isac/types.hpp"

namespace isac {

// One simulated scatterer as named in configs; snapped to the grid when
// on_grid is set. SNR maps to |alpha|^2 = snr * sigma2 with sigma2 fixed to 1;
// the amplitude phase is uniform per trial.
struct TargetSpec {
  double range_m = 0.0;
  double velocity_mps = 0.0;
  double snr_db = 0.0;
  bool on_grid = true;
};

struct Scenario {
  FrameConfig frame;
  ConstellationKind constellation = ConstellationKind::Qpsk;
  std::vector<TargetSpec> targets;
  double pfa = 1e-2;
  int oversample = 1;
  CfarConfig cfar;
  std::uint64_t seed = 1;
  long trials = 1000;
  std::optional<long> calibration_trials;  // default ceil(100/pfa)
  bool allow_undersized_calibration = false;
  int target_of_interest = 1;  // index into targets
  int match_radius = 1;        // cells counted as "the" target for Pd scoring
  int max_iterations = 10;
  int exclusion_radius = 1;
  int threads = 0;  // 0 = hardware concurrency

  void validate() const;
};

enum class DetectorKind { FftCfar, Subspace, GlrtCd };

std::string to_string(DetectorKind kind);

struct PdEstimate {
  double pd = 0.0;
  double stderr_normal = 0.0;  // sqrt(p (1-p) / trials)
  long trials = 0;
};

// Runs fn(0..count-1) across threads; writes are per-index, so results do not
// depend on scheduling.
void parallel_for(long count, int threads,
                  const std::function<void(long)>& fn);

// Noise-only calibration of the per-scan threshold: the empirical (1 - pfa)
// quantile of the first-iteration grid maximum. Deterministic given the
// scenario seed.
double calibrate_threshold(const Scenario& scenario);

// Fraction of trials in which the target of interest is detected within
// +-match_radius cells of its true grid position. Fresh symbols, noise, and
// amplitude phases per trial; trial streams do not depend on the detector, so
// detectors see identical observations.
PdEstimate estimate_pd(const Scenario& scenario, double gamma,
                       DetectorKind detector);

enum class SweepAxis { Snr2, Snr1, Constellation };

struct SweepPoint {
  double axis_value = 0.0;  // dB for SNR axes, constellation index otherwise
  ConstellationKind constellation;
  DetectorKind detector;
  PdEstimate estimate;
  double gamma = 0.0;
};

// Pd for all three detectors at each axis point. SNR axes move targets[0]
// (snr1) or targets[1] (snr2); the constellation axis covers all six kinds.
// Thresholds are calibrated internally, once per constellation.
std::vector<SweepPoint> sweep(const Scenario& scenario, SweepAxis axis,
                              const std::vector<double>& points);

struct RangeSlice {
  ConstellationKind constellation;
  int iteration = 1;            // 1 or 2
  std::vector<double> range_m;  // grid delay bins as ranges
  std::vector<double> value_db; // peak-normalized, max = 0 dB
};

// Single-realization range profiles of the iterative statistic for every
// constellation: iteration 1 as scanned, iteration 2 after the strongest
// target has been detected and absorbed. Requires a single-symbol frame.
std::vector<RangeSlice> range_slice(
    const Scenario& scenario, std::uint64_t seed,
    const std::function<double(ConstellationKind)>& gamma_for);
std::vector<RangeSlice> range_slice(const Scenario& scenario,
                                    std::uint64_t seed, double gamma);

// One constellation, one seeded run; building block of range_slice.
struct SliceRealization {
  Eigen::VectorXd iteration1;  // linear statistic per delay bin
  Eigen::VectorXd iteration2;
  int argmax1 = 0;             // bin detected at the first iteration
};

SliceRealization slice_realization(const Scenario& scenario,
                                   ConstellationKind kind, std::uint64_t seed,
                                   double gamma);

struct PslStats {
  ConstellationKind constellation;
  double psl_db_mean = 0.0;
  double psl_db_p95 = 0.0;
  long trials = 0;
};

// Peak sidelobe level of the matched-filter map for noise-free single-target
// frames, per constellation.
std::vector<PslStats> psl_stats(const Scenario& scenario);

// Physical target parameters after grid snapping (phases not yet drawn).
struct ResolvedTarget {
  double tau_s = 0.0;
  double nu = 0.0;
  double amplitude = 0.0;  // |alpha|
  int delay_bin = 0;
  int doppler_bin = 0;
};

std::vector<ResolvedTarget> resolve_targets(const Scenario& scenario,
                                            const DelayDopplerGrid& grid);

}  // namespace isac
