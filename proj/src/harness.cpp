#include "isac/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "isac/waveform.hpp"

namespace isac {

namespace {

// Stream purposes; trial index i under purpose P gets seed
// derive_seed(master, P, i).
constexpr std::uint64_t kPurposeCalibration = 0x11;
constexpr std::uint64_t kPurposeTrial = 0x22;
constexpr std::uint64_t kPurposeCleanNoise = 0x33;
constexpr std::uint64_t kPurposeSlice = 0x44;
constexpr std::uint64_t kPurposePsl = 0x55;

double snr_db_to_linear(double snr_db) {
  if (std::isinf(snr_db) && snr_db < 0.0) return 0.0;
  return std::pow(10.0, snr_db / 10.0);
}

int effective_threads(int threads) {
  if (threads > 0) return threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

ObservationVector noise_only_observation(const FrameConfig& cfg, double sigma2,
                                         RandomStream& rng) {
  ObservationVector y(static_cast<Eigen::Index>(cfg.n) * cfg.m);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    y[i] = rng.complex_normal(sigma2);
  }
  return y;
}

int wrapped_distance(int a, int b, int n, bool periodic) {
  int d = std::abs(a - b);
  if (periodic && n > 0) d = std::min(d, n - d);
  return d;
}

bool bin_matches(int delay_bin, int doppler_bin, const ResolvedTarget& t,
                 const DelayDopplerGrid& grid, int radius) {
  if (std::abs(delay_bin - t.delay_bin) > radius) return false;
  if (grid.n_doppler() > 1 &&
      wrapped_distance(doppler_bin, t.doppler_bin, grid.n_doppler(),
                       grid.doppler_periodic) > radius) {
    return false;
  }
  return true;
}

}  // namespace

void Scenario::validate() const {
  frame.validate();
  cfar.validate();
  if (!(pfa > 0.0 && pfa < 1.0)) {
    throw std::invalid_argument("scenario: pfa must lie in (0, 1)");
  }
  if (oversample < 1) {
    throw std::invalid_argument("scenario: oversample must be >= 1");
  }
  if (trials < 1) throw std::invalid_argument("scenario: trials must be >= 1");
  if (calibration_trials && *calibration_trials < 1) {
    throw std::invalid_argument("scenario: calibration_trials must be >= 1");
  }
  if (target_of_interest < 0 ||
      (!targets.empty() &&
       target_of_interest >= static_cast<int>(targets.size()))) {
    throw std::invalid_argument("scenario: target_of_interest out of range");
  }
  if (match_radius < 0) {
    throw std::invalid_argument("scenario: match_radius must be >= 0");
  }
  if (max_iterations < 1) {
    throw std::invalid_argument("scenario: max_iterations must be >= 1");
  }
  if (exclusion_radius < 0) {
    throw std::invalid_argument("scenario: exclusion_radius must be >= 0");
  }
  for (const TargetSpec& t : targets) {
    if (t.range_m < 0.0) {
      throw std::invalid_argument("scenario: target range must be >= 0");
    }
  }
}

std::string to_string(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::FftCfar:
      return "fft_cfar";
    case DetectorKind::Subspace:
      return "subspace";
    case DetectorKind::GlrtCd:
      return "glrt_cd";
  }
  throw std::invalid_argument("unknown detector kind");
}

void parallel_for(long count, int threads,
                  const std::function<void(long)>& fn) {
  const int t = std::min<long>(effective_threads(threads), count);
  if (t <= 1) {
    for (long i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const long i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(t));
  for (int k = 0; k < t; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::vector<ResolvedTarget> resolve_targets(const Scenario& scenario,
                                            const DelayDopplerGrid& grid) {
  std::vector<ResolvedTarget> out;
  out.reserve(scenario.targets.size());
  for (const TargetSpec& spec : scenario.targets) {
    ResolvedTarget t;
    const double tau_raw = range_to_delay(spec.range_m);
    const double nu_raw = velocity_to_nu(spec.velocity_mps);
    t.delay_bin = grid.nearest_delay_bin(tau_raw);
    t.doppler_bin = grid.nearest_doppler_bin(nu_raw);
    if (spec.on_grid) {
      t.tau_s = grid.delays[static_cast<std::size_t>(t.delay_bin)];
      t.nu = grid.n_doppler() > 1
                 ? grid.dopplers[static_cast<std::size_t>(t.doppler_bin)]
                 : nu_raw;
    } else {
      t.tau_s = tau_raw;
      t.nu = nu_raw;
    }
    t.amplitude = std::sqrt(snr_db_to_linear(spec.snr_db));  // sigma2 = 1
    out.push_back(t);
  }
  return out;
}

double calibrate_threshold(const Scenario& scenario) {
  scenario.validate();
  const double needed = 100.0 / scenario.pfa;
  const long trials =
      scenario.calibration_trials.value_or(static_cast<long>(std::ceil(needed)));
  if (static_cast<double>(trials) < needed &&
      !scenario.allow_undersized_calibration) {
    throw std::invalid_argument(
        "calibrate_threshold: fewer than 100/pfa calibration trials "
        "(override to force)");
  }

  const DelayDopplerGrid grid = make_grid(scenario.frame, scenario.oversample);
  std::vector<double> maxima(static_cast<std::size_t>(trials));
  parallel_for(trials, scenario.threads, [&](long i) {
    RandomStream rng = derive_stream(scenario.seed, kPurposeCalibration,
                                     static_cast<std::uint64_t>(i));
    const SymbolMatrix h = draw_symbols(scenario.constellation, scenario.frame.n,
                                        scenario.frame.m, rng);
    const ObservationVector y = noise_only_observation(scenario.frame, 1.0, rng);
    const CovarianceState state(1.0);
    maxima[static_cast<std::size_t>(i)] =
        scan_grid(y, grid, h, scenario.frame, state).statistic;
  });

  std::sort(maxima.begin(), maxima.end(), std::greater<double>());
  // Midpoint between the k-th and (k+1)-th largest maxima, k = round(pfa*T):
  // exactly k in-sample scans exceed the threshold.
  long k = std::lround(scenario.pfa * static_cast<double>(trials));
  k = std::clamp<long>(k, 1, trials - 1);
  return 0.5 * (maxima[static_cast<std::size_t>(k - 1)] +
                maxima[static_cast<std::size_t>(k)]);
}

namespace {

struct TrialContext {
  const Scenario& scenario;
  const DelayDopplerGrid& grid;
  const std::vector<ResolvedTarget>& resolved;
  double gamma;
  DetectorKind detector;
};

bool run_trial(const TrialContext& ctx, long trial_index) {
  const Scenario& sc = ctx.scenario;
  RandomStream rng = derive_stream(sc.seed, kPurposeTrial,
                                   static_cast<std::uint64_t>(trial_index));
  const SymbolMatrix h =
      draw_symbols(sc.constellation, sc.frame.n, sc.frame.m, rng);

  Scene scene;
  scene.sigma2 = 1.0;
  scene.targets.reserve(ctx.resolved.size());
  for (const ResolvedTarget& t : ctx.resolved) {
    const double phi = rng.phase();
    scene.targets.push_back(
        Target{t.tau_s, t.nu, std::polar(t.amplitude, phi)});
  }

  const ResolvedTarget& toi =
      ctx.resolved[static_cast<std::size_t>(sc.target_of_interest)];

  switch (ctx.detector) {
    case DetectorKind::FftCfar: {
      const ReceivedFrame r = synthesize_frame(h, scene, sc.frame, rng);
      const auto detections =
          detect_fft_cfar(r, h, sc.frame, ctx.grid, sc.cfar);
      for (const Detection& d : detections) {
        if (bin_matches(d.delay_bin, d.doppler_bin, toi, ctx.grid,
                        sc.match_radius)) {
          return true;
        }
      }
      return false;
    }
    case DetectorKind::Subspace: {
      const ReceivedFrame r = synthesize_frame(h, scene, sc.frame, rng);
      const ObservationVector y = assemble_observation(r);
      const DetectorConfig det{ctx.gamma, sc.max_iterations,
                               sc.exclusion_radius};
      const DetectionReport report =
          detect_iterative(y, ctx.grid, h, sc.frame, det, scene.sigma2);
      for (const SubspaceDetection& d : report.detections) {
        if (bin_matches(d.delay_bin, d.doppler_bin, toi, ctx.grid,
                        sc.match_radius)) {
          return true;
        }
      }
      return false;
    }
    case DetectorKind::GlrtCd: {
      RandomStream clean = derive_stream(sc.seed, kPurposeCleanNoise,
                                         static_cast<std::uint64_t>(trial_index));
      const DetectorConfig det{ctx.gamma, sc.max_iterations,
                               sc.exclusion_radius};
      const DetectionReport report = glrt_cd_benchmark(
          scene, sc.target_of_interest, h, sc.frame, ctx.grid, det, clean);
      for (const SubspaceDetection& d : report.detections) {
        if (bin_matches(d.delay_bin, d.doppler_bin, toi, ctx.grid,
                        sc.match_radius)) {
          return true;
        }
      }
      return false;
    }
  }
  return false;
}

}  // namespace

PdEstimate estimate_pd(const Scenario& scenario, double gamma,
                       DetectorKind detector) {
  scenario.validate();
  if (scenario.targets.empty()) {
    throw std::invalid_argument("estimate_pd: scenario has no targets");
  }
  if (detector != DetectorKind::FftCfar && !(gamma > 0.0)) {
    throw std::invalid_argument("estimate_pd: calibrated gamma required");
  }
  const DelayDopplerGrid grid = make_grid(scenario.frame, scenario.oversample);
  const std::vector<ResolvedTarget> resolved = resolve_targets(scenario, grid);
  const TrialContext ctx{scenario, grid, resolved,
                         gamma > 0.0 ? gamma : 1.0, detector};

  std::vector<std::uint8_t> hits(static_cast<std::size_t>(scenario.trials), 0);
  parallel_for(scenario.trials, scenario.threads, [&](long i) {
    hits[static_cast<std::size_t>(i)] = run_trial(ctx, i) ? 1 : 0;
  });

  long sum = 0;
  for (const std::uint8_t h : hits) sum += h;
  PdEstimate est;
  est.trials = scenario.trials;
  est.pd = static_cast<double>(sum) / static_cast<double>(scenario.trials);
  est.stderr_normal = std::sqrt(est.pd * (1.0 - est.pd) /
                                static_cast<double>(scenario.trials));
  return est;
}

std::vector<SweepPoint> sweep(const Scenario& scenario, SweepAxis axis,
                              const std::vector<double>& points) {
  scenario.validate();
  for (const double p : points) {
    if (axis != SweepAxis::Constellation && !std::isfinite(p) &&
        !(std::isinf(p) && p < 0.0)) {
      throw std::invalid_argument("sweep: axis points must be finite");
    }
  }
  if (axis == SweepAxis::Snr1 && scenario.targets.size() < 1) {
    throw std::invalid_argument("sweep: snr1 axis needs targets");
  }
  if (axis == SweepAxis::Snr2 && scenario.targets.size() < 2) {
    throw std::invalid_argument("sweep: snr2 axis needs two targets");
  }

  std::vector<SweepPoint> out;
  const std::vector<DetectorKind> detectors = {
      DetectorKind::FftCfar, DetectorKind::Subspace, DetectorKind::GlrtCd};

  if (axis == SweepAxis::Constellation) {
    for (const ConstellationKind kind : kAllConstellations) {
      Scenario sc = scenario;
      sc.constellation = kind;
      const double gamma = calibrate_threshold(sc);
      for (const DetectorKind det : detectors) {
        out.push_back(SweepPoint{static_cast<double>(static_cast<int>(kind)),
                                 kind, det, estimate_pd(sc, gamma, det), gamma});
      }
    }
    return out;
  }

  const double gamma = calibrate_threshold(scenario);
  for (const double value : points) {
    Scenario sc = scenario;
    if (axis == SweepAxis::Snr1) {
      sc.targets[0].snr_db = value;
    } else {
      sc.targets[1].snr_db = value;
    }
    for (const DetectorKind det : detectors) {
      out.push_back(SweepPoint{value, sc.constellation, det,
                               estimate_pd(sc, gamma, det), gamma});
    }
  }
  return out;
}

SliceRealization slice_realization(const Scenario& scenario,
                                   ConstellationKind kind, std::uint64_t seed,
                                   double gamma) {
  if (scenario.frame.m != 1) {
    throw std::invalid_argument("slice: requires a single-symbol frame");
  }
  const DelayDopplerGrid grid = make_grid(scenario.frame, scenario.oversample);
  const std::vector<ResolvedTarget> resolved = resolve_targets(scenario, grid);

  RandomStream rng =
      derive_stream(seed, kPurposeSlice, static_cast<std::uint64_t>(kind));
  const SymbolMatrix h = draw_symbols(kind, scenario.frame.n, 1, rng);
  Scene scene;
  scene.sigma2 = 1.0;
  for (const ResolvedTarget& t : resolved) {
    scene.targets.push_back(
        Target{t.tau_s, t.nu, std::polar(t.amplitude, rng.phase())});
  }
  const ObservationVector y =
      assemble_observation(synthesize_frame(h, scene, scenario.frame, rng));

  const CovarianceState state(1.0);
  const GicMaps first = gic_maps(y, grid, h, scenario.frame, state);

  SliceRealization out;
  out.iteration1 = first.statistic.col(0);
  int argmax = 0;
  first.statistic.col(0).maxCoeff(&argmax);
  out.argmax1 = argmax;

  if (first.statistic(argmax, 0) > gamma) {
    const double tau = grid.delays[static_cast<std::size_t>(argmax)];
    const CovarianceState next =
        augment(state, signature(tau, 0.0, h, scenario.frame),
                first.amplitude(argmax, 0));
    out.iteration2 = gic_maps(y, grid, h, scenario.frame, next).statistic.col(0);
  } else {
    out.iteration2 = out.iteration1;
  }
  return out;
}

std::vector<RangeSlice> range_slice(
    const Scenario& scenario, std::uint64_t seed,
    const std::function<double(ConstellationKind)>& gamma_for) {
  scenario.validate();
  const DelayDopplerGrid grid = make_grid(scenario.frame, scenario.oversample);
  std::vector<double> ranges(grid.delays.size());
  for (std::size_t i = 0; i < grid.delays.size(); ++i) {
    ranges[i] = delay_to_range(grid.delays[i]);
  }

  auto to_db = [](const Eigen::VectorXd& v) {
    const double peak = v.maxCoeff();
    std::vector<double> db(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double ratio = peak > 0.0 ? v[i] / peak : 0.0;
      db[static_cast<std::size_t>(i)] =
          10.0 * std::log10(std::max(ratio, 1e-40));
    }
    return db;
  };

  std::vector<RangeSlice> out;
  for (const ConstellationKind kind : kAllConstellations) {
    const SliceRealization real =
        slice_realization(scenario, kind, seed, gamma_for(kind));
    out.push_back(RangeSlice{kind, 1, ranges, to_db(real.iteration1)});
    out.push_back(RangeSlice{kind, 2, ranges, to_db(real.iteration2)});
  }
  return out;
}

std::vector<RangeSlice> range_slice(const Scenario& scenario,
                                    std::uint64_t seed, double gamma) {
  return range_slice(scenario, seed,
                     [gamma](ConstellationKind) { return gamma; });
}

std::vector<PslStats> psl_stats(const Scenario& scenario) {
  scenario.validate();
  if (scenario.targets.empty()) {
    throw std::invalid_argument("psl_stats: scenario has no targets");
  }
  const DelayDopplerGrid grid = make_grid(scenario.frame, scenario.oversample);
  const std::vector<ResolvedTarget> resolved = resolve_targets(scenario, grid);
  const ResolvedTarget& probe =
      resolved[static_cast<std::size_t>(scenario.target_of_interest)];

  std::vector<PslStats> out;
  for (const ConstellationKind kind : kAllConstellations) {
    std::vector<double> psl_db(static_cast<std::size_t>(scenario.trials));
    parallel_for(scenario.trials, scenario.threads, [&](long i) {
      RandomStream rng = derive_stream(
          scenario.seed, kPurposePsl,
          (static_cast<std::uint64_t>(kind) << 32) ^ static_cast<std::uint64_t>(i));
      const SymbolMatrix h =
          draw_symbols(kind, scenario.frame.n, scenario.frame.m, rng);
      Scene scene;
      scene.sigma2 = 0.0;
      // Unit amplitude; the PSL is a ratio, so SNR and phase are irrelevant.
      scene.targets.push_back(
          Target{grid.delays[static_cast<std::size_t>(probe.delay_bin)],
                 grid.n_doppler() > 1
                     ? grid.dopplers[static_cast<std::size_t>(probe.doppler_bin)]
                     : 0.0,
                 Complex{1.0, 0.0}});
      RandomStream noiseless(0);
      const ReceivedFrame r = synthesize_frame(h, scene, scenario.frame, noiseless);
      const RangeDopplerMap map = matched_rd_map(r, h, scenario.frame, grid);

      const double peak = map.values(probe.delay_bin,
                                     grid.n_doppler() > 1 ? probe.doppler_bin : 0);
      double worst = 0.0;
      for (int l = 0; l < grid.n_delay(); ++l) {
        for (int p = 0; p < grid.n_doppler(); ++p) {
          if (l == probe.delay_bin &&
              (grid.n_doppler() == 1 || p == probe.doppler_bin)) {
            continue;
          }
          worst = std::max(worst, map.values(l, p));
        }
      }
      const double ratio = peak > 0.0 ? worst / peak : 0.0;
      psl_db[static_cast<std::size_t>(i)] =
          10.0 * std::log10(std::max(ratio, 1e-40));
    });

    PslStats stats;
    stats.constellation = kind;
    stats.trials = scenario.trials;
    double sum = 0.0;
    for (const double v : psl_db) sum += v;
    stats.psl_db_mean = sum / static_cast<double>(psl_db.size());
    std::sort(psl_db.begin(), psl_db.end());
    const auto rank = static_cast<std::size_t>(std::min<long>(
        scenario.trials - 1,
        static_cast<long>(std::ceil(0.95 * static_cast<double>(scenario.trials))) - 1));
    stats.psl_db_p95 = psl_db[rank];
    out.push_back(stats);
  }
  return out;
}

}  // namespace isac
