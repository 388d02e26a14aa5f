// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Tolerances and scenario parameters are pinned here.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "isac/config.hpp"
#include "isac/harness.hpp"
#include "isac/rdmap.hpp"
#include "isac/subspace.hpp"
#include "isac/textio.hpp"
#include "isac/waveform.hpp"
#include "oracles.hpp"

#ifndef ISACSIM_BIN
#define ISACSIM_BIN "isacsim"
#endif
#ifndef ISAC_CONFIG_DIR
#define ISAC_CONFIG_DIR "configs"
#endif

using namespace isac;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool cond, const std::string& what) {
    if (!cond) pass = false;
    notes.push_back(std::string(cond ? "ok: " : "VIOLATION: ") + what);
  }
  void info(const std::string& what) { notes.push_back("   " + what); }
};

FrameConfig frame(int n, int m = 1) {
  return FrameConfig::create(28.0e9, 120.0e3, n, m, 1.6666666666666667e-6);
}

Scenario base_scenario(int n, double pfa, ConstellationKind kind) {
  Scenario sc;
  sc.frame = frame(n);
  sc.constellation = kind;
  sc.targets = {TargetSpec{30.0, 0.0, 30.0, true},
                TargetSpec{90.0, 0.0, -10.0, true}};
  sc.pfa = pfa;
  // 8 + 2 per side keeps the interferer's bin out of the weak target's
  // training cells on the 256-subcarrier grid (the bins sit 12 cells apart),
  // so a baseline miss means sidelobe masking, not window contamination.
  sc.cfar = CfarConfig{pfa, 8, 2};
  sc.seed = 20260810;
  sc.trials = 2000;
  sc.target_of_interest = 1;
  sc.threads = 0;
  return sc;
}

std::string fmt(double v) { return format_double(v); }

// ---------------------------------------------------------------------------
// 1. Model consistency: the frame synthesis (matrix form) equals the
//    signature superposition (stacked form) with sigma2 = 0, 1e-12 relative.
Outcome criterion1() {
  Outcome out;
  RandomStream meta(1001);
  double worst = 0.0;
  for (int scene_idx = 0; scene_idx < 100; ++scene_idx) {
    const int n = 2 + static_cast<int>(meta.index_pow2(512));   // 2..513
    const int m = 1 + static_cast<int>(meta.index_pow2(4));     // 1..4
    const FrameConfig cfg = frame(std::min(n, 512), m);
    const ConstellationKind kind =
        kAllConstellations[meta.index_pow2(8) % 6];
    const SymbolMatrix h = draw_symbols(kind, cfg.n, cfg.m, meta);

    Scene scene;
    scene.sigma2 = 0.0;
    const int targets = 1 + static_cast<int>(meta.index_pow2(4)) % 3;
    const double nu_cap = 0.49 / (cfg.fc_hz * cfg.t_sym_s);
    for (int k = 0; k < targets; ++k) {
      scene.targets.push_back(
          Target{cfg.t_cp_s * meta.uniform01(),
                 cfg.m > 1 ? nu_cap * (2.0 * meta.uniform01() - 1.0) : 0.0,
                 std::polar(0.1 + 3.0 * meta.uniform01(), meta.phase())});
    }
    RandomStream unused(0);
    const ObservationVector got =
        assemble_observation(synthesize_frame(h, scene, cfg, unused));
    Eigen::VectorXcd want = Eigen::VectorXcd::Zero(got.size());
    for (const Target& t : scene.targets) {
      want += t.alpha * signature(t.tau_s, t.nu, h, cfg);
    }
    worst = std::max(worst, (got - want).norm() / want.norm());
  }
  out.require(worst < 1e-12,
              "max relative deviation over 100 scenes = " + fmt(worst) +
                  " (limit 1e-12)");
  return out;
}

// ---------------------------------------------------------------------------
// 2. Impulse property (PSK exact) and the QAM sidelobe floor var(|h|^2)/N.
Outcome criterion2() {
  Outcome out;
  const int n = 512;
  const FrameConfig cfg = frame(n);
  const DelayDopplerGrid grid = make_grid(cfg, 1);
  const int bin = 40;

  auto one_map = [&](ConstellationKind kind, std::uint64_t seed) {
    RandomStream rng(seed);
    const SymbolMatrix h = draw_symbols(kind, n, 1, rng);
    Scene scene;
    scene.sigma2 = 0.0;
    scene.targets = {Target{grid.delays[bin], 0.0, Complex{1.0, 0.0}}};
    RandomStream unused(0);
    return matched_rd_map(synthesize_frame(h, scene, cfg, unused), h, cfg, grid);
  };

  for (const ConstellationKind kind :
       {ConstellationKind::Bpsk, ConstellationKind::Qpsk}) {
    const RangeDopplerMap map = one_map(kind, 2002);
    const double peak = map.values(bin, 0);
    double side = 0.0;
    for (int l = 0; l < grid.n_delay(); ++l) {
      if (l != bin) side = std::max(side, map.values(l, 0));
    }
    out.require(side < 1e-20 * peak,
                to_string(kind) + " worst sidelobe/peak = " + fmt(side / peak) +
                    " (limit 1e-20)");
  }

  const int frames = 1000;
  for (const ConstellationKind kind :
       {ConstellationKind::Qam16, ConstellationKind::Qam64,
        ConstellationKind::Qam256, ConstellationKind::Qam1024}) {
    double acc = 0.0;
    for (int f = 0; f < frames; ++f) {
      const RangeDopplerMap map =
          one_map(kind, 3000 + static_cast<std::uint64_t>(f));
      const double peak = map.values(bin, 0);
      double side = 0.0;
      for (int l = 0; l < grid.n_delay(); ++l) {
        if (l != bin) side += map.values(l, 0);
      }
      acc += side / ((grid.n_delay() - 1) * peak);
    }
    const double measured = acc / frames;
    const double expected = oracle::alphabet_power_variance(kind) / n;
    const double rel = std::abs(measured - expected) / expected;
    out.require(rel < 0.25, to_string(kind) + " mean sidelobe-to-peak " +
                                fmt(measured) + " vs var(|h|^2)/N " +
                                fmt(expected) + ", rel dev " + fmt(rel) +
                                " (limit 0.25)");
  }
  return out;
}

// ---------------------------------------------------------------------------
// 3. Woodbury machinery vs dense linear-algebra oracles, 200 random cases.
Outcome criterion3() {
  Outcome out;
  RandomStream rng(3003);
  double worst_inv = 0.0, worst_stat = 0.0, worst_proj = 0.0, worst_amp = 0.0;
  for (int c = 0; c < 200; ++c) {
    const int n = 4 + static_cast<int>(rng.index_pow2(16));  // 4..19
    const int m = 1 + static_cast<int>(rng.index_pow2(4)) % 3;
    const int nm = n * m;
    if (nm > 64) continue;
    const FrameConfig cfg = frame(n, m);
    const ConstellationKind kind = kAllConstellations[rng.index_pow2(8) % 6];
    const SymbolMatrix h = draw_symbols(kind, n, m, rng);

    CovarianceState state(0.2 + 2.0 * rng.uniform01());
    const int q = static_cast<int>(rng.index_pow2(8)) % 6;  // 0..5
    for (int i = 0; i < q; ++i) {
      Eigen::VectorXcd s(nm);
      for (int k = 0; k < nm; ++k) s[k] = rng.complex_normal(1.0);
      state.add_term(s, (i % 4 == 3) ? 0.0 : 0.1 + 3.0 * rng.uniform01());
    }
    Eigen::VectorXcd y(nm);
    for (int k = 0; k < nm; ++k) y[k] = rng.complex_normal(1.0);

    const Eigen::MatrixXcd dense_c = oracle::dense_covariance(state, y.size());
    const Eigen::VectorXcd want = dense_c.inverse() * y;
    worst_inv = std::max(worst_inv,
                         (state.apply_inverse(y) - want).norm() / want.norm());

    const double tau = cfg.t_cp_s * rng.uniform01();
    const double nu = m > 1 ? 1e-7 * (rng.uniform01() - 0.5) : 0.0;
    const GicValue got = gic_statistic(y, tau, nu, h, cfg, state);
    const oracle::DenseGic dense =
        oracle::dense_gic(y, signature(tau, nu, h, cfg), dense_c);
    worst_stat = std::max(worst_stat,
                          std::abs(got.statistic - dense.statistic_direct) /
                              dense.statistic_direct);
    worst_proj = std::max(worst_proj,
                          std::abs(got.statistic - dense.statistic_projector) /
                              dense.statistic_projector);
    worst_amp = std::max(worst_amp, std::abs(got.amplitude - dense.amplitude) /
                                        std::abs(dense.amplitude));
  }
  out.require(worst_inv < 1e-8, "C^-1 v vs dense: " + fmt(worst_inv));
  out.require(worst_stat < 1e-8, "statistic vs dense: " + fmt(worst_stat));
  out.require(worst_proj < 1e-8,
              "statistic vs dense projector route: " + fmt(worst_proj));
  out.require(worst_amp < 1e-8, "ML amplitude vs dense: " + fmt(worst_amp));
  return out;
}

// ---------------------------------------------------------------------------
// 4. First-iteration equivalence: sigma2 * J^(1) equals the matched map.
Outcome criterion4() {
  Outcome out;
  RandomStream rng(4004);
  double worst = 0.0;
  for (const int oversample : {1, 2}) {
    for (const double sigma2 : {0.5, 1.0, 2.0}) {
      const FrameConfig cfg = frame(64, 2);
      const DelayDopplerGrid grid = make_grid(cfg, oversample);
      const SymbolMatrix h =
          draw_symbols(ConstellationKind::Qam1024, 64, 2, rng);
      Scene scene;
      scene.sigma2 = 1.0;
      scene.targets = {
          Target{grid.delays[3], 0.0, std::polar(8.0, rng.phase())},
          Target{grid.delays[9], grid.dopplers[1], std::polar(2.0, rng.phase())}};
      const ReceivedFrame r = synthesize_frame(h, scene, cfg, rng);
      const RangeDopplerMap map = matched_rd_map(r, h, cfg, grid);
      const GicMaps maps =
          gic_maps(assemble_observation(r), grid, h, cfg, CovarianceState(sigma2));
      const double scale = map.values.maxCoeff();
      worst = std::max(worst, ((maps.statistic * sigma2) - map.values)
                                  .cwiseAbs()
                                  .maxCoeff() /
                                  scale);
    }
  }
  out.require(worst < 1e-10, "max |sigma2 J - map| / max(map) = " + fmt(worst) +
                                 " (limit 1e-10)");
  return out;
}

// ---------------------------------------------------------------------------
// 5. False-alarm calibration at desk scale plus the CA-CFAR rate.
Outcome criterion5() {
  Outcome out;
  Scenario sc = base_scenario(256, 1e-2, ConstellationKind::Qam1024);
  sc.calibration_trials = 10000;
  const double gamma = calibrate_threshold(sc);
  out.info("calibrated gamma = " + fmt(gamma));

  const DelayDopplerGrid grid = make_grid(sc.frame, 1);
  const long fresh = 10000;
  std::vector<std::uint8_t> alarm(fresh, 0);
  parallel_for(fresh, sc.threads, [&](long i) {
    RandomStream rng = derive_stream(555777, 0xF5, static_cast<std::uint64_t>(i));
    const SymbolMatrix h = draw_symbols(sc.constellation, sc.frame.n, 1, rng);
    ObservationVector y(sc.frame.n);
    for (int k = 0; k < sc.frame.n; ++k) y[k] = rng.complex_normal(1.0);
    const CovarianceState state(1.0);
    alarm[i] = scan_grid(y, grid, h, sc.frame, state).statistic > gamma ? 1 : 0;
  });
  long count = 0;
  for (const auto a : alarm) count += a;
  const double rate = static_cast<double>(count) / fresh;
  out.require(rate >= 0.007 && rate <= 0.013,
              "subspace per-scan Pfa on fresh noise = " + fmt(rate) +
                  " (band [0.007, 0.013])");

  const long cells = 1000000;
  RandomStream rng(5005);
  RangeDopplerMap map;
  map.values.resize(cells, 1);
  for (long i = 0; i < cells; ++i) map.values(i, 0) = rng.exponential(1.0);
  const auto detections = ca_cfar(map, CfarConfig{1e-2, 16, 4});
  const double cfar_rate = static_cast<double>(detections.size()) / cells;
  out.require(cfar_rate >= 0.7e-2 && cfar_rate <= 1.3e-2,
              "CA-CFAR per-cell Pfa on exponential cells = " + fmt(cfar_rate) +
                  " (band 1e-2 +-30%)");
  return out;
}

// ---------------------------------------------------------------------------
// 6. Two-iteration range slices at the reference numerology: the weak
//    target's bin is the global maximum of the second iteration, and for
//    high-order QAM its first-iteration value stays under the local sidelobe
//    maximum in most runs.
Outcome criterion6() {
  Outcome out;
  Scenario sc = base_scenario(512, 1e-2, ConstellationKind::Qam1024);
  sc.targets[0].snr_db = 40.0;
  sc.targets[1].snr_db = 10.0;
  sc.calibration_trials = 10000;

  const DelayDopplerGrid grid = make_grid(sc.frame, 1);
  const auto resolved = resolve_targets(sc, grid);
  const int bin2 = resolved[1].delay_bin;

  // Window of bins whose range lies in [90, 95] m, minus the target's bin.
  std::vector<int> window;
  for (int l = 0; l < grid.n_delay(); ++l) {
    const double r = delay_to_range(grid.delays[l]);
    if (r >= 90.0 && r <= 95.0 && l != bin2) window.push_back(l);
  }
  out.info("target bin " + std::to_string(bin2) + ", comparison bins: " +
           std::to_string(window.size()));
  out.info("note: the probed bin carries its own interferer-sidelobe draw, so "
           "it stochastically dominates the lone comparison bin; P(exceeds) "
           ">= 1/2 at any SNR (closed form ~0.74 here), hence the masking "
           "clause below cannot reach < 50/100");

  const int runs = 100;
  for (const ConstellationKind kind : kAllConstellations) {
    Scenario cal = sc;
    cal.constellation = kind;
    const double gamma = calibrate_threshold(cal);

    int iter2_hits = 0;
    int masked_exceed = 0;
    for (int run = 0; run < runs; ++run) {
      const SliceRealization real = slice_realization(
          sc, kind, sc.seed + static_cast<std::uint64_t>(run), gamma);
      int argmax2 = 0;
      real.iteration2.maxCoeff(&argmax2);
      if (argmax2 == bin2) ++iter2_hits;

      double local_max = 0.0;
      for (const int l : window) {
        local_max = std::max(local_max, real.iteration1[l]);
      }
      if (real.iteration1[bin2] > local_max) ++masked_exceed;
    }
    out.require(iter2_hits >= 95,
                to_string(kind) + " iteration-2 global max on the weak bin in " +
                    std::to_string(iter2_hits) + "/100 runs (need >= 95)");
    if (kind == ConstellationKind::Qam256 ||
        kind == ConstellationKind::Qam1024) {
      out.require(masked_exceed < 50,
                  to_string(kind) + " iteration-1 weak-target bin beats the "
                  "90-95 m sidelobe max in " + std::to_string(masked_exceed) +
                      "/100 runs (need < 50; masking)");
    } else {
      out.info(to_string(kind) + " iteration-1 weak-target bin beats the "
               "90-95 m sidelobe max in " + std::to_string(masked_exceed) +
               "/100 runs (informational)");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// 7. Detector ordering at the masked operating point and benchmark flatness.
Outcome criterion7() {
  Outcome out;
  Scenario sc = base_scenario(256, 1e-2, ConstellationKind::Qam1024);
  sc.trials = 2000;
  sc.calibration_trials = 10000;
  const double gamma = calibrate_threshold(sc);

  const PdEstimate sub = estimate_pd(sc, gamma, DetectorKind::Subspace);
  const PdEstimate fft = estimate_pd(sc, gamma, DetectorKind::FftCfar);
  const PdEstimate glrt = estimate_pd(sc, gamma, DetectorKind::GlrtCd);
  out.info("Pd subspace=" + fmt(sub.pd) + " fft_cfar=" + fmt(fft.pd) +
           " glrt_cd=" + fmt(glrt.pd));
  out.require(sub.pd >= fft.pd + 0.1,
              "Pd(subspace) >= Pd(fft_cfar) + 0.1: " + fmt(sub.pd) + " vs " +
                  fmt(fft.pd));
  out.require(std::abs(sub.pd - glrt.pd) <= 0.1,
              "|Pd(subspace) - Pd(glrt_cd)| = " + fmt(std::abs(sub.pd - glrt.pd)) +
                  " (limit 0.1)");

  std::vector<PdEstimate> flat;
  for (const double snr1 : {10.0, 20.0, 30.0, 40.0}) {
    Scenario point = sc;
    point.targets[0].snr_db = snr1;
    flat.push_back(estimate_pd(point, gamma, DetectorKind::GlrtCd));
  }
  for (std::size_t i = 1; i < flat.size(); ++i) {
    const double diff = std::abs(flat[i].pd - flat[0].pd);
    const double two_se = 2.0 * (flat[i].stderr_normal + flat[0].stderr_normal);
    out.require(diff <= two_se,
                "glrt_cd flat in SNR1: |dPd| = " + fmt(diff) + " <= " +
                    fmt(two_se));
  }
  return out;
}

// ---------------------------------------------------------------------------
// 8. Constellation consistency at the operating point where the BPSK
//    subspace detector sits near Pd 0.8 (SNR2 pinned at -16 dB). Runs on the
//    512-subcarrier grid: there the 30 m and 90 m bins are 25 cells apart,
//    so the default 16+4 training window never contains the interferer's
//    mainlobe (at 256 subcarriers it would for every constellation, zeroing
//    the baseline across the board).
Outcome criterion8() {
  Outcome out;
  double sub_min = 2.0, sub_max = -1.0, fft_min = 2.0, fft_max = -1.0;
  for (const ConstellationKind kind : kAllConstellations) {
    Scenario sc = base_scenario(512, 1e-2, kind);
    sc.targets[1].snr_db = -16.0;
    sc.trials = 2000;
    sc.calibration_trials = 10000;
    const double gamma = calibrate_threshold(sc);
    const PdEstimate sub = estimate_pd(sc, gamma, DetectorKind::Subspace);
    const PdEstimate fft = estimate_pd(sc, gamma, DetectorKind::FftCfar);
    out.info(to_string(kind) + ": subspace Pd=" + fmt(sub.pd) +
             ", fft_cfar Pd=" + fmt(fft.pd));
    sub_min = std::min(sub_min, sub.pd);
    sub_max = std::max(sub_max, sub.pd);
    fft_min = std::min(fft_min, fft.pd);
    fft_max = std::max(fft_max, fft.pd);
  }
  out.require(sub_max - sub_min <= 0.15,
              "subspace Pd spread = " + fmt(sub_max - sub_min) +
                  " (limit 0.15)");
  out.require(fft_max - fft_min >= 0.3,
              "fft_cfar Pd spread = " + fmt(fft_max - fft_min) +
                  " (need >= 0.3)");
  return out;
}

// ---------------------------------------------------------------------------
// 9. CLI determinism: byte-identical CSV on re-run for every command.
Outcome criterion9() {
  Outcome out;
  const std::string cfg_path = "/tmp/isac_accept_cli.json";
  {
    nlohmann::json j = {
        {"schema_version", 1},
        {"frame",
         {{"fc_hz", 28.0e9},
          {"df_hz", 120.0e3},
          {"subcarriers", 64},
          {"symbols", 1},
          {"t_cp_s", 1.6666666666666667e-06}}},
        {"constellation", "qam256"},
        {"targets",
         {{{"range_m", 30.0}, {"snr_db", 25.0}},
          {{"range_m", 90.0}, {"snr_db", 5.0}}}},
        {"pfa", 0.05},
        {"cfar", {{"train_cells", 3}, {"guard_cells", 1}}},
        {"seed", 77},
        {"trials", 50},
        {"threads", 2}};
    write_file_atomic(cfg_path, j.dump(2) + "\n");
  }

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"calibrate", "calibrate -c " + cfg_path},
      {"slice", "slice --gamma 9 -c " + cfg_path},
      {"pd-sweep", "pd-sweep --axis snr2 --range=-5:5:5 -c " + cfg_path},
      {"psl", "psl --set trials=30 -c " + cfg_path},
  };
  for (const auto& [name, args] : commands) {
    const std::string out1 = "/tmp/isac_accept_" + name + "_1.csv";
    const std::string out2 = "/tmp/isac_accept_" + name + "_2.csv";
    const std::string cmd1 = std::string(ISACSIM_BIN) + " " + args + " -o " +
                             out1 + " >/dev/null 2>&1";
    const std::string cmd2 = std::string(ISACSIM_BIN) + " " + args + " -o " +
                             out2 + " >/dev/null 2>&1";
    const int s1 = std::system(cmd1.c_str());
    const int s2 = std::system(cmd2.c_str());
    const bool ran = s1 == 0 && s2 == 0;
    out.require(ran, name + " runs cleanly");
    if (ran) {
      out.require(read_file(out1) == read_file(out2),
                  name + " re-run is byte-identical");
    }
  }
  return out;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria =
      {{"1 model consistency (frame == signature superposition)", criterion1},
       {"2 impulse property and QAM sidelobe floor", criterion2},
       {"3 Woodbury path vs dense oracles", criterion3},
       {"4 first-iteration equivalence with the matched map", criterion4},
       {"5 false-alarm calibration", criterion5},
       {"6 two-iteration range slices (desk-scale reference scene)", criterion6},
       {"7 detector ordering and benchmark flatness", criterion7},
       {"8 constellation consistency", criterion8},
       {"9 CLI determinism", criterion9}};

  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = fn();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.notes.push_back(std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    std::printf("[%s] criterion %s (%.1f s)\n", outcome.pass ? "PASS" : "FAIL",
                name.c_str(), secs);
    for (const std::string& note : outcome.notes) {
      std::printf("        %s\n", note.c_str());
    }
    if (!outcome.pass) ++failures;
  }
  std::printf("%d/9 criteria passed\n", 9 - failures);
  return failures == 0 ? 0 : 1;
}
