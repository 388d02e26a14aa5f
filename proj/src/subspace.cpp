#include "isac/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "isac/waveform.hpp"

namespace isac {

CovarianceState::CovarianceState(double sigma2) : sigma2_(sigma2) {
  if (!(sigma2 > 0.0)) {
    throw std::invalid_argument("CovarianceState: sigma2 must be positive");
  }
}

void CovarianceState::add_term(Eigen::VectorXcd signature, double variance) {
  if (variance < 0.0) {
    throw std::invalid_argument("CovarianceState: variance must be >= 0");
  }
  if (!terms_.empty() && signature.size() != terms_.front().s.size()) {
    throw std::invalid_argument("CovarianceState: signature length mismatch");
  }
  terms_.push_back(Term{std::move(signature), variance});
  rebuild_();
}

void CovarianceState::rebuild_() {
  int active = 0;
  for (const Term& t : terms_) {
    if (t.variance > 0.0) ++active;
  }
  if (active == 0) {
    u_.resize(0, 0);
    return;
  }
  const Eigen::Index len = terms_.front().s.size();
  u_.resize(len, active);
  Eigen::VectorXd inv_var(active);
  int j = 0;
  for (const Term& t : terms_) {
    if (t.variance > 0.0) {
      u_.col(j) = t.s;
      inv_var[j] = 1.0 / t.variance;
      ++j;
    }
  }
  Eigen::MatrixXcd w = u_.adjoint() * u_;
  w.diagonal() += (sigma2_ * inv_var).cast<Complex>();
  w_ldlt_.compute(w);
  if (w_ldlt_.info() != Eigen::Success) {
    throw std::runtime_error("CovarianceState: small-system factorization failed");
  }
}

Eigen::VectorXcd CovarianceState::small_solve(const Eigen::VectorXcd& rhs) const {
  return w_ldlt_.solve(rhs);
}

Eigen::MatrixXcd CovarianceState::small_inverse() const {
  const Eigen::Index q = u_.cols();
  return w_ldlt_.solve(Eigen::MatrixXcd::Identity(q, q));
}

Eigen::VectorXcd CovarianceState::apply_inverse(const Eigen::VectorXcd& v) const {
  if (!terms_.empty() && v.size() != terms_.front().s.size()) {
    throw std::invalid_argument("apply_inverse: vector length mismatch");
  }
  if (active_count() == 0) {
    return v / sigma2_;
  }
  const Eigen::VectorXcd proj = u_ * small_solve(u_.adjoint() * v);
  return (v - proj) / sigma2_;
}

CovarianceState augment(const CovarianceState& state,
                        const Eigen::VectorXcd& s_hat, Complex alpha_hat) {
  CovarianceState out = state;
  out.add_term(s_hat, std::norm(alpha_hat));
  return out;
}

GicValue gic_statistic(const ObservationVector& y, double tau_s, double nu,
                       const SymbolMatrix& H, const FrameConfig& cfg,
                       const CovarianceState& state) {
  const Eigen::VectorXcd s = signature(tau_s, nu, H, cfg);
  if (y.size() != s.size()) {
    throw std::invalid_argument("gic_statistic: observation length mismatch");
  }
  // sigma2 * s^H C^{-1} y and sigma2 * s^H C^{-1} s via the Woodbury form.
  Complex num = s.dot(y);  // s^H y
  double den = s.squaredNorm();
  if (state.active_count() > 0) {
    const Eigen::MatrixXcd& u = state.active_signatures();
    const Eigen::VectorXcd us = u.adjoint() * s;
    const Eigen::VectorXcd uy = u.adjoint() * y;
    num -= us.dot(state.small_solve(uy));
    den -= us.dot(state.small_solve(us)).real();
  }
  GicValue out;
  out.statistic = std::norm(num) / (state.sigma2() * den);
  out.amplitude = num / den;
  return out;
}

GridMask::GridMask(int n_delay, int n_doppler)
    : nd_(n_delay),
      np_(n_doppler),
      mask_(static_cast<std::size_t>(n_delay) * n_doppler, 0) {
  if (n_delay < 1 || n_doppler < 1) {
    throw std::invalid_argument("GridMask: empty grid");
  }
}

void GridMask::exclude(int delay_bin, int doppler_bin) {
  auto& cell = mask_[static_cast<std::size_t>(delay_bin) * np_ + doppler_bin];
  if (!cell) {
    cell = 1;
    ++excluded_count_;
  }
}

void GridMask::exclude_box(int delay_bin, int doppler_bin, int radius,
                           bool doppler_wraps) {
  for (int dl = -radius; dl <= radius; ++dl) {
    const int l = delay_bin + dl;
    if (l < 0 || l >= nd_) continue;
    for (int dp = -radius; dp <= radius; ++dp) {
      int p = doppler_bin + dp;
      if (doppler_wraps) {
        p = ((p % np_) + np_) % np_;
      } else if (p < 0 || p >= np_) {
        continue;
      }
      exclude(l, p);
    }
  }
}

bool GridMask::excluded(int delay_bin, int doppler_bin) const {
  return mask_[static_cast<std::size_t>(delay_bin) * np_ + doppler_bin] != 0;
}

bool GridMask::all_excluded() const {
  return excluded_count_ == static_cast<int>(mask_.size());
}

GicMaps gic_maps(const ObservationVector& y, const DelayDopplerGrid& grid,
                 const SymbolMatrix& H, const FrameConfig& cfg,
                 const CovarianceState& state) {
  const ReceivedFrame yf = observation_to_frame(y, cfg.n, cfg.m);
  const Eigen::MatrixXcd ky = signature_correlations(yf, H, cfg, grid);

  const int nd = grid.n_delay();
  const int np = grid.n_doppler();
  const double h2 = H.squaredNorm();  // ||s(x)||^2 for every x
  const double sigma2 = state.sigma2();

  GicMaps maps;
  maps.statistic.resize(nd, np);
  maps.amplitude.resize(nd, np);

  const int q = state.active_count();
  if (q == 0) {
    for (int l = 0; l < nd; ++l) {
      for (int p = 0; p < np; ++p) {
        const Complex num = ky(l, p);
        maps.statistic(l, p) = std::norm(num) / (sigma2 * h2);
        maps.amplitude(l, p) = num / h2;
      }
    }
    return maps;
  }

  const Eigen::MatrixXcd& u = state.active_signatures();
  // Correlation map of each stored signature with the grid.
  std::vector<Eigen::MatrixXcd> ku(static_cast<std::size_t>(q));
  for (int i = 0; i < q; ++i) {
    ku[static_cast<std::size_t>(i)] = signature_correlations(
        observation_to_frame(u.col(i), cfg.n, cfg.m), H, cfg, grid);
  }
  const Eigen::VectorXcd beta = state.small_solve(u.adjoint() * y);
  const Eigen::MatrixXcd winv = state.small_inverse();

  Eigen::VectorXcd k(q);
  for (int l = 0; l < nd; ++l) {
    for (int p = 0; p < np; ++p) {
      for (int i = 0; i < q; ++i) k[i] = ku[static_cast<std::size_t>(i)](l, p);
      // k_i = s^H u_i, so U^H s = conj(k).
      Complex num = ky(l, p);
      for (int i = 0; i < q; ++i) num -= k[i] * beta[i];
      const Eigen::VectorXcd a = k.conjugate();
      const double den = h2 - a.dot(winv * a).real();
      maps.statistic(l, p) = std::norm(num) / (sigma2 * den);
      maps.amplitude(l, p) = num / den;
    }
  }
  return maps;
}

GridScan scan_grid(const ObservationVector& y, const DelayDopplerGrid& grid,
                   const SymbolMatrix& H, const FrameConfig& cfg,
                   const CovarianceState& state, const GridMask* excluded) {
  if (excluded && excluded->all_excluded()) {
    throw std::invalid_argument("scan_grid: all grid points excluded");
  }
  const GicMaps maps = gic_maps(y, grid, H, cfg, state);
  const int nd = grid.n_delay();
  const int np = grid.n_doppler();

  bool found = false;
  GridScan best;
  for (int l = 0; l < nd; ++l) {
    for (int p = 0; p < np; ++p) {
      if (excluded && excluded->excluded(l, p)) continue;
      const double j = maps.statistic(l, p);
      if (!found || j > best.statistic) {
        found = true;
        best = GridScan{l, p, j, maps.amplitude(l, p)};
      }
    }
  }
  if (!found) throw std::invalid_argument("scan_grid: all grid points excluded");
  return best;
}

void DetectorConfig::validate() const {
  if (!(gamma > 0.0)) throw std::invalid_argument("detector: gamma must be > 0");
  if (max_iter < 1) throw std::invalid_argument("detector: max_iter must be >= 1");
  if (exclusion_radius < 0) {
    throw std::invalid_argument("detector: exclusion_radius must be >= 0");
  }
}

DetectionReport detect_iterative(const ObservationVector& y,
                                 const DelayDopplerGrid& grid,
                                 const SymbolMatrix& H, const FrameConfig& cfg,
                                 const DetectorConfig& det, double sigma2) {
  det.validate();
  CovarianceState state(sigma2);
  GridMask mask(grid.n_delay(), grid.n_doppler());

  DetectionReport report;
  for (int q = 1; q <= det.max_iter; ++q) {
    if (mask.all_excluded()) break;
    const GridScan scan = scan_grid(y, grid, H, cfg, state, &mask);
    if (!(scan.statistic > det.gamma)) {
      report.terminated_by = Termination::BelowThreshold;
      return report;
    }
    const double tau = grid.delays[static_cast<std::size_t>(scan.delay_bin)];
    const double nu = grid.dopplers[static_cast<std::size_t>(scan.doppler_bin)];
    report.detections.push_back(SubspaceDetection{
        scan.delay_bin, scan.doppler_bin, tau, nu, scan.amplitude,
        scan.statistic, q});
    mask.exclude_box(scan.delay_bin, scan.doppler_bin, det.exclusion_radius,
                     grid.doppler_periodic);
    state = augment(state, signature(tau, nu, H, cfg), scan.amplitude);
  }
  report.terminated_by = Termination::MaxIterations;
  return report;
}

double estimate_noise_floor(const ObservationVector& y,
                            const DelayDopplerGrid& grid,
                            const SymbolMatrix& H, const FrameConfig& cfg) {
  const Eigen::MatrixXcd k = signature_correlations(
      observation_to_frame(y, cfg.n, cfg.m), H, cfg, grid);
  const double h2 = H.squaredNorm();
  std::vector<double> cells(static_cast<std::size_t>(k.size()));
  for (Eigen::Index i = 0; i < k.size(); ++i) {
    cells[static_cast<std::size_t>(i)] = std::norm(k(i)) / h2;
  }
  const std::size_t mid = cells.size() / 2;
  std::nth_element(cells.begin(), cells.begin() + mid, cells.end());
  return cells[mid] / std::log(2.0);
}

DetectionReport glrt_cd_benchmark(const Scene& scene, int target_index,
                                  const SymbolMatrix& H, const FrameConfig& cfg,
                                  const DelayDopplerGrid& grid,
                                  const DetectorConfig& det, RandomStream& rng) {
  if (target_index < 0 ||
      target_index >= static_cast<int>(scene.targets.size())) {
    throw std::invalid_argument("glrt_cd_benchmark: target index out of range");
  }
  Scene cleaned;
  cleaned.targets = {scene.targets[static_cast<std::size_t>(target_index)]};
  cleaned.sigma2 = scene.sigma2;

  const ObservationVector y =
      assemble_observation(synthesize_frame(H, cleaned, cfg, rng));
  DetectorConfig single = det;
  single.max_iter = 1;
  return detect_iterative(y, grid, H, cfg, single, scene.sigma2);
}

}  // namespace isac
