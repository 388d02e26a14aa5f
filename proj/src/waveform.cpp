#include "isac/waveform.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "isac/fft.hpp"

namespace isac {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_dims(const Eigen::MatrixXcd& a, const FrameConfig& cfg,
                const char* what) {
  if (a.rows() != cfg.n || a.cols() != cfg.m) {
    throw std::invalid_argument(std::string(what) +
                                ": dimensions do not match the frame config");
  }
}

}  // namespace

Eigen::VectorXcd steering_delay(double tau_s, const FrameConfig& cfg) {
  if (!std::isfinite(tau_s)) throw std::invalid_argument("tau must be finite");
  Eigen::VectorXcd b(cfg.n);
  const double w = -kTwoPi * cfg.df_hz * tau_s;
  for (int i = 0; i < cfg.n; ++i) b[i] = std::polar(1.0, w * i);
  return b;
}

Eigen::VectorXcd steering_doppler(double nu, const FrameConfig& cfg) {
  if (!std::isfinite(nu)) throw std::invalid_argument("nu must be finite");
  Eigen::VectorXcd c(cfg.m);
  const double w = -kTwoPi * cfg.fc_hz * cfg.t_sym_s * nu;
  for (int i = 0; i < cfg.m; ++i) c[i] = std::polar(1.0, w * i);
  return c;
}

Eigen::VectorXcd signature(double tau_s, double nu, const SymbolMatrix& H,
                           const FrameConfig& cfg) {
  check_dims(H, cfg, "signature");
  const Eigen::VectorXcd b = steering_delay(tau_s, cfg);
  const Eigen::VectorXcd c = steering_doppler(nu, cfg);
  const UnitaryFft& fft = shared_fft(cfg.n);
  Eigen::VectorXcd s(static_cast<Eigen::Index>(cfg.n) * cfg.m);
  Eigen::VectorXcd scratch(cfg.n);
  for (int m = 0; m < cfg.m; ++m) {
    scratch = H.col(m).cwiseProduct(b);
    fft.inverse(scratch.data(), s.data() + static_cast<Eigen::Index>(m) * cfg.n);
    s.segment(static_cast<Eigen::Index>(m) * cfg.n, cfg.n) *= std::conj(c[m]);
  }
  return s;
}

ReceivedFrame synthesize_frame(const SymbolMatrix& H, const Scene& scene,
                               const FrameConfig& cfg, RandomStream& rng) {
  check_dims(H, cfg, "synthesize_frame");
  scene.validate(cfg);

  // Accumulate all echoes in the subcarrier domain, then one IDFT per symbol.
  Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(cfg.n, cfg.m);
  for (const Target& t : scene.targets) {
    const Eigen::VectorXcd b = steering_delay(t.tau_s, cfg);
    const Eigen::VectorXcd c = steering_doppler(t.nu, cfg);
    for (int m = 0; m < cfg.m; ++m) {
      x.col(m) += t.alpha * std::conj(c[m]) * H.col(m).cwiseProduct(b);
    }
  }

  const UnitaryFft& fft = shared_fft(cfg.n);
  ReceivedFrame r(cfg.n, cfg.m);
  for (int m = 0; m < cfg.m; ++m) {
    fft.inverse(x.col(m).data(), r.col(m).data());
  }

  if (scene.sigma2 > 0.0) {
    for (int m = 0; m < cfg.m; ++m) {
      for (int n = 0; n < cfg.n; ++n) {
        r(n, m) += rng.complex_normal(scene.sigma2);
      }
    }
  }
  return r;
}

ObservationVector assemble_observation(const ReceivedFrame& R) {
  ObservationVector y(R.size());
  Eigen::Index k = 0;
  for (Eigen::Index m = 0; m < R.cols(); ++m) {
    y.segment(k, R.rows()) = R.col(m);
    k += R.rows();
  }
  return y;
}

ReceivedFrame observation_to_frame(const ObservationVector& y, int n, int m) {
  if (y.size() != static_cast<Eigen::Index>(n) * m) {
    throw std::invalid_argument("observation_to_frame: size mismatch");
  }
  ReceivedFrame r(n, m);
  for (int col = 0; col < m; ++col) {
    r.col(col) = y.segment(static_cast<Eigen::Index>(col) * n, n);
  }
  return r;
}

DelayDopplerGrid make_grid(const FrameConfig& cfg, int oversample) {
  if (oversample < 1) {
    throw std::invalid_argument("make_grid: oversample must be >= 1");
  }
  DelayDopplerGrid grid;
  grid.oversample = oversample;

  const double delay_pitch = 1.0 / (cfg.bandwidth_hz() * oversample);
  // [0, t_cp): count = floor(t_cp/pitch), with a tiny relative guard so an
  // exact multiple is not lost to rounding.
  const double raw = cfg.t_cp_s / delay_pitch;
  const auto n_delay = static_cast<long>(std::floor(raw * (1.0 + 1e-12) + 1e-12));
  grid.delays.resize(static_cast<std::size_t>(n_delay));
  for (long l = 0; l < n_delay; ++l) {
    grid.delays[static_cast<std::size_t>(l)] = static_cast<double>(l) * delay_pitch;
  }

  if (cfg.m == 1) {
    grid.dopplers = {0.0};
    grid.doppler_periodic = false;
  } else {
    const long count = static_cast<long>(cfg.m) * oversample;
    const double pitch = 1.0 / (cfg.fc_hz * cfg.t_sym_s * count);
    grid.dopplers.resize(static_cast<std::size_t>(count));
    const long first = -(count / 2);
    for (long p = 0; p < count; ++p) {
      grid.dopplers[static_cast<std::size_t>(p)] =
          static_cast<double>(first + p) * pitch;
    }
    grid.doppler_periodic = true;
  }
  return grid;
}

namespace {

// The FFT path needs the exact lattice make_grid produces: delays l/(B*os)
// from 0 and, for multi-symbol frames, one full Doppler interval at pitch
// 1/(fc t_sym M os) starting at -floor(P/2) steps.
void check_fft_grid(const DelayDopplerGrid& grid, const FrameConfig& cfg) {
  const double delay_pitch = 1.0 / (cfg.bandwidth_hz() * grid.oversample);
  bool ok = !grid.delays.empty();
  for (int l = 0; ok && l < grid.n_delay(); ++l) {
    ok = std::abs(grid.delays[static_cast<std::size_t>(l)] - l * delay_pitch) <=
         1e-9 * delay_pitch;
  }
  if (cfg.m == 1) {
    ok = ok && grid.dopplers == std::vector<double>{0.0};
  } else {
    const long count = static_cast<long>(cfg.m) * grid.oversample;
    const double pitch = 1.0 / (cfg.fc_hz * cfg.t_sym_s * count);
    ok = ok && grid.n_doppler() == count;
    for (long p = 0; ok && p < count; ++p) {
      ok = std::abs(grid.dopplers[static_cast<std::size_t>(p)] -
                    (p - count / 2) * pitch) <= 1e-9 * pitch;
    }
  }
  if (!ok) {
    throw std::invalid_argument(
        "signature_correlations: grid is not the FFT lattice of make_grid");
  }
}

}  // namespace

Eigen::MatrixXcd signature_correlations(const ReceivedFrame& W,
                                        const SymbolMatrix& H,
                                        const FrameConfig& cfg,
                                        const DelayDopplerGrid& grid) {
  check_dims(W, cfg, "signature_correlations");
  check_dims(H, cfg, "signature_correlations");
  check_fft_grid(grid, cfg);

  const int n_delay = grid.n_delay();
  const int n_doppler = grid.n_doppler();
  const int len_delay = cfg.n * grid.oversample;
  if (n_delay > len_delay) {
    throw std::invalid_argument(
        "signature_correlations: grid exceeds the delay transform length");
  }

  // A = conj(H) .* (F_N W); the delay axis then takes an unnormalized
  // backward transform of length N*oversample and the Doppler axis a forward
  // transform of length M*oversample.
  const UnitaryFft& fft_n = shared_fft(cfg.n);
  Eigen::MatrixXcd a(cfg.n, cfg.m);
  {
    Eigen::VectorXcd g(cfg.n);
    for (int m = 0; m < cfg.m; ++m) {
      fft_n.forward(W.col(m).data(), g.data());
      a.col(m) = H.col(m).conjugate().cwiseProduct(g);
    }
  }

  const UnitaryFft& fft_delay = shared_fft(len_delay);
  Eigen::MatrixXcd delay_rows(n_delay, cfg.m);
  {
    Eigen::VectorXcd padded = Eigen::VectorXcd::Zero(len_delay);
    Eigen::VectorXcd out(len_delay);
    for (int m = 0; m < cfg.m; ++m) {
      padded.head(cfg.n) = a.col(m);
      fft_delay.backward_raw(padded.data(), out.data());
      delay_rows.col(m) = out.head(n_delay);
    }
  }

  if (cfg.m == 1) {
    // Doppler singleton {0}: the delay transform already is the correlation.
    return delay_rows;
  }

  const int len_doppler = cfg.m * grid.oversample;
  const UnitaryFft& fft_doppler = shared_fft(len_doppler);
  Eigen::MatrixXcd k(n_delay, n_doppler);
  Eigen::VectorXcd padded = Eigen::VectorXcd::Zero(len_doppler);
  Eigen::VectorXcd out(len_doppler);
  const int first = -(len_doppler / 2);  // grid column 0 <-> this Doppler index
  for (int l = 0; l < n_delay; ++l) {
    padded.head(cfg.m) = delay_rows.row(l).transpose();
    fft_doppler.forward_raw(padded.data(), out.data());
    for (int j = 0; j < n_doppler; ++j) {
      const int bin = ((first + j) % len_doppler + len_doppler) % len_doppler;
      k(l, j) = out[bin];
    }
  }
  return k;
}

}  // namespace isac
