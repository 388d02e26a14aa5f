#include "isac/frame.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace isac {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

FrameConfig FrameConfig::create(double fc_hz, double df_hz, int n, int m,
                                double t_cp_s) {
  FrameConfig cfg{fc_hz, df_hz, n, m, t_cp_s, t_cp_s + 1.0 / df_hz};
  cfg.validate();
  return cfg;
}

FrameConfig FrameConfig::create_explicit(double fc_hz, double df_hz, int n,
                                         int m, double t_cp_s,
                                         double t_sym_s) {
  FrameConfig cfg{fc_hz, df_hz, n, m, t_cp_s, t_sym_s};
  cfg.validate();
  return cfg;
}

void FrameConfig::validate() const {
  require(fc_hz > 0.0, "frame: fc_hz must be positive");
  require(df_hz > 0.0, "frame: df_hz must be positive");
  require(n >= 1, "frame: n must be >= 1");
  require(m >= 1, "frame: m must be >= 1");
  require(t_cp_s > 0.0, "frame: t_cp_s must be positive");
  require(t_sym_s > 0.0, "frame: t_sym_s must be positive");
  require(t_cp_s < 1.0 / df_hz, "frame: t_cp_s must be shorter than 1/df_hz");
  const double expected = t_cp_s + 1.0 / df_hz;
  require(std::abs(t_sym_s - expected) <= 1e-12 * expected,
          "frame: t_sym_s must equal t_cp_s + 1/df_hz");
}

void Target::validate(const FrameConfig& cfg) const {
  require(std::isfinite(tau_s) && std::isfinite(nu),
          "target: tau and nu must be finite");
  require(tau_s >= 0.0 && tau_s <= cfg.t_cp_s,
          "target: delay must lie within the cyclic prefix");
  require(std::abs(nu) * cfg.fc_hz * cfg.t_sym_s < 0.5,
          "target: Doppler exceeds the per-symbol unambiguous range");
}

void Scene::validate(const FrameConfig& cfg) const {
  require(sigma2 >= 0.0, "scene: sigma2 must be >= 0");
  for (const Target& t : targets) t.validate(cfg);
}

double DelayDopplerGrid::delay_pitch() const {
  return delays.size() > 1 ? delays[1] - delays[0] : 0.0;
}

double DelayDopplerGrid::doppler_pitch() const {
  return dopplers.size() > 1 ? dopplers[1] - dopplers[0] : 0.0;
}

int DelayDopplerGrid::nearest_delay_bin(double tau_s) const {
  const double pitch = delay_pitch();
  if (pitch <= 0.0) return 0;
  const auto bin = static_cast<long>(std::lround(tau_s / pitch));
  if (bin < 0) return 0;
  if (bin >= n_delay()) return n_delay() - 1;
  return static_cast<int>(bin);
}

int DelayDopplerGrid::nearest_doppler_bin(double nu) const {
  const double pitch = doppler_pitch();
  if (pitch <= 0.0) return 0;
  long k = std::lround((nu - dopplers.front()) / pitch);
  const long count = n_doppler();
  if (doppler_periodic) {
    k = ((k % count) + count) % count;
  } else {
    if (k < 0) k = 0;
    if (k >= count) k = count - 1;
  }
  return static_cast<int>(k);
}

double range_to_delay(double range_m) {
  if (range_m < 0.0) throw std::invalid_argument("range must be >= 0");
  return 2.0 * range_m / kSpeedOfLight;
}

double delay_to_range(double tau_s) { return 0.5 * tau_s * kSpeedOfLight; }

double velocity_to_nu(double velocity_mps) {
  return 2.0 * velocity_mps / kSpeedOfLight;
}

}  // namespace isac
