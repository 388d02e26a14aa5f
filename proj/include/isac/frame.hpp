#pragma once

#include <vector>

#include "isac/types.hpp"

namespace isac {

// OFDM frame numerology. t_sym = t_cp + 1/df always holds (1e-12 relative).
struct FrameConfig {
  double fc_hz = 0.0;   // carrier frequency
  double df_hz = 0.0;   // subcarrier spacing
  int n = 0;            // subcarriers
  int m = 0;            // OFDM symbols per frame
  double t_cp_s = 0.0;  // cyclic prefix duration
  double t_sym_s = 0.0; // total symbol duration

  // t_sym derived as t_cp + 1/df.
  static FrameConfig create(double fc_hz, double df_hz, int n, int m,
                            double t_cp_s);
  // Explicit t_sym, validated against t_cp + 1/df.
  static FrameConfig create_explicit(double fc_hz, double df_hz, int n, int m,
                                     double t_cp_s, double t_sym_s);

  double bandwidth_hz() const { return static_cast<double>(n) * df_hz; }

  void validate() const;  // throws std::invalid_argument
};

// Point scatterer: round-trip delay, dimensionless Doppler scale 2v/c
// (positive for closing targets), complex amplitude with the carrier phase
// already absorbed.
struct Target {
  double tau_s = 0.0;
  double nu = 0.0;
  Complex alpha{0.0, 0.0};

  // Delay must fit in the CP; per-symbol Doppler phase must be unambiguous
  // (|nu| * fc * t_sym < 0.5).
  void validate(const FrameConfig& cfg) const;
};

struct Scene {
  std::vector<Target> targets;
  double sigma2 = 1.0;  // noise power per complex sample

  void validate(const FrameConfig& cfg) const;
};

// Delay/Doppler hypothesis grid. Delay pitch is 1/(B*oversample), covering
// [0, t_cp); Doppler pitch is 1/(fc*t_sym*M*oversample), covering one
// unambiguous interval. A single-symbol frame has the Doppler singleton {0}.
struct DelayDopplerGrid {
  std::vector<double> delays;    // seconds, ascending from 0
  std::vector<double> dopplers;  // dimensionless, ascending
  int oversample = 1;
  bool doppler_periodic = false; // Doppler axis spans a full period

  int n_delay() const { return static_cast<int>(delays.size()); }
  int n_doppler() const { return static_cast<int>(dopplers.size()); }

  double delay_pitch() const;
  double doppler_pitch() const;  // 0 when the axis is the singleton {0}

  int nearest_delay_bin(double tau_s) const;
  int nearest_doppler_bin(double nu) const;
};

double range_to_delay(double range_m);       // tau = 2 d / c
double delay_to_range(double tau_s);
double velocity_to_nu(double velocity_mps);  // nu = 2 v / c

}  // namespace isac
