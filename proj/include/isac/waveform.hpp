#pragma once

#include <Eigen/Core>

#include "isac/frame.hpp"
#include "isac/rng.hpp"
#include "isac/types.hpp"

namespace isac {

// Frequency-domain steering vector, entry n = exp(-j 2 pi n df tau).
Eigen::VectorXcd steering_delay(double tau_s, const FrameConfig& cfg);

// Temporal steering vector, entry m = exp(-j 2 pi fc m t_sym nu).
Eigen::VectorXcd steering_doppler(double nu, const FrameConfig& cfg);

// Noiseless stacked response of a unit-amplitude target at (tau, nu): block m
// is IDFT_N(h_m .* b(tau)) * conj(c(nu))_m, blocks stacked in symbol order.
Eigen::VectorXcd signature(double tau_s, double nu, const SymbolMatrix& H,
                           const FrameConfig& cfg);

// R = sum_k alpha_k F^H (H .* (b(tau_k) c^H(nu_k))) + Z, with Z i.i.d.
// circular complex Gaussian of per-entry variance sigma2 (drawn column-major).
ReceivedFrame synthesize_frame(const SymbolMatrix& H, const Scene& scene,
                               const FrameConfig& cfg, RandomStream& rng);

// Column-stacks the frame; observation_to_frame is its exact inverse.
ObservationVector assemble_observation(const ReceivedFrame& R);
ReceivedFrame observation_to_frame(const ObservationVector& y, int n, int m);

DelayDopplerGrid make_grid(const FrameConfig& cfg, int oversample);

// Correlations of the signature bank with a frame-shaped input:
// out(l, p) = s(tau_l, nu_p)^H vec(W). Computed with FFTs over the whole
// grid; this is the common kernel of the matched-filter map and the
// subspace grid scan.
Eigen::MatrixXcd signature_correlations(const ReceivedFrame& W,
                                        const SymbolMatrix& H,
                                        const FrameConfig& cfg,
                                        const DelayDopplerGrid& grid);

}  // namespace isac
