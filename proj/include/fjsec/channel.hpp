#pragma once

#include <utility>

#include "fjsec/complexlinalg.hpp"
#include "fjsec/rng.hpp"

namespace fjsec {

// One Monte Carlo realization of the wiretap setting. h (n_t x n_r) is the
// legitimate channel, g (n_t x n_e) the eavesdropper channel; receivers see
// y = h^H x + n_b and z = g^H x + n_e with per-dimension complex noise
// variances sigma_b2 and sigma_e2.
struct ChannelDraw {
  CMat h;
  CMat g;
  double sigma_b2 = 1.0;
  double sigma_e2 = 1.0;
};

enum class CsiMode { Perfect, Statistical, Unknown };

// Transmitter-side channel knowledge. Statistical mode carries the noisy
// estimate h_hat = h + dh with dh entries CN(0, rho_e2).
struct CsiState {
  CsiMode mode = CsiMode::Perfect;
  double rho_e2 = 0.0;
  CMat h_hat;
};

// i.i.d. Rayleigh entries CN(0, entry_var): real and imaginary parts are
// independent N(0, entry_var / 2), so E|h_ij|^2 = entry_var.
CMat sample_channel(int rows, int cols, Rng& rng, double entry_var = 1.0);

ChannelDraw sample_draw(int n_t, int n_r, int n_e, double sigma_b2,
                        double sigma_e2, Rng& rng);

// Returns (h_hat, dh) with h_hat = h + dh, dh entries CN(0, rho_e2).
std::pair<CMat, CMat> perturb(const CMat& h, double rho_e2, Rng& rng);

CsiState make_csi(const ChannelDraw& draw, CsiMode mode, double rho_e2,
                  Rng& rng);

// y = h^H x + n with n ~ CN(0, sigma2 I).
CVec transmit(const CMat& h, const CVec& x, double sigma2, Rng& rng);

}  // namespace fjsec
