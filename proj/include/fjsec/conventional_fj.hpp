#pragma once

#include <functional>
#include <vector>

#include "fjsec/channel.hpp"

namespace fjsec {

// Friendly-jamming design: z is an orthonormal basis of the nullspace of
// h_design^H, so jamming w = z v (v ~ CN(0, sigma_v2 I)) vanishes at a
// receiver whose channel matches h_design. n_fj == 0 means the channel has
// no nullspace to jam into (n_t <= rank); callers should treat FJ as off.
struct FjDesign {
  CMat z;
  double sigma_v2 = 0.0;
  int n_fj = 0;
};

FjDesign design_fj(const CMat& h_design, double sigma_v2, double tol = 1e-10);

CVec sample_fj(const FjDesign& design, Rng& rng);

// Eavesdropper noise-plus-jamming covariance
//   k = sigma_v2 (g^H z)(g^H z)^H + sigma_e2 I.
CMat eve_noise_cov(const CMat& g, const FjDesign& design, double sigma_e2);

// Per-stream information power; per_stream aligns with the descending
// singular values of the design channel.
struct PowerAllocation {
  RVec per_stream;
  double p_info = 0.0;
  double p_total = 0.0;
};

// Water-filling over parallel streams with gains g_i (squared singular
// values, descending): p_i = max(0, mu - 1/g_i), sum p_i = p_info.
PowerAllocation waterfill(const RVec& gains, double p_info);

PowerAllocation zero_allocation(Eigen::Index streams);

struct SecrecySample {
  double r_ab = 0.0;  // legitimate rate, nats
  double r_ae = 0.0;  // eavesdropper rate, nats
  double r_s = 0.0;   // max(0, r_ab - r_ae), clamped per realization
};

// Perfect-CSI secrecy rate. The legitimate link reduces to parallel streams
// through the SVD of h^H; the eavesdropper term uses q_s = v Q_r v^H:
//   r_ab = sum_i log(1 + gain_i p_i / sigma_b2)
//   r_ae = logdet(k + g^H q_s g) - logdet(k).
SecrecySample secrecy_rate_perfect(const ChannelDraw& draw,
                                   const PowerAllocation& alloc,
                                   const FjDesign& design);

// Imperfect-CSI secrecy rate: the design (z, precoder) is built from
// csi.h_hat, so jamming leaks into the legitimate link through dh:
//   d = sigma_v2 (dh^H z)(dh^H z)^H + sigma_b2 I
//   r_ab = logdet(d + h^H q_s h) - logdet(d),
// eavesdropper term as in the perfect case.
SecrecySample secrecy_rate_imcsi(const ChannelDraw& draw, const CsiState& csi,
                                 const PowerAllocation& alloc,
                                 const FjDesign& design);

// Guaranteed secrecy against a worst-case (noise-free) eavesdropper:
//   gsc = max(0, i_ab - [logdet(k' + g^H q_s g) - logdet(k')])
// with k' = sigma_v2 (g^H z)(g^H z)^H. When k' is singular the eavesdropper
// term is evaluated on the column space of g^H z (pseudo-determinant) and
// used_pseudo_det is set; n_fj == 0 yields gsc = 0 with the flag set.
struct GscResult {
  double value = 0.0;
  bool used_pseudo_det = false;
};

GscResult gsc(double i_ab, const CMat& g, const FjDesign& design,
              const CMat& q_s);

// Information/jamming power split p_info = phi p_total,
// sigma_v2 = (1 - phi) p_total / n_fj, searched on a uniform phi grid.
struct PowerSplitResult {
  double phi_star = 1.0;
  double mean_rs = 0.0;
};

// Per-draw secrecy under a given split; h_hats (optional, one per draw)
// switches the design and rate to the imperfect-CSI path.
double split_secrecy(const ChannelDraw& draw, const CsiState& csi, double phi,
                     double p_total, double tol = 1e-10);

PowerSplitResult exhaustive_power_split(const std::vector<ChannelDraw>& draws,
                                        const std::vector<CsiState>& csi,
                                        double p_total, int grid_steps = 101,
                                        int workers = 1);

struct SecrecyStats {
  double mean = 0.0;
  double stderr_mean = 0.0;
  size_t n = 0;
};

// Pairwise-summed mean and standard error of per-draw values evaluated by
// fn(i); reduction order is fixed, so results do not depend on workers.
SecrecyStats average_secrecy(size_t n, const std::function<double(size_t)>& fn,
                             int workers = 1);

double pairwise_sum(const std::vector<double>& xs);

void parallel_for(size_t n, int workers,
                  const std::function<void(size_t)>& body);

}  // namespace fjsec
