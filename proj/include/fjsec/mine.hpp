#pragma once

#include <cstdint>
#include <vector>

#include "fjsec/channel.hpp"
#include "fjsec/conventional_fj.hpp"
#include "fjsec/neuralnet.hpp"

namespace fjsec {

// Donsker-Varadhan mutual-information estimation and the jamming-aware
// transceiver trained from it. All MI values are in nats.

// Statistic network T(x, y): two ReLU hidden layers and a scalar output.
// ema_denominator tracks E[e^T] over marginal pairs (decay 0.99, seeded by
// the first batch) and replaces the batch denominator in the training
// gradient to reduce its bias.
struct MineEstimator {
  MineEstimator(int dim_x, int dim_y, int hidden, Rng& init_rng);

  int dim_x = 0;
  int dim_y = 0;
  Network net;
  double ema_denominator = 0.0;
  long ema_updates = 0;
};

// I = joint_term - marginal_term, where joint_term = mean_i T(x_i, y_i) and
// marginal_term = log mean_i e^{T(x_i, ybar_i)} with ybar a cyclic shift of
// the y batch by one row (a derangement, so no accidental joint pairs).
struct MiEstimate {
  double value = 0.0;
  int batch = 0;
  double joint_term = 0.0;
  double marginal_term = 0.0;
};

// Lower-bound MI estimate on an aligned sample batch (rows). The marginal
// log-mean-exp is computed max-shifted, so large statistics cannot overflow.
// Evaluation only; est is non-const solely because forward passes are.
MiEstimate dv_estimate(MineEstimator& est, const RMat& xs, const RMat& ys);

// One Adam ascent step of the statistic network on the bound; returns the
// pre-update estimate. The log-denominator gradient uses ema_denominator.
MiEstimate estimator_step(MineEstimator& est, const RMat& xs, const RMat& ys,
                          const AdamConfig& cfg);

// Minibatch training loop: `steps` estimator steps on batches drawn with
// replacement, then a final estimate over the full sample set.
MiEstimate fit_estimator(MineEstimator& est, const RMat& xs, const RMat& ys,
                         int steps, int batch, Rng& batch_rng,
                         const AdamConfig& cfg);

// Encoder objective: maximize beta * I_AB - (1 - beta) * I_AE. Returned as
// the loss the encoder minimizes, i.e. the negation of that objective.
double mine_security_loss(const MiEstimate& i_ab, const MiEstimate& i_ae,
                          double beta);

// MI of a jointly Gaussian scalar pair with correlation rho:
// -1/2 log(1 - rho^2). Validation oracle for dv_estimate.
double gaussian_mi_oracle(double rho);

// Accumulates the gradient of the encoder loss (the negated objective
// beta * I_AB - (1 - beta) * I_AE) into the encoder's gradient buffers and
// returns the objective value; both estimators stay frozen. onehot holds
// the message batch; a_b / a_e are the realified channel maps
// (y = (x + w) a^T + n); w_feat and n*_feat are realified jamming and noise
// rows. Gradients reach the encoder through both statistic-net slots: the
// transmit slot directly and the receive slots through the channel maps.
double encoder_objective_grads(Network& encoder, MineEstimator& est_ab,
                               MineEstimator& est_ae, const RMat& onehot,
                               const RMat& a_b, const RMat& a_e,
                               const RMat& w_feat, const RMat& nb_feat,
                               const RMat& ne_feat, double beta);

// encoder_objective_grads followed by one Adam update of the encoder;
// returns the pre-step objective.
double encoder_step(Network& encoder, MineEstimator& est_ab,
                    MineEstimator& est_ae, const RMat& onehot, const RMat& a_b,
                    const RMat& a_e, const RMat& w_feat, const RMat& nb_feat,
                    const RMat& ne_feat, double beta, const AdamConfig& cfg);

struct MineFjConfig {
  int nt = 10;
  int nr = 4;
  int ne = 4;
  double snr_db = 20.0;  // total transmit power over unit noise power
  double beta = 0.7;
  int iterations = 300;  // outer iteration cap
  int batch = 256;
  uint64_t seed = 1;

  int est_steps = 5;    // estimator steps per encoder step
  int hidden = 100;     // statistic-net hidden width
  int m = 16;           // message alphabet size
  double fj_power_fraction = 0.5;  // share of total power given to jamming
  int eval_batch = 2048;           // held-out batch for the reported curves
  double lr = 1e-3;
};

struct MineFjHistoryRow {
  int iteration = 0;
  double i_ab = 0.0;  // held-out estimates, nats
  double i_ae = 0.0;
  double gsc = 0.0;
  double loss = 0.0;  // mine_security_loss at this iteration
};

// Alternating training on one fixed channel draw: est_steps estimator
// updates, one encoder update, then a held-out evaluation per iteration.
// The returned encoder carries the weights of the iteration with the best
// held-out I_AB. The literal stop rule "halt once I_AB fails to improve" is
// noise-sensitive, so it is recorded (raw_stop_iteration, raw_early_stop)
// but training always runs to the iteration cap.
struct MineFjResult {
  Network encoder;
  MineEstimator est_ab;
  MineEstimator est_ae;
  ChannelDraw draw;
  FjDesign design;
  std::vector<MineFjHistoryRow> history;
  int best_iteration = -1;
  double best_i_ab = 0.0;
  int raw_stop_iteration = -1;
  bool raw_early_stop = false;
};

MineFjResult train_mine_fj(const MineFjConfig& cfg);

// Guaranteed secrecy rate bookkeeping for the training curves; delegates to
// gsc() with the estimated legitimate MI clamped to be non-negative.
double gsc_track(double i_ab, const CMat& g, const FjDesign& design,
                 const CMat& q_s);

}  // namespace fjsec
