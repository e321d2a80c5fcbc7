#include "fjsec/mine.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace fjsec {

namespace {

std::vector<LayerSpec> statistic_net(int dim_x, int dim_y, int hidden) {
  return {LayerSpec::dense(dim_x + dim_y, hidden), LayerSpec::relu(),
          LayerSpec::dense(hidden, hidden), LayerSpec::relu(),
          LayerSpec::dense(hidden, 1)};
}

void check_pair(const MineEstimator& est, const RMat& xs, const RMat& ys) {
  if (xs.rows() != ys.rows())
    throw std::invalid_argument("dv_estimate: batch size mismatch");
  if (xs.rows() < 2) throw std::invalid_argument("dv_estimate: batch < 2");
  if (xs.cols() != est.dim_x || ys.cols() != est.dim_y)
    throw std::invalid_argument("dv_estimate: sample width mismatch");
}

RMat shift_rows(const RMat& m) {
  RMat out(m.rows(), m.cols());
  out.topRows(m.rows() - 1) = m.bottomRows(m.rows() - 1);
  out.row(m.rows() - 1) = m.row(0);
  return out;
}

RMat concat_cols(const RMat& a, const RMat& b) {
  RMat out(a.rows(), a.cols() + b.cols());
  out.leftCols(a.cols()) = a;
  out.rightCols(b.cols()) = b;
  return out;
}

// log(mean exp(t)), max-shifted.
double log_mean_exp(const RMat& t) {
  const double shift = t.maxCoeff();
  return shift + std::log((t.array() - shift).exp().mean());
}

MiEstimate estimate_from(const RMat& t_joint, const RMat& t_marg) {
  MiEstimate e;
  e.batch = static_cast<int>(t_joint.rows());
  e.joint_term = t_joint.mean();
  e.marginal_term = log_mean_exp(t_marg);
  e.value = e.joint_term - e.marginal_term;
  return e;
}

}  // namespace

MineEstimator::MineEstimator(int dim_x_, int dim_y_, int hidden, Rng& init_rng)
    : dim_x(dim_x_),
      dim_y(dim_y_),
      net(statistic_net(dim_x_, dim_y_, hidden), init_rng) {
  if (dim_x_ < 1 || dim_y_ < 1)
    throw std::invalid_argument("mine: sample dims must be >= 1");
}

MiEstimate dv_estimate(MineEstimator& est, const RMat& xs, const RMat& ys) {
  check_pair(est, xs, ys);
  const RMat t_joint = est.net.forward(concat_cols(xs, ys), nullptr, false);
  const RMat t_marg =
      est.net.forward(concat_cols(xs, shift_rows(ys)), nullptr, false);
  return estimate_from(t_joint, t_marg);
}

MiEstimate estimator_step(MineEstimator& est, const RMat& xs, const RMat& ys,
                          const AdamConfig& cfg) {
  check_pair(est, xs, ys);
  const Eigen::Index b = xs.rows();
  Network::Tape tape_j, tape_m;
  const RMat t_joint =
      est.net.forward(concat_cols(xs, ys), &tape_j, true);
  const RMat t_marg =
      est.net.forward(concat_cols(xs, shift_rows(ys)), &tape_m, true);
  const MiEstimate out = estimate_from(t_joint, t_marg);

  const double mean_exp = std::exp(out.marginal_term);
  if (!std::isfinite(mean_exp) || mean_exp <= 0.0)
    throw NumericalError("mine: marginal denominator diverged");
  if (est.ema_updates == 0)
    est.ema_denominator = mean_exp;
  else
    est.ema_denominator = 0.99 * est.ema_denominator + 0.01 * mean_exp;
  ++est.ema_updates;

  // Ascent on joint - log-denominator, as descent on its negation; the
  // denominator in the marginal weights is the moving average, not the
  // batch value.
  const double inv_b = 1.0 / static_cast<double>(b);
  const RMat d_joint = RMat::Constant(b, 1, -inv_b);
  const double log_ema = std::log(est.ema_denominator);
  const RMat d_marg = ((t_marg.array() - log_ema).exp() * inv_b).matrix();
  est.net.zero_grads();
  est.net.backward(tape_j, d_joint);
  est.net.backward(tape_m, d_marg);
  est.net.adam_step(cfg);
  return out;
}

MiEstimate fit_estimator(MineEstimator& est, const RMat& xs, const RMat& ys,
                         int steps, int batch, Rng& batch_rng,
                         const AdamConfig& cfg) {
  check_pair(est, xs, ys);
  if (steps < 0) throw std::invalid_argument("fit_estimator: steps < 0");
  if (batch < 2) throw std::invalid_argument("fit_estimator: batch < 2");
  const auto n = static_cast<uint64_t>(xs.rows());
  RMat xb(batch, xs.cols()), yb(batch, ys.cols());
  for (int s = 0; s < steps; ++s) {
    for (int i = 0; i < batch; ++i) {
      const auto r = static_cast<Eigen::Index>(batch_rng.integer(n));
      xb.row(i) = xs.row(r);
      yb.row(i) = ys.row(r);
    }
    estimator_step(est, xb, yb, cfg);
  }
  return dv_estimate(est, xs, ys);
}

double mine_security_loss(const MiEstimate& i_ab, const MiEstimate& i_ae,
                          double beta) {
  if (!(beta >= 0.0 && beta <= 1.0))
    throw std::invalid_argument("mine_security_loss: beta outside [0, 1]");
  return -(beta * i_ab.value - (1.0 - beta) * i_ae.value);
}

double gaussian_mi_oracle(double rho) {
  if (!(std::abs(rho) < 1.0))
    throw std::domain_error("gaussian_mi_oracle: |rho| must be < 1");
  return -0.5 * std::log1p(-rho * rho);
}

namespace {

// Objective value of one link and its gradient w.r.t. the transmit rows;
// the estimator's parameter gradients are scratch and left zeroed.
double link_value_and_grad(MineEstimator& est, const RMat& xs,
                           const RMat& recv, const RMat& a, RMat* dx) {
  const Eigen::Index b = xs.rows();
  const Eigen::Index dxw = xs.cols(), dyw = recv.cols();
  Network::Tape tape_j, tape_m;
  const RMat t_joint = est.net.forward(concat_cols(xs, recv), &tape_j, true);
  const RMat t_marg =
      est.net.forward(concat_cols(xs, shift_rows(recv)), &tape_m, true);
  const MiEstimate e = estimate_from(t_joint, t_marg);

  const double inv_b = 1.0 / static_cast<double>(b);
  const RMat d_joint = RMat::Constant(b, 1, inv_b);
  // Exact softmax weights of the log-mean-exp term (value gradient, no
  // moving average: the encoder objective is the bound itself).
  const double shift = t_marg.maxCoeff();
  RMat d_marg = (t_marg.array() - shift).exp().matrix();
  d_marg *= -1.0 / d_marg.sum();

  est.net.zero_grads();
  const RMat du = est.net.backward(tape_j, d_joint);
  const RMat dm = est.net.backward(tape_m, d_marg);
  est.net.zero_grads();

  *dx = du.leftCols(dxw) + dm.leftCols(dxw);
  RMat drecv = du.rightCols(dyw);
  // Marginal row i paired recv row (i + 1) mod b; route its grads back.
  drecv.bottomRows(b - 1) += dm.topRows(b - 1).rightCols(dyw);
  drecv.row(0) += dm.row(b - 1).rightCols(dyw);
  *dx += drecv * a;  // recv = tx a^T + const
  return e.value;
}

}  // namespace

double encoder_objective_grads(Network& encoder, MineEstimator& est_ab,
                               MineEstimator& est_ae, const RMat& onehot,
                               const RMat& a_b, const RMat& a_e,
                               const RMat& w_feat, const RMat& nb_feat,
                               const RMat& ne_feat, double beta) {
  if (!(beta >= 0.0 && beta <= 1.0))
    throw std::invalid_argument("encoder_step: beta outside [0, 1]");
  if (onehot.rows() < 2) throw std::invalid_argument("encoder_step: batch < 2");
  Network::Tape tape;
  const RMat x = encoder.forward(onehot, &tape, true);
  const RMat tx = x + w_feat;
  const RMat y = tx * a_b.transpose() + nb_feat;
  const RMat z = tx * a_e.transpose() + ne_feat;

  RMat d_ab, d_ae;
  const double i_ab = link_value_and_grad(est_ab, x, y, a_b, &d_ab);
  const double i_ae = link_value_and_grad(est_ae, x, z, a_e, &d_ae);
  const RMat d_loss = -(beta * d_ab - (1.0 - beta) * d_ae);
  encoder.zero_grads();
  encoder.backward(tape, d_loss);
  return beta * i_ab - (1.0 - beta) * i_ae;
}

double encoder_step(Network& encoder, MineEstimator& est_ab,
                    MineEstimator& est_ae, const RMat& onehot, const RMat& a_b,
                    const RMat& a_e, const RMat& w_feat, const RMat& nb_feat,
                    const RMat& ne_feat, double beta, const AdamConfig& cfg) {
  const double j = encoder_objective_grads(encoder, est_ab, est_ae, onehot,
                                           a_b, a_e, w_feat, nb_feat, ne_feat,
                                           beta);
  encoder.adam_step(cfg);
  return j;
}

double gsc_track(double i_ab, const CMat& g, const FjDesign& design,
                 const CMat& q_s) {
  return gsc(std::max(0.0, i_ab), g, design, q_s).value;
}

namespace {

void validate(const MineFjConfig& c) {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("train_mine_fj: " + what);
  };
  if (c.nt < 1 || c.nr < 1 || c.ne < 1) fail("antenna counts must be >= 1");
  if (c.m < 2) fail("alphabet size must be >= 2");
  if (c.batch < 2 || c.eval_batch < 2) fail("batches must be >= 2");
  if (c.iterations < 1) fail("iterations must be >= 1");
  if (c.est_steps < 1) fail("est_steps must be >= 1");
  if (c.hidden < 1) fail("hidden width must be >= 1");
  if (!(c.beta >= 0.0 && c.beta <= 1.0)) fail("beta outside [0, 1]");
  if (!(c.fj_power_fraction >= 0.0 && c.fj_power_fraction < 1.0))
    fail("fj_power_fraction outside [0, 1)");
  if (!(c.lr > 0.0)) fail("lr must be > 0");
  if (!std::isfinite(c.snr_db)) fail("snr_db must be finite");
}

RMat noise_rows(Eigen::Index batch, int dim_c, double var, Rng& rng) {
  CMat n(dim_c, batch);
  for (Eigen::Index j = 0; j < batch; ++j)
    for (int i = 0; i < dim_c; ++i) n(i, j) = rng.cgaussian(var);
  return realify_rows(n);
}

RMat jamming_rows(Eigen::Index batch, int nt, const FjDesign& design,
                  Rng& rng) {
  if (design.n_fj == 0 || design.sigma_v2 <= 0.0)
    return RMat::Zero(batch, 2 * nt);
  CMat v(design.n_fj, batch);
  for (Eigen::Index j = 0; j < batch; ++j)
    for (int i = 0; i < design.n_fj; ++i)
      v(i, j) = rng.cgaussian(design.sigma_v2);
  return realify_rows(design.z * v);
}

}  // namespace

MineFjResult train_mine_fj(const MineFjConfig& cfg) {
  validate(cfg);
  const double p_total = std::pow(10.0, cfg.snr_db / 10.0);

  Rng ch_rng = Rng::stream(cfg.seed, StreamKind::Channel, 0);
  Rng eve_rng = Rng::stream(cfg.seed, StreamKind::Eavesdropper, 0);
  Rng init_rng = Rng::stream(cfg.seed, StreamKind::Init, 0);
  Rng msg_rng = Rng::stream(cfg.seed, StreamKind::Message, 0);
  Rng noise_rng = Rng::stream(cfg.seed, StreamKind::Noise, 0);
  Rng jam_rng = Rng::stream(cfg.seed, StreamKind::Jamming, 0);
  Rng msg_ho = Rng::stream(cfg.seed, StreamKind::Message, 1);
  Rng noise_ho = Rng::stream(cfg.seed, StreamKind::Noise, 1);
  Rng jam_ho = Rng::stream(cfg.seed, StreamKind::Jamming, 1);

  ChannelDraw draw;
  draw.h = sample_channel(cfg.nt, cfg.nr, ch_rng);
  draw.g = sample_channel(cfg.nt, cfg.ne, eve_rng);

  FjDesign design = design_fj(draw.h, 0.0);
  double p_info = p_total;
  if (design.n_fj > 0 && cfg.fj_power_fraction > 0.0) {
    const double p_fj = cfg.fj_power_fraction * p_total;
    design.sigma_v2 = p_fj / design.n_fj;
    p_info = p_total - p_fj;
  }

  const RMat a_b = realify(draw.h.adjoint());
  const RMat a_e = realify(draw.g.adjoint());

  MineFjResult res{
      .encoder = Network({LayerSpec::dense(cfg.m, 64), LayerSpec::relu(),
                          LayerSpec::dense(64, 2 * cfg.nt),
                          LayerSpec::powernorm(p_info)},
                         init_rng),
      .est_ab = MineEstimator(2 * cfg.nt, 2 * cfg.nr, cfg.hidden, init_rng),
      .est_ae = MineEstimator(2 * cfg.nt, 2 * cfg.ne, cfg.hidden, init_rng),
      .draw = draw,
      .design = design,
      .history = {},
      .best_iteration = -1,
      .best_i_ab = 0.0,
      .raw_stop_iteration = -1,
      .raw_early_stop = false};
  AdamConfig adam;
  adam.lr = cfg.lr;

  const RMat ho_onehot =
      one_hot(sample_labels(cfg.eval_batch, cfg.m, msg_ho), cfg.m);
  const RMat ho_w = jamming_rows(cfg.eval_batch, cfg.nt, design, jam_ho);
  const RMat ho_nb = noise_rows(cfg.eval_batch, cfg.nr, draw.sigma_b2, noise_ho);
  const RMat ho_ne = noise_rows(cfg.eval_batch, cfg.ne, draw.sigma_e2, noise_ho);

  Network best_encoder = res.encoder;
  MineEstimator best_ab = res.est_ab, best_ae = res.est_ae;
  res.history.reserve(cfg.iterations);

  for (int it = 0; it < cfg.iterations; ++it) {
    for (int k = 0; k < cfg.est_steps; ++k) {
      const RMat onehot =
          one_hot(sample_labels(cfg.batch, cfg.m, msg_rng), cfg.m);
      const RMat x = res.encoder.forward(onehot, nullptr, true);
      const RMat tx = x + jamming_rows(cfg.batch, cfg.nt, design, jam_rng);
      const RMat y = tx * a_b.transpose() +
                     noise_rows(cfg.batch, cfg.nr, draw.sigma_b2, noise_rng);
      const RMat z = tx * a_e.transpose() +
                     noise_rows(cfg.batch, cfg.ne, draw.sigma_e2, noise_rng);
      estimator_step(res.est_ab, x, y, adam);
      estimator_step(res.est_ae, x, z, adam);
    }

    const RMat onehot =
        one_hot(sample_labels(cfg.batch, cfg.m, msg_rng), cfg.m);
    encoder_step(res.encoder, res.est_ab, res.est_ae, onehot, a_b, a_e,
                 jamming_rows(cfg.batch, cfg.nt, design, jam_rng),
                 noise_rows(cfg.batch, cfg.nr, draw.sigma_b2, noise_rng),
                 noise_rows(cfg.batch, cfg.ne, draw.sigma_e2, noise_rng),
                 cfg.beta, adam);

    const RMat x = res.encoder.forward(ho_onehot, nullptr, true);
    const RMat tx = x + ho_w;
    const RMat y = tx * a_b.transpose() + ho_nb;
    const RMat z = tx * a_e.transpose() + ho_ne;
    const MiEstimate i_ab = dv_estimate(res.est_ab, x, y);
    const MiEstimate i_ae = dv_estimate(res.est_ae, x, z);
    if (!std::isfinite(i_ab.value) || !std::isfinite(i_ae.value))
      throw NumericalError("train_mine_fj: estimate diverged at iteration " +
                           std::to_string(it));

    const CMat xc = unrealify_rows(x);
    const CMat q_s =
        (xc * xc.adjoint()) / static_cast<double>(cfg.eval_batch);
    MineFjHistoryRow row;
    row.iteration = it;
    row.i_ab = i_ab.value;
    row.i_ae = i_ae.value;
    row.gsc = gsc_track(i_ab.value, draw.g, design, q_s);
    row.loss = mine_security_loss(i_ab, i_ae, cfg.beta);
    res.history.push_back(row);

    if (res.raw_stop_iteration < 0 && it >= 1 &&
        row.i_ab <= res.history[it - 1].i_ab)
      res.raw_stop_iteration = it;
    if (res.best_iteration < 0 || row.i_ab > res.best_i_ab) {
      res.best_iteration = it;
      res.best_i_ab = row.i_ab;
      best_encoder = res.encoder;
      best_ab = res.est_ab;
      best_ae = res.est_ae;
    }
  }

  res.raw_early_stop = res.raw_stop_iteration >= 0;
  res.encoder = std::move(best_encoder);
  res.est_ab = std::move(best_ab);
  res.est_ae = std::move(best_ae);
  return res;
}

}  // namespace fjsec
