#include "fjsec/aefj.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <utility>

#include "json.hpp"

namespace fjsec {

namespace {

void validate_config(const AefjConfig& cfg) {
  if (cfg.nt < 1 || cfg.nr < 1 || cfg.ne < 1)
    throw std::invalid_argument("aefj: antenna counts must be >= 1");
  if (cfg.m < 2) throw std::invalid_argument("aefj: m must be >= 2");
  if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0))
    throw std::invalid_argument("aefj: alpha must be in [0, 1]");
  if (!(cfg.fj_power_fraction >= 0.0 && cfg.fj_power_fraction < 1.0))
    throw std::invalid_argument("aefj: fj_power_fraction must be in [0, 1)");
  if (cfg.csi == CsiMode::Statistical && !(cfg.rho_e2 >= 0.0))
    throw std::invalid_argument("aefj: rho_e2 must be >= 0");
  if (!(cfg.snr_lo_db <= cfg.snr_hi_db))
    throw std::invalid_argument("aefj: snr_lo_db must be <= snr_hi_db");
  if (cfg.epochs < 0 || cfg.batches_per_epoch < 1)
    throw std::invalid_argument("aefj: bad epoch/batch counts");
  if (cfg.batch < 2)
    throw std::invalid_argument("aefj: batch must be >= 2 (batch statistics)");
  if (cfg.fj_pretrain_steps < 0 || cfg.fj_update_every < 1 || cfg.fj_batch < 2)
    throw std::invalid_argument("aefj: bad jamming-generator schedule");
  if (!(cfg.lr > 0.0)) throw std::invalid_argument("aefj: lr must be > 0");
}

// Transmitter-side CSI feature width; the legitimate and eavesdropping
// decoders always know their own channels (receiver-side estimation), so
// Unknown mode only blanks the encoder features and disables jamming.
int tx_feat_dim(const AefjConfig& cfg) {
  return cfg.csi == CsiMode::Unknown ? 0 : 2 * cfg.nt * cfg.nr;
}

std::vector<LayerSpec> encoder_specs(const AefjConfig& cfg, double phi) {
  const int in = cfg.m + tx_feat_dim(cfg);
  return {LayerSpec::dense(in, 64),  LayerSpec::batchnorm(64),
          LayerSpec::relu(),         LayerSpec::dense(64, 64),
          LayerSpec::batchnorm(64),  LayerSpec::relu(),
          LayerSpec::dense(64, 2 * cfg.nt), LayerSpec::powernorm(phi)};
}

std::vector<LayerSpec> decoder_specs(int rx_dim, int feat_dim, int m) {
  const int in = rx_dim + feat_dim;
  return {LayerSpec::dense(in, 256), LayerSpec::batchnorm(256),
          LayerSpec::relu(),         LayerSpec::dense(256, 128),
          LayerSpec::batchnorm(128), LayerSpec::relu(),
          LayerSpec::dense(128, m),  LayerSpec::softmax()};
}

std::vector<LayerSpec> fj_specs(const AefjConfig& cfg) {
  const int in = 3 * cfg.nt * cfg.nr;
  const int out = 2 * cfg.nt * cfg.nr;
  return {LayerSpec::dense(in, 64), LayerSpec::relu(),
          LayerSpec::dense(64, 64), LayerSpec::relu(),
          LayerSpec::dense(64, out)};
}

// The generator is residual: its output is a correction added entrywise to
// the matched precoder (the known channel, whose Re/Im parts lead the
// feature rows), so aligning the precoder with the channel is the zero
// function rather than a mapping the net must reproduce. No batchnorm:
// corrections train faster without cross-sample coupling in the batch.
RMat emit_precoder_rows(Network& fj_gen, const RMat& fin, Network::Tape* tape,
                        bool training) {
  RMat t = fj_gen.forward(fin, tape, training);
  t += fin.leftCols(t.cols());
  return t;
}

CMat unrealify_precoder(const RVec& row, int nt, int nr) {
  CMat t(nt, nr);
  const Eigen::Index n = static_cast<Eigen::Index>(nt) * nr;
  for (Eigen::Index k = 0; k < n; ++k)
    t(k % nt, k / nt) = cdouble(row(k), row(n + k));
  return t;
}

RMat hcat(const RMat& a, const RMat& b) {
  if (b.cols() == 0) return a;
  if (a.rows() != b.rows())
    throw std::invalid_argument("aefj: feature row-count mismatch");
  RMat out(a.rows(), a.cols() + b.cols());
  out.leftCols(a.cols()) = a;
  out.rightCols(b.cols()) = b;
  return out;
}

// Per-sample channel state for one batch.
struct DrawBatch {
  std::vector<ChannelDraw> draws;
  std::vector<CMat> tx_csi;  // transmitter-known channel (h or h_hat)
  RMat enc_feats;            // batch x tx_feat_dim
  RMat dec_feats;            // batch x 2 nt nr, receiver-known true h
  RMat eve_feats;            // batch x 2 nt ne, true g
  std::vector<RMat> a_b;     // realify(h^H), 2 nr x 2 nt
  std::vector<RMat> a_e;     // realify(g^H), 2 ne x 2 nt
};

DrawBatch sample_batch(const AefjConfig& cfg, int batch, Rng& ch, Rng& ev,
                       Rng& csi_err) {
  DrawBatch b;
  b.draws.reserve(batch);
  b.tx_csi.reserve(batch);
  b.a_b.reserve(batch);
  b.a_e.reserve(batch);
  b.enc_feats.resize(batch, tx_feat_dim(cfg));
  b.dec_feats.resize(batch, 2 * cfg.nt * cfg.nr);
  b.eve_feats.resize(batch, 2 * cfg.nt * cfg.ne);
  for (int i = 0; i < batch; ++i) {
    CMat h = sample_channel(cfg.nt, cfg.nr, ch);
    CMat g = sample_channel(cfg.nt, cfg.ne, ev);
    CMat tx = (cfg.csi == CsiMode::Statistical)
                  ? perturb(h, cfg.rho_e2, csi_err).first
                  : h;
    if (b.enc_feats.cols() > 0)
      b.enc_feats.row(i) = csi_features(tx).transpose();
    b.dec_feats.row(i) = csi_features(h).transpose();
    b.eve_feats.row(i) = csi_features(g).transpose();
    b.a_b.push_back(realify(h.adjoint()));
    b.a_e.push_back(realify(g.adjoint()));
    b.draws.push_back({std::move(h), std::move(g), 1.0, 1.0});
    b.tx_csi.push_back(std::move(tx));
  }
  return b;
}

// Jamming rows (batch x 2 nt) with E per-row power 1 - phi, drawn in the
// nullspace of the generator's per-sample precoder (inference mode).
RMat fj_rows(AefjModel& model, const std::vector<CMat>& tx_csi, Rng& jam) {
  const AefjConfig& cfg = model.cfg;
  const int batch = static_cast<int>(tx_csi.size());
  RMat fin(batch, 3 * cfg.nt * cfg.nr);
  for (int i = 0; i < batch; ++i)
    fin.row(i) = fj_features(tx_csi[static_cast<size_t>(i)]).transpose();
  const RMat t_rows = emit_precoder_rows(*model.fj_gen, fin, nullptr, false);
  RMat w = RMat::Zero(batch, 2 * cfg.nt);
  for (int i = 0; i < batch; ++i) {
    const CMat t = unrealify_precoder(t_rows.row(i), cfg.nt, cfg.nr);
    const FjDesign d = design_fj(t, 0.0);
    if (d.n_fj == 0) continue;  // degenerate precoder: nothing to jam into
    const double sv2 = (1.0 - model.phi) / d.n_fj;
    CVec v(d.n_fj);
    for (int k = 0; k < d.n_fj; ++k) v(k) = jam.cgaussian(sv2);
    w.row(i) = realify_vec(d.z * v).transpose();
  }
  return w;
}

struct UnitNorm {
  double mean_power = 1.0;
  double scale = 1.0;
};

UnitNorm unit_normalize(RMat& x, double target) {
  UnitNorm u;
  u.mean_power = std::max(x.squaredNorm() / static_cast<double>(x.rows()),
                          1e-300);
  u.scale = std::sqrt(target / u.mean_power);
  x *= u.scale;
  return u;
}

// dLoss/dpre for out = scale(pre) * pre; mirrors the PowerNorm backward.
RMat unit_normalize_backward(const UnitNorm& u, const RMat& xpre,
                             const RMat& dout) {
  const double s = (dout.array() * xpre.array()).sum();
  const double batch = static_cast<double>(xpre.rows());
  return u.scale * dout - (u.scale * s / (u.mean_power * batch)) * xpre;
}

// y rows: x rows through per-sample realified channels, plus unit-variance
// complex noise scaled by 1/sqrt(p_total) (everything on the unit power
// scale; receivers divide by the known budget).
RMat receive_rows(const RMat& x, const std::vector<RMat>& a, double p_total,
                  int out_cdim, Rng& noise) {
  RMat y(x.rows(), 2 * out_cdim);
  const double nscale = 1.0 / std::sqrt(p_total);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    CVec n(out_cdim);
    for (int k = 0; k < out_cdim; ++k) n(k) = noise.cgaussian(1.0);
    y.row(i) = x.row(i) * a[static_cast<size_t>(i)].transpose() +
               nscale * realify_vec(n).transpose();
  }
  return y;
}

RMat encoder_input(const RMat& onehot, const DrawBatch& b) {
  return hcat(onehot, b.enc_feats);
}

double mid_power(const AefjConfig& cfg) {
  return std::pow(10.0, 0.5 * (cfg.snr_lo_db + cfg.snr_hi_db) / 10.0);
}

// One finite-difference step of the jamming generator on fresh draws:
// central differences through lcd_fj_loss on the emitted precoder entries,
// analytic backpropagation through the network.
void fj_step(AefjModel& model, Rng& ch, Rng& ev, Rng& csi_err,
             const AdamConfig& adam, double p_total) {
  const AefjConfig& cfg = model.cfg;
  const DrawBatch b = sample_batch(cfg, cfg.fj_batch, ch, ev, csi_err);
  RMat fin(cfg.fj_batch, 3 * cfg.nt * cfg.nr);
  for (int i = 0; i < cfg.fj_batch; ++i)
    fin.row(i) = fj_features(b.tx_csi[static_cast<size_t>(i)]).transpose();
  Network::Tape tape;
  const RMat t_rows = emit_precoder_rows(*model.fj_gen, fin, &tape, true);
  RMat dt(t_rows.rows(), t_rows.cols());
  const double inv_b = 1.0 / static_cast<double>(cfg.fj_batch);
  for (int i = 0; i < cfg.fj_batch; ++i) {
    RVec tr = t_rows.row(i).transpose();
    RVec g(tr.size());
    for (Eigen::Index k = 0; k < tr.size(); ++k) {
      const double step = 1e-5 * std::max(1.0, std::abs(tr(k)));
      RVec tp = tr, tm = tr;
      tp(k) += step;
      tm(k) -= step;
      const double lp =
          lcd_fj_loss(unrealify_precoder(tp, cfg.nt, cfg.nr),
                      b.draws[static_cast<size_t>(i)], model.phi, p_total);
      const double lm =
          lcd_fj_loss(unrealify_precoder(tm, cfg.nt, cfg.nr),
                      b.draws[static_cast<size_t>(i)], model.phi, p_total);
      g(k) = (lp - lm) / (2.0 * step);
    }
    // The rate difference has near-singular spikes (log-det); cap each
    // sample's gradient so one spike cannot swamp Adam's moment estimates.
    const double gn = g.norm();
    if (gn > 10.0) g *= 10.0 / gn;
    dt.row(i) = g.transpose() * inv_b;
  }
  model.fj_gen->backward(tape, dt);
  model.fj_gen->adam_step(adam);
}

// Forward chain shared by training, validation, and evaluation. Training
// mode tapes are optional; when absent every network runs in inference mode.
struct ChainResult {
  RMat s;       // encoder output (batch-mean power phi)
  RMat w;       // jamming rows (zero when inactive)
  RMat x_pre;   // s + w before the transmit normalization
  RMat x_unit;  // unit-power transmit rows
  UnitNorm norm;
};

ChainResult transmit_chain(AefjModel& model, const RMat& onehot,
                           const DrawBatch& b, Rng& jam,
                           Network::Tape* enc_tape) {
  ChainResult r;
  const RMat enc_in = encoder_input(onehot, b);
  r.s = model.encoder.forward(enc_in, enc_tape, enc_tape != nullptr);
  if (model.fj_enabled()) {
    r.w = fj_rows(model, b.tx_csi, jam);
    r.x_pre = r.s + r.w;
    r.x_unit = r.x_pre;
    r.norm = unit_normalize(r.x_unit, 1.0);
  } else {
    r.w = RMat::Zero(r.s.rows(), r.s.cols());
    r.x_pre = r.s;
    r.x_unit = r.s;  // powernorm(1) already holds
  }
  return r;
}

double batch_security_loss(AefjModel& model, const DrawBatch& b,
                           const std::vector<int>& labels, double alpha,
                           double p, Rng& noise, Rng& jam, bool training,
                           Network::Tape* enc_tape, Network::Tape* tape_s,
                           Network::Tape* tape_w, ChainResult* chain_out,
                           RMat* p_s_out, RMat* p_w_out) {
  ChainResult chain = transmit_chain(model, one_hot(labels, model.cfg.m), b,
                                     jam, training ? enc_tape : nullptr);
  const RMat y = receive_rows(chain.x_unit, b.a_b, p, model.cfg.nr, noise);
  RMat p_s = model.decoder.forward(hcat(y, b.dec_feats),
                                   training ? tape_s : nullptr, training);
  RMat p_w;
  if (alpha > 0.0) {
    RMat w_only = chain.w;
    unit_normalize(w_only, 1.0 - model.phi);  // jamming's own power budget
    const RMat y_w = receive_rows(w_only, b.a_b, p, model.cfg.nr, noise);
    p_w = model.decoder.forward(hcat(y_w, b.dec_feats),
                                training ? tape_w : nullptr, training);
  }
  const double loss = security_loss(p_s, p_w, labels, labels, alpha);
  if (chain_out) *chain_out = std::move(chain);
  if (p_s_out) *p_s_out = std::move(p_s);
  if (p_w_out) *p_w_out = std::move(p_w);
  return loss;
}

double train_batch(AefjModel& model, const AdamConfig& adam, double alpha,
                   double p, Rng& ch, Rng& ev, Rng& csi_err, Rng& ms, Rng& ns,
                   Rng& jm) {
  const AefjConfig& cfg = model.cfg;
  const DrawBatch b = sample_batch(cfg, cfg.batch, ch, ev, csi_err);
  const std::vector<int> labels = sample_labels(cfg.batch, cfg.m, ms);

  Network::Tape enc_tape, tape_s, tape_w;
  ChainResult chain;
  RMat p_s, p_w;
  const double loss =
      batch_security_loss(model, b, labels, alpha, p, ns, jm, true, &enc_tape,
                          &tape_s, &tape_w, &chain, &p_s, &p_w);

  // Eavesdropper decoder: plain cross-entropy on the full transmission.
  const RMat z = receive_rows(chain.x_unit, b.a_e, p, cfg.ne, ns);
  Network::Tape tape_e;
  RMat p_e =
      model.eve_decoder.forward(hcat(z, b.eve_feats), &tape_e, true);
  model.eve_decoder.backward(tape_e, softmax_ce_grad(p_e, labels));
  model.eve_decoder.adam_step(adam);

  // Decoder: both passes accumulate before one step. Only the information
  // pass feeds the encoder; the jamming-only pass's input gradient is
  // dropped so the jamming draw never steers the constellation.
  const RMat d_s = (1.0 - alpha) * softmax_ce_grad(p_s, labels);
  const RMat dy_full = model.decoder.backward(tape_s, d_s);
  if (alpha > 0.0)
    model.decoder.backward(tape_w, alpha * softmax_ce_grad(p_w, labels));
  model.decoder.adam_step(adam);

  // Encoder: through the per-sample channel and transmit normalization.
  RMat dx(cfg.batch, 2 * cfg.nt);
  for (int i = 0; i < cfg.batch; ++i)
    dx.row(i) =
        dy_full.row(i).head(2 * cfg.nr) * b.a_b[static_cast<size_t>(i)];
  const RMat ds = model.fj_enabled()
                      ? unit_normalize_backward(chain.norm, chain.x_pre, dx)
                      : dx;
  model.encoder.backward(enc_tape, ds);
  model.encoder.adam_step(adam);
  return loss;
}

std::string csi_name(CsiMode mode) {
  switch (mode) {
    case CsiMode::Perfect: return "perfect";
    case CsiMode::Statistical: return "statistical";
    case CsiMode::Unknown: return "unknown";
  }
  throw std::logic_error("csi_name: bad mode");
}

CsiMode csi_from_name(const std::string& name) {
  if (name == "perfect") return CsiMode::Perfect;
  if (name == "statistical") return CsiMode::Statistical;
  if (name == "unknown") return CsiMode::Unknown;
  throw std::invalid_argument("load_aefj: bad csi mode '" + name + "'");
}

}  // namespace

AefjModel make_aefj(const AefjConfig& cfg) {
  validate_config(cfg);
  const bool fj_on = cfg.csi != CsiMode::Unknown && cfg.nt > cfg.nr &&
                     cfg.fj_power_fraction > 0.0;
  const double phi = fj_on ? 1.0 - cfg.fj_power_fraction : 1.0;
  Rng enc_rng = Rng::stream(cfg.seed, StreamKind::Init, 0);
  Rng dec_rng = Rng::stream(cfg.seed, StreamKind::Init, 1);
  Rng eve_rng = Rng::stream(cfg.seed, StreamKind::Init, 2);
  AefjModel model{
      cfg,
      Network(encoder_specs(cfg, phi), enc_rng),
      Network(decoder_specs(2 * cfg.nr, 2 * cfg.nt * cfg.nr, cfg.m), dec_rng),
      Network(decoder_specs(2 * cfg.ne, 2 * cfg.nt * cfg.ne, cfg.m), eve_rng),
      std::nullopt,
      phi,
      fj_on ? cfg.nt - cfg.nr : 0};
  if (fj_on) {
    Rng fj_rng = Rng::stream(cfg.seed, StreamKind::Init, 3);
    model.fj_gen.emplace(fj_specs(cfg), fj_rng);
  }
  return model;
}

RVec csi_features(const CMat& h) {
  const Eigen::Index n = h.size();
  RVec f(2 * n);
  const Eigen::Map<const CVec> v(h.data(), n);
  f.head(n) = v.real();
  f.tail(n) = v.imag();
  return f;
}

RVec fj_features(const CMat& h) {
  const Eigen::Index n = h.size();
  RVec f(3 * n);
  f.head(2 * n) = csi_features(h);
  const Eigen::Map<const CVec> v(h.data(), n);
  for (Eigen::Index i = 0; i < n; ++i) f(2 * n + i) = std::arg(v(i));
  return f;
}

double lcd_fj_loss(const CMat& t, const ChannelDraw& draw, double phi,
                   double p_total) {
  if (t.rows() != draw.h.rows() || t.cols() != draw.h.cols())
    throw std::invalid_argument("lcd_fj_loss: precoder shape must match h");
  if (!(p_total > 0.0))
    throw std::invalid_argument("lcd_fj_loss: p_total must be > 0");
  if (!(phi >= 0.0 && phi <= 1.0))
    throw std::invalid_argument("lcd_fj_loss: phi must be in [0, 1]");
  if (!(t.cwiseAbs().maxCoeff() > 0.0))
    throw std::invalid_argument("lcd_fj_loss: zero precoder");
  // Same assembly as the conventional power-split evaluation, but on the
  // unclamped rate difference: the clamped secrecy rate is identically
  // zero around poor precoders, which would leave the generator's
  // finite-difference training without a gradient.
  const SvdResult dec = svd(t.adjoint());
  RVec gains(dec.sigma.size());
  for (Eigen::Index i = 0; i < gains.size(); ++i)
    gains(i) = dec.sigma(i) * dec.sigma(i);
  const double tol = 1e-10;
  const int n_fj =
      static_cast<int>(t.rows()) -
      static_cast<int>((dec.sigma.array() > tol * dec.sigma(0)).count());
  const double p_info = phi * p_total;
  const double sigma_v2 =
      n_fj > 0 ? (1.0 - phi) * p_total / static_cast<double>(n_fj) : 0.0;
  const FjDesign design = design_fj(t, sigma_v2, tol);
  PowerAllocation alloc = p_info > 0.0 ? waterfill(gains, p_info)
                                       : zero_allocation(gains.size());
  alloc.p_total = p_total;
  const CsiState as_estimate{CsiMode::Statistical, 0.0, t};
  const SecrecySample s = secrecy_rate_imcsi(draw, as_estimate, alloc, design);
  return s.r_ae - s.r_ab;
}

double security_loss(const RMat& p_s, const RMat& p_w,
                     const std::vector<int>& labels_s,
                     const std::vector<int>& labels_w, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw std::invalid_argument("security_loss: alpha must be in [0, 1]");
  const double ce_s = cross_entropy(p_s, labels_s);
  if (alpha == 0.0) return ce_s;
  const double ce_w = cross_entropy(p_w, labels_w);
  return (1.0 - alpha) * ce_s + alpha * ce_w;
}

double theorem1_bound(double ce, int m) {
  if (m < 2) throw std::invalid_argument("theorem1_bound: m must be >= 2");
  if (!(ce >= 0.0))
    throw std::invalid_argument("theorem1_bound: ce must be >= 0");
  const double logm = std::log(static_cast<double>(m));
  return std::clamp(logm - ce, 0.0, logm);
}

double plug_in_mi(const std::vector<int>& labels,
                  const std::vector<int>& decoded, int m) {
  if (m < 2) throw std::invalid_argument("plug_in_mi: m must be >= 2");
  if (labels.size() != decoded.size() || labels.empty())
    throw std::invalid_argument("plug_in_mi: label/decode size mismatch");
  RMat joint = RMat::Zero(m, m);
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= m || decoded[i] < 0 || decoded[i] >= m)
      throw std::invalid_argument("plug_in_mi: symbol out of range");
    joint(labels[i], decoded[i]) += 1.0;
  }
  const double n = static_cast<double>(labels.size());
  const RVec row = joint.rowwise().sum();
  const RVec col = joint.colwise().sum().transpose();
  double mi = 0.0;
  for (int a = 0; a < m; ++a)
    for (int bsym = 0; bsym < m; ++bsym)
      if (joint(a, bsym) > 0.0)
        mi += joint(a, bsym) / n *
              std::log(joint(a, bsym) * n / (row(a) * col(bsym)));
  return mi;
}

EncodeResult encode(AefjModel& model, const std::vector<int>& messages,
                    const std::vector<CMat>& csi, double p_total,
                    Rng& jamming) {
  const AefjConfig& cfg = model.cfg;
  if (messages.empty()) throw std::invalid_argument("encode: empty batch");
  if (!(p_total > 0.0))
    throw std::invalid_argument("encode: p_total must be > 0");
  const bool need_csi = cfg.csi != CsiMode::Unknown;
  if (need_csi) {
    if (csi.size() != messages.size())
      throw std::invalid_argument("encode: one csi matrix per message");
    for (const CMat& h : csi)
      if (h.rows() != cfg.nt || h.cols() != cfg.nr)
        throw std::invalid_argument("encode: csi shape mismatch");
  }
  const RMat onehot = one_hot(messages, cfg.m);
  RMat enc_in(onehot.rows(), cfg.m + tx_feat_dim(cfg));
  enc_in.leftCols(cfg.m) = onehot;
  if (need_csi)
    for (size_t i = 0; i < csi.size(); ++i)
      enc_in.row(static_cast<Eigen::Index>(i)).tail(tx_feat_dim(cfg)) =
          csi_features(csi[i]).transpose();
  const RMat s = model.encoder.forward(enc_in, nullptr, false);

  EncodeResult r;
  const double root_p = std::sqrt(p_total);
  if (model.fj_enabled()) {
    const RMat w = fj_rows(model, csi, jamming);
    RMat x_unit = s + w;
    const UnitNorm u = unit_normalize(x_unit, 1.0);
    const double c = u.scale * root_p;
    r.s_tx = c * s;
    r.w_tx = c * w;
    r.x = r.s_tx + r.w_tx;
  } else {
    r.s_tx = root_p * s;
    r.w_tx = RMat::Zero(s.rows(), s.cols());
    r.x = r.s_tx;
  }
  return r;
}

std::vector<int> argmax_rows(const RMat& probs) {
  if (probs.cols() == 0) throw std::invalid_argument("argmax_rows: no columns");
  std::vector<int> out(static_cast<size_t>(probs.rows()));
  for (Eigen::Index r = 0; r < probs.rows(); ++r) {
    int best = 0;
    for (int c = 1; c < probs.cols(); ++c)
      if (probs(r, c) > probs(r, best)) best = c;
    out[static_cast<size_t>(r)] = best;
  }
  return out;
}

std::vector<int> decode(AefjModel& model, const RMat& y,
                        const std::vector<CMat>& csi, double p_total) {
  const AefjConfig& cfg = model.cfg;
  if (y.cols() != 2 * cfg.nr)
    throw std::invalid_argument("decode: y must have 2 n_r columns");
  if (csi.size() != static_cast<size_t>(y.rows()))
    throw std::invalid_argument("decode: one csi matrix per row");
  if (!(p_total > 0.0))
    throw std::invalid_argument("decode: p_total must be > 0");
  RMat dec_in(y.rows(), y.cols() + 2 * cfg.nt * cfg.nr);
  dec_in.leftCols(y.cols()) = y / std::sqrt(p_total);
  for (size_t i = 0; i < csi.size(); ++i) {
    if (csi[i].rows() != cfg.nt || csi[i].cols() != cfg.nr)
      throw std::invalid_argument("decode: csi shape mismatch");
    dec_in.row(static_cast<Eigen::Index>(i)).tail(2 * cfg.nt * cfg.nr) =
        csi_features(csi[i]).transpose();
  }
  return argmax_rows(model.decoder.infer(dec_in));
}

TrainHistory train(AefjModel& model, const std::string& checkpoint_path) {
  const AefjConfig& cfg = model.cfg;
  validate_config(cfg);
  TrainHistory hist;
  if (cfg.epochs == 0) {
    if (!checkpoint_path.empty()) save_aefj(model, checkpoint_path);
    return hist;
  }

  const AdamConfig adam{cfg.lr, 0.9, 0.999, 1e-8};
  const double alpha = model.fj_enabled() ? cfg.alpha : 0.0;
  const double p_mid = mid_power(cfg);

  Rng ch = Rng::stream(cfg.seed, StreamKind::Channel, 0);
  Rng ev = Rng::stream(cfg.seed, StreamKind::Eavesdropper, 0);
  Rng csi_err = Rng::stream(cfg.seed, StreamKind::CsiError, 0);
  Rng ms = Rng::stream(cfg.seed, StreamKind::Message, 0);
  Rng ns = Rng::stream(cfg.seed, StreamKind::Noise, 0);
  Rng jm = Rng::stream(cfg.seed, StreamKind::Jamming, 0);
  Rng snr_rng = Rng::stream(cfg.seed, StreamKind::Generic, 0);
  Rng fj_ch = Rng::stream(cfg.seed, StreamKind::Channel, 2);
  Rng fj_ev = Rng::stream(cfg.seed, StreamKind::Eavesdropper, 2);
  Rng fj_csi = Rng::stream(cfg.seed, StreamKind::CsiError, 2);

  // Fixed validation batch at the mid-range SNR; its noise and jamming
  // streams are re-seeded per evaluation so epochs see identical draws.
  Rng vch = Rng::stream(cfg.seed, StreamKind::Channel, 1);
  Rng vev = Rng::stream(cfg.seed, StreamKind::Eavesdropper, 1);
  Rng vcsi = Rng::stream(cfg.seed, StreamKind::CsiError, 1);
  Rng vms = Rng::stream(cfg.seed, StreamKind::Message, 1);
  const DrawBatch vb = sample_batch(cfg, cfg.batch, vch, vev, vcsi);
  const std::vector<int> vlabels = sample_labels(cfg.batch, cfg.m, vms);

  if (model.fj_enabled())
    for (int step = 0; step < cfg.fj_pretrain_steps; ++step)
      fj_step(model, fj_ch, fj_ev, fj_csi, adam, p_mid);

  long long batch_counter = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double loss_sum = 0.0;
    for (int bi = 0; bi < cfg.batches_per_epoch; ++bi, ++batch_counter) {
      const double snr_db =
          cfg.snr_lo_db + (cfg.snr_hi_db - cfg.snr_lo_db) * snr_rng.uniform();
      const double p = std::pow(10.0, snr_db / 10.0);
      const double loss =
          train_batch(model, adam, alpha, p, ch, ev, csi_err, ms, ns, jm);
      if (!std::isfinite(loss))
        throw NumericalError("aefj train: non-finite loss at epoch " +
                             std::to_string(epoch) + " batch " +
                             std::to_string(bi) + " (seed " +
                             std::to_string(cfg.seed) + ")");
      loss_sum += loss;
      if (model.fj_enabled() && batch_counter % cfg.fj_update_every == 0)
        fj_step(model, fj_ch, fj_ev, fj_csi, adam, p_mid);
    }
    hist.train_loss.push_back(loss_sum / cfg.batches_per_epoch);

    Rng vns = Rng::stream(cfg.seed, StreamKind::Noise, 1);
    Rng vjm = Rng::stream(cfg.seed, StreamKind::Jamming, 1);
    const double vloss =
        batch_security_loss(model, vb, vlabels, alpha, p_mid, vns, vjm, false,
                            nullptr, nullptr, nullptr, nullptr, nullptr,
                            nullptr);
    if (!std::isfinite(vloss))
      throw NumericalError("aefj train: non-finite validation loss at epoch " +
                           std::to_string(epoch) + " (seed " +
                           std::to_string(cfg.seed) + ")");
    hist.val_loss.push_back(vloss);
  }
  if (!checkpoint_path.empty()) save_aefj(model, checkpoint_path);
  return hist;
}

BlerCurve eval_bler(const AefjModel& model, const std::vector<double>& snr_db,
                    size_t trials, Receiver at, uint64_t seed, int workers) {
  const AefjConfig& cfg = model.cfg;
  if (snr_db.empty()) throw std::invalid_argument("eval_bler: empty grid");
  if (trials < 1000)
    throw std::invalid_argument("eval_bler: trials must be >= 1000");
  constexpr size_t kChunk = 512;
  const size_t n_chunks = (trials + kChunk - 1) / kChunk;
  BlerCurve curve;
  curve.snr_db = snr_db;
  curve.bler.resize(snr_db.size());
  curve.trials.assign(snr_db.size(), trials);
  curve.errors.resize(snr_db.size());
  for (size_t pi = 0; pi < snr_db.size(); ++pi) {
    const double p = std::pow(10.0, snr_db[pi] / 10.0);
    std::vector<size_t> errs(n_chunks, 0);
    parallel_for(n_chunks, workers, [&](size_t c) {
      const size_t begin = c * kChunk;
      const int n = static_cast<int>(std::min(kChunk, trials - begin));
      const uint64_t idx = pi * n_chunks + c;
      AefjModel local = model;  // inference-only copy per chunk
      Rng ch = Rng::stream(seed, StreamKind::Channel, idx);
      Rng ev = Rng::stream(seed, StreamKind::Eavesdropper, idx);
      Rng csi_err = Rng::stream(seed, StreamKind::CsiError, idx);
      Rng ms = Rng::stream(seed, StreamKind::Message, idx);
      Rng ns = Rng::stream(seed, StreamKind::Noise, idx);
      Rng jm = Rng::stream(seed, StreamKind::Jamming, idx);
      const DrawBatch b = sample_batch(cfg, n, ch, ev, csi_err);
      const std::vector<int> labels = sample_labels(n, cfg.m, ms);
      ChainResult chain = transmit_chain(local, one_hot(labels, cfg.m), b, jm,
                                         nullptr);
      RMat probs;
      if (at == Receiver::Rx) {
        const RMat y = receive_rows(chain.x_unit, b.a_b, p, cfg.nr, ns);
        probs = local.decoder.infer(hcat(y, b.dec_feats));
      } else {
        const RMat z = receive_rows(chain.x_unit, b.a_e, p, cfg.ne, ns);
        probs = local.eve_decoder.infer(hcat(z, b.eve_feats));
      }
      const std::vector<int> decoded = argmax_rows(probs);
      size_t bad = 0;
      for (int i = 0; i < n; ++i)
        if (decoded[static_cast<size_t>(i)] != labels[static_cast<size_t>(i)])
          ++bad;
      errs[c] = bad;
    });
    size_t total = 0;
    for (size_t e : errs) total += e;
    curve.errors[pi] = total;
    curve.bler[pi] = static_cast<double>(total) / static_cast<double>(trials);
  }
  return curve;
}

double design_secrecy(AefjModel& model, const ChannelDraw& draw,
                      const CsiState& csi, double p_total) {
  if (!model.fj_enabled())
    throw std::logic_error("design_secrecy: jamming generator inactive");
  const AefjConfig& cfg = model.cfg;
  const CMat& known =
      (csi.mode == CsiMode::Statistical) ? csi.h_hat : draw.h;
  if (known.rows() != cfg.nt || known.cols() != cfg.nr)
    throw std::invalid_argument("design_secrecy: csi shape mismatch");
  RMat fin(1, 3 * cfg.nt * cfg.nr);
  fin.row(0) = fj_features(known).transpose();
  const RMat t_row = emit_precoder_rows(*model.fj_gen, fin, nullptr, false);
  const CMat t = unrealify_precoder(t_row.row(0), cfg.nt, cfg.nr);
  return std::max(0.0, -lcd_fj_loss(t, draw, model.phi, p_total));
}

void save_aefj(const AefjModel& model, const std::string& path) {
  model.encoder.save(path + ".enc");
  model.decoder.save(path + ".dec");
  model.eve_decoder.save(path + ".eve");
  if (model.fj_enabled()) model.fj_gen->save(path + ".fj");
  const AefjConfig& cfg = model.cfg;
  nlohmann::json j;
  j["format"] = "aefj-checkpoint-v1";
  j["nt"] = cfg.nt;
  j["nr"] = cfg.nr;
  j["ne"] = cfg.ne;
  j["m"] = cfg.m;
  j["csi"] = csi_name(cfg.csi);
  j["rho_e2"] = cfg.rho_e2;
  j["alpha"] = cfg.alpha;
  j["fj_power_fraction"] = cfg.fj_power_fraction;
  j["snr_lo_db"] = cfg.snr_lo_db;
  j["snr_hi_db"] = cfg.snr_hi_db;
  j["epochs"] = cfg.epochs;
  j["batches_per_epoch"] = cfg.batches_per_epoch;
  j["batch"] = cfg.batch;
  j["fj_pretrain_steps"] = cfg.fj_pretrain_steps;
  j["fj_update_every"] = cfg.fj_update_every;
  j["fj_batch"] = cfg.fj_batch;
  j["lr"] = cfg.lr;
  j["seed"] = cfg.seed;
  j["phi"] = model.phi;
  j["n_fj"] = model.n_fj;
  j["fj_enabled"] = model.fj_enabled();
  std::ofstream os(path + ".json", std::ios::trunc);
  os << j.dump(2) << "\n";
  if (!os) throw std::runtime_error("save_aefj: cannot write " + path);
}

AefjModel load_aefj(const std::string& path) {
  std::ifstream is(path + ".json");
  if (!is) throw std::runtime_error("load_aefj: cannot read " + path);
  nlohmann::json j;
  is >> j;
  if (j.value("format", "") != "aefj-checkpoint-v1")
    throw std::runtime_error("load_aefj: unrecognized checkpoint format");
  AefjConfig cfg;
  cfg.nt = j.at("nt").get<int>();
  cfg.nr = j.at("nr").get<int>();
  cfg.ne = j.at("ne").get<int>();
  cfg.m = j.at("m").get<int>();
  cfg.csi = csi_from_name(j.at("csi").get<std::string>());
  cfg.rho_e2 = j.at("rho_e2").get<double>();
  cfg.alpha = j.at("alpha").get<double>();
  cfg.fj_power_fraction = j.at("fj_power_fraction").get<double>();
  cfg.snr_lo_db = j.at("snr_lo_db").get<double>();
  cfg.snr_hi_db = j.at("snr_hi_db").get<double>();
  cfg.epochs = j.at("epochs").get<int>();
  cfg.batches_per_epoch = j.at("batches_per_epoch").get<int>();
  cfg.batch = j.at("batch").get<int>();
  cfg.fj_pretrain_steps = j.at("fj_pretrain_steps").get<int>();
  cfg.fj_update_every = j.at("fj_update_every").get<int>();
  cfg.fj_batch = j.at("fj_batch").get<int>();
  cfg.lr = j.at("lr").get<double>();
  cfg.seed = j.at("seed").get<uint64_t>();
  AefjModel model{cfg,
                  Network::load(path + ".enc"),
                  Network::load(path + ".dec"),
                  Network::load(path + ".eve"),
                  std::nullopt,
                  j.at("phi").get<double>(),
                  j.at("n_fj").get<int>()};
  if (j.at("fj_enabled").get<bool>())
    model.fj_gen = Network::load(path + ".fj");
  return model;
}

}  // namespace fjsec
