#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fjsec/channel.hpp"
#include "fjsec/conventional_fj.hpp"
#include "fjsec/neuralnet.hpp"

namespace fjsec {

// Autoencoder transceiver with a learned friendly-jamming generator.
//
// The transmit chain works on a unit power budget and scales by sqrt(P) at
// the antenna, so one trained model serves every SNR in its training range:
//
//   s       encoder(one-hot ++ CSI features), batch-mean power phi
//   w       drawn in the nullspace of the generator's precoder, E|w|^2 = 1-phi
//   x_unit  (s + w) normalized to batch-mean power 1
//   x       sqrt(p_total) * x_unit
//
// Receivers see y = h^H x + n_b and z = g^H x + n_e with unit-variance noise
// and scale their input by 1/sqrt(p_total) (gain control by the known power
// budget) before the decoder network.
//
// The jamming generator never sees the message: it maps CSI features to a
// precoder t (n_t x n_r) whose nullspace carries the jamming, and it is
// trained on lcd_fj_loss by central finite differences through the secrecy
// machinery (analytic backpropagation through the network itself). The
// generator is residual: its output is a correction added to the matched
// precoder t = h_known, so the aligned solution is its zero function.

struct AefjConfig {
  int nt = 4;  // transmit antennas
  int nr = 2;  // legitimate receive antennas
  int ne = 2;  // eavesdropper antennas
  int m = 16;  // message alphabet (one-hot width)
  CsiMode csi = CsiMode::Perfect;
  double rho_e2 = 0.0;  // CSI error variance (Statistical mode)
  double alpha = 0.5;   // security-loss mix: (1-a) CE_info + a CE_jamming
  double fj_power_fraction = 0.5;  // 1 - phi: power share spent on jamming
  double snr_lo_db = 10.0;         // training SNR range (uniform per batch)
  double snr_hi_db = 25.0;
  int epochs = 10;
  int batches_per_epoch = 100;
  int batch = 256;
  int fj_pretrain_steps = 50;  // generator-only steps before the main loop
  int fj_update_every = 5;     // generator step cadence (in batches)
  int fj_batch = 16;           // channel draws per generator step
  double lr = 1e-3;
  uint64_t seed = 1;
};

// Jamming is active only when the transmitter can aim it: it needs CSI
// (mode != Unknown), spare antennas (n_t > n_r) and a nonzero power share.
// When jamming is off, phi = 1, x = sqrt(p_total) s exactly, and the
// security loss reduces to the plain cross-entropy regardless of alpha.
struct AefjModel {
  AefjConfig cfg;
  Network encoder;
  Network decoder;      // legitimate receiver
  Network eve_decoder;  // same architecture, trained on (message, z) pairs
  std::optional<Network> fj_gen;
  double phi = 1.0;  // information share of the power budget
  int n_fj = 0;      // jamming dimensions (n_t - n_r when active)

  bool fj_enabled() const { return fj_gen.has_value(); }
};

AefjModel make_aefj(const AefjConfig& cfg);

// CSI featurization: [Re vec(h); Im vec(h)] for the encoder/decoders, with
// per-entry phase angles appended for the jamming generator.
RVec csi_features(const CMat& h);
RVec fj_features(const CMat& h);

// Loss for the jamming-precoder generator: the negated rate difference
// r_ae - r_ab the conventional machinery yields when t (n_t x n_r) plays
// the channel estimate's role -- signaling directions from svd(t^H),
// jamming in null(t^H), water-filling over phi * p_total -- evaluated
// against the true channels in draw. Minimizing it maximizes the designed
// secrecy rate; the difference is left unclamped so training has a
// gradient even where the clamped secrecy rate sits at zero.
double lcd_fj_loss(const CMat& t, const ChannelDraw& draw, double phi,
                   double p_total);

// Security loss (1 - alpha) CE(p_s, labels_s) + alpha CE(p_w, labels_w).
// p_s is the decoder's response to information-bearing receptions, p_w its
// response to jamming-only receptions; labels_w are the transmitted labels,
// which are independent of the jamming, so the second term is minimized by
// a maximally uncertain (uniform) response. When alpha == 0 the jamming
// arguments may be empty.
double security_loss(const RMat& p_s, const RMat& p_w,
                     const std::vector<int>& labels_s,
                     const std::vector<int>& labels_w, double alpha);

// Classifier-implied lower bound on the message mutual information:
// log m - ce, clamped to [0, log m].
double theorem1_bound(double ce, int m);

// Plug-in mutual information (nats) of the empirical joint distribution of
// (label, decoded) pairs over an m-ary alphabet.
double plug_in_mi(const std::vector<int>& labels,
                  const std::vector<int>& decoded, int m);

struct EncodeResult {
  RMat x;     // transmit rows (2 n_t realified), batch-mean power p_total
  RMat s_tx;  // information part as transmitted (x = s_tx + w_tx exactly)
  RMat w_tx;  // jamming part as transmitted
};

// Inference-mode transmit chain. csi holds what the transmitter knows per
// message (true h in Perfect mode, h_hat in Statistical mode); in Unknown
// mode it is ignored and may be empty. jamming supplies the nullspace draws.
EncodeResult encode(AefjModel& model, const std::vector<int>& messages,
                    const std::vector<CMat>& csi, double p_total,
                    Rng& jamming);

// Lowest-index argmax per row (explicit tie rule).
std::vector<int> argmax_rows(const RMat& probs);

// Receiver-side decoding: scale y by 1/sqrt(p_total), append CSI features,
// take the decoder's argmax.
std::vector<int> decode(AefjModel& model, const RMat& y,
                        const std::vector<CMat>& csi, double p_total);

struct TrainHistory {
  std::vector<double> train_loss;  // per-epoch mean over batches
  std::vector<double> val_loss;    // per-epoch, fixed held-out batch
};

// Trains encoder + decoder on the security loss, the eavesdropper decoder
// on plain cross-entropy over (message, z) pairs, and the jamming generator
// on lcd_fj_loss at the mid-range SNR. Per-batch SNR is uniform in
// [snr_lo_db, snr_hi_db]. Deterministic per seed; throws NumericalError
// with seed/epoch/batch diagnostics if the loss turns non-finite. Writes a
// checkpoint at the end when checkpoint_path is non-empty. epochs == 0
// returns an empty history and leaves the model untouched.
TrainHistory train(AefjModel& model, const std::string& checkpoint_path = "");

enum class Receiver { Rx, Eve };

struct BlerCurve {
  std::vector<double> snr_db;
  std::vector<double> bler;
  std::vector<size_t> trials;
  std::vector<size_t> errors;
};

// Monte Carlo block-error rate over fresh channel/noise/message draws,
// chunked with per-chunk streams so the result is independent of workers.
// trials >= 1000 per grid point.
BlerCurve eval_bler(const AefjModel& model, const std::vector<double>& snr_db,
                    size_t trials, Receiver at, uint64_t seed,
                    int workers = 1);

// Clamped secrecy rate max(0, -lcd_fj_loss) of the learned design on one
// draw, with the generator's precoder in the channel estimate's role. This
// is the scheme's information-theoretic figure of merit; the learned
// constellation's BLER is measured separately by eval_bler. Requires an
// active jamming generator.
double design_secrecy(AefjModel& model, const ChannelDraw& draw,
                      const CsiState& csi, double p_total);

// Checkpointing: writes path + {".enc", ".dec", ".eve", ".fj"} network files
// plus path + ".json" with the config and derived power split.
void save_aefj(const AefjModel& model, const std::string& path);
AefjModel load_aefj(const std::string& path);

}  // namespace fjsec
