#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fjsec/channel.hpp"
#include "fjsec/neuralnet.hpp"

namespace fjsec {

// Experiment runner: strict JSON configuration, Monte Carlo orchestration,
// CSV/JSON emission. One run writes results.csv + manifest.json (and
// history.csv for experiments that train) into the output directory;
// identical config + seed reproduces results.csv byte for byte, so only the
// manifest carries timestamps.

enum class Experiment {
  SecrecyVsSnr,        // mean secrecy rate over an SNR grid
  BlerVsSnr,           // trained transceiver block-error rates (rx and eve)
  SecrecyVsBeta,       // converged MI-objective proxies across beta weights
  MineConvergence,     // per-iteration curves of one MI-trained run
  SecrecyVsNt,         // mean secrecy across transmit-antenna counts
  SecrecyBlerTradeoff, // secrecy and BLER across security-loss weights
  FlopsReport,         // deployment-stage FLOP count of the published stack
};

enum class Scheme { ConventionalExhaustive, Aefj, MineFj };

// Optional "train" sub-config; unset fields fall back to the scheme's
// library defaults (AefjConfig / MineFjConfig). The harness only widens the
// SNR training range to span the experiment grid when lo/hi are unset.
struct TrainSpec {
  std::optional<double> alpha;              // security-loss jamming weight
  std::optional<std::vector<double>> alphas;  // secrecy_bler_tradeoff sweep
  std::optional<double> fj_power_fraction;
  std::optional<int> epochs, batches_per_epoch, batch, m;
  std::optional<double> lr, snr_lo_db, snr_hi_db;
  std::optional<int> fj_pretrain_steps, fj_update_every, fj_batch;
  std::optional<double> beta;               // MI-objective weight
  std::optional<std::vector<double>> betas; // secrecy_vs_beta sweep
  std::optional<int> iterations, est_steps, hidden, eval_batch;
  std::optional<int> mine_runs;  // independent runs averaged per grid point
};

struct ExperimentConfig {
  Experiment experiment = Experiment::SecrecyVsSnr;
  Scheme scheme = Scheme::ConventionalExhaustive;  // run mode
  std::vector<Scheme> schemes;                     // compare mode
  int nt = 10, nr = 4, ne = 4;
  std::vector<double> snr_grid_db;
  CsiMode csi_mode = CsiMode::Perfect;
  double rho_e2 = 0.0;
  int mc_draws = 10000;
  uint64_t seed = 1;
  std::vector<int> nt_list;  // secrecy_vs_nt sweep
  int phi_grid_steps = 101;  // exhaustive power-split resolution
  TrainSpec train;
};

// Config rejection with the offending field's JSON path in `field`.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message);
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Strict parse + validation of a config document: unknown keys are
// rejected, cross-field rules enforced (scheme/experiment compatibility,
// strictly increasing snr grid, mc_draws >= 100, ...). parse_compare_config
// expects "schemes" (a list) instead of "scheme".
ExperimentConfig parse_run_config(const std::string& json_text);
ExperimentConfig parse_compare_config(const std::string& json_text);

// A fully populated example config; re-parses under parse_run_config.
std::string schema_example();

const char* experiment_name(Experiment e);
const char* scheme_name(Scheme s);

// Executes the experiment and writes results.csv + manifest.json (and
// history.csv when the experiment trains) under out_dir, creating it if
// needed. On a mid-run failure the partial CSVs are removed, the manifest
// records status "failed" with the error, and the exception is rethrown.
void run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                    int workers = 1);

// Shared-config comparison: one mean-secrecy row per (scheme, snr), all
// schemes evaluated on the same per-point channel draws (paired seeds).
// Only valid for the secrecy_vs_snr experiment.
void compare_schemes(const ExperimentConfig& cfg, const std::string& out_dir,
                     int workers = 1);

// FNV-1a 64-bit digest of a file's bytes, as 16 hex digits (manifest
// entries for the emitted CSVs).
std::string file_digest_hex(const std::string& path);

// The dense stack counted by the published complexity table
// (16 -> 64 -> 8 -> 64 -> 16); feed to flops() for the report.
std::vector<LayerSpec> published_flops_stack();

}  // namespace fjsec
