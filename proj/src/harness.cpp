#include "fjsec/harness.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fjsec/aefj.hpp"
#include "fjsec/conventional_fj.hpp"
#include "fjsec/mine.hpp"
#include "json.hpp"

namespace fjsec {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

// Seed-mix indices separating the harness's own stream families from the
// model-internal ones (which derive from the master seed directly).
constexpr uint64_t kEnsembleMix = 1;  // evaluation channel ensembles
constexpr uint64_t kBlerMix = 2;      // block-error Monte Carlo
constexpr uint64_t kMineMix = 3;      // per-run MI-training seeds (base)

constexpr const char* kResultsSchema = "fjsim-results-v1";
constexpr const char* kHistorySchema = "fjsim-history-v1";
constexpr const char* kToolVersion = "fjsec 0.1.0";

const std::pair<Experiment, const char*> kExperimentNames[] = {
    {Experiment::SecrecyVsSnr, "secrecy_vs_snr"},
    {Experiment::BlerVsSnr, "bler_vs_snr"},
    {Experiment::SecrecyVsBeta, "secrecy_vs_beta"},
    {Experiment::MineConvergence, "mine_convergence"},
    {Experiment::SecrecyVsNt, "secrecy_vs_nt"},
    {Experiment::SecrecyBlerTradeoff, "secrecy_bler_tradeoff"},
    {Experiment::FlopsReport, "flops_report"},
};

const std::pair<Scheme, const char*> kSchemeNames[] = {
    {Scheme::ConventionalExhaustive, "conventional_exhaustive"},
    {Scheme::Aefj, "aefj"},
    {Scheme::MineFj, "mine_fj"},
};

std::optional<Experiment> experiment_from(const std::string& name) {
  for (const auto& [e, n] : kExperimentNames)
    if (name == n) return e;
  return std::nullopt;
}

std::optional<Scheme> scheme_from(const std::string& name) {
  for (const auto& [s, n] : kSchemeNames)
    if (name == n) return s;
  return std::nullopt;
}

const char* csi_mode_name(CsiMode m) {
  switch (m) {
    case CsiMode::Perfect: return "perfect";
    case CsiMode::Statistical: return "statistical";
    case CsiMode::Unknown: return "unknown";
  }
  throw std::logic_error("csi_mode_name: bad mode");
}

std::optional<CsiMode> csi_mode_from(const std::string& name) {
  if (name == "perfect") return CsiMode::Perfect;
  if (name == "statistical") return CsiMode::Statistical;
  if (name == "unknown") return CsiMode::Unknown;
  return std::nullopt;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string fmt_g(double v) {  // short form for series labels
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

double db_to_power(double snr_db) { return std::pow(10.0, snr_db / 10.0); }

std::string iso_utc() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// ---------------------------------------------------------------- parsing

const json& require_key(const json& obj, const std::string& path,
                        const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end())
    throw ConfigError(path.empty() ? key : path + "." + key, "required key");
  return *it;
}

void reject_unknown(const json& obj, const std::string& path,
                    const std::set<std::string>& allowed) {
  for (const auto& item : obj.items())
    if (allowed.count(item.key()) == 0)
      throw ConfigError(path.empty() ? item.key() : path + "." + item.key(),
                        "unknown key (strict mode)");
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number())
    throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
  return v;
}

long long get_integer(const json& j, const std::string& path) {
  if (!j.is_number_integer() && !j.is_number_unsigned())
    throw ConfigError(path, "expected an integer");
  return j.get<long long>();
}

int get_int_min(const json& j, const std::string& path, int min_value) {
  const long long v = get_integer(j, path);
  if (v < min_value)
    throw ConfigError(path, "must be >= " + std::to_string(min_value));
  if (v > std::numeric_limits<int>::max())
    throw ConfigError(path, "out of range");
  return static_cast<int>(v);
}

double get_unit_interval(const json& j, const std::string& path) {
  const double v = get_number(j, path);
  if (v < 0.0 || v > 1.0) throw ConfigError(path, "must be in [0, 1]");
  return v;
}

std::vector<double> get_number_list(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty())
    throw ConfigError(path, "expected a non-empty array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (size_t i = 0; i < j.size(); ++i)
    out.push_back(get_number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

bool train_spec_set(const TrainSpec& t) {
  return t.alpha || t.alphas || t.fj_power_fraction || t.epochs ||
         t.batches_per_epoch || t.batch || t.m || t.lr || t.snr_lo_db ||
         t.snr_hi_db || t.fj_pretrain_steps || t.fj_update_every ||
         t.fj_batch || t.beta || t.betas || t.iterations || t.est_steps ||
         t.hidden || t.eval_batch || t.mine_runs;
}

// Keys meaningful for each scheme's training sub-config.
std::set<std::string> train_keys_for(Scheme s, Experiment e) {
  std::set<std::string> keys;
  if (s == Scheme::Aefj) {
    keys = {"alpha",          "fj_power_fraction", "epochs",
            "batches_per_epoch", "batch",          "lr",
            "m",              "snr_lo_db",         "snr_hi_db",
            "fj_pretrain_steps", "fj_update_every", "fj_batch"};
    if (e == Experiment::SecrecyBlerTradeoff) keys.insert("alphas");
  } else if (s == Scheme::MineFj) {
    keys = {"beta",       "iterations", "batch",      "est_steps", "hidden",
            "m",          "fj_power_fraction",        "eval_batch", "lr",
            "mine_runs"};
    if (e == Experiment::SecrecyVsBeta) keys.insert("betas");
  }
  return keys;
}

TrainSpec parse_train(const json& j, const std::string& path,
                      const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(path, "expected an object");
  reject_unknown(j, path, allowed);
  TrainSpec t;
  const auto p = [&](const char* k) { return path + "." + k; };
  if (j.contains("alpha")) t.alpha = get_unit_interval(j["alpha"], p("alpha"));
  if (j.contains("alphas")) {
    std::vector<double> v = get_number_list(j["alphas"], p("alphas"));
    for (double a : v)
      if (a < 0.0 || a > 1.0)
        throw ConfigError(p("alphas"), "entries must be in [0, 1]");
    t.alphas = std::move(v);
  }
  if (j.contains("fj_power_fraction"))
    t.fj_power_fraction =
        get_unit_interval(j["fj_power_fraction"], p("fj_power_fraction"));
  if (j.contains("epochs")) t.epochs = get_int_min(j["epochs"], p("epochs"), 0);
  if (j.contains("batches_per_epoch"))
    t.batches_per_epoch =
        get_int_min(j["batches_per_epoch"], p("batches_per_epoch"), 1);
  if (j.contains("batch")) t.batch = get_int_min(j["batch"], p("batch"), 1);
  if (j.contains("m")) t.m = get_int_min(j["m"], p("m"), 2);
  if (j.contains("lr")) {
    const double lr = get_number(j["lr"], p("lr"));
    if (!(lr > 0.0)) throw ConfigError(p("lr"), "must be > 0");
    t.lr = lr;
  }
  if (j.contains("snr_lo_db")) t.snr_lo_db = get_number(j["snr_lo_db"], p("snr_lo_db"));
  if (j.contains("snr_hi_db")) t.snr_hi_db = get_number(j["snr_hi_db"], p("snr_hi_db"));
  if (t.snr_lo_db && t.snr_hi_db && *t.snr_lo_db > *t.snr_hi_db)
    throw ConfigError(p("snr_lo_db"), "must be <= snr_hi_db");
  if (j.contains("fj_pretrain_steps"))
    t.fj_pretrain_steps =
        get_int_min(j["fj_pretrain_steps"], p("fj_pretrain_steps"), 0);
  if (j.contains("fj_update_every"))
    t.fj_update_every = get_int_min(j["fj_update_every"], p("fj_update_every"), 1);
  if (j.contains("fj_batch"))
    t.fj_batch = get_int_min(j["fj_batch"], p("fj_batch"), 1);
  if (j.contains("beta")) t.beta = get_unit_interval(j["beta"], p("beta"));
  if (j.contains("betas")) {
    std::vector<double> v = get_number_list(j["betas"], p("betas"));
    for (double b : v)
      if (b < 0.0 || b > 1.0)
        throw ConfigError(p("betas"), "entries must be in [0, 1]");
    t.betas = std::move(v);
  }
  if (j.contains("iterations"))
    t.iterations = get_int_min(j["iterations"], p("iterations"), 1);
  if (j.contains("est_steps"))
    t.est_steps = get_int_min(j["est_steps"], p("est_steps"), 0);
  if (j.contains("hidden")) t.hidden = get_int_min(j["hidden"], p("hidden"), 1);
  if (j.contains("eval_batch"))
    t.eval_batch = get_int_min(j["eval_batch"], p("eval_batch"), 2);
  if (j.contains("mine_runs"))
    t.mine_runs = get_int_min(j["mine_runs"], p("mine_runs"), 1);
  return t;
}

double effective_fj_fraction(const ExperimentConfig& c) {
  return c.train.fj_power_fraction.value_or(AefjConfig().fj_power_fraction);
}

// Whether the learned-jamming design is active for this config; required by
// experiments whose figure of merit is the designed secrecy rate.
bool aefj_jamming_active(const ExperimentConfig& c) {
  return c.csi_mode != CsiMode::Unknown && c.nt > c.nr &&
         effective_fj_fraction(c) > 0.0;
}

bool scheme_in(const ExperimentConfig& c, Scheme s, bool compare) {
  if (!compare) return c.scheme == s;
  for (Scheme x : c.schemes)
    if (x == s) return true;
  return false;
}

void validate_semantics(const ExperimentConfig& c, bool compare) {
  if (c.nt < 1) throw ConfigError("antennas.nt", "must be >= 1");
  if (c.nr < 1) throw ConfigError("antennas.nr", "must be >= 1");
  if (c.ne < 1) throw ConfigError("antennas.ne", "must be >= 1");
  if (c.mc_draws < 100) throw ConfigError("mc_draws", "must be >= 100");
  if (!(c.rho_e2 >= 0.0) || !std::isfinite(c.rho_e2))
    throw ConfigError("csi.rho_e2", "must be finite and >= 0");
  if (c.csi_mode == CsiMode::Statistical && !(c.rho_e2 > 0.0))
    throw ConfigError("csi.rho_e2", "statistical mode needs rho_e2 > 0");
  if (c.csi_mode != CsiMode::Statistical && c.rho_e2 != 0.0)
    throw ConfigError("csi.rho_e2", "only meaningful in statistical mode");
  if (c.phi_grid_steps < 2)
    throw ConfigError("phi_grid_steps", "must be >= 2");

  for (size_t i = 0; i < c.snr_grid_db.size(); ++i) {
    if (!std::isfinite(c.snr_grid_db[i]))
      throw ConfigError("snr_grid_db", "entries must be finite");
    if (i > 0 && !(c.snr_grid_db[i] > c.snr_grid_db[i - 1]))
      throw ConfigError("snr_grid_db", "must be strictly increasing");
  }
  if (c.snr_grid_db.empty() && c.experiment != Experiment::FlopsReport)
    throw ConfigError("snr_grid_db", "required for this experiment");
  if ((c.experiment == Experiment::SecrecyVsBeta ||
       c.experiment == Experiment::MineConvergence) &&
      c.snr_grid_db.size() != 1)
    throw ConfigError("snr_grid_db",
                      "this experiment runs at a single operating snr");

  if (compare) {
    if (c.schemes.empty())
      throw ConfigError("schemes", "at least one scheme");
    if (c.experiment != Experiment::SecrecyVsSnr)
      throw ConfigError("experiment",
                        "compare supports secrecy_vs_snr only");
  } else {
    // scheme/experiment compatibility
    const Experiment e = c.experiment;
    const Scheme s = c.scheme;
    const auto need = [&](Scheme want) {
      if (s != want)
        throw ConfigError("scheme",
                          std::string("experiment ") + experiment_name(e) +
                              " requires scheme " + scheme_name(want));
    };
    switch (e) {
      case Experiment::SecrecyVsSnr: break;
      case Experiment::BlerVsSnr:
      case Experiment::SecrecyBlerTradeoff:
      case Experiment::FlopsReport: need(Scheme::Aefj); break;
      case Experiment::SecrecyVsBeta:
      case Experiment::MineConvergence: need(Scheme::MineFj); break;
      case Experiment::SecrecyVsNt: need(Scheme::ConventionalExhaustive); break;
    }
  }

  if (scheme_in(c, Scheme::ConventionalExhaustive, compare) &&
      c.csi_mode == CsiMode::Unknown)
    throw ConfigError("csi.mode",
                      "the conventional design needs transmitter csi");

  const bool design_secrecy_lane =
      (c.experiment == Experiment::SecrecyVsSnr &&
       scheme_in(c, Scheme::Aefj, compare)) ||
      c.experiment == Experiment::SecrecyBlerTradeoff;
  if (design_secrecy_lane && !aefj_jamming_active(c))
    throw ConfigError("config",
                      "designed-secrecy experiments need active jamming "
                      "(csi known, nt > nr, fj_power_fraction > 0)");

  if (c.experiment == Experiment::BlerVsSnr ||
      c.experiment == Experiment::SecrecyBlerTradeoff) {
    if (c.mc_draws < 1000)
      throw ConfigError("mc_draws",
                        "block-error experiments need >= 1000 trials");
  }

  if (c.experiment == Experiment::SecrecyVsNt) {
    if (c.nt_list.empty())
      throw ConfigError("nt_list", "required for secrecy_vs_nt");
    for (size_t i = 0; i < c.nt_list.size(); ++i) {
      if (c.nt_list[i] < 1)
        throw ConfigError("nt_list", "entries must be >= 1");
      if (i > 0 && c.nt_list[i] <= c.nt_list[i - 1])
        throw ConfigError("nt_list", "must be strictly increasing");
    }
  } else if (!c.nt_list.empty()) {
    throw ConfigError("nt_list", "only meaningful for secrecy_vs_nt");
  }

  const bool trains = scheme_in(c, Scheme::Aefj, compare) ||
                      scheme_in(c, Scheme::MineFj, compare);
  if (train_spec_set(c.train) && !trains)
    throw ConfigError("train", "this scheme does not train");
  if (c.train.alphas && c.experiment != Experiment::SecrecyBlerTradeoff)
    throw ConfigError("train.alphas",
                      "only meaningful for secrecy_bler_tradeoff");
  if (c.train.betas && c.experiment != Experiment::SecrecyVsBeta)
    throw ConfigError("train.betas", "only meaningful for secrecy_vs_beta");
}

ExperimentConfig parse_config(const std::string& text, bool compare) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<document>", e.what());
  }
  if (!doc.is_object()) throw ConfigError("<document>", "expected an object");

  std::set<std::string> top = {"experiment", "antennas",  "snr_grid_db",
                               "csi",        "mc_draws",  "seed",
                               "nt_list",    "phi_grid_steps", "train"};
  top.insert(compare ? "schemes" : "scheme");
  reject_unknown(doc, "", top);

  ExperimentConfig c;
  {
    const json& j = require_key(doc, "", "experiment");
    if (!j.is_string()) throw ConfigError("experiment", "expected a string");
    const auto e = experiment_from(j.get<std::string>());
    if (!e)
      throw ConfigError("experiment",
                        "unknown experiment '" + j.get<std::string>() + "'");
    c.experiment = *e;
  }
  if (compare) {
    const json& j = require_key(doc, "", "schemes");
    if (!j.is_array() || j.empty())
      throw ConfigError("schemes", "expected a non-empty array");
    for (size_t i = 0; i < j.size(); ++i) {
      const std::string path = "schemes[" + std::to_string(i) + "]";
      if (!j[i].is_string()) throw ConfigError(path, "expected a string");
      const auto s = scheme_from(j[i].get<std::string>());
      if (!s)
        throw ConfigError(path,
                          "unknown scheme '" + j[i].get<std::string>() + "'");
      c.schemes.push_back(*s);
    }
  } else {
    const json& j = require_key(doc, "", "scheme");
    if (!j.is_string()) throw ConfigError("scheme", "expected a string");
    const auto s = scheme_from(j.get<std::string>());
    if (!s)
      throw ConfigError("scheme",
                        "unknown scheme '" + j.get<std::string>() + "'");
    c.scheme = *s;
  }

  if (doc.contains("antennas")) {
    const json& a = doc["antennas"];
    if (!a.is_object()) throw ConfigError("antennas", "expected an object");
    reject_unknown(a, "antennas", {"nt", "nr", "ne"});
    if (a.contains("nt")) c.nt = get_int_min(a["nt"], "antennas.nt", 1);
    if (a.contains("nr")) c.nr = get_int_min(a["nr"], "antennas.nr", 1);
    if (a.contains("ne")) c.ne = get_int_min(a["ne"], "antennas.ne", 1);
  }

  if (doc.contains("snr_grid_db"))
    c.snr_grid_db = get_number_list(doc["snr_grid_db"], "snr_grid_db");

  if (doc.contains("csi")) {
    const json& s = doc["csi"];
    if (!s.is_object()) throw ConfigError("csi", "expected an object");
    reject_unknown(s, "csi", {"mode", "rho_e2"});
    if (s.contains("mode")) {
      if (!s["mode"].is_string())
        throw ConfigError("csi.mode", "expected a string");
      const auto m = csi_mode_from(s["mode"].get<std::string>());
      if (!m)
        throw ConfigError("csi.mode", "unknown mode '" +
                                          s["mode"].get<std::string>() + "'");
      c.csi_mode = *m;
    }
    if (s.contains("rho_e2"))
      c.rho_e2 = get_number(s["rho_e2"], "csi.rho_e2");
  }

  if (doc.contains("mc_draws"))
    c.mc_draws = get_int_min(doc["mc_draws"], "mc_draws", 100);

  if (doc.contains("seed")) {
    const json& j = doc["seed"];
    if (j.is_number_unsigned()) {
      c.seed = j.get<uint64_t>();
    } else if (j.is_number_integer()) {
      const long long v = j.get<long long>();
      if (v < 0) throw ConfigError("seed", "must be non-negative");
      c.seed = static_cast<uint64_t>(v);
    } else {
      throw ConfigError("seed", "expected an integer");
    }
  }

  if (doc.contains("nt_list")) {
    const json& j = doc["nt_list"];
    if (!j.is_array() || j.empty())
      throw ConfigError("nt_list", "expected a non-empty array of integers");
    for (size_t i = 0; i < j.size(); ++i)
      c.nt_list.push_back(
          get_int_min(j[i], "nt_list[" + std::to_string(i) + "]", 1));
  }

  if (doc.contains("phi_grid_steps")) {
    const bool conventional_lane =
        scheme_in(c, Scheme::ConventionalExhaustive, compare);
    if (!conventional_lane)
      throw ConfigError("phi_grid_steps",
                        "only meaningful for the conventional scheme");
    c.phi_grid_steps = get_int_min(doc["phi_grid_steps"], "phi_grid_steps", 2);
  }

  if (doc.contains("train")) {
    std::set<std::string> allowed;
    if (compare) {
      for (Scheme s : c.schemes) {
        const auto keys = train_keys_for(s, c.experiment);
        allowed.insert(keys.begin(), keys.end());
      }
    } else {
      allowed = train_keys_for(c.scheme, c.experiment);
    }
    if (allowed.empty())
      throw ConfigError("train", "this scheme does not train");
    c.train = parse_train(doc["train"], "train", allowed);
  }

  validate_semantics(c, compare);
  return c;
}

// ------------------------------------------------------------ config echo

ordered_json echo_train(const TrainSpec& t) {
  ordered_json j = ordered_json::object();
  if (t.alpha) j["alpha"] = *t.alpha;
  if (t.alphas) j["alphas"] = *t.alphas;
  if (t.fj_power_fraction) j["fj_power_fraction"] = *t.fj_power_fraction;
  if (t.epochs) j["epochs"] = *t.epochs;
  if (t.batches_per_epoch) j["batches_per_epoch"] = *t.batches_per_epoch;
  if (t.batch) j["batch"] = *t.batch;
  if (t.m) j["m"] = *t.m;
  if (t.lr) j["lr"] = *t.lr;
  if (t.snr_lo_db) j["snr_lo_db"] = *t.snr_lo_db;
  if (t.snr_hi_db) j["snr_hi_db"] = *t.snr_hi_db;
  if (t.fj_pretrain_steps) j["fj_pretrain_steps"] = *t.fj_pretrain_steps;
  if (t.fj_update_every) j["fj_update_every"] = *t.fj_update_every;
  if (t.fj_batch) j["fj_batch"] = *t.fj_batch;
  if (t.beta) j["beta"] = *t.beta;
  if (t.betas) j["betas"] = *t.betas;
  if (t.iterations) j["iterations"] = *t.iterations;
  if (t.est_steps) j["est_steps"] = *t.est_steps;
  if (t.hidden) j["hidden"] = *t.hidden;
  if (t.eval_batch) j["eval_batch"] = *t.eval_batch;
  if (t.mine_runs) j["mine_runs"] = *t.mine_runs;
  return j;
}

// Canonical re-parseable document for the effective configuration.
ordered_json echo_config(const ExperimentConfig& c, bool compare) {
  ordered_json j;
  j["experiment"] = experiment_name(c.experiment);
  if (compare) {
    ordered_json arr = ordered_json::array();
    for (Scheme s : c.schemes) arr.push_back(scheme_name(s));
    j["schemes"] = arr;
  } else {
    j["scheme"] = scheme_name(c.scheme);
  }
  j["antennas"] = {{"nt", c.nt}, {"nr", c.nr}, {"ne", c.ne}};
  if (!c.snr_grid_db.empty()) j["snr_grid_db"] = c.snr_grid_db;
  j["csi"] = {{"mode", csi_mode_name(c.csi_mode)}, {"rho_e2", c.rho_e2}};
  j["mc_draws"] = c.mc_draws;
  j["seed"] = c.seed;
  if (!c.nt_list.empty()) j["nt_list"] = c.nt_list;
  if (scheme_in(c, Scheme::ConventionalExhaustive, compare))
    j["phi_grid_steps"] = c.phi_grid_steps;
  if (train_spec_set(c.train)) j["train"] = echo_train(c.train);
  return j;
}

// -------------------------------------------------------------- CSV rows

struct ResultRow {
  std::string experiment, scheme, receiver;
  std::optional<double> snr_db;
  std::string param_name;
  std::optional<double> param_value;
  std::string metric;
  double value = 0.0;
  bool is_rate = false;  // rates are in nats and get a derived bits column
  std::optional<double> se;
  long long n = 0;
};

struct HistoryRow {
  std::string series;
  long long step = 0;
  std::string metric;
  double value = 0.0;
};

struct Emitted {
  std::vector<ResultRow> rows;
  std::vector<HistoryRow> history;
};

std::string render_results(const std::vector<ResultRow>& rows) {
  std::string s = std::string("# schema: ") + kResultsSchema + "\n";
  s += "experiment,scheme,receiver,snr_db,param_name,param_value,metric,"
       "value,value_bits,stderr,n\n";
  for (const ResultRow& r : rows) {
    s += r.experiment + ',' + r.scheme + ',' + r.receiver + ',';
    if (r.snr_db) s += fmt(*r.snr_db);
    s += ',' + r.param_name + ',';
    if (r.param_value) s += fmt(*r.param_value);
    s += ',' + r.metric + ',' + fmt(r.value) + ',';
    if (r.is_rate) s += fmt(r.value / std::numbers::ln2);
    s += ',';
    if (r.se) s += fmt(*r.se);
    s += ',' + std::to_string(r.n) + '\n';
  }
  return s;
}

std::string render_history(const std::vector<HistoryRow>& rows) {
  std::string s = std::string("# schema: ") + kHistorySchema + "\n";
  s += "series,step,metric,value\n";
  for (const HistoryRow& r : rows)
    s += r.series + ',' + std::to_string(r.step) + ',' + r.metric + ',' +
         fmt(r.value) + '\n';
  return s;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out.good()) throw std::runtime_error("short write to " + path.string());
}

// ------------------------------------------------------------ evaluation

struct DrawSet {
  std::vector<ChannelDraw> draws;
  std::vector<CsiState> csi;
};

// Shared evaluation ensemble for one grid point. Streams derive from a
// mixed master so they never collide with model-internal training streams,
// and every scheme sees the same draws at the same point (paired seeds).
DrawSet point_draws(const ExperimentConfig& c, int nt, uint64_t point,
                    int n) {
  const uint64_t ens =
      mix_seed(c.seed, static_cast<uint64_t>(StreamKind::Generic), kEnsembleMix);
  Rng ch = Rng::stream(ens, StreamKind::Channel, point);
  Rng ev = Rng::stream(ens, StreamKind::Eavesdropper, point);
  Rng ce = Rng::stream(ens, StreamKind::CsiError, point);
  DrawSet s;
  s.draws.reserve(static_cast<size_t>(n));
  s.csi.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    ChannelDraw d{sample_channel(nt, c.nr, ch), sample_channel(nt, c.ne, ev),
                  1.0, 1.0};
    s.csi.push_back(make_csi(d, c.csi_mode, c.rho_e2, ce));
    s.draws.push_back(std::move(d));
  }
  return s;
}

uint64_t bler_seed(const ExperimentConfig& c) {
  return mix_seed(c.seed, static_cast<uint64_t>(StreamKind::Generic), kBlerMix);
}

uint64_t mine_run_seed(const ExperimentConfig& c, uint64_t point, int runs,
                       int run) {
  return mix_seed(c.seed, static_cast<uint64_t>(StreamKind::Generic),
                  kMineMix + point * static_cast<uint64_t>(runs) +
                      static_cast<uint64_t>(run));
}

AefjConfig aefj_config(const ExperimentConfig& c) {
  AefjConfig a;
  a.nt = c.nt;
  a.nr = c.nr;
  a.ne = c.ne;
  a.csi = c.csi_mode;
  a.rho_e2 = c.rho_e2;
  a.seed = c.seed;
  const TrainSpec& t = c.train;
  if (t.m) a.m = *t.m;
  if (t.alpha) a.alpha = *t.alpha;
  if (t.fj_power_fraction) a.fj_power_fraction = *t.fj_power_fraction;
  if (t.epochs) a.epochs = *t.epochs;
  if (t.batches_per_epoch) a.batches_per_epoch = *t.batches_per_epoch;
  if (t.batch) a.batch = *t.batch;
  if (t.lr) a.lr = *t.lr;
  if (t.fj_pretrain_steps) a.fj_pretrain_steps = *t.fj_pretrain_steps;
  if (t.fj_update_every) a.fj_update_every = *t.fj_update_every;
  if (t.fj_batch) a.fj_batch = *t.fj_batch;
  a.snr_lo_db = t.snr_lo_db.value_or(
      c.snr_grid_db.empty() ? a.snr_lo_db : c.snr_grid_db.front());
  a.snr_hi_db = t.snr_hi_db.value_or(
      c.snr_grid_db.empty() ? a.snr_hi_db : c.snr_grid_db.back());
  return a;
}

MineFjConfig mine_config(const ExperimentConfig& c) {
  MineFjConfig m;
  m.nt = c.nt;
  m.nr = c.nr;
  m.ne = c.ne;
  const TrainSpec& t = c.train;
  if (t.beta) m.beta = *t.beta;
  if (t.iterations) m.iterations = *t.iterations;
  if (t.batch) m.batch = *t.batch;
  if (t.est_steps) m.est_steps = *t.est_steps;
  if (t.hidden) m.hidden = *t.hidden;
  if (t.m) m.m = *t.m;
  if (t.fj_power_fraction) m.fj_power_fraction = *t.fj_power_fraction;
  if (t.eval_batch) m.eval_batch = *t.eval_batch;
  if (t.lr) m.lr = *t.lr;
  return m;
}

AefjModel trained_aefj(const ExperimentConfig& c,
                       std::optional<double> alpha_override,
                       const std::string& series,
                       std::vector<HistoryRow>* history) {
  AefjConfig a = aefj_config(c);
  if (alpha_override) a.alpha = *alpha_override;
  AefjModel model = make_aefj(a);
  const TrainHistory th = train(model);
  if (history) {
    for (size_t e = 0; e < th.train_loss.size(); ++e) {
      history->push_back({series, static_cast<long long>(e), "train_loss",
                          th.train_loss[e]});
      history->push_back(
          {series, static_cast<long long>(e), "val_loss", th.val_loss[e]});
    }
  }
  return model;
}

struct MineSummary {
  double gsc = 0.0;
  double i_ab = 0.0;
  int rows_averaged = 0;
};

// Converged proxy: mean over the last (up to) 10 recorded iterations.
MineSummary mine_converged(const MineFjResult& r) {
  MineSummary s;
  const size_t n = r.history.size();
  const size_t k = std::min<size_t>(10, n);
  for (size_t i = n - k; i < n; ++i) {
    s.gsc += r.history[i].gsc;
    s.i_ab += r.history[i].i_ab;
  }
  if (k > 0) {
    s.gsc /= static_cast<double>(k);
    s.i_ab /= static_cast<double>(k);
  }
  s.rows_averaged = static_cast<int>(k);
  return s;
}

void push_mine_history(const MineFjResult& r, const std::string& series,
                       std::vector<HistoryRow>* history) {
  for (const MineFjHistoryRow& row : r.history) {
    history->push_back({series, row.iteration, "i_ab", row.i_ab});
    history->push_back({series, row.iteration, "i_ae", row.i_ae});
    history->push_back({series, row.iteration, "gsc", row.gsc});
    history->push_back({series, row.iteration, "loss", row.loss});
  }
}

double binomial_se(double p, long long n) {
  return n > 0 ? std::sqrt(p * (1.0 - p) / static_cast<double>(n)) : 0.0;
}

void push_bler_rows(const ExperimentConfig& c, const AefjModel& model,
                    const std::string& param_name,
                    std::optional<double> param_value, int workers,
                    std::vector<ResultRow>* rows) {
  const auto trials = static_cast<size_t>(c.mc_draws);
  for (const Receiver at : {Receiver::Rx, Receiver::Eve}) {
    const BlerCurve bc =
        eval_bler(model, c.snr_grid_db, trials, at, bler_seed(c), workers);
    const char* who = at == Receiver::Rx ? "rx" : "eve";
    for (size_t i = 0; i < bc.snr_db.size(); ++i) {
      rows->push_back({experiment_name(c.experiment), scheme_name(c.scheme),
                       who, bc.snr_db[i], param_name, param_value, "bler",
                       bc.bler[i], false,
                       binomial_se(bc.bler[i], static_cast<long long>(bc.trials[i])),
                       static_cast<long long>(bc.trials[i])});
    }
  }
}

// ----------------------------------------------------------- experiments

void conventional_point(const ExperimentConfig& c, int nt, uint64_t point,
                        double snr_db, const std::string& param_name,
                        std::optional<double> param_value, int workers,
                        std::vector<ResultRow>* rows) {
  const double p = db_to_power(snr_db);
  const DrawSet ds = point_draws(c, nt, point, c.mc_draws);
  const PowerSplitResult split =
      exhaustive_power_split(ds.draws, ds.csi, p, c.phi_grid_steps, workers);
  const SecrecyStats st = average_secrecy(
      ds.draws.size(),
      [&](size_t k) {
        return split_secrecy(ds.draws[k], ds.csi[k], split.phi_star, p);
      },
      workers);
  const char* exp = experiment_name(c.experiment);
  const char* scheme = scheme_name(Scheme::ConventionalExhaustive);
  rows->push_back({exp, scheme, "", snr_db, param_name, param_value,
                   "mean_secrecy", st.mean, true, st.stderr_mean,
                   static_cast<long long>(st.n)});
  rows->push_back({exp, scheme, "", snr_db, param_name, param_value,
                   "phi_star", split.phi_star, false, std::nullopt,
                   static_cast<long long>(st.n)});
}

Emitted run_secrecy_vs_snr(const ExperimentConfig& c, int workers) {
  Emitted out;
  const char* exp = experiment_name(c.experiment);
  switch (c.scheme) {
    case Scheme::ConventionalExhaustive: {
      for (size_t i = 0; i < c.snr_grid_db.size(); ++i)
        conventional_point(c, c.nt, i, c.snr_grid_db[i], "", std::nullopt,
                           workers, &out.rows);
      break;
    }
    case Scheme::Aefj: {
      AefjModel model = trained_aefj(c, std::nullopt, "aefj", &out.history);
      for (size_t i = 0; i < c.snr_grid_db.size(); ++i) {
        const double p = db_to_power(c.snr_grid_db[i]);
        const DrawSet ds = point_draws(c, c.nt, i, c.mc_draws);
        const SecrecyStats st = average_secrecy(
            ds.draws.size(),
            [&](size_t k) {
              return design_secrecy(model, ds.draws[k], ds.csi[k], p);
            },
            1);
        out.rows.push_back({exp, "aefj", "", c.snr_grid_db[i], "",
                            std::nullopt, "mean_secrecy", st.mean, true,
                            st.stderr_mean, static_cast<long long>(st.n)});
      }
      out.rows.push_back({exp, "aefj", "", std::nullopt, "", std::nullopt,
                          "phi_info_fraction", model.phi, false, std::nullopt,
                          1});
      break;
    }
    case Scheme::MineFj: {
      const int runs = c.train.mine_runs.value_or(3);
      for (size_t i = 0; i < c.snr_grid_db.size(); ++i) {
        MineFjConfig mcfg = mine_config(c);
        mcfg.snr_db = c.snr_grid_db[i];
        std::vector<double> gscs, iabs;
        for (int j = 0; j < runs; ++j) {
          mcfg.seed = mine_run_seed(c, i, runs, j);
          const MineFjResult res = train_mine_fj(mcfg);
          const MineSummary s = mine_converged(res);
          gscs.push_back(s.gsc);
          iabs.push_back(s.i_ab);
          push_mine_history(res,
                            "mine_fj:snr=" + fmt_g(c.snr_grid_db[i]) +
                                ":run=" + std::to_string(j),
                            &out.history);
        }
        const SecrecyStats g = average_secrecy(
            gscs.size(), [&](size_t k) { return gscs[k]; }, 1);
        const SecrecyStats a = average_secrecy(
            iabs.size(), [&](size_t k) { return iabs[k]; }, 1);
        const auto se = [&](const SecrecyStats& s) {
          return s.n > 1 ? std::optional<double>(s.stderr_mean) : std::nullopt;
        };
        out.rows.push_back({exp, "mine_fj", "", c.snr_grid_db[i], "",
                            std::nullopt, "gsc_converged", g.mean, true,
                            se(g), static_cast<long long>(g.n)});
        out.rows.push_back({exp, "mine_fj", "", c.snr_grid_db[i], "",
                            std::nullopt, "i_ab_converged", a.mean, true,
                            se(a), static_cast<long long>(a.n)});
      }
      break;
    }
  }
  return out;
}

Emitted run_bler_vs_snr(const ExperimentConfig& c, int workers) {
  Emitted out;
  const AefjModel model = trained_aefj(c, std::nullopt, "aefj", &out.history);
  push_bler_rows(c, model, "", std::nullopt, workers, &out.rows);
  return out;
}

Emitted run_secrecy_vs_beta(const ExperimentConfig& c, int /*workers*/) {
  Emitted out;
  const char* exp = experiment_name(c.experiment);
  const std::vector<double> betas =
      c.train.betas.value_or(std::vector<double>{0.3, 0.5, 0.7});
  for (const double beta : betas) {
    MineFjConfig mcfg = mine_config(c);
    mcfg.beta = beta;
    mcfg.snr_db = c.snr_grid_db.front();
    mcfg.seed = c.seed;  // identical across betas: paired draws and inits
    const MineFjResult res = train_mine_fj(mcfg);
    const MineSummary s = mine_converged(res);
    push_mine_history(res, "beta=" + fmt_g(beta), &out.history);
    out.rows.push_back({exp, "mine_fj", "", c.snr_grid_db.front(), "beta",
                        beta, "gsc_converged", s.gsc, true, std::nullopt,
                        s.rows_averaged});
    out.rows.push_back({exp, "mine_fj", "", c.snr_grid_db.front(), "beta",
                        beta, "i_ab_converged", s.i_ab, true, std::nullopt,
                        s.rows_averaged});
  }
  return out;
}

Emitted run_mine_convergence(const ExperimentConfig& c, int /*workers*/) {
  Emitted out;
  const char* exp = experiment_name(c.experiment);
  MineFjConfig mcfg = mine_config(c);
  mcfg.snr_db = c.snr_grid_db.front();
  mcfg.seed = c.seed;
  const MineFjResult res = train_mine_fj(mcfg);
  const double snr = c.snr_grid_db.front();
  for (const MineFjHistoryRow& row : res.history) {
    const auto it = static_cast<double>(row.iteration);
    const auto push = [&](const char* metric, double v, bool rate,
                          long long n) {
      out.rows.push_back({exp, "mine_fj", "", snr, "iteration", it, metric, v,
                          rate, std::nullopt, n});
    };
    push("i_ab", row.i_ab, true, mcfg.eval_batch);
    push("i_ae", row.i_ae, true, mcfg.eval_batch);
    push("gsc", row.gsc, true, mcfg.eval_batch);
    push("loss", row.loss, true, mcfg.batch);
  }
  // Start of the first 20-step window whose two 10-step i_ab means agree
  // within 1%; -1 when never reached.  Means are compared rather than
  // successive samples because each history point is a fresh Monte Carlo
  // estimate whose sampling jitter (a few percent at the default eval batch)
  // would otherwise mask a flat trend.
  long long plateau = -1;
  const auto& h = res.history;
  const auto window_mean = [&](size_t from) {
    double s = 0.0;
    for (size_t t = from; t < from + 10; ++t) s += h[t].i_ab;
    return s / 10.0;
  };
  for (size_t k = 0; k + 20 <= h.size() && plateau < 0; ++k) {
    const double head = window_mean(k);
    const double tail = window_mean(k + 10);
    if (std::abs(tail - head) < 0.01 * std::max(std::abs(head), 1e-12))
      plateau = h[k].iteration;
  }
  const auto total = static_cast<long long>(h.size());
  out.rows.push_back({exp, "mine_fj", "", snr, "", std::nullopt,
                      "plateau_iteration", static_cast<double>(plateau),
                      false, std::nullopt, total});
  out.rows.push_back({exp, "mine_fj", "", snr, "", std::nullopt,
                      "best_iteration", static_cast<double>(res.best_iteration),
                      false, std::nullopt, total});
  out.rows.push_back({exp, "mine_fj", "", snr, "", std::nullopt,
                      "raw_stop_iteration",
                      static_cast<double>(res.raw_stop_iteration), false,
                      std::nullopt, total});
  return out;
}

Emitted run_secrecy_vs_nt(const ExperimentConfig& c, int workers) {
  Emitted out;
  const size_t n_snr = c.snr_grid_db.size();
  for (size_t a = 0; a < c.nt_list.size(); ++a) {
    for (size_t i = 0; i < n_snr; ++i) {
      conventional_point(c, c.nt_list[a], a * n_snr + i, c.snr_grid_db[i],
                         "nt", static_cast<double>(c.nt_list[a]), workers,
                         &out.rows);
    }
  }
  return out;
}

Emitted run_secrecy_bler_tradeoff(const ExperimentConfig& c, int workers) {
  Emitted out;
  const char* exp = experiment_name(c.experiment);
  const std::vector<double> alphas =
      c.train.alphas.value_or(std::vector<double>{0.1, 0.3, 0.5, 0.7, 0.9});
  for (const double alpha : alphas) {
    AefjModel model =
        trained_aefj(c, alpha, "alpha=" + fmt_g(alpha), &out.history);
    for (size_t i = 0; i < c.snr_grid_db.size(); ++i) {
      const double p = db_to_power(c.snr_grid_db[i]);
      const DrawSet ds = point_draws(c, c.nt, i, c.mc_draws);
      const SecrecyStats st = average_secrecy(
          ds.draws.size(),
          [&](size_t k) {
            return design_secrecy(model, ds.draws[k], ds.csi[k], p);
          },
          1);
      out.rows.push_back({exp, "aefj", "", c.snr_grid_db[i], "alpha", alpha,
                          "mean_secrecy", st.mean, true, st.stderr_mean,
                          static_cast<long long>(st.n)});
    }
    push_bler_rows(c, model, "alpha", alpha, workers, &out.rows);
  }
  return out;
}

Emitted run_flops_report(const ExperimentConfig& c, int /*workers*/) {
  Emitted out;
  const char* exp = experiment_name(c.experiment);
  const FlopsReport r = flops(published_flops_stack());
  int layer = 0;
  for (const FlopsReport::Row& row : r.rows) {
    ++layer;
    out.rows.push_back({exp, "aefj", "", std::nullopt, "layer",
                        static_cast<double>(layer), "flops_text_formula",
                        static_cast<double>(row.text), false, std::nullopt,
                        1});
    out.rows.push_back({exp, "aefj", "", std::nullopt, "layer",
                        static_cast<double>(layer), "flops_table_convention",
                        static_cast<double>(row.table), false, std::nullopt,
                        1});
  }
  out.rows.push_back({exp, "aefj", "", std::nullopt, "", std::nullopt,
                      "flops_text_formula", static_cast<double>(r.total_text),
                      false, std::nullopt, 1});
  out.rows.push_back({exp, "aefj", "", std::nullopt, "", std::nullopt,
                      "flops_table_convention",
                      static_cast<double>(r.total_table), false, std::nullopt,
                      1});
  out.rows.push_back({exp, "aefj", "", std::nullopt, "", std::nullopt,
                      "flops_discrepancy",
                      static_cast<double>(r.total_table - r.total_text),
                      false, std::nullopt, 1});
  return out;
}

Emitted dispatch(const ExperimentConfig& c, int workers) {
  switch (c.experiment) {
    case Experiment::SecrecyVsSnr: return run_secrecy_vs_snr(c, workers);
    case Experiment::BlerVsSnr: return run_bler_vs_snr(c, workers);
    case Experiment::SecrecyVsBeta: return run_secrecy_vs_beta(c, workers);
    case Experiment::MineConvergence: return run_mine_convergence(c, workers);
    case Experiment::SecrecyVsNt: return run_secrecy_vs_nt(c, workers);
    case Experiment::SecrecyBlerTradeoff:
      return run_secrecy_bler_tradeoff(c, workers);
    case Experiment::FlopsReport: return run_flops_report(c, workers);
  }
  throw std::logic_error("dispatch: bad experiment");
}

// -------------------------------------------------------------- manifest

void write_manifest(const fs::path& dir, const ExperimentConfig& c,
                    const char* mode, int workers, const std::string& started,
                    const char* status, const std::string& error,
                    const std::vector<std::string>& outputs) {
  ordered_json m;
  m["format"] = "fjsim-manifest-v1";
  m["tool"] = kToolVersion;
  m["mode"] = mode;
  m["status"] = status;
  m["error"] = error.empty() ? ordered_json(nullptr) : ordered_json(error);
  m["seed"] = c.seed;
  m["workers"] = workers;
  m["started_utc"] = started;
  m["finished_utc"] = iso_utc();
  m["config"] = echo_config(c, std::string(mode) == "compare");
  ordered_json outs = ordered_json::object();
  for (const std::string& f : outputs)
    outs[f] = "fnv1a64:" + file_digest_hex((dir / f).string());
  m["outputs"] = outs;
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

void execute(const ExperimentConfig& c, const std::string& out_dir,
             int workers, bool compare,
             const std::function<Emitted()>& body) {
  if (workers < 1)
    throw std::invalid_argument("harness: workers must be >= 1");
  validate_semantics(c, compare);
  const fs::path dir(out_dir.empty() ? "." : out_dir);
  fs::create_directories(dir);
  const fs::path results = dir / "results.csv";
  const fs::path history = dir / "history.csv";
  std::error_code ec;
  fs::remove(results, ec);
  fs::remove(history, ec);
  const std::string started = iso_utc();
  const char* mode = compare ? "compare" : "run";
  try {
    const Emitted em = body();
    write_text(results, render_results(em.rows));
    std::vector<std::string> written = {"results.csv"};
    if (!em.history.empty()) {
      write_text(history, render_history(em.history));
      written.push_back("history.csv");
    }
    write_manifest(dir, c, mode, workers, started, "ok", "", written);
  } catch (const std::exception& e) {
    fs::remove(results, ec);
    fs::remove(history, ec);
    write_manifest(dir, c, mode, workers, started, "failed", e.what(), {});
    throw;
  }
}

}  // namespace

ConfigError::ConfigError(std::string field, const std::string& message)
    : std::runtime_error(field + ": " + message), field_(std::move(field)) {}

const char* experiment_name(Experiment e) {
  for (const auto& [x, n] : kExperimentNames)
    if (x == e) return n;
  throw std::logic_error("experiment_name: bad experiment");
}

const char* scheme_name(Scheme s) {
  for (const auto& [x, n] : kSchemeNames)
    if (x == s) return n;
  throw std::logic_error("scheme_name: bad scheme");
}

ExperimentConfig parse_run_config(const std::string& json_text) {
  return parse_config(json_text, false);
}

ExperimentConfig parse_compare_config(const std::string& json_text) {
  return parse_config(json_text, true);
}

std::string schema_example() {
  return R"({
  "experiment": "secrecy_vs_snr",
  "scheme": "aefj",
  "antennas": {"nt": 4, "nr": 2, "ne": 2},
  "snr_grid_db": [0.0, 5.0, 10.0, 15.0, 20.0, 25.0],
  "csi": {"mode": "perfect", "rho_e2": 0.0},
  "mc_draws": 10000,
  "seed": 1,
  "train": {
    "alpha": 0.5,
    "fj_power_fraction": 0.5,
    "epochs": 10,
    "batches_per_epoch": 100,
    "batch": 256,
    "m": 16,
    "lr": 0.001,
    "snr_lo_db": 10.0,
    "snr_hi_db": 25.0,
    "fj_pretrain_steps": 300,
    "fj_update_every": 5,
    "fj_batch": 16
  }
}
)";
}

void run_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                    int workers) {
  execute(cfg, out_dir, workers, false,
          [&] { return dispatch(cfg, workers); });
}

void compare_schemes(const ExperimentConfig& cfg, const std::string& out_dir,
                     int workers) {
  execute(cfg, out_dir, workers, true, [&] {
    Emitted out;
    const char* exp = experiment_name(cfg.experiment);
    const size_t n_schemes = cfg.schemes.size();
    const size_t n_points = cfg.snr_grid_db.size();
    std::vector<std::vector<double>> value(n_schemes,
                                           std::vector<double>(n_points));
    std::vector<std::vector<std::optional<double>>> se(
        n_schemes, std::vector<std::optional<double>>(n_points));
    std::vector<std::vector<long long>> count(
        n_schemes, std::vector<long long>(n_points, 0));

    std::optional<AefjModel> aefj_model;
    for (Scheme s : cfg.schemes) {
      if (s == Scheme::Aefj && !aefj_model) {
        ExperimentConfig one = cfg;
        one.scheme = Scheme::Aefj;
        aefj_model = trained_aefj(one, std::nullopt, "aefj", nullptr);
      }
    }

    const int runs = cfg.train.mine_runs.value_or(3);
    for (size_t i = 0; i < n_points; ++i) {
      const double p = db_to_power(cfg.snr_grid_db[i]);
      bool need_draws = false;
      for (Scheme s : cfg.schemes)
        need_draws = need_draws || s != Scheme::MineFj;
      const DrawSet ds = need_draws
                             ? point_draws(cfg, cfg.nt, i, cfg.mc_draws)
                             : DrawSet{};
      for (size_t si = 0; si < n_schemes; ++si) {
        switch (cfg.schemes[si]) {
          case Scheme::ConventionalExhaustive: {
            const PowerSplitResult split = exhaustive_power_split(
                ds.draws, ds.csi, p, cfg.phi_grid_steps, workers);
            const SecrecyStats st = average_secrecy(
                ds.draws.size(),
                [&](size_t k) {
                  return split_secrecy(ds.draws[k], ds.csi[k], split.phi_star,
                                       p);
                },
                workers);
            value[si][i] = st.mean;
            se[si][i] = st.stderr_mean;
            count[si][i] = static_cast<long long>(st.n);
            break;
          }
          case Scheme::Aefj: {
            const SecrecyStats st = average_secrecy(
                ds.draws.size(),
                [&](size_t k) {
                  return design_secrecy(*aefj_model, ds.draws[k], ds.csi[k],
                                        p);
                },
                1);
            value[si][i] = st.mean;
            se[si][i] = st.stderr_mean;
            count[si][i] = static_cast<long long>(st.n);
            break;
          }
          case Scheme::MineFj: {
            MineFjConfig mcfg = mine_config(cfg);
            mcfg.snr_db = cfg.snr_grid_db[i];
            std::vector<double> gscs;
            for (int j = 0; j < runs; ++j) {
              mcfg.seed = mine_run_seed(cfg, i, runs, j);
              gscs.push_back(mine_converged(train_mine_fj(mcfg)).gsc);
            }
            const SecrecyStats st = average_secrecy(
                gscs.size(), [&](size_t k) { return gscs[k]; }, 1);
            value[si][i] = st.mean;
            se[si][i] = st.n > 1 ? std::optional<double>(st.stderr_mean)
                                 : std::nullopt;
            count[si][i] = static_cast<long long>(st.n);
            break;
          }
        }
      }
    }
    for (size_t si = 0; si < n_schemes; ++si)
      for (size_t i = 0; i < n_points; ++i)
        out.rows.push_back({exp, scheme_name(cfg.schemes[si]), "",
                            cfg.snr_grid_db[i], "", std::nullopt,
                            "mean_secrecy", value[si][i], true, se[si][i],
                            count[si][i]});
    return out;
  });
}

std::string file_digest_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("digest: cannot read " + path);
  uint64_t h = 14695981039346656037ULL;
  char buf[4096];
  while (in) {
    in.read(buf, sizeof buf);
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(h));
  return hex;
}

std::vector<LayerSpec> published_flops_stack() {
  return {LayerSpec::dense(16, 64), LayerSpec::dense(64, 8),
          LayerSpec::dense(8, 64), LayerSpec::dense(64, 16)};
}

}  // namespace fjsec
