#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "fjsec/harness.hpp"
#include "fjsec/neuralnet.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string resolve_out_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("FJSIM_OUT_DIR"); env && *env)
    return env;
  return ".";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fjsim: MIMO wiretap friendly-jamming experiment runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  unsigned long long seed = 0;
  int workers = 1;
  int mc_draws = 0;
  bool seed_given = false, mc_given = false;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "JSON experiment config")
        ->required();
    sub->add_option("--out", out_dir,
                    "output directory (default: $FJSIM_OUT_DIR or .)");
    sub->add_option("--seed", seed, "override the config seed")
        ->each([&](const std::string&) { seed_given = true; });
    sub->add_option("--workers", workers, "worker threads")
        ->check(CLI::Range(1, 256));
    sub->add_option("--mc-draws", mc_draws, "override mc_draws")
        ->check(CLI::Range(100, 100000000))
        ->each([&](const std::string&) { mc_given = true; });
  };

  CLI::App* run = app.add_subcommand("run", "execute one experiment");
  add_common(run);
  CLI::App* cmp = app.add_subcommand(
      "compare", "evaluate several schemes on shared channel draws");
  add_common(cmp);
  app.add_subcommand("schema",
                     "print an example config (re-parses under strict mode)");

  CLI11_PARSE(app, argc, argv);

  if (app.got_subcommand("schema")) {
    std::fputs(fjsec::schema_example().c_str(), stdout);
    return 0;
  }

  const bool comparing = app.got_subcommand("compare");
  try {
    const std::string text = read_file(config_path);
    fjsec::ExperimentConfig cfg = comparing
                                      ? fjsec::parse_compare_config(text)
                                      : fjsec::parse_run_config(text);
    if (seed_given) cfg.seed = seed;
    if (mc_given) cfg.mc_draws = mc_draws;
    const std::string dir = resolve_out_dir(out_dir);
    if (comparing)
      fjsec::compare_schemes(cfg, dir, workers);
    else
      fjsec::run_experiment(cfg, dir, workers);
    std::printf("wrote %s/results.csv and %s/manifest.json\n", dir.c_str(),
                dir.c_str());
    if (cfg.experiment == fjsec::Experiment::FlopsReport) {
      const fjsec::FlopsReport r =
          fjsec::flops(fjsec::published_flops_stack());
      std::printf("deployment flops: %lld by the multiply-add count "
                  "(2*in - 1)*out, %lld by the doubled-product convention "
                  "2*in*out; the conventions differ by %lld\n",
                  r.total_text, r.total_table, r.total_table - r.total_text);
    }
    return 0;
  } catch (const fjsec::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
