#include <CLI11.hpp>

#include <iostream>

#include "polarnet/pipeline.hpp"

namespace {

constexpr int kConfigError = 1;
constexpr int kMissingStage = 2;
constexpr int kRuntimeError = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polarization and cross-border flow analysis of retweet networks"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  unsigned workers = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> countries;
  std::vector<std::string> periods;
  int round = 1;
  std::string spec_path;
  std::string truth_dir;
  int annotate = 0;

  app.add_option("--config", config_path, "Pipeline config file (key = value)");
  app.add_option("--out", out_dir, "Output directory (overrides the config)");
  auto* workers_opt = app.add_option("--workers", workers, "Parallel country/period units")->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", seed, "Root seed (overrides the config)");
  app.add_option("--country", countries, "Restrict to these country codes");
  app.add_option("--period", periods, "Restrict to these periods");

  for (const auto& stage : polarnet::Pipeline::stages()) {
    auto* sub = app.add_subcommand(stage);
    if (stage == "sample") sub->add_option("--round", round, "Sampling round (1 or 2)")->check(CLI::Range(1, 2));
  }
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus, or label samples with simulated annotators");
  synth->add_option("--spec", spec_path, "Corpus spec file");
  synth->add_option("--annotate", annotate, "Label samples/roundN.tsv instead of generating")->check(CLI::Range(1, 2));
  synth->add_option("--truth", truth_dir, "Directory with truth/ (default: the config's directory)");

  CLI11_PARSE(app, argc, argv);
  auto* sub = app.get_subcommands().front();
  const std::string stage = sub->get_name();

  polarnet::RunOptions options;
  if (!out_dir.empty()) options.out = out_dir;
  if (*workers_opt) options.workers = workers;
  if (*seed_opt) options.seed = seed;
  options.countries.insert(countries.begin(), countries.end());
  options.periods.insert(periods.begin(), periods.end());

  try {
    if (stage == "synth" && annotate == 0) {
      if (spec_path.empty() || out_dir.empty()) {
        std::cerr << "[synth] --spec and --out are required to generate a corpus\n";
        return kConfigError;
      }
      polarnet::run_synth(spec_path, out_dir, options.seed);
      std::cout << "[synth] corpus written to " << out_dir << '\n';
      return 0;
    }
    if (config_path.empty()) {
      std::cerr << "[" << stage << "] --config is required\n";
      return kConfigError;
    }
    std::optional<polarnet::Pipeline> pipeline;
    try {
      pipeline.emplace(polarnet::PipelineConfig::load(config_path), options);
    } catch (const polarnet::Error& e) {
      std::cerr << "[config] " << e.what() << '\n';
      return kConfigError;
    }
    if (stage == "synth") {
      const auto dir = truth_dir.empty() ? std::filesystem::path(config_path).parent_path() : std::filesystem::path(truth_dir);
      const auto written = polarnet::run_synth_annotate(*pipeline, dir, annotate);
      std::cout << "[synth] labels written to " << written.string() << '\n';
      return 0;
    }
    pipeline->run(stage, round);
    for (const auto& n : pipeline->notes()) std::cerr << "[" << stage << "] note: " << n << '\n';
    std::cout << "[" << stage << "] done, outputs in " << pipeline->out().string() << '\n';
    return 0;
  } catch (const polarnet::MissingPrerequisite& e) {
    std::cerr << "[" << stage << "] " << e.what() << " (run '" << e.stage() << "' first)\n";
    return kMissingStage;
  } catch (const std::exception& e) {
    std::cerr << "[" << stage << "] error: " << e.what() << '\n';
    return kRuntimeError;
  }
}
