#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "polarnet/common.hpp"
#include "polarnet/config.hpp"
#include "polarnet/ingest.hpp"

namespace polarnet {

/// A stage was run before the stage producing its inputs.
class MissingPrerequisite : public Error {
 public:
  MissingPrerequisite(std::string stage, const std::filesystem::path& artifact)
      : Error("missing output of stage '" + stage + "': " + artifact.string()), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct RunOptions {
  std::optional<std::filesystem::path> out;
  std::optional<unsigned> workers;
  std::optional<std::uint64_t> seed;
  std::set<CountryCode> countries;  // empty: all
  std::set<std::string> periods;    // empty: all
};

/// One country network in one period.
struct Unit {
  CountryCode country;
  std::string period;

  std::string tag() const { return country + "_" + period; }
};

/// File-based staged pipeline; each stage reads the previous stages'
/// artifacts from the output directory.
class Pipeline {
 public:
  Pipeline(PipelineConfig config, const RunOptions& options = {});

  static const std::vector<std::string>& stages();
  /// Runs one named stage; `round` only matters for "sample".
  void run(std::string_view stage, int round = 1);
  void run_all_until_labels();

  void ingest();
  void geolocate();
  void build_graphs();
  void cluster();
  void sample(int round);
  void classify();
  void metrics();
  void flows();
  void cohorts();
  void report();

  const PipelineConfig& config() const { return config_; }
  const std::filesystem::path& out() const { return config_.out; }
  const std::string& digest() const { return digest_; }
  /// Notes emitted by the stages run so far (skipped computations, warnings).
  const std::vector<std::string>& notes() const { return notes_; }

 private:
  std::filesystem::path require(const std::string& stage, const std::filesystem::path& relative) const;
  std::string comment() const;
  const std::vector<Period>& periods();
  const std::vector<TweetEvent>& period_events(const std::string& period);
  std::map<CountryCode, std::string> country_langs();
  std::vector<Unit> units(const std::string& stage);
  bool selected(const Unit& u) const;
  void note(std::string text);

  PipelineConfig config_;
  RunOptions options_;
  std::string digest_;
  std::optional<std::vector<Period>> periods_;
  std::map<std::string, std::vector<TweetEvent>> events_;
  std::vector<std::string> notes_;
};

/// Generates a corpus from a spec file into `dir` (see write_corpus).
void run_synth(const std::filesystem::path& spec_path, const std::filesystem::path& dir,
               std::optional<std::uint64_t> seed = std::nullopt);

/// Labels the sampled tweets of `round` with simulated annotators using the
/// ground truth next to the config file, writing the round's labels file.
std::filesystem::path run_synth_annotate(const Pipeline& pipeline, const std::filesystem::path& truth_dir, int round);

}  // namespace polarnet
