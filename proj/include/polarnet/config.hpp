#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace polarnet {

/// "key = value" lines; '#' starts a comment line. Keys may repeat.
class KeyValueDoc {
 public:
  static KeyValueDoc parse(std::string_view text);
  static KeyValueDoc load(const std::filesystem::path& path);

  std::optional<std::string> get(std::string_view key) const;  // last occurrence
  std::vector<std::string> get_all(std::string_view key) const;
  bool has(std::string_view key) const { return get(key).has_value(); }

  std::string get_string(std::string_view key, std::string fallback) const;
  double get_double(std::string_view key, double fallback) const;
  std::int64_t get_int(std::string_view key, std::int64_t fallback) const;
  bool get_bool(std::string_view key, bool fallback) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  /// Throws FormatError naming the first key outside `known`.
  void require_known(const std::set<std::string>& known) const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// Comma-separated list with whitespace trimmed and empty items dropped.
std::vector<std::string> split_list(std::string_view value);

/// Settings for the staged pipeline. Relative paths resolve against the
/// directory of the config file.
struct PipelineConfig {
  std::filesystem::path events;
  std::filesystem::path gazetteer;
  std::optional<std::filesystem::path> stoplist;
  std::optional<std::filesystem::path> keywords;
  std::filesystem::path periods;
  std::optional<std::filesystem::path> spoken_langs;
  std::vector<std::filesystem::path> domain_lists;
  std::optional<std::filesystem::path> shorteners;
  std::optional<std::filesystem::path> status;
  std::vector<std::filesystem::path> labels;
  std::optional<std::filesystem::path> exclusions;
  std::filesystem::path out = "out";

  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::string reference_lang = "en";
  std::size_t min_users = 2000;
  double min_frac = 0.01;
  std::size_t sample_n = 20;
  std::size_t round2_top = 10;
  std::size_t round2_exclude = 50;
  std::size_t stance_threshold = 10;
  std::int64_t prune_rt = 1;
  std::int64_t prune_co = 2;
  double dominance = 0.9;
  std::optional<std::size_t> k_absorb;  // nullopt: per-side default policy
  std::size_t n_walks = 0;               // 0: exact RWC only
  bool walk_reversed = false;
  double min_lowcred_imports = 10;
  std::set<std::string> lowcred_languages;  // languages covered by the domain lists

  std::string digest;  // of the config text

  static PipelineConfig load(const std::filesystem::path& path);
  static PipelineConfig from_doc(const KeyValueDoc& doc, const std::filesystem::path& base_dir, std::string_view text);
  /// Checks threshold ranges; path existence is checked by the stages that need them.
  void validate() const;
};

}  // namespace polarnet
