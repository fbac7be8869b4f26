#include "polarnet/config.hpp"

#include <algorithm>
#include <charconv>

#include "polarnet/common.hpp"

namespace polarnet {

KeyValueDoc KeyValueDoc::parse(std::string_view text) {
  KeyValueDoc doc;
  std::size_t line_no = 0;
  for (const auto raw : split(text, '\n')) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw FormatError("line " + std::to_string(line_no) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw FormatError("line " + std::to_string(line_no) + ": empty key");
    doc.entries_.emplace_back(std::string(key), std::string(trim(line.substr(eq + 1))));
  }
  return doc;
}

KeyValueDoc KeyValueDoc::load(const std::filesystem::path& path) { return parse(read_file(path)); }

std::optional<std::string> KeyValueDoc::get(std::string_view key) const {
  for (auto it = entries_.rbegin(); it != entries_.rend(); ++it)
    if (it->first == key) return it->second;
  return std::nullopt;
}

std::vector<std::string> KeyValueDoc::get_all(std::string_view key) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_)
    if (k == key) out.push_back(v);
  return out;
}

std::string KeyValueDoc::get_string(std::string_view key, std::string fallback) const {
  auto v = get(key);
  return v ? *v : std::move(fallback);
}

double KeyValueDoc::get_double(std::string_view key, double fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    const double d = std::stod(*v, &used);
    if (used != v->size()) throw FormatError("");
    return d;
  } catch (const std::exception&) {
    throw FormatError("key " + std::string(key) + ": not a number: " + *v);
  }
}

std::int64_t KeyValueDoc::get_int(std::string_view key, std::int64_t fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  std::int64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc{} || ptr != v->data() + v->size())
    throw FormatError("key " + std::string(key) + ": not an integer: " + *v);
  return out;
}

bool KeyValueDoc::get_bool(std::string_view key, bool fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  const auto t = to_lower_ascii(*v);
  if (t == "true" || t == "yes" || t == "1") return true;
  if (t == "false" || t == "no" || t == "0") return false;
  throw FormatError("key " + std::string(key) + ": not a boolean: " + *v);
}

void KeyValueDoc::require_known(const std::set<std::string>& known) const {
  for (const auto& [k, _] : entries_)
    if (!known.contains(k)) throw FormatError("unknown key: " + k);
}

std::vector<std::string> split_list(std::string_view value) {
  std::vector<std::string> out;
  for (const auto part : split(value, ',')) {
    const auto t = trim(part);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

namespace {

const std::set<std::string> kConfigKeys = {
    "events",           "gazetteer",     "stoplist",       "keywords",         "periods",        "spoken_langs",
    "domains",          "shorteners",    "status",         "labels",           "exclusions",     "out",
    "seed",             "workers",       "reference_lang", "min_users",        "min_frac",       "sample_n",
    "round2_top",       "round2_exclude", "stance_threshold", "prune_rt",      "prune_co",       "dominance",
    "k_absorb",         "n_walks",       "walk_reversed",  "min_lowcred_imports", "lowcred_languages"};

}  // namespace

PipelineConfig PipelineConfig::from_doc(const KeyValueDoc& doc, const std::filesystem::path& base_dir,
                                        std::string_view text) {
  doc.require_known(kConfigKeys);
  const auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  const auto optional_path = [&](const char* key) -> std::optional<std::filesystem::path> {
    const auto v = doc.get(key);
    if (!v || v->empty()) return std::nullopt;
    return resolve(*v);
  };
  const auto count = [&](const char* key, std::int64_t fallback) {
    const auto v = doc.get_int(key, fallback);
    if (v < 0) throw FormatError(std::string("key ") + key + " must be non-negative");
    return static_cast<std::size_t>(v);
  };

  PipelineConfig c;
  const auto require = [&](const char* key) {
    const auto v = doc.get(key);
    if (!v || v->empty()) throw FormatError(std::string("missing required key ") + key);
    return resolve(*v);
  };
  c.events = require("events");
  c.gazetteer = require("gazetteer");
  c.periods = require("periods");
  c.stoplist = optional_path("stoplist");
  c.keywords = optional_path("keywords");
  c.spoken_langs = optional_path("spoken_langs");
  c.shorteners = optional_path("shorteners");
  c.status = optional_path("status");
  c.exclusions = optional_path("exclusions");
  for (const auto& d : split_list(doc.get_string("domains", ""))) c.domain_lists.push_back(resolve(d));
  for (const auto& l : split_list(doc.get_string("labels", ""))) c.labels.push_back(resolve(l));
  c.out = resolve(doc.get_string("out", "out"));

  c.seed = static_cast<std::uint64_t>(doc.get_int("seed", 1));
  c.workers = static_cast<unsigned>(std::max<std::int64_t>(1, doc.get_int("workers", 1)));
  c.reference_lang = doc.get_string("reference_lang", "en");
  c.min_users = count("min_users", 2000);
  c.min_frac = doc.get_double("min_frac", 0.01);
  c.sample_n = count("sample_n", 20);
  c.round2_top = count("round2_top", 10);
  c.round2_exclude = count("round2_exclude", 50);
  c.stance_threshold = count("stance_threshold", 10);
  c.prune_rt = doc.get_int("prune_rt", 1);
  c.prune_co = doc.get_int("prune_co", 2);
  c.dominance = doc.get_double("dominance", 0.9);
  if (const auto k = doc.get("k_absorb"); k && *k != "auto") c.k_absorb = count("k_absorb", 10);
  c.n_walks = count("n_walks", 0);
  c.walk_reversed = doc.get_bool("walk_reversed", false);
  c.min_lowcred_imports = doc.get_double("min_lowcred_imports", 10);
  for (const auto& l : split_list(doc.get_string("lowcred_languages", ""))) c.lowcred_languages.insert(l);
  c.digest = hex64(fnv1a64(text));
  c.validate();
  return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  const auto text = read_file(path);
  return from_doc(KeyValueDoc::parse(text), path.parent_path(), text);
}

void PipelineConfig::validate() const {
  if (min_users < 1) throw InvalidArgument("min_users must be >= 1");
  if (!(min_frac >= 0.0 && min_frac < 1.0)) throw InvalidArgument("min_frac must lie in [0, 1)");
  if (sample_n < 1) throw InvalidArgument("sample_n must be >= 1");
  if (prune_rt < 1 || prune_co < 1) throw InvalidArgument("prune weights must be >= 1");
  if (!(dominance > 0.0 && dominance <= 1.0)) throw InvalidArgument("dominance must lie in (0, 1]");
  if (k_absorb && *k_absorb < 1) throw InvalidArgument("k_absorb must be >= 1");
  if (min_lowcred_imports < 0) throw InvalidArgument("min_lowcred_imports must be >= 0");
}

}  // namespace polarnet
