#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "polarnet/annotate.hpp"
#include "polarnet/common.hpp"
#include "polarnet/ingest.hpp"
#include "polarnet/lowcred.hpp"

namespace polarnet {

enum class CellState : std::uint8_t { value = 0, masked = 1, infinite = 2 };
enum class FlowKind { raw, normalized, density_ratio, lowcred_rate, lowcred_share };

std::string_view to_string(FlowKind kind);

using CellStates = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Retweet counts between countries: row i is the retweeting country, column
/// j the retweeted one (a_ij = retweets by users of i of users of j).
struct RetweetCounts {
  std::vector<CountryCode> countries;
  Eigen::MatrixXd counts;

  Eigen::VectorXd out_strength() const { return counts.rowwise().sum(); }
  Eigen::VectorXd in_strength() const { return counts.colwise().sum().transpose(); }
  double total() const { return counts.sum(); }
};

/// Country x country matrix in display orientation: entry (i, j) is the
/// information flowing from country j into country i. Cells may be masked
/// (undefined) or infinite; those never carry a numeric value.
struct FlowMatrix {
  std::vector<CountryCode> countries;
  Eigen::MatrixXd values;
  CellStates state;
  FlowKind kind = FlowKind::raw;
  std::vector<std::string> warnings;

  FlowMatrix() = default;
  FlowMatrix(std::vector<CountryCode> c, FlowKind k);

  Eigen::Index size() const { return static_cast<Eigen::Index>(countries.size()); }
  bool defined(Eigen::Index i, Eigen::Index j) const { return state(i, j) == static_cast<std::uint8_t>(CellState::value); }
  void mask(Eigen::Index i, Eigen::Index j);
  void set_infinite(Eigen::Index i, Eigen::Index j);
  void set(Eigen::Index i, Eigen::Index j, double v);
  std::optional<double> at(const CountryCode& to, const CountryCode& from) const;
  Eigen::Index index_of(const CountryCode& country) const;
};

/// Information flows j -> i when users of i retweet users of j, so the
/// retweet layout maps onto the display layout without transposition.
FlowMatrix to_flow_matrix(const RetweetCounts& counts);

/// a_ij over retweet events inside `period`, diagonal included.
RetweetCounts raw_rt_matrix(std::span<const TweetEvent> events, const UserCountries& user_geo,
                            const std::vector<CountryCode>& countries, const std::optional<Period>& period = std::nullopt);

/// n_ij = a_ij E / (s_out_i s_in_j) off the diagonal; diagonal and zero-marginal cells masked.
FlowMatrix normalize_flow(const RetweetCounts& raw);

/// Users of each country's RT network with their community stance.
using StanceCohorts = std::map<CountryCode, std::unordered_map<std::string, Stance>>;

struct DensityRatio {
  FlowMatrix theta;         // delta^A_ij / delta^O_ij
  Eigen::MatrixXd edges_a;  // E^A_ij
  Eigen::MatrixXd edges_o;  // E^O_ij
  Eigen::VectorXd size_a;   // |V^A_i|
  Eigen::VectorXd size_o;   // |V^O_i|
};

/// Cross-border retweet density between no-vax cohorts relative to the rest.
/// Countries without cohorts, or without any A user, are masked.
DensityRatio density_ratio(std::span<const TweetEvent> events, const StanceCohorts& cohorts,
                           const std::vector<CountryCode>& countries);

/// Ratio of two densities with the masking rules for zero denominators.
CellState theta_cell(double delta_a, double delta_o, double& theta);

struct LowcredImports {
  FlowMatrix rate;                // low-cred retweets / retweets, per (importer i, source j)
  FlowMatrix share;               // importer i's low-cred URLs coming from j
  Eigen::MatrixXd retweets;       // cross-border retweets
  Eigen::MatrixXd lowcred_retweets;
  Eigen::MatrixXd lowcred_urls;
};

LowcredImports lowcred_import_matrix(std::span<const TweetEvent> events, const UserCountries& user_geo,
                                     const std::vector<CountryCode>& countries, const DomainList& domains,
                                     const ShortenerMap* shorteners = nullptr, double min_imports = 10);

/// CSV with a country header row and column; masked cells as "NA", infinite as "Inf".
std::string flow_csv(const FlowMatrix& m, std::string_view comment = {});
void save_flow_csv(const std::filesystem::path& path, const FlowMatrix& m, std::string_view comment = {});

/// Heatmap; diverging around 1 (log2 scale) for normalized and density-ratio matrices.
std::string flow_svg(const FlowMatrix& m, std::string_view title);

}  // namespace polarnet
