#include "polarnet/flows.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace polarnet {

std::string_view to_string(FlowKind kind) {
  switch (kind) {
    case FlowKind::raw:
      return "raw";
    case FlowKind::normalized:
      return "normalized";
    case FlowKind::density_ratio:
      return "density-ratio";
    case FlowKind::lowcred_rate:
      return "lowcred-rate";
    case FlowKind::lowcred_share:
      return "lowcred-share";
  }
  return "raw";
}

FlowMatrix::FlowMatrix(std::vector<CountryCode> c, FlowKind k) : countries(std::move(c)), kind(k) {
  const auto n = size();
  values = Eigen::MatrixXd::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
  state = CellStates::Constant(n, n, static_cast<std::uint8_t>(CellState::masked));
}

void FlowMatrix::mask(Eigen::Index i, Eigen::Index j) {
  values(i, j) = std::numeric_limits<double>::quiet_NaN();
  state(i, j) = static_cast<std::uint8_t>(CellState::masked);
}

void FlowMatrix::set_infinite(Eigen::Index i, Eigen::Index j) {
  values(i, j) = std::numeric_limits<double>::infinity();
  state(i, j) = static_cast<std::uint8_t>(CellState::infinite);
}

void FlowMatrix::set(Eigen::Index i, Eigen::Index j, double v) {
  values(i, j) = v;
  state(i, j) = static_cast<std::uint8_t>(CellState::value);
}

Eigen::Index FlowMatrix::index_of(const CountryCode& country) const {
  const auto it = std::find(countries.begin(), countries.end(), country);
  if (it == countries.end()) return -1;
  return static_cast<Eigen::Index>(it - countries.begin());
}

std::optional<double> FlowMatrix::at(const CountryCode& to, const CountryCode& from) const {
  const auto i = index_of(to);
  const auto j = index_of(from);
  if (i < 0 || j < 0) throw InvalidArgument("flow matrix: unknown country");
  if (state(i, j) == static_cast<std::uint8_t>(CellState::masked)) return std::nullopt;
  return values(i, j);
}

FlowMatrix to_flow_matrix(const RetweetCounts& counts) {
  FlowMatrix m(counts.countries, FlowKind::raw);
  m.values = counts.counts;
  m.state.setZero();
  return m;
}

namespace {

std::unordered_map<std::string, Eigen::Index> country_index(const std::vector<CountryCode>& countries) {
  std::unordered_map<std::string, Eigen::Index> index;
  for (std::size_t i = 0; i < countries.size(); ++i) {
    if (!index.emplace(countries[i], static_cast<Eigen::Index>(i)).second)
      throw InvalidArgument("duplicate country " + countries[i]);
  }
  return index;
}

}  // namespace

RetweetCounts raw_rt_matrix(std::span<const TweetEvent> events, const UserCountries& user_geo,
                            const std::vector<CountryCode>& countries, const std::optional<Period>& period) {
  const auto index = country_index(countries);
  const auto n = static_cast<Eigen::Index>(countries.size());
  RetweetCounts rc{countries, Eigen::MatrixXd::Zero(n, n)};
  const auto locate = [&](const std::string& user) -> Eigen::Index {
    const auto g = user_geo.find(user);
    if (g == user_geo.end()) return -1;
    const auto c = index.find(g->second);
    return c == index.end() ? -1 : c->second;
  };
  for (const auto& e : events) {
    if (!e.is_retweet() || (period && !period->contains(e.timestamp))) continue;
    const auto i = locate(e.user_id);
    const auto j = locate(*e.retweeted_user_id);
    if (i >= 0 && j >= 0) rc.counts(i, j) += 1.0;
  }
  return rc;
}

FlowMatrix normalize_flow(const RetweetCounts& raw) {
  FlowMatrix m(raw.countries, FlowKind::normalized);
  const Eigen::VectorXd s_out = raw.out_strength();
  const Eigen::VectorXd s_in = raw.in_strength();
  const double total = s_out.sum();
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    for (Eigen::Index j = 0; j < m.size(); ++j) {
      if (i == j) continue;
      if (s_out(i) <= 0.0 || s_in(j) <= 0.0) {
        m.warnings.push_back("zero marginal for " + raw.countries[static_cast<std::size_t>(i)] + " -> " +
                             raw.countries[static_cast<std::size_t>(j)]);
        continue;
      }
      m.set(i, j, raw.counts(i, j) / (s_out(i) * s_in(j)) * total);
    }
  }
  return m;
}

CellState theta_cell(double delta_a, double delta_o, double& theta) {
  if (delta_o > 0.0) {
    theta = delta_a / delta_o;
    return CellState::value;
  }
  if (delta_a > 0.0) {
    theta = std::numeric_limits<double>::infinity();
    return CellState::infinite;
  }
  theta = std::numeric_limits<double>::quiet_NaN();
  return CellState::masked;
}

DensityRatio density_ratio(std::span<const TweetEvent> events, const StanceCohorts& cohorts,
                           const std::vector<CountryCode>& countries) {
  const auto index = country_index(countries);
  const auto n = static_cast<Eigen::Index>(countries.size());
  DensityRatio dr{FlowMatrix(countries, FlowKind::density_ratio), Eigen::MatrixXd::Zero(n, n),
                  Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};

  struct Member {
    Eigen::Index country;
    Stance stance;
  };
  std::unordered_map<std::string, Member> members;
  std::vector<bool> labelled(static_cast<std::size_t>(n), false);
  for (const auto& [cc, users] : cohorts) {
    const auto it = index.find(cc);
    if (it == index.end()) continue;
    labelled[static_cast<std::size_t>(it->second)] = true;
    for (const auto& [user, stance] : users) {
      if (!members.emplace(user, Member{it->second, stance}).second)
        throw InvalidArgument("user " + user + " belongs to more than one country cohort");
      (stance == Stance::A ? dr.size_a : dr.size_o)(it->second) += 1.0;
    }
  }

  for (const auto& e : events) {
    if (!e.is_retweet()) continue;
    const auto src = members.find(e.user_id);
    const auto dst = members.find(*e.retweeted_user_id);
    if (src == members.end() || dst == members.end()) continue;
    const auto& a = src->second;
    const auto& b = dst->second;
    if (a.country == b.country || a.stance != b.stance) continue;
    (a.stance == Stance::A ? dr.edges_a : dr.edges_o)(a.country, b.country) += 1.0;
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto ui = static_cast<std::size_t>(i);
      const auto uj = static_cast<std::size_t>(j);
      if (!labelled[ui] || !labelled[uj] || dr.size_a(i) == 0 || dr.size_a(j) == 0) continue;
      if (dr.size_o(i) == 0 || dr.size_o(j) == 0) continue;
      const double delta_a = dr.edges_a(i, j) / (dr.size_a(i) * dr.size_a(j));
      const double delta_o = dr.edges_o(i, j) / (dr.size_o(i) * dr.size_o(j));
      double theta = 0.0;
      switch (theta_cell(delta_a, delta_o, theta)) {
        case CellState::value:
          dr.theta.set(i, j, theta);
          break;
        case CellState::infinite:
          dr.theta.set_infinite(i, j);
          break;
        case CellState::masked:
          break;
      }
    }
  }
  return dr;
}

LowcredImports lowcred_import_matrix(std::span<const TweetEvent> events, const UserCountries& user_geo,
                                     const std::vector<CountryCode>& countries, const DomainList& domains,
                                     const ShortenerMap* shorteners, double min_imports) {
  const auto index = country_index(countries);
  const auto n = static_cast<Eigen::Index>(countries.size());
  LowcredImports out{FlowMatrix(countries, FlowKind::lowcred_rate), FlowMatrix(countries, FlowKind::lowcred_share),
                     Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n), Eigen::MatrixXd::Zero(n, n)};
  const auto locate = [&](const std::string& user) -> Eigen::Index {
    const auto g = user_geo.find(user);
    if (g == user_geo.end()) return -1;
    const auto c = index.find(g->second);
    return c == index.end() ? -1 : c->second;
  };
  for (const auto& e : events) {
    if (!e.is_retweet()) continue;
    const auto i = locate(e.user_id);
    const auto j = locate(*e.retweeted_user_id);
    if (i < 0 || j < 0 || i == j) continue;
    out.retweets(i, j) += 1.0;
    std::size_t hits = 0;
    for (const auto& url : e.urls) {
      const auto resolved = shorteners ? shorteners->resolve(url) : std::string_view(url);
      const auto domain = try_extract_domain(resolved);
      if (domain && domains.matches(*domain)) ++hits;
    }
    if (hits > 0) {
      out.lowcred_retweets(i, j) += 1.0;
      out.lowcred_urls(i, j) += static_cast<double>(hits);
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double imported = out.lowcred_urls.row(i).sum();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      if (out.retweets(i, j) > 0) out.rate.set(i, j, out.lowcred_retweets(i, j) / out.retweets(i, j));
      if (imported >= min_imports) out.share.set(i, j, out.lowcred_urls(i, j) / imported);
    }
    if (imported < min_imports) {
      out.share.warnings.push_back(countries[static_cast<std::size_t>(i)] + " imported fewer than " +
                                   format_real(min_imports) + " low-credibility URLs");
    }
  }
  return out;
}

std::string flow_csv(const FlowMatrix& m, std::string_view comment) {
  std::string out;
  if (!comment.empty()) out += "# " + std::string(comment) + "\n";
  out += "country";
  for (const auto& c : m.countries) out += "," + c;
  out += '\n';
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    out += m.countries[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < m.size(); ++j) {
      out += ',';
      switch (static_cast<CellState>(m.state(i, j))) {
        case CellState::value:
          out += format_real(m.values(i, j));
          break;
        case CellState::masked:
          out += "NA";
          break;
        case CellState::infinite:
          out += "Inf";
          break;
      }
    }
    out += '\n';
  }
  return out;
}

void save_flow_csv(const std::filesystem::path& path, const FlowMatrix& m, std::string_view comment) {
  write_file(path, flow_csv(m, comment));
}

namespace {

std::string rgb(double r, double g, double b) {
  char buf[16];
  const auto c = [](double x) { return static_cast<int>(std::lround(std::clamp(x, 0.0, 1.0) * 255.0)); };
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c(r), c(g), c(b));
  return buf;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

}  // namespace

std::string flow_svg(const FlowMatrix& m, std::string_view title) {
  const bool diverging = m.kind == FlowKind::normalized || m.kind == FlowKind::density_ratio;
  double hi = 0.0;
  for (Eigen::Index i = 0; i < m.size(); ++i)
    for (Eigen::Index j = 0; j < m.size(); ++j)
      if (m.defined(i, j)) hi = std::max(hi, diverging ? std::abs(std::log2(std::max(m.values(i, j), 1e-12))) : m.values(i, j));
  if (hi <= 0.0) hi = 1.0;

  constexpr int cell = 28;
  constexpr int margin = 48;
  const int side = static_cast<int>(m.size()) * cell;
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(side + margin + 8) + "\" height=\"" +
         std::to_string(side + margin + 8) + "\">\n";
  out += "<text x=\"4\" y=\"14\" font-size=\"12\">" + xml_escape(title) + "</text>\n";
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    const auto& c = xml_escape(m.countries[static_cast<std::size_t>(k)]);
    out += "<text x=\"" + std::to_string(margin + static_cast<int>(k) * cell + 4) + "\" y=\"" + std::to_string(margin - 6) +
           "\" font-size=\"10\">" + c + "</text>\n";
    out += "<text x=\"4\" y=\"" + std::to_string(margin + static_cast<int>(k) * cell + 18) + "\" font-size=\"10\">" + c +
           "</text>\n";
  }
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    for (Eigen::Index j = 0; j < m.size(); ++j) {
      std::string fill;
      switch (static_cast<CellState>(m.state(i, j))) {
        case CellState::masked:
          fill = "#bbbbbb";
          break;
        case CellState::infinite:
          fill = rgb(0.5, 0.0, 0.0);
          break;
        case CellState::value: {
          const double v = m.values(i, j);
          if (diverging) {
            const double t = std::clamp(std::log2(std::max(v, 1e-12)) / hi, -1.0, 1.0);
            fill = t >= 0 ? rgb(1.0, 1.0 - t, 1.0 - t) : rgb(1.0 + t, 1.0 + t, 1.0);
          } else {
            const double t = std::clamp(v / hi, 0.0, 1.0);
            fill = rgb(1.0 - t, 1.0 - 0.6 * t, 1.0 - 0.2 * t);
          }
          break;
        }
      }
      out += "<rect x=\"" + std::to_string(margin + static_cast<int>(j) * cell) + "\" y=\"" +
             std::to_string(margin + static_cast<int>(i) * cell) + "\" width=\"" + std::to_string(cell) +
             "\" height=\"" + std::to_string(cell) + "\" fill=\"" + fill + "\"/>\n";
    }
  }
  out += "</svg>\n";
  return out;
}

}  // namespace polarnet
