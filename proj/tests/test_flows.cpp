#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "polarnet/flows.hpp"
#include "polarnet/lowcred.hpp"

using namespace polarnet;
using fixtures::retweet;

namespace {

RetweetCounts counts(std::vector<CountryCode> cc, const Eigen::MatrixXd& a) { return {std::move(cc), a}; }

// `n` users named "<cc><stance><i>".
void cohort(StanceCohorts& cohorts, UserCountries& geo, const CountryCode& cc, Stance s, int n) {
  for (int i = 0; i < n; ++i) {
    const auto user = cc + std::string(to_string(s)) + std::to_string(i);
    cohorts[cc][user] = s;
    geo[user] = cc;
  }
}

std::vector<TweetEvent> cross(const std::string& from_prefix, const std::string& to_prefix, int n) {
  static int next = 0;
  std::vector<TweetEvent> out;
  for (int k = 0; k < n; ++k)
    out.push_back(retweet("x" + std::to_string(next++), from_prefix + std::to_string(k % 10), to_prefix + std::to_string((k / 10) % 10)));
  return out;
}

}  // namespace

TEST_CASE("raw_rt_matrix counts") {
  const UserCountries geo = {{"f", "FR"}, {"d", "DE"}, {"u1", "US"}, {"u2", "US"}};
  std::vector<TweetEvent> events = {retweet("1", "f", "d")};
  for (int i = 0; i < 10; ++i) events.push_back(retweet("u" + std::to_string(i), "u1", "u2"));
  events.push_back(retweet("late", "f", "d", "x", "2022-01-01T00:00:00Z"));
  const std::vector<CountryCode> cc = {"DE", "FR", "US"};
  const auto period = make_period("P", "2021-01-01T00:00:00Z", "2021-06-01T00:00:00Z");
  const auto raw = raw_rt_matrix(events, geo, cc, period);
  CHECK(raw.counts(1, 0) == 1.0);
  CHECK(raw.counts(0, 1) == 0.0);
  CHECK(raw.counts(2, 2) == 10.0);
  CHECK(raw.total() == 11.0);
  CHECK(raw_rt_matrix(events, geo, cc).counts(1, 0) == 2.0);
  const auto m = to_flow_matrix(raw);
  CHECK(m.at("FR", "DE") == std::optional<double>(1.0));
}

TEST_CASE("raw_rt_matrix equals a hand count on a three-country fixture") {
  std::mt19937_64 rng(3);
  const std::vector<CountryCode> cc = {"AA", "BB", "CC"};
  UserCountries geo;
  for (int u = 0; u < 30; ++u) geo["u" + std::to_string(u)] = cc[u % 3];
  std::vector<TweetEvent> events;
  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(3, 3);
  for (int i = 0; i < 500; ++i) {
    const auto a = rng() % 33, b = rng() % 33;  // 30..32 unlocated
    events.push_back(retweet(std::to_string(i), "u" + std::to_string(a), "u" + std::to_string(b)));
    if (a < 30 && b < 30) expected(a % 3, b % 3) += 1.0;
  }
  const auto raw = raw_rt_matrix(events, geo, cc);
  CHECK(raw.counts == expected);
  CHECK(raw.out_strength().sum() == raw.total());
  CHECK(raw.in_strength().sum() == raw.total());
}

TEST_CASE("normalize_flow arithmetic") {
  Eigen::MatrixXd a(2, 2);
  a << 0, 2, 8, 0;
  const auto n = normalize_flow(counts({"C1", "C2"}, a));
  CHECK(n.values(0, 1) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(n.values(1, 0) == doctest::Approx(1.25).epsilon(1e-12));
  CHECK_FALSE(n.defined(0, 0));
  CHECK_FALSE(n.defined(1, 1));
}

TEST_CASE("normalize_flow is 1 on expectation-matched matrices") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.5, 20.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index k = 2 + static_cast<Eigen::Index>(rng() % 6);
    Eigen::VectorXd so(k), si(k);
    for (Eigen::Index i = 0; i < k; ++i) so(i) = u(rng), si(i) = u(rng);
    si *= so.sum() / si.sum();
    const double e = so.sum();
    Eigen::MatrixXd a = so * si.transpose() / e;
    std::vector<CountryCode> cc;
    for (Eigen::Index i = 0; i < k; ++i) cc.push_back("C" + std::to_string(i));
    const auto raw = counts(cc, a);
    CHECK(std::abs(raw.out_strength().sum() - raw.in_strength().sum()) < 1e-9 * e);
    const auto n = normalize_flow(raw);
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < k; ++j)
        if (i != j) CHECK(std::abs(n.values(i, j) - 1.0) < 1e-9);
  }
}

TEST_CASE("normalize_flow masks zero marginals and ignores duplication") {
  Eigen::MatrixXd a(3, 3);
  a << 1, 2, 0, 3, 4, 0, 0, 0, 0;
  const auto n = normalize_flow(counts({"A", "B", "C"}, a));
  CHECK_FALSE(n.defined(2, 0));
  CHECK_FALSE(n.defined(0, 2));
  CHECK_FALSE(n.warnings.empty());
  const auto doubled = normalize_flow(counts({"A", "B", "C"}, 2.0 * a));
  CHECK(doubled.values(0, 1) == doctest::Approx(n.values(0, 1)).epsilon(1e-12));
  CHECK(doubled.values(1, 0) == doctest::Approx(n.values(1, 0)).epsilon(1e-12));
}

TEST_CASE("theta arithmetic") {
  double theta = 0.0;
  CHECK(theta_cell(0.05, 0.005, theta) == CellState::value);
  CHECK(std::abs(theta - 10.0) <= 1e-12);
  CHECK(theta_cell(0.3, 0.3, theta) == CellState::value);
  CHECK(theta == 1.0);
  CHECK(theta_cell(0.1, 0.0, theta) == CellState::infinite);
  CHECK(theta_cell(0.0, 0.0, theta) == CellState::masked);
}

TEST_CASE("density_ratio hand fixture") {
  // |V^A| = 10 and |V^O| = 100 per country; E^A = 5 and E^O = 50 from FR to DE.
  StanceCohorts cohorts;
  UserCountries geo;
  for (const CountryCode cc : {"FR", "DE"}) {
    cohort(cohorts, geo, cc, Stance::A, 10);
    cohort(cohorts, geo, cc, Stance::O, 100);
  }
  cohort(cohorts, geo, "IT", Stance::O, 5);  // no A cohort
  std::vector<TweetEvent> events = cross("FRA", "DEA", 5);
  const auto o = cross("FRO", "DEO", 50);
  events.insert(events.end(), o.begin(), o.end());
  const auto more = cross("FRA", "ITO", 5);  // A -> O retweets are ignored
  events.insert(events.end(), more.begin(), more.end());
  const std::vector<CountryCode> cc = {"DE", "FR", "IT", "ES"};
  const auto dr = density_ratio(events, cohorts, cc);
  const auto theta = dr.theta.at("FR", "DE");
  REQUIRE(theta.has_value());
  CHECK(std::abs(*theta - 10.0) <= 1e-12);
  CHECK(dr.edges_a(1, 0) == 5.0);
  CHECK(dr.edges_o(1, 0) == 50.0);
  CHECK_FALSE(dr.theta.defined(0, 1));  // no traffic DE -> FR: both densities zero
  CHECK_FALSE(dr.theta.defined(1, 2));  // IT lacks a no-vax cohort
  CHECK_FALSE(dr.theta.defined(2, 1));
  CHECK_FALSE(dr.theta.defined(3, 1));  // ES has no stance map at all
  CHECK_FALSE(dr.theta.defined(1, 3));
}

TEST_CASE("lowcred import matrices") {
  DomainList list;
  list.add("bad.com");
  UserCountries geo;
  for (const CountryCode cc : {"AA", "BB", "CC"})
    for (int i = 0; i < 3; ++i) geo[cc + std::to_string(i)] = cc;
  std::vector<TweetEvent> events;
  int id = 0;
  const auto rt = [&](const std::string& from, const std::string& to, bool bad) {
    auto e = retweet(std::to_string(id++), from, to);
    e.urls = {bad ? "https://www.bad.com/x" : "https://ok.org/y"};
    events.push_back(e);
  };
  for (int i = 0; i < 12; ++i) rt("AA0", "BB1", true);  // AA imports 12 from BB
  for (int i = 0; i < 4; ++i) rt("AA1", "CC0", false);
  for (int i = 0; i < 9; ++i) rt("BB0", "CC1", true);  // BB imports only 9
  rt("BB0", "AA1", false);
  rt("CC0", "CC1", true);  // domestic, ignored
  const std::vector<CountryCode> cc = {"AA", "BB", "CC"};
  const auto m = lowcred_import_matrix(events, geo, cc, list);
  CHECK(m.rate.at("AA", "BB") == std::optional<double>(1.0));
  CHECK(m.rate.at("AA", "CC") == std::optional<double>(0.0));
  CHECK(m.rate.at("BB", "CC") == std::optional<double>(1.0));
  CHECK(m.rate.at("BB", "AA") == std::optional<double>(0.0));
  CHECK_FALSE(m.rate.at("CC", "AA").has_value());
  CHECK(m.share.at("AA", "BB") == std::optional<double>(1.0));
  CHECK(m.share.at("AA", "CC") == std::optional<double>(0.0));
  CHECK_FALSE(m.share.at("BB", "CC").has_value());
  CHECK_FALSE(m.share.at("CC", "AA").has_value());
  CHECK(m.lowcred_retweets(0, 1) == 12.0);
}

TEST_CASE("lowcred share rows sum to one") {
  std::mt19937_64 rng(6);
  DomainList list;
  list.add("bad.com");
  UserCountries geo;
  const std::vector<CountryCode> cc = {"AA", "BB", "CC", "DD"};
  for (int u = 0; u < 40; ++u) geo["u" + std::to_string(u)] = cc[u % 4];
  std::vector<TweetEvent> events;
  for (int i = 0; i < 3000; ++i) {
    auto e = retweet(std::to_string(i), "u" + std::to_string(rng() % 40), "u" + std::to_string(rng() % 40));
    e.urls = {rng() % 3 ? "https://ok.org" : "https://bad.com/z"};
    events.push_back(e);
  }
  const auto m = lowcred_import_matrix(events, geo, cc, list);
  for (Eigen::Index i = 0; i < 4; ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < 4; ++j)
      if (m.share.defined(i, j)) row += m.share.values(i, j);
    CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("flow CSV and SVG") {
  Eigen::MatrixXd a(2, 2);
  a << 0, 2, 8, 0;
  const auto n = normalize_flow(counts({"C1", "C2"}, a));
  const auto csv = flow_csv(n, "# c");
  CHECK(csv.find("NA") != std::string::npos);
  CHECK(csv.find("C1,C2") != std::string::npos);
  CHECK(csv.find(",5") != std::string::npos);
  const auto svg = flow_svg(n, "t");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(to_string(FlowKind::density_ratio) == "density-ratio");
}
