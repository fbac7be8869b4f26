#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "polarnet/geolocate.hpp"

using namespace polarnet;
using fixtures::post;
using fixtures::retweet;

namespace {

Gazetteer toy_gazetteer() {
  Gazetteer g;
  g.add_place("paris", "FR");
  g.add_place("france", "FR");
  g.add_place("berlin", "DE");
  g.add_place("bonn", "DE");
  g.add_place("lyon", "FR");
  g.add_place("new york", "US");
  g.add_place("paris texas", "US");
  g.add_stopword("worldwide");
  g.add_stopword("earth");
  return g;
}

TweetEvent located(std::string id, std::string user, std::string when, std::string where) {
  auto e = post(std::move(id), std::move(user), std::move(when));
  e.profile_location = std::move(where);
  return e;
}

}  // namespace

TEST_CASE("normalize_location") {
  CHECK(normalize_location("  📍 Paris,   France ✨ ") == "paris, france");
  CHECK(normalize_location("NEW\tYORK!!") == "new york");
  CHECK(normalize_location("Zürich") == "zürich");
  CHECK(normalize_location("🌍🌍") == "");
}

TEST_CASE("match_location examples") {
  const auto g = toy_gazetteer();
  CHECK(match_location("Paris, France", g) == std::optional<CountryCode>("FR"));
  CHECK_FALSE(match_location("worldwide", g).has_value());
  CHECK_FALSE(match_location("Springfield", g).has_value());
}

TEST_CASE("match_location segment rules") {
  const auto g = toy_gazetteer();
  // A stoplisted segment rejects the whole string.
  CHECK_FALSE(match_location("Paris, Earth", g).has_value());
  // Longest matching segment wins.
  CHECK(match_location("Paris Texas, France", g) == std::optional<CountryCode>("US"));
  // Rightmost on equal length.
  CHECK(match_location("Bonn, Lyon", g) == std::optional<CountryCode>("FR"));
  CHECK(match_location("Lyon, Bonn", g) == std::optional<CountryCode>("DE"));
}

TEST_CASE("match_location ignores case and outer whitespace") {
  const auto g = toy_gazetteer();
  std::mt19937_64 rng(4);
  const std::vector<std::string> inputs = {"paris, france", "berlin", "new york", "springfield", "worldwide"};
  for (const auto& in : inputs) {
    const auto base = match_location(in, g);
    for (int i = 0; i < 20; ++i) {
      std::string v = std::string(rng() % 3, ' ') + in + std::string(rng() % 3, '\t');
      for (auto& c : v)
        if (rng() % 2) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      CHECK(match_location(v, g) == base);
    }
  }
}

TEST_CASE("assign_countries examples") {
  const auto g = toy_gazetteer();
  std::vector<PeriodEvents> periods(4);
  for (int p = 0; p < 4; ++p) {
    periods[p].period = "P" + std::to_string(p + 1);
    periods[p].events.push_back(located("s" + std::to_string(p), "stay", "2021-01-01T00:00:00Z", "New York"));
  }
  periods[0].events.push_back(located("m0", "mover", "2021-01-01T00:00:00Z", "Paris"));
  periods[2].events.push_back(located("m2", "mover", "2021-01-01T00:00:00Z", "Berlin"));
  // Latest location in a period decides.
  periods[1].events.push_back(located("l0", "late", "2021-01-01T00:00:00Z", "Berlin"));
  periods[1].events.push_back(located("l1", "late", "2021-01-02T00:00:00Z", "Paris"));
  periods[1].events.push_back(located("x0", "manual", "2021-01-01T00:00:00Z", "Paris"));

  const auto geo = assign_countries(periods, g, {"manual"});
  CHECK(geo.countries.at("stay") == "US");
  CHECK(geo.countries.at("late") == "FR");
  CHECK_FALSE(geo.countries.contains("mover"));
  CHECK_FALSE(geo.countries.contains("manual"));
  REQUIRE(geo.excluded.size() == 2);
  CHECK(geo.excluded[0].user_id == "manual");
  CHECK(geo.excluded[0].reason == "manual");
  CHECK(geo.excluded[1].user_id == "mover");
  CHECK(geo.excluded[1].reason == "country-change");
}

TEST_CASE("dominant retweeted users are flagged") {
  Gazetteer g;
  g.add_place("mexico", "MX");
  g.add_place("argentina", "AR");
  std::vector<PeriodEvents> periods(1);
  periods[0].period = "P";
  auto& ev = periods[0].events;
  for (int i = 0; i < 10; ++i) ev.push_back(located("a" + std::to_string(i), "mx" + std::to_string(i), "2021-01-01T00:00:00Z", "Mexico"));
  for (int i = 0; i < 5; ++i) ev.push_back(located("b" + std::to_string(i), "ar" + std::to_string(i), "2021-01-01T00:00:00Z", "Argentina"));
  // 10 MX -> AR retweets, 6 of them of ar0, the rest spread.
  for (int i = 0; i < 10; ++i)
    ev.push_back(retweet("r" + std::to_string(i), "mx" + std::to_string(i), i < 6 ? "ar0" : "ar" + std::to_string(i - 5)));
  const auto geo = assign_countries(periods, g);
  REQUIRE(geo.flagged.size() == 1);
  CHECK(geo.flagged[0].user_id == "ar0");
  CHECK(geo.flagged[0].retweeting_country == "MX");
  CHECK(geo.flagged[0].retweeted_country == "AR");
  CHECK(geo.flagged[0].share == doctest::Approx(0.6).epsilon(1e-12));
}

namespace {

// `counts[p]` active users in country "XX" during period p.
std::pair<UserGeo, std::vector<PeriodEvents>> activity(const std::vector<std::size_t>& counts) {
  UserGeo geo;
  std::vector<PeriodEvents> periods(counts.size());
  for (std::size_t p = 0; p < counts.size(); ++p) {
    periods[p].period = "P" + std::to_string(p);
    for (std::size_t i = 0; i < counts[p]; ++i) {
      const auto user = "u" + std::to_string(i);
      geo.countries[user] = "XX";
      periods[p].events.push_back(post("t" + std::to_string(p) + "_" + std::to_string(i), user));
    }
  }
  return {geo, periods};
}

}  // namespace

TEST_CASE("eligible_countries threshold") {
  {
    const auto [geo, periods] = activity({2001, 2001, 2001, 2001});
    CHECK(eligible_countries(geo, periods, 2000) == std::set<CountryCode>{"XX"});
  }
  {
    const auto [geo, periods] = activity({2001, 2000, 2001, 2001});
    CHECK(eligible_countries(geo, periods, 2000).empty());
  }
  {
    const auto [geo, periods] = activity({2, 3, 2});
    CHECK(eligible_countries(geo, periods, 1) == std::set<CountryCode>{"XX"});
  }
  CHECK_THROWS_AS(eligible_countries(UserGeo{}, std::vector<PeriodEvents>{}, 0), InvalidArgument);
}

TEST_CASE("eligible_countries shrinks as min_users grows") {
  std::mt19937_64 rng(8);
  UserGeo geo;
  std::vector<PeriodEvents> periods(3);
  const std::vector<CountryCode> ccs = {"AA", "BB", "CC", "DD"};
  for (int u = 0; u < 400; ++u) geo.countries["u" + std::to_string(u)] = ccs[rng() % ccs.size()];
  for (int p = 0; p < 3; ++p)
    for (int i = 0; i < 600; ++i) periods[p].events.push_back(post(std::to_string(p * 1000 + i), "u" + std::to_string(rng() % 400)));
  auto previous = eligible_countries(geo, periods, 1);
  for (std::size_t m = 2; m < 120; m += 3) {
    const auto now = eligible_countries(geo, periods, m);
    CHECK(std::includes(previous.begin(), previous.end(), now.begin(), now.end()));
    previous = now;
  }
}

TEST_CASE("gazetteer and exclusion files") {
  const auto dir = std::filesystem::temp_directory_path() / "polarnet_geo_test";
  write_file(dir / "g.tsv", "Paris\tFR\n  New   York \tUS\n");
  write_file(dir / "s.tsv", "Worldwide\n");
  write_file(dir / "x.tsv", "# users\nbad1\nbad2\n");
  const auto g = Gazetteer::load(dir / "g.tsv", dir / "s.tsv");
  CHECK(g.lookup("new york") == std::optional<CountryCode>("US"));
  CHECK(g.is_stopword("worldwide"));
  CHECK(load_exclusions(dir / "x.tsv") == std::set<std::string>{"bad1", "bad2"});
  std::filesystem::remove_all(dir);
}
