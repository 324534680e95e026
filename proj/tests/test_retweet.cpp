#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bridgenet/errors.hpp"
#include "bridgenet/retweet.hpp"

using namespace bridgenet;

namespace {

const std::filesystem::path kFixtures = BRIDGENET_FIXTURE_DIR;

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << content;
  return path;
}

struct Pipeline {
  ParseReport parsed;
  UserClassification classification;
  PolarizationSeries series;
};

Pipeline run_fixture_pipeline() {
  Pipeline p;
  p.parsed = parse_retweets(kFixtures / "retweets.tsv", 1, 10);
  const IdeologyTable seeds = read_seed_table(kFixtures / "seed_accounts.csv");
  p.classification = classify_users(p.parsed.records, seeds);
  p.series = polarization_series(p.parsed.records, p.classification, seeds, 10);
  return p;
}

}  // namespace

TEST_SUITE("retweet") {

TEST_CASE("fixture parse: window filter, comments, zero malformed lines") {
  const ParseReport report = parse_retweets(kFixtures / "retweets.tsv", 1, 10);
  CHECK(report.data_lines == 47);
  CHECK(report.records.size() == 46);  // the day-12 line falls outside the window
  CHECK(report.malformed_lines.empty());
  for (const auto& rec : report.records) {
    CHECK(rec.day >= 1);
    CHECK(rec.day <= 10);
  }
}

TEST_CASE("window days are rebased to start at 1") {
  const ParseReport report = parse_retweets(kFixtures / "retweets.tsv", 3, 7);
  for (const auto& rec : report.records) {
    CHECK(rec.day >= 1);
    CHECK(rec.day <= 5);
  }
  // day-3 lines land on day 1 of the window
  bool found = false;
  for (const auto& rec : report.records) {
    if (rec.retweeter == "uVic" && rec.author == "CoryBooker") {
      CHECK(rec.day == 1);
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("fixture classification: majority, mixed majority, ties, low activity") {
  const Pipeline p = run_fixture_pipeline();
  REQUIRE(p.classification.size() == 9);
  CHECK(p.classification.at("uAda") == Ideology::D);
  CHECK(p.classification.at("uBen") == Ideology::D);  // 5 D-seed vs 3 R-seed
  CHECK(p.classification.at("uCal") == Ideology::D);  // 3 vs 1 plus a non-seed retweet
  CHECK(p.classification.at("uRex") == Ideology::R);
  CHECK(p.classification.at("uSam") == Ideology::R);  // 4 R-seed vs 3 D-seed
  CHECK(p.classification.at("uVic") == Ideology::R);
  CHECK(p.classification.at("uTam") == Ideology::dropped_tie);  // 2 vs 2
  CHECK(p.classification.at("uNed") == Ideology::dropped_tie);  // two non-seed retweets
  CHECK(p.classification.at("uLow") == Ideology::dropped_low_activity);
}

TEST_CASE("fixture polarization series matches the hand computation") {
  const Pipeline p = run_fixture_pipeline();
  REQUIRE(p.series.y.size() == 10);

  const std::vector<long long> intra = {3, 4, 2, 1, 2, 5, 4, 0, 4, 3};
  const std::vector<long long> cross = {0, 2, 2, 3, 2, 1, 0, 0, 0, 0};
  for (std::size_t d = 0; d < 10; ++d) {
    CHECK(p.series.intra[d] == intra[d]);
    CHECK(p.series.cross[d] == cross[d]);
  }

  REQUIRE(p.series.y[7] == std::nullopt);  // day 8: only dropped users retweeted
  CHECK(*p.series.y[0] == 1.0);
  CHECK(*p.series.y[1] == 2.0 / 3.0);
  CHECK(*p.series.y[2] == 0.5);
  CHECK(*p.series.y[3] == 0.25);
  CHECK(*p.series.y[4] == 0.5);
  CHECK(*p.series.y[5] == 5.0 / 6.0);
  CHECK(*p.series.y[6] == 1.0);
  CHECK(*p.series.y[8] == 1.0);
  CHECK(*p.series.y[9] == 1.0);
}

TEST_CASE("series CSV bytes are the frozen golden block") {
  const Pipeline p = run_fixture_pipeline();
  std::ostringstream out;
  write_series_csv(p.series, out);
  const std::string expected =
      "day,y,intra,cross,gap\n"
      "1,1,3,0,0\n"
      "2,0.66666666666666663,4,2,0\n"
      "3,0.5,2,2,0\n"
      "4,0.25,1,3,0\n"
      "5,0.5,2,2,0\n"
      "6,0.83333333333333337,5,1,0\n"
      "7,1,4,0,0\n"
      "8,,0,0,1\n"
      "9,1,4,0,0\n"
      "10,1,3,0,0\n";
  CHECK(out.str() == expected);
}

TEST_CASE("malformed lines: tolerated below one percent, fatal above") {
  // 1 bad line out of 3 data lines is fatal
  const auto fatal = write_temp("bridgenet_rt_fatal.tsv",
                                "1\tu1\ta1\n"
                                "1\tu1\n"
                                "2\tu2\ta2\n");
  try {
    parse_retweets(fatal, 1, 5);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    REQUIRE(e.line_numbers.size() == 1);
    CHECK(e.line_numbers[0] == 2);
  }
  std::filesystem::remove(fatal);

  // 1 bad line out of 150 is reported but tolerated
  std::ostringstream many;
  for (int i = 0; i < 149; ++i) many << (1 + i % 5) << "\tu" << i << "\ta" << i << "\n";
  many << "5\tbroken\n";
  const auto ok = write_temp("bridgenet_rt_ok.tsv", many.str());
  const ParseReport report = parse_retweets(ok, 1, 5);
  CHECK(report.records.size() == 149);
  REQUIRE(report.malformed_lines.size() == 1);
  CHECK(report.malformed_lines[0] == 150);
  std::filesystem::remove(ok);
}

TEST_CASE("malformed shapes: self retweets, bad day, empty fields") {
  const auto path = write_temp("bridgenet_rt_shapes.tsv",
                               "1\tuser\tuser\n"     // self retweet
                               "x\tu1\ta1\n"         // non-integer day
                               "1\t\ta1\n"           // empty retweeter
                               "1\tu1\ta1\textra\n"  // too many fields
                               "1\tu2\ta2\n");
  try {
    parse_retweets(path, 1, 5);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.line_numbers == std::vector<int>{1, 2, 3, 4});
  }
  std::filesystem::remove(path);
  CHECK_THROWS_AS(parse_retweets(std::filesystem::path("/nonexistent/rt.tsv"), 1, 5), IoError);
}

TEST_CASE("systematic subsample keeps every n-th record") {
  std::vector<RetweetRecord> records;
  for (int i = 0; i < 100; ++i) records.push_back({1 + i / 20, "u" + std::to_string(i), "a"});
  const auto one = systematic_subsample(records, 1);
  CHECK(one.size() == 100);
  const auto twenty = systematic_subsample(records, 20);
  REQUIRE(twenty.size() == 5);
  CHECK(twenty[0].retweeter == "u0");
  CHECK(twenty[1].retweeter == "u20");
  CHECK(twenty[4].retweeter == "u80");
  std::vector<RetweetRecord> five(records.begin(), records.begin() + 5);
  CHECK(systematic_subsample(five, 20).size() == 1);
  CHECK_THROWS_AS(systematic_subsample(records, 0), std::invalid_argument);
}

TEST_CASE("seed table validation") {
  const auto no_header = write_temp("bridgenet_seeds_nh.csv", "alice,D\nbob,R\n");
  const IdeologyTable t = read_seed_table(no_header);
  CHECK(t.party.at("alice") == 'D');
  CHECK(t.party.at("bob") == 'R');
  std::filesystem::remove(no_header);

  const auto bad_party = write_temp("bridgenet_seeds_bp.csv", "account,party\nalice,X\n");
  CHECK_THROWS_AS(read_seed_table(bad_party), FormatError);
  std::filesystem::remove(bad_party);
  const auto one_sided = write_temp("bridgenet_seeds_os.csv", "alice,D\ncarol,D\n");
  CHECK_THROWS_AS(read_seed_table(one_sided), FormatError);
  std::filesystem::remove(one_sided);
}

TEST_CASE("empty series is an error") {
  const IdeologyTable seeds{{{"seedD", 'D'}, {"seedR", 'R'}}};
  // the only user ties 1-1, so no day has an eligible retweet
  std::vector<RetweetRecord> records = {{1, "u", "seedD"}, {2, "u", "seedR"}};
  const UserClassification cls = classify_users(records, seeds);
  CHECK(cls.at("u") == Ideology::dropped_tie);
  CHECK_THROWS_AS(polarization_series(records, cls, seeds, 5), EmptySeriesError);
}

TEST_CASE("discretization maps the observed range onto the canonical grid") {
  PolarizationSeries s;
  s.y = {0.2, std::nullopt, 0.5, 0.8, 0.35};
  s.intra = {1, 0, 1, 4, 7};
  s.cross = {4, 0, 1, 1, 13};
  const DiscretizedSeries d = discretize_series(s, 4);
  REQUIRE(d.observations.size() == 5);
  CHECK(d.lo == 0.2);
  CHECK(d.hi == 0.8);
  CHECK(*d.observations[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(d.observations[1] == std::nullopt);
  CHECK(*d.observations[2] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(*d.observations[3] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(*d.observations[4] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(d.n_states == 4);
  CHECK(d.initial_index == 0);  // first observation sits at canonical 0
  CHECK(d.to_canonical(0.5) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(d.from_canonical(0.5) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(d.from_canonical(d.to_canonical(0.35)) == doctest::Approx(0.35).epsilon(1e-12));

  PolarizationSeries flat;
  flat.y = {0.4, 0.4, 0.4};
  flat.intra = {2, 2, 2};
  flat.cross = {3, 3, 3};
  CHECK_THROWS_AS(discretize_series(flat, 4), DegenerateRangeError);

  PolarizationSeries sparse;
  sparse.y = {0.4, std::nullopt, std::nullopt};
  sparse.intra = {2, 0, 0};
  sparse.cross = {3, 0, 0};
  CHECK_THROWS_AS(discretize_series(sparse, 4), std::invalid_argument);
  CHECK_THROWS_AS(discretize_series(s, 1), std::invalid_argument);
}

TEST_CASE("pipeline output is identical across repeated runs") {
  const Pipeline a = run_fixture_pipeline();
  const Pipeline b = run_fixture_pipeline();
  std::ostringstream csv_a, csv_b;
  write_series_csv(a.series, csv_a);
  write_series_csv(b.series, csv_b);
  CHECK(csv_a.str() == csv_b.str());
  CHECK(a.classification == b.classification);
}

}  // TEST_SUITE
