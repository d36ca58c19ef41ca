#include <gtest/gtest.h>

#include <sstream>

#include "contactdyn/coefficients.hpp"
#include "contactdyn/config.hpp"
#include "contactdyn/error.hpp"
#include "contactdyn/io.hpp"
#include "contactdyn/models.hpp"
#include "contactdyn/multi_index.hpp"
#include "contactdyn/random.hpp"
#include "oracles.hpp"

using namespace contactdyn;

TEST(MultiIndex, CountsMatchStarsAndBars) {
  // C(n+k-1, k)
  EXPECT_EQ(multi_indices(1, 4).size(), 1u);
  EXPECT_EQ(multi_indices(2, 2).size(), 3u);
  EXPECT_EQ(multi_indices(2, 4).size(), 5u);
  EXPECT_EQ(multi_indices(3, 3).size(), 10u);
  EXPECT_EQ(multi_indices_up_to(2, 1, 4).size(), 2u + 3u + 4u + 5u);
}

TEST(MultiIndex, MultiplicityIsMultinomial) {
  EXPECT_DOUBLE_EQ(multiplicity({0, 0}), 1.0);
  EXPECT_DOUBLE_EQ(multiplicity({0, 1}), 2.0);
  EXPECT_DOUBLE_EQ(multiplicity({0, 0, 1}), 3.0);
  EXPECT_DOUBLE_EQ(multiplicity({0, 1, 2}), 6.0);
  EXPECT_DOUBLE_EQ(multiplicity({0, 0, 1, 1}), 6.0);
}

TEST(MultiIndex, LabelsRoundTrip) {
  for (const auto& a : multi_indices_up_to(3, 1, 4)) EXPECT_EQ(parse_label(to_label(a)), a);
  EXPECT_EQ(parse_label("(2,1)"), (MultiIndex{0, 1}));
  EXPECT_EQ(parse_label("12"), (MultiIndex{0, 1}));
  EXPECT_EQ(to_label({0, 0}), "(1,1)");
}

TEST(MultiIndex, RemoveAndCount) {
  EXPECT_EQ(remove_one({0, 1, 1}, 1), (MultiIndex{0, 1}));
  EXPECT_EQ(count_axis({0, 1, 1}, 1), 2u);
  EXPECT_DOUBLE_EQ(factorial(4), 24.0);
}

TEST(Coefficients, StoredSymmetric) {
  CoefficientSet d;
  d.n = 2;
  d.set({1, 0}, 3.0);
  EXPECT_DOUBLE_EQ(d.get({0, 1}), 3.0);
  EXPECT_EQ(d.order(), 2u);
  EXPECT_DOUBLE_EQ(order_sign(Normalization::standard, 3), -1.0);
  EXPECT_DOUBLE_EQ(order_sign(Normalization::literal, 2), 0.5);
  EXPECT_DOUBLE_EQ(order_sign(Normalization::literal, 3), -1.0 / 6.0);
  EXPECT_THROW(parse_normalization("net"), Rejected);
}

TEST(Io, FormatDoubleRoundTrips) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    EXPECT_EQ(std::stod(io::format_double(v)), v);
  }
  EXPECT_EQ(io::format_double(-0.0), "0");
  EXPECT_EQ(io::format_double(0.5), "0.5");
}

TEST(Io, CsvRoundTrip) {
  std::ostringstream os;
  {
    io::CsvWriter w(os, {"a", "b"});
    w.row({1.0, 0.1});
    w.row({-2.5, 1e-300});
  }
  EXPECT_EQ(os.str(), "a,b\n1,0.1\n-2.5,1e-300\n");
  std::istringstream is(os.str());
  const auto t = io::read_csv(is);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[1][1], 1e-300);
}

TEST(Io, Fnv1aKnownValues) {
  EXPECT_EQ(io::fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(io::fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(io::hex64(0xabcULL), "0000000000000abc");
}

TEST(Random, StreamsAreReproducibleAndDistinct) {
  SplitMix64 a(42, 7), b(42, 7), c(42, 8);
  for (int i = 0; i < 10; ++i) {
    const auto x = a();
    EXPECT_EQ(x, b());
    EXPECT_NE(x, c());
  }
  SplitMix64 u(1);
  double mean = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double v = u.uniform();
    ASSERT_GE(v, 0.0);
    ASSERT_LT(v, 1.0);
    mean += v;
  }
  EXPECT_NEAR(mean / 100000.0, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / 100000.0));
}

TEST(Config, ParsesTablesArraysAndTypes) {
  const auto t = config::parse(R"toml(
name = "x"   # trailing comment
kind = 'flow'
[model]
n = 2
k = -0.5e-1
flag = true
[coefficients.D]
"(1,1)" = 1
m = [[1.0, 2.0],
     [3.0, 4.0]]
)toml");
  EXPECT_EQ(t["name"], "x");
  EXPECT_EQ(t["kind"], "flow");
  EXPECT_TRUE(t["model"]["n"].is_number_integer());
  EXPECT_DOUBLE_EQ(t["model"]["k"].get<double>(), -0.05);
  EXPECT_EQ(t["model"]["flag"], true);
  EXPECT_EQ(t["coefficients"]["D"]["(1,1)"], 1);
  EXPECT_DOUBLE_EQ(t["coefficients"]["D"]["m"][1][0].get<double>(), 3.0);
}

TEST(Config, ErrorsCarryLineAndColumn) {
  try {
    config::parse("a = 1\nb = [1, 2\nc = 3\n");
    FAIL() << "expected a parse error";
  } catch (const config::ParseError& e) {
    EXPECT_GE(e.line, 2u);
    EXPECT_NE(std::string(e.what()).find("line"), std::string::npos);
  }
  EXPECT_THROW(config::parse("a = 1\na = 2\n"), config::ParseError);
  EXPECT_THROW(config::parse("= 2\n"), config::ParseError);
  EXPECT_THROW(config::parse("x = \"open\n"), config::ParseError);
}

TEST(Config, HashIgnoresCommentsOrderAndWhitespace) {
  const auto a = config::parse("b = 2\na = [1, 2]\n[t]\nx = 1\n");
  const auto b = config::parse("# header\na=[1,2]   # c\n\nb   =   2\n[t]\n  x = 1\n");
  EXPECT_EQ(config::canonical(a), config::canonical(b));
  EXPECT_EQ(config::hash(a), config::hash(b));
  const auto c = config::parse("b = 3\na = [1, 2]\n[t]\nx = 1\n");
  EXPECT_NE(config::hash(a), config::hash(c));
}

TEST(Models, AnalyticGradientsMatchDifferences) {
  std::mt19937_64 rng(5);
  for (const auto& name : models::names()) {
    for (std::size_t n = 1; n <= 3; ++n) {
      const auto h = models::make(name, n);
      for (int s = 0; s < 20; ++s) {
        const auto p = oracle::random_point(rng, n);
        EXPECT_TRUE(check_gradient(h, p, 1e-7).consistent) << name;
      }
    }
  }
  EXPECT_THROW(models::make("reeb", 1, {{"q", 1.0}}), Rejected);
  EXPECT_THROW(models::make("nope", 1), Rejected);
}
