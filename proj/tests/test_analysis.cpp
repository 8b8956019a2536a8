#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "analysis.hpp"
#include "error.hpp"
#include "test_support.hpp"

using namespace gradharm;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("gradharm_analysis_" + name);
}

GradientTrace trace_from_string(const std::string& name, const std::string& content) {
  const auto path = temp_file(name);
  {
    std::ofstream out(path);
    out << content;
  }
  GradientTrace t = load_trace(path.string());
  std::filesystem::remove(path);
  return t;
}

GradientTrace ip_trace(std::vector<double> ips) {
  GradientTrace t;
  long long iter = 0;
  for (double ip : ips) {
    TraceEntry e;
    e.iter = ++iter;
    e.inner_product = ip;
    t.entries.push_back(e);
  }
  return t;
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("load_trace parses ip lines, full lines and mixes of the two") {
  const GradientTrace t = trace_from_string(
      "ok.jsonl",
      R"({"iter": 1, "ip": -0.25})" "\n"
      R"({"iter": 2, "g1": [1.0, 0.0], "g2": [-1.0, 1.0]})" "\n"
      R"({"iter": 5, "ip": 2.0})" "\n");
  REQUIRE(t.entries.size() == 3);
  CHECK(t.entries[0].inner_product == -0.25);
  CHECK(t.entries[1].inner_product == -1.0);  // computed via dot
  CHECK(t.entries[1].g1.has_value());
  CHECK(t.entries[2].iter == 5);
  CHECK_FALSE(t.full());
}

TEST_CASE("load_trace reports the offending line") {
  SUBCASE("malformed JSON") {
    try {
      trace_from_string("bad.jsonl",
                        R"({"iter": 1, "ip": 0.5})" "\n"
                        "not json\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
  }

  SUBCASE("non-monotone iters") {
    try {
      trace_from_string("mono.jsonl",
                        R"({"iter": 3, "ip": 0.5})" "\n"
                        R"({"iter": 3, "ip": 0.5})" "\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
  }

  SUBCASE("half of a gradient pair") {
    CHECK_THROWS_AS(trace_from_string("half.jsonl", R"({"iter": 1, "g1": [1.0]})" "\n"),
                    ParseError);
  }

  SUBCASE("missing payload") {
    CHECK_THROWS_AS(trace_from_string("none.jsonl", R"({"iter": 1})" "\n"), ParseError);
  }
}

TEST_CASE("full lines with a stored ip are validated for consistency") {
  const GradientTrace ok = trace_from_string(
      "both.jsonl", R"({"iter": 1, "ip": -1.0, "g1": [1.0, 0.0], "g2": [-1.0, 1.0]})" "\n");
  CHECK(ok.entries[0].inner_product == -1.0);

  CHECK_THROWS_AS(
      trace_from_string("liar.jsonl",
                        R"({"iter": 1, "ip": 2.5, "g1": [1.0, 0.0], "g2": [-1.0, 1.0]})" "\n"),
      ParseError);
}

TEST_CASE("stored and recomputed inner products agree on full lines") {
  oracle::Gen gen(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto g1 = gen.vector(6);
    const auto g2 = gen.vector(6);
    TraceEntry e;
    e.iter = trial;
    e.g1 = ParamVector(g1);
    e.g2 = ParamVector(g2);
    e.inner_product = dot(*e.g1, *e.g2);
    CHECK(oracle::rel_err(e.inner_product, oracle::dot_sum(g1, g2)) < 1e-12);
  }
}

TEST_CASE("histogram splits the range with a closed rightmost bin") {
  const Histogram h = histogram(ip_trace({-1, -1, 1, 1}), 2);
  CHECK(h.total == 4);
  CHECK(h.counts == std::vector<std::size_t>{2, 2});
  CHECK(h.obtuse_fraction == 0.5);
  CHECK(h.bin_edges == std::vector<double>{-1.0, 0.0, 1.0});

  const Histogram pos = histogram(ip_trace({0.5, 1.0, 2.0, 3.5}), 4);
  CHECK(pos.obtuse_fraction == 0.0);
  std::size_t total = 0;
  for (std::size_t c : pos.counts) total += c;
  CHECK(total == pos.total);
}

TEST_CASE("histogram handles a degenerate single-value range") {
  const Histogram h = histogram(ip_trace({0.75, 0.75, 0.75}), 3);
  CHECK(h.total == 3);
  std::size_t total = 0;
  for (std::size_t c : h.counts) total += c;
  CHECK(total == 3);
  CHECK(h.bin_edges.front() < 0.75);
  CHECK(h.bin_edges.back() > 0.75);
}

TEST_CASE("histogram validates its inputs") {
  CHECK_THROWS_AS(histogram(ip_trace({1.0, 2.0}), 1), InvalidArgumentError);
  CHECK_THROWS_AS(histogram(GradientTrace{}, 4), InvalidArgumentError);
}

TEST_CASE("post_harmonization_trace replays GH over recorded pairs") {
  GradientTrace t;
  TraceEntry conflicting;
  conflicting.iter = 1;
  conflicting.g1 = ParamVector({1.0, 0.0});
  conflicting.g2 = ParamVector({-1.0, 1.0});
  conflicting.inner_product = dot(*conflicting.g1, *conflicting.g2);
  TraceEntry friendly;
  friendly.iter = 2;
  friendly.g1 = ParamVector({1.0, 0.0});
  friendly.g2 = ParamVector({0.5, 1.0});
  friendly.inner_product = dot(*friendly.g1, *friendly.g2);
  t.entries = {conflicting, friendly};

  const GradientTrace replayed = post_harmonization_trace(t, {MethodKind::GH, 0.5});
  REQUIRE(replayed.entries.size() == 2);
  // oracle: harmonized pair is ((0.5, 0.5), (0, 1)), inner product 0.5
  const auto o1 = oracle::project_out({1, 0}, {-1, 1});
  const auto o2 = oracle::project_out({-1, 1}, {1, 0});
  CHECK(replayed.entries[0].inner_product ==
        doctest::Approx(oracle::dot_sum(o1, o2)).epsilon(1e-12));
  CHECK(replayed.entries[0].inner_product == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(replayed.entries[1].inner_product == friendly.inner_product);  // untouched
}

TEST_CASE("post_harmonization_trace requires full pairs") {
  CHECK_THROWS_AS(post_harmonization_trace(ip_trace({-1.0}), {MethodKind::GH, 0.5}),
                  InvalidArgumentError);
}

TEST_CASE("GH replay eliminates every negative inner product") {
  oracle::Gen gen(21);
  GradientTrace t;
  for (int i = 0; i < 300; ++i) {
    TraceEntry e;
    e.iter = i;
    if (i % 2 == 0) {
      auto [g1, g2] = gen.conflicting_pair(8);
      e.g1 = ParamVector(g1);
      e.g2 = ParamVector(g2);
    } else {
      e.g1 = ParamVector(gen.vector(8));
      e.g2 = ParamVector(gen.vector(8));
    }
    e.inner_product = dot(*e.g1, *e.g2);
    t.entries.push_back(std::move(e));
  }

  const GradientTrace replayed = post_harmonization_trace(t, {MethodKind::GH, 0.5});
  for (std::size_t i = 0; i < replayed.entries.size(); ++i) {
    const double bound =
        -1e-9 * std::sqrt(norm_sq(*t.entries[i].g1) * norm_sq(*t.entries[i].g2));
    CHECK(replayed.entries[i].inner_product >= bound);
  }
  CHECK(histogram(replayed, 10).obtuse_fraction == 0.0);
}

}  // TEST_SUITE
