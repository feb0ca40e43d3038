#include "flowrecon/bench.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include "flowrecon/errors.hpp"

using namespace flowrecon;

namespace {

// Space of 40 reachable nodes at l_max 3; budget 30 cannot exhaust it, so
// every cell runs its full budget.
BenchSpec small_spec() {
  const PrimitiveSpace space({
      Primitive{"a", "a", "m", "p", {"web"}, 1},
      Primitive{"b", "b", "m", "p", {}, 2},
      Primitive{"c", "c", "m", "p", {"repl"}, 1},
  });
  BenchSpec spec;
  spec.world = make_sim_world(space, {"c", "a", "b"}, {"t1", "t2", "t3"});
  spec.search.l_max = 3;
  spec.search.budget = 30;
  spec.seeds = {1, 2, 3};
  spec.variants = {BenchVariant::kPruned, BenchVariant::kUnpruned};
  return spec;
}

}  // namespace

TEST_CASE("paired_t hand case") {
  const PairedTResult result = paired_t({0.1, 0.2, 0.3});
  CHECK_EQ(result.mean, doctest::Approx(0.2));
  CHECK_EQ(result.sd, doctest::Approx(0.1));
  CHECK_EQ(result.t, doctest::Approx(3.4641).epsilon(1e-4));
}

TEST_CASE("paired_t degenerate spreads") {
  CHECK_EQ(paired_t({0.0, 0.0, 0.0}).t, 0.0);
  const PairedTResult positive = paired_t({0.05, 0.05});
  CHECK(std::isinf(positive.t));
  CHECK_GT(positive.t, 0.0);
  const PairedTResult negative = paired_t({-0.05, -0.05});
  CHECK_LT(negative.t, 0.0);
  CHECK_THROWS_AS(paired_t({0.1}), ConfigError);
}

TEST_CASE("a single-cell bench degenerates cleanly") {
  BenchSpec spec = small_spec();
  spec.seeds = {7};
  spec.variants = {BenchVariant::kPruned};
  const BenchReport report = run_bench(spec);
  REQUIRE_EQ(report.cells.size(), 1);
  REQUIRE_EQ(report.aggregates.size(), 1);
  CHECK_EQ(report.aggregates[0].mean_similarity,
           doctest::Approx(report.cells[0].final_similarity));
  CHECK_EQ(report.aggregates[0].min_similarity, report.aggregates[0].max_similarity);
  CHECK(report.comparisons.empty());
}

TEST_CASE("every cell runs exactly the configured budget") {
  const BenchSpec spec = small_spec();
  const BenchReport report = run_bench(spec);
  REQUIRE_EQ(report.cells.size(), 6);
  for (const BenchCell& cell : report.cells) {
    CHECK_EQ(static_cast<int>(cell.records.size()), spec.search.budget);
    for (size_t i = 0; i < cell.records.size(); ++i) {
      CHECK_EQ(cell.records[i].iteration, static_cast<int>(i) + 1);
    }
  }
}

TEST_CASE("aggregates recomputed from rows match the stored aggregates") {
  const BenchReport report = run_bench(small_spec());
  for (const VariantAggregate& aggregate : report.aggregates) {
    double sum = 0.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    int count = 0;
    for (const BenchCell& cell : report.cells) {
      if (cell.variant != aggregate.variant) continue;
      sum += cell.final_similarity;
      lo = std::min(lo, cell.final_similarity);
      hi = std::max(hi, cell.final_similarity);
      ++count;
    }
    REQUIRE_GT(count, 0);
    CHECK_EQ(aggregate.mean_similarity, doctest::Approx(sum / count));
    CHECK_EQ(aggregate.min_similarity, doctest::Approx(lo));
    CHECK_EQ(aggregate.max_similarity, doctest::Approx(hi));
  }
}

TEST_CASE("repeated benches are identical") {
  const BenchSpec spec = small_spec();
  const BenchReport first = run_bench(spec);
  const BenchReport second = run_bench(spec);
  REQUIRE_EQ(first.cells.size(), second.cells.size());
  for (size_t i = 0; i < first.cells.size(); ++i) {
    CHECK_EQ(first.cells[i].variant, second.cells[i].variant);
    CHECK_EQ(first.cells[i].seed, second.cells[i].seed);
    CHECK_EQ(first.cells[i].final_similarity, second.cells[i].final_similarity);
    CHECK_EQ(first.cells[i].total_tokens, second.cells[i].total_tokens);
  }
}

TEST_CASE("the automatic threshold is the unpruned median final similarity") {
  BenchSpec spec = small_spec();
  spec.threshold_auto = true;
  const BenchReport report = run_bench(spec);
  REQUIRE(report.threshold_used.has_value());
  std::vector<double> unpruned;
  for (const BenchCell& cell : report.cells) {
    if (cell.variant == "unpruned") unpruned.push_back(cell.final_similarity);
  }
  CHECK_EQ(*report.threshold_used, doctest::Approx(median(unpruned)));
  for (const BenchCell& cell : report.cells) {
    if (cell.tokens_to_threshold) {
      bool crossed = false;
      for (const RunRecord& record : cell.records) {
        if (record.best_similarity >= *report.threshold_used) {
          CHECK_EQ(*cell.tokens_to_threshold, record.cumulative_tokens);
          crossed = true;
          break;
        }
      }
      CHECK(crossed);
    }
  }
}

TEST_CASE("paired comparisons reference the unpruned variant") {
  BenchSpec spec = small_spec();
  spec.variants = {BenchVariant::kPruned, BenchVariant::kUnpruned, BenchVariant::kNoTools};
  const BenchReport report = run_bench(spec);
  REQUIRE_EQ(report.comparisons.size(), 2);
  for (const PairedComparison& comparison : report.comparisons) {
    CHECK_EQ(comparison.reference, "unpruned");
    CHECK_EQ(comparison.n, 3);
  }
}

TEST_CASE("tool ablation variants strip the executing space but keep the targets") {
  BenchSpec spec = small_spec();
  spec.variants = {BenchVariant::kAllTools, BenchVariant::kNoTools};
  spec.search.budget = 60;
  const BenchReport report = run_bench(spec);
  double all_tools_best = 0.0;
  double no_tools_best = 0.0;
  for (const BenchCell& cell : report.cells) {
    if (cell.variant == "all_tools") {
      all_tools_best = std::max(all_tools_best, cell.final_similarity);
    } else {
      no_tools_best = std::max(no_tools_best, cell.final_similarity);
    }
  }
  // The target trace carries tool markers; the stripped space cannot emit
  // them, so the tooled variant reaches strictly higher similarity.
  CHECK_EQ(all_tools_best, doctest::Approx(1.0));
  CHECK_LT(no_tools_best, 1.0);
}

namespace {

// Tiny chat stub; fails every request past `fail_after` with a 401 when
// fail_after >= 0.
class BenchStub {
 public:
  explicit BenchStub(int fail_after = -1) {
    server_.Post("/v1/chat/completions",
                 [this, fail_after](const httplib::Request&, httplib::Response& response) {
                   const int index = counter_++;
                   if (fail_after >= 0 && index >= fail_after) {
                     response.status = 401;
                     return;
                   }
                   nlohmann::json body;
                   body["choices"] = nlohmann::json::array(
                       {{{"message", {{"role", "assistant"},
                                      {"content", "echo " + std::to_string(index % 3)}}}}});
                   response.set_content(body.dump(), "application/json");
                 });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~BenchStub() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  std::atomic<int> counter_{0};
  int port_ = 0;
  std::thread thread_;
};

BenchSpec http_spec(const std::string& url) {
  BenchSpec spec;
  HttpBenchTarget target{HttpConfig{}, PrimitiveSpace({Primitive{"a", "a", "m", "p", {}, 1},
                                                       Primitive{"b", "b", "m", "p", {}, 1}}),
                         {ObservationPair{"t1", "echo 1"}, ObservationPair{"t2", "echo 2"}}};
  target.config.base_url = url;
  target.config.max_retries = 0;
  target.config.timeout_seconds = 5;
  spec.http = std::move(target);
  spec.search.l_max = 2;
  spec.search.budget = 4;
  spec.seeds = {1, 2};
  spec.variants = {BenchVariant::kPruned};
  return spec;
}

}  // namespace

TEST_CASE("a bench can drive cells through the http executor") {
  BenchStub stub;
  const BenchReport report = run_bench(http_spec(stub.url()));
  CHECK_FALSE(report.partial);
  REQUIRE_EQ(report.cells.size(), 2);
  for (const BenchCell& cell : report.cells) {
    CHECK_EQ(static_cast<int>(cell.records.size()), 4);
    CHECK_GT(cell.final_similarity, 0.0);
  }
}

TEST_CASE("an infrastructure error aborts the bench with partial results") {
  BenchStub stub(/*fail_after=*/9);
  const BenchReport report = run_bench(http_spec(stub.url()));
  CHECK(report.partial);
  CHECK_LT(report.cells.size(), 2);
  CHECK(report.aggregates.empty());
}

TEST_CASE("bench spec validation") {
  BenchSpec spec = small_spec();
  spec.seeds = {};
  CHECK_THROWS_AS(run_bench(spec), ConfigError);
  spec = small_spec();
  spec.variants = {BenchVariant::kSelectedTools};
  CHECK_THROWS_AS(run_bench(spec), ConfigError);  // no tool list
  spec = small_spec();
  spec.variants = {BenchVariant::kPruned};
  spec.threshold_auto = true;
  CHECK_THROWS_AS(run_bench(spec), ConfigError);  // auto threshold needs unpruned
  spec = small_spec();
  spec.world.reset();
  CHECK_THROWS_AS(run_bench(spec), ConfigError);  // no backend at all
  CHECK_THROWS_AS(parse_variant("mystery"), ConfigError);
  CHECK_EQ(variant_name(parse_variant("selected_tools")), "selected_tools");
}
