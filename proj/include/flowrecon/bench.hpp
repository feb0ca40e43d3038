#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flowrecon/execution.hpp"
#include "flowrecon/http_executor.hpp"
#include "flowrecon/search.hpp"
#include "flowrecon/similarity.hpp"

namespace flowrecon {

enum class BenchVariant { kPruned, kUnpruned, kNoTools, kAllTools, kSelectedTools };

std::string variant_name(BenchVariant variant);
BenchVariant parse_variant(const std::string& name);

/// Observation-driven backend: cells run the chain over a live endpoint
/// instead of the simulated world.
struct HttpBenchTarget {
  HttpConfig config;
  PrimitiveSpace space;
  std::vector<ObservationPair> dataset;
};

/// A multi-seed comparison run: every (variant, seed) cell gets the same
/// budget, dataset, and backend. Exactly one of `world` / `http` selects the
/// executor.
struct BenchSpec {
  std::optional<SimWorld> world;
  std::optional<HttpBenchTarget> http;
  SearchConfig search;
  MetricConfig metric;
  std::vector<int> seeds = {1, 2, 3, 4, 5};
  std::vector<BenchVariant> variants = {BenchVariant::kPruned, BenchVariant::kUnpruned};
  std::vector<std::string> selected_tools;

  /// Quality threshold for tokens-to-threshold. When `threshold_auto` is
  /// set, the threshold becomes the unpruned variant's median final
  /// similarity (requires the unpruned variant).
  std::optional<double> threshold;
  bool threshold_auto = false;

  void validate() const;
};

/// One (variant, seed) outcome.
struct BenchCell {
  std::string variant;
  int seed = 0;
  double final_similarity = 0.0;
  long long total_tokens = 0;
  int best_length = 0;
  int max_depth = 0;
  double red_fraction = 0.0;
  std::optional<long long> tokens_to_threshold;
  std::vector<RunRecord> records;
};

struct VariantAggregate {
  std::string variant;
  double mean_similarity = 0.0;
  double min_similarity = 0.0;
  double max_similarity = 0.0;
  double mean_tokens = 0.0;
  long long min_tokens = 0;
  long long max_tokens = 0;
};

struct PairedTResult {
  double mean = 0.0;
  double sd = 0.0;
  double t = 0.0;
};

/// Paired comparison of a variant against the reference variant on final
/// similarity, matched by seed.
struct PairedComparison {
  std::string variant;
  std::string reference;
  int n = 0;
  PairedTResult stats;
};

struct BenchReport {
  std::vector<BenchCell> cells;
  std::vector<VariantAggregate> aggregates;
  std::vector<PairedComparison> comparisons;
  std::optional<double> threshold_used;
  /// Set when an infrastructure error aborted the bench; `cells` then holds
  /// only the runs that finished, with no aggregates.
  bool partial = false;
};

/// Mean, sample standard deviation, and t-statistic of paired differences.
/// With zero spread the t-statistic is +/-infinity (or 0 when the mean is
/// also 0). Throws ConfigError on fewer than two differences.
PairedTResult paired_t(const std::vector<double>& differences);

/// Runs every (variant, seed) cell sequentially in spec order and assembles
/// the report deterministically. The reference for paired comparisons is the
/// unpruned variant when present, otherwise the first listed variant.
BenchReport run_bench(const BenchSpec& spec);

double median(std::vector<double> values);

}  // namespace flowrecon
