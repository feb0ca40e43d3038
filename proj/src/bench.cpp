#include "flowrecon/bench.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "flowrecon/errors.hpp"

namespace flowrecon {

std::string variant_name(BenchVariant variant) {
  switch (variant) {
    case BenchVariant::kPruned: return "pruned";
    case BenchVariant::kUnpruned: return "unpruned";
    case BenchVariant::kNoTools: return "no_tools";
    case BenchVariant::kAllTools: return "all_tools";
    case BenchVariant::kSelectedTools: return "selected_tools";
  }
  throw ConfigError("unreachable variant");
}

BenchVariant parse_variant(const std::string& name) {
  if (name == "pruned") return BenchVariant::kPruned;
  if (name == "unpruned") return BenchVariant::kUnpruned;
  if (name == "no_tools") return BenchVariant::kNoTools;
  if (name == "all_tools") return BenchVariant::kAllTools;
  if (name == "selected_tools") return BenchVariant::kSelectedTools;
  throw ConfigError("unknown variant '" + name + "'");
}

void BenchSpec::validate() const {
  search.validate();
  metric.validate();
  if (world.has_value() == http.has_value()) {
    throw ConfigError("bench needs exactly one backend: a world or an http target");
  }
  if (seeds.empty()) {
    throw ConfigError("bench needs at least one seed");
  }
  if (variants.empty()) {
    throw ConfigError("bench needs at least one variant");
  }
  if (threshold_auto &&
      std::find(variants.begin(), variants.end(), BenchVariant::kUnpruned) == variants.end()) {
    throw ConfigError("automatic threshold requires the unpruned variant");
  }
  if (std::find(variants.begin(), variants.end(), BenchVariant::kSelectedTools) !=
          variants.end() &&
      selected_tools.empty()) {
    throw ConfigError("selected_tools variant needs a non-empty tool list");
  }
}

PairedTResult paired_t(const std::vector<double>& differences) {
  if (differences.size() < 2) {
    throw ConfigError("paired_t needs at least two differences");
  }
  PairedTResult result;
  const auto n = static_cast<double>(differences.size());
  for (const double d : differences) {
    result.mean += d;
  }
  result.mean /= n;
  double squared = 0.0;
  for (const double d : differences) {
    squared += (d - result.mean) * (d - result.mean);
  }
  result.sd = std::sqrt(squared / (n - 1.0));
  if (result.sd == 0.0) {
    if (result.mean == 0.0) {
      result.t = 0.0;
    } else {
      result.t = result.mean > 0.0 ? std::numeric_limits<double>::infinity()
                                   : -std::numeric_limits<double>::infinity();
    }
  } else {
    result.t = result.mean / (result.sd / std::sqrt(n));
  }
  return result;
}

double median(std::vector<double> values) {
  if (values.empty()) {
    throw ConfigError("median of an empty list");
  }
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  if (n % 2 == 1) {
    return values[n / 2];
  }
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

PrimitiveSpace variant_space(const PrimitiveSpace& space, const BenchSpec& spec,
                             BenchVariant variant) {
  switch (variant) {
    case BenchVariant::kNoTools:
      return strip_tools(space);
    case BenchVariant::kSelectedTools:
      return strip_tools(space, spec.selected_tools);
    case BenchVariant::kPruned:
    case BenchVariant::kUnpruned:
    case BenchVariant::kAllTools:
      return space;
  }
  throw ConfigError("unreachable variant");
}

SearchOutcome run_cell(const BenchSpec& spec, BenchVariant variant, int seed) {
  SearchConfig config = spec.search;
  config.seed = static_cast<std::uint64_t>(seed);
  const Evaluator evaluator = make_sfe_evaluator(spec.metric);
  const auto run = [&](const PrimitiveSpace& space, const Executor& executor,
                       const std::vector<ObservationPair>& dataset) {
    return variant == BenchVariant::kUnpruned
               ? run_search_unpruned(space, config, executor, evaluator, dataset)
               : run_search(space, config, executor, evaluator, dataset);
  };
  if (spec.world) {
    const SimExecutor executor(
        with_space(*spec.world, variant_space(spec.world->space, spec, variant)));
    return run(executor.world().space, executor, executor.world().tasks);
  }
  const PrimitiveSpace space = variant_space(spec.http->space, spec, variant);
  const HttpExecutor executor(spec.http->config, space);
  return run(space, executor, spec.http->dataset);
}

std::optional<long long> tokens_to_threshold(const std::vector<RunRecord>& records,
                                             double threshold) {
  for (const RunRecord& record : records) {
    if (record.best_similarity >= threshold) {
      return record.cumulative_tokens;
    }
  }
  return std::nullopt;
}

}  // namespace

BenchReport run_bench(const BenchSpec& spec) {
  spec.validate();
  BenchReport report;

  for (const BenchVariant variant : spec.variants) {
    for (const int seed : spec.seeds) {
      SearchOutcome outcome;
      try {
        outcome = run_cell(spec, variant, seed);
      } catch (const InfrastructureError&) {
        report.partial = true;  // abort the bench, keep finished cells
        break;
      }
      BenchCell cell;
      cell.variant = variant_name(variant);
      cell.seed = seed;
      cell.final_similarity =
          outcome.records.empty() ? 0.0 : outcome.records.back().best_similarity;
      cell.total_tokens =
          outcome.records.empty() ? 0 : outcome.records.back().cumulative_tokens;
      cell.best_length = outcome.best_workflow.length();
      cell.max_depth = outcome.tree.max_depth();
      cell.red_fraction = outcome.records.empty() ? 0.0 : outcome.records.back().red_fraction;
      cell.records = outcome.records;
      report.cells.push_back(std::move(cell));
    }
    if (report.partial) {
      break;
    }
  }

  if (report.partial) {
    return report;  // finished cells only; no aggregates over a torn run
  }

  // Threshold resolution, then tokens-to-threshold per cell.
  std::optional<double> threshold = spec.threshold;
  if (spec.threshold_auto) {
    std::vector<double> unpruned_finals;
    for (const BenchCell& cell : report.cells) {
      if (cell.variant == "unpruned") {
        unpruned_finals.push_back(cell.final_similarity);
      }
    }
    threshold = median(unpruned_finals);
  }
  report.threshold_used = threshold;
  if (threshold) {
    for (BenchCell& cell : report.cells) {
      cell.tokens_to_threshold = tokens_to_threshold(cell.records, *threshold);
    }
  }

  for (const BenchVariant variant : spec.variants) {
    const std::string name = variant_name(variant);
    VariantAggregate aggregate;
    aggregate.variant = name;
    aggregate.min_similarity = std::numeric_limits<double>::infinity();
    aggregate.max_similarity = -std::numeric_limits<double>::infinity();
    aggregate.min_tokens = std::numeric_limits<long long>::max();
    aggregate.max_tokens = std::numeric_limits<long long>::min();
    int count = 0;
    for (const BenchCell& cell : report.cells) {
      if (cell.variant != name) {
        continue;
      }
      ++count;
      aggregate.mean_similarity += cell.final_similarity;
      aggregate.mean_tokens += static_cast<double>(cell.total_tokens);
      aggregate.min_similarity = std::min(aggregate.min_similarity, cell.final_similarity);
      aggregate.max_similarity = std::max(aggregate.max_similarity, cell.final_similarity);
      aggregate.min_tokens = std::min(aggregate.min_tokens, cell.total_tokens);
      aggregate.max_tokens = std::max(aggregate.max_tokens, cell.total_tokens);
    }
    aggregate.mean_similarity /= count;
    aggregate.mean_tokens /= count;
    report.aggregates.push_back(aggregate);
  }

  const bool has_unpruned = std::find(spec.variants.begin(), spec.variants.end(),
                                      BenchVariant::kUnpruned) != spec.variants.end();
  const std::string reference =
      has_unpruned ? "unpruned" : variant_name(spec.variants.front());
  std::map<std::pair<std::string, int>, double> finals;
  for (const BenchCell& cell : report.cells) {
    finals[{cell.variant, cell.seed}] = cell.final_similarity;
  }
  if (spec.seeds.size() >= 2) {
    for (const BenchVariant variant : spec.variants) {
      const std::string name = variant_name(variant);
      if (name == reference) {
        continue;
      }
      std::vector<double> differences;
      for (const int seed : spec.seeds) {
        differences.push_back(finals[{name, seed}] - finals[{reference, seed}]);
      }
      PairedComparison comparison;
      comparison.variant = name;
      comparison.reference = reference;
      comparison.n = static_cast<int>(differences.size());
      comparison.stats = paired_t(differences);
      report.comparisons.push_back(comparison);
    }
  }
  return report;
}

}  // namespace flowrecon
