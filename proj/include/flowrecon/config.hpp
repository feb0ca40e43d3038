#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "flowrecon/bench.hpp"
#include "flowrecon/http_executor.hpp"
#include "flowrecon/search.hpp"
#include "flowrecon/similarity.hpp"

namespace flowrecon {

/// Everything `search` needs besides the world/dataset: search and metric
/// parameters, an optional primitive-space path, and HTTP backend settings.
/// Missing fields keep their documented defaults.
struct RunConfig {
  std::optional<std::filesystem::path> space_path;
  SearchConfig search;
  MetricConfig metric;
  HttpConfig http;
};

RunConfig load_run_config(const std::filesystem::path& path);

/// Loads a bench spec file: world path, search/metric blocks, seeds,
/// variants, selected tools, and the quality threshold (a number or
/// "unpruned-median").
BenchSpec load_bench_spec(const std::filesystem::path& path);

/// JSON echo of the resolved search/metric configuration, embedded in
/// reports for provenance.
std::string config_echo_json(const SearchConfig& search, const MetricConfig& metric);

}  // namespace flowrecon
