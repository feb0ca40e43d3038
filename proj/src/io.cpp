#include "flowrecon/io.hpp"

#include <cstdio>

#include <json.hpp>

#include "flowrecon/bounds.hpp"

namespace flowrecon {

using nlohmann::json;

std::string format_fixed(double value, int digits) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", digits, value);
  return buffer;
}

void write_run_records_csv(std::ostream& out, const std::vector<RunRecord>& records) {
  out << "iteration,reward,cumulative_tokens,best_similarity,best_length,red_fraction,"
         "max_tree_depth\n";
  for (const RunRecord& r : records) {
    out << r.iteration << ',' << format_fixed(r.reward) << ',' << r.cumulative_tokens << ','
        << format_fixed(r.best_similarity) << ',' << r.best_length << ','
        << format_fixed(r.red_fraction) << ',' << r.max_tree_depth << '\n';
  }
}

void write_run_records_jsonl(std::ostream& out, const std::vector<RunRecord>& records) {
  for (const RunRecord& r : records) {
    json line;
    line["iteration"] = r.iteration;
    line["reward"] = r.reward;
    line["cumulative_tokens"] = r.cumulative_tokens;
    line["best_similarity"] = r.best_similarity;
    line["best_length"] = r.best_length;
    line["red_fraction"] = r.red_fraction;
    line["max_tree_depth"] = r.max_tree_depth;
    out << line.dump() << '\n';
  }
}

std::string tree_summary_json(const SearchOutcome& outcome) {
  const TreeMeasurement measured = measure_tree(outcome.tree);
  json summary;
  summary["node_count"] = measured.node_count;
  json histogram = json::object();
  for (const auto& [depth, count] : measured.depth_counts) {
    histogram[std::to_string(depth)] = count;
  }
  summary["depth_histogram"] = histogram;
  summary["max_depth"] = outcome.tree.max_depth();
  summary["red_fraction"] = measured.red_fraction;
  summary["best_workflow"] = outcome.best_workflow.steps;
  summary["best_mean_reward"] = outcome.best_mean_reward;
  summary["exhausted"] = outcome.exhausted;
  return summary.dump(2);
}

void write_bench_cells_csv(std::ostream& out, const BenchReport& report) {
  out << "variant,seed,final_similarity,total_tokens,best_length,max_depth,red_fraction,"
         "tokens_to_threshold\n";
  for (const BenchCell& cell : report.cells) {
    out << cell.variant << ',' << cell.seed << ',' << format_fixed(cell.final_similarity) << ','
        << cell.total_tokens << ',' << cell.best_length << ',' << cell.max_depth << ','
        << format_fixed(cell.red_fraction) << ',';
    if (cell.tokens_to_threshold) {
      out << *cell.tokens_to_threshold;
    } else {
      out << "none";
    }
    out << '\n';
  }
}

std::string bench_report_json(const BenchReport& report, const std::string& config_echo) {
  json doc;
  doc["config"] = json::parse(config_echo);
  if (report.threshold_used) {
    doc["threshold"] = *report.threshold_used;
  } else {
    doc["threshold"] = nullptr;
  }
  doc["partial"] = report.partial;
  doc["cells"] = json::array();
  for (const BenchCell& cell : report.cells) {
    json row;
    row["variant"] = cell.variant;
    row["seed"] = cell.seed;
    row["final_similarity"] = cell.final_similarity;
    row["total_tokens"] = cell.total_tokens;
    row["best_length"] = cell.best_length;
    row["max_depth"] = cell.max_depth;
    row["red_fraction"] = cell.red_fraction;
    if (cell.tokens_to_threshold) {
      row["tokens_to_threshold"] = *cell.tokens_to_threshold;
    } else {
      row["tokens_to_threshold"] = nullptr;
    }
    doc["cells"].push_back(row);
  }
  doc["aggregates"] = json::array();
  for (const VariantAggregate& aggregate : report.aggregates) {
    json row;
    row["variant"] = aggregate.variant;
    row["mean_similarity"] = aggregate.mean_similarity;
    row["min_similarity"] = aggregate.min_similarity;
    row["max_similarity"] = aggregate.max_similarity;
    row["mean_tokens"] = aggregate.mean_tokens;
    row["min_tokens"] = aggregate.min_tokens;
    row["max_tokens"] = aggregate.max_tokens;
    doc["aggregates"].push_back(row);
  }
  doc["comparisons"] = json::array();
  for (const PairedComparison& comparison : report.comparisons) {
    json row;
    row["variant"] = comparison.variant;
    row["reference"] = comparison.reference;
    row["n"] = comparison.n;
    row["mean_diff"] = comparison.stats.mean;
    row["sd_diff"] = comparison.stats.sd;
    if (std::isfinite(comparison.stats.t)) {
      row["t"] = comparison.stats.t;
    } else {
      row["t"] = comparison.stats.t > 0 ? "inf" : "-inf";
    }
    doc["comparisons"].push_back(row);
  }
  return doc.dump(2);
}

}  // namespace flowrecon
