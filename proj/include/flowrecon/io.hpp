#pragma once

#include <ostream>
#include <string>

#include "flowrecon/bench.hpp"
#include "flowrecon/search.hpp"

namespace flowrecon {

/// Fixed-point rendering used for every real number we emit, so repeated
/// runs produce byte-identical files.
std::string format_fixed(double value, int digits = 6);

void write_run_records_csv(std::ostream& out, const std::vector<RunRecord>& records);
void write_run_records_jsonl(std::ostream& out, const std::vector<RunRecord>& records);

/// Final tree summary: node count, depth histogram, red fraction, and the
/// extracted best workflow.
std::string tree_summary_json(const SearchOutcome& outcome);

void write_bench_cells_csv(std::ostream& out, const BenchReport& report);
std::string bench_report_json(const BenchReport& report, const std::string& config_echo);

}  // namespace flowrecon
