#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "flowrecon/bench.hpp"
#include "flowrecon/bounds.hpp"
#include "flowrecon/config.hpp"
#include "flowrecon/errors.hpp"
#include "flowrecon/execution.hpp"
#include "flowrecon/http_executor.hpp"
#include "flowrecon/io.hpp"
#include "flowrecon/search.hpp"
#include "flowrecon/similarity.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitFormat = 4;
constexpr int kExitLimit = 5;
constexpr int kExitInfrastructure = 6;

constexpr const char* kExitCodeHelp =
    "Exit codes:\n"
    "  0  success\n"
    "  2  usage error (unknown flag or missing argument)\n"
    "  3  unreadable or missing file\n"
    "  4  malformed file or invalid configuration\n"
    "  5  resource guard exceeded\n"
    "  6  backend infrastructure failure\n";

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw flowrecon::IoError("cannot open file: " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw flowrecon::IoError("cannot write file: " + path.string());
  }
  out << contents;
}

std::string joined_steps(const flowrecon::Workflow& workflow) {
  std::string joined;
  for (size_t i = 0; i < workflow.steps.size(); ++i) {
    if (i > 0) {
      joined.push_back(',');
    }
    joined += workflow.steps[i];
  }
  return joined;
}

struct SearchArgs {
  std::string config_path;
  std::string world_path;
  std::string dataset_path;
  std::string executor = "sim";
  std::string out_prefix = "run";
  long long seed = -1;
};

int cmd_search(const SearchArgs& args) {
  using namespace flowrecon;
  RunConfig config;
  if (!args.config_path.empty()) {
    config = load_run_config(args.config_path);
  }
  if (args.seed >= 0) {
    config.search.seed = static_cast<std::uint64_t>(args.seed);
  }
  const Evaluator evaluator = make_sfe_evaluator(config.metric);

  SearchOutcome outcome;
  if (args.executor == "sim") {
    if (args.world_path.empty()) {
      throw ConfigError("the sim executor needs --world");
    }
    const SimWorld world = load_world(args.world_path);
    const SimExecutor executor(world);
    outcome = run_search(executor.world().space, config.search, executor, evaluator,
                         executor.world().tasks);
  } else if (args.executor == "http") {
    if (args.dataset_path.empty()) {
      throw ConfigError("the http executor needs --dataset");
    }
    if (!config.space_path) {
      throw ConfigError("the http executor needs a \"space\" path in the config file");
    }
    const PrimitiveSpace space = load_space(*config.space_path);
    const std::vector<ObservationPair> dataset = load_dataset(args.dataset_path);
    const HttpExecutor executor(config.http, space);
    outcome = run_search(space, config.search, executor, evaluator, dataset);
  } else {
    throw ConfigError("unknown executor '" + args.executor + "' (expected sim or http)");
  }

  std::ostringstream csv;
  write_run_records_csv(csv, outcome.records);
  write_text_file(args.out_prefix + ".csv", csv.str());
  std::ostringstream jsonl;
  write_run_records_jsonl(jsonl, outcome.records);
  write_text_file(args.out_prefix + ".jsonl", jsonl.str());
  write_text_file(args.out_prefix + "_summary.json", tree_summary_json(outcome) + "\n");

  std::cout << joined_steps(outcome.best_workflow) << ' '
            << format_fixed(outcome.best_mean_reward) << '\n';
  if (outcome.exhausted) {
    std::cerr << "warning: search space exhausted before the budget ran out\n";
  }
  return kExitOk;
}

int cmd_bench(const std::string& spec_path, const std::string& out_prefix) {
  using namespace flowrecon;
  const BenchSpec spec = load_bench_spec(spec_path);
  const BenchReport report = run_bench(spec);

  std::ostringstream csv;
  write_bench_cells_csv(csv, report);
  write_text_file(out_prefix + "_report.csv", csv.str());
  write_text_file(out_prefix + "_report.json",
                  bench_report_json(report, config_echo_json(spec.search, spec.metric)) + "\n");
  for (const BenchCell& cell : report.cells) {
    std::ostringstream curve;
    write_run_records_csv(curve, cell.records);
    write_text_file(out_prefix + "_curve_" + cell.variant + "_seed" +
                        std::to_string(cell.seed) + ".csv",
                    curve.str());
  }
  for (const VariantAggregate& aggregate : report.aggregates) {
    std::cout << aggregate.variant << " mean_similarity=" << format_fixed(aggregate.mean_similarity)
              << " mean_tokens=" << format_fixed(aggregate.mean_tokens, 1) << '\n';
  }
  return kExitOk;
}

int cmd_bruteforce(const std::string& world_path, int l_max) {
  using namespace flowrecon;
  const SimWorld world = load_world(world_path);
  const BruteForceResult best = brute_force_optimum(world, make_sfe_evaluator(), l_max);
  std::cout << joined_steps(best.workflow) << ' ' << format_fixed(best.similarity) << '\n';
  return kExitOk;
}

int cmd_bounds(int b, int l_max, double p, double beta) {
  using namespace flowrecon;
  std::cout << "b,l_max,p,beta,v_full,v_eff,eta_lower,eta_upper\n";
  std::cout << b << ',' << l_max << ',' << format_fixed(p) << ',' << format_fixed(beta) << ','
            << u128_to_string(v_full(b, l_max)) << ',' << format_fixed(v_eff(b, p, l_max)) << ','
            << format_fixed(eta_lower(p, l_max)) << ',' << format_fixed(eta_upper(beta, l_max))
            << '\n';
  return kExitOk;
}

int cmd_eval(const std::string& metric, const std::string& candidate_path,
             const std::string& reference_path) {
  using namespace flowrecon;
  const std::string candidate = read_text_file(candidate_path);
  const std::string reference = read_text_file(reference_path);
  double score = 0.0;
  if (metric == "sfe") {
    score = sfe(candidate, reference);
  } else if (metric == "ngram") {
    score = sim_ngram(candidate, reference);
  } else if (metric == "jaccard") {
    score = sim_jaccard(candidate, reference);
  } else {
    throw ConfigError("unknown metric '" + metric + "' (expected sfe, ngram, or jaccard)");
  }
  std::cout << format_fixed(score) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flowrecon: reconstructs chain workflows from black-box I/O pairs\n"};
  app.footer(kExitCodeHelp);
  app.require_subcommand(1);

  SearchArgs search_args;
  CLI::App* search = app.add_subcommand("search", "Run one reconstruction search");
  search->add_option("--config", search_args.config_path, "Config file (JSON)");
  search->add_option("--world", search_args.world_path, "Simulated world file (JSON)");
  search->add_option("--dataset", search_args.dataset_path, "Observation dataset (JSONL)");
  search->add_option("--executor", search_args.executor, "Executor: sim or http")
      ->check(CLI::IsMember({"sim", "http"}));
  search->add_option("--out", search_args.out_prefix, "Output file prefix");
  search->add_option("--seed", search_args.seed, "Override the config seed");

  std::string bench_spec_path;
  std::string bench_out_prefix = "bench";
  CLI::App* bench = app.add_subcommand("bench", "Run a multi-seed variant comparison");
  bench->add_option("--spec", bench_spec_path, "Bench spec file (JSON)")->required();
  bench->add_option("--out", bench_out_prefix, "Output file prefix");

  std::string bf_world_path;
  int bf_l_max = 3;
  CLI::App* bruteforce =
      app.add_subcommand("bruteforce", "Exhaustive optimum for a simulated world");
  bruteforce->add_option("--world", bf_world_path, "Simulated world file (JSON)")->required();
  bruteforce->add_option("--l-max", bf_l_max, "Maximum workflow length");

  int bounds_b = 2;
  int bounds_l_max = 0;
  double bounds_p = 0.0;
  double bounds_beta = 0.0;
  CLI::App* bounds = app.add_subcommand("bounds", "Search-volume and speedup calculators");
  bounds->add_option("--b", bounds_b, "Branching factor (>= 2)")->required();
  bounds->add_option("--l-max", bounds_l_max, "Maximum workflow length")->required();
  bounds->add_option("--p", bounds_p, "Realized pruning rate in [0, 1)");
  bounds->add_option("--beta", bounds_beta, "Quantile level in [0, 1)");

  std::string eval_metric = "sfe";
  std::string eval_candidate;
  std::string eval_reference;
  CLI::App* eval = app.add_subcommand("eval", "Score two text files with a similarity metric");
  eval->add_option("--metric", eval_metric, "Metric: sfe, ngram, or jaccard");
  eval->add_option("candidate", eval_candidate, "Candidate text file")->required();
  eval->add_option("reference", eval_reference, "Reference text file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e);  // --help
    }
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*search) {
      return cmd_search(search_args);
    }
    if (*bench) {
      return cmd_bench(bench_spec_path, bench_out_prefix);
    }
    if (*bruteforce) {
      return cmd_bruteforce(bf_world_path, bf_l_max);
    }
    if (*bounds) {
      return cmd_bounds(bounds_b, bounds_l_max, bounds_p, bounds_beta);
    }
    if (*eval) {
      return cmd_eval(eval_metric, eval_candidate, eval_reference);
    }
  } catch (const flowrecon::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const flowrecon::LimitError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitLimit;
  } catch (const flowrecon::InfrastructureError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInfrastructure;
  } catch (const flowrecon::FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFormat;
  } catch (const flowrecon::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFormat;
  }
  return kExitUsage;
}
