#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "flowrecon/bench.hpp"
#include "flowrecon/bounds.hpp"
#include "flowrecon/execution.hpp"
#include "flowrecon/primitives.hpp"
#include "flowrecon/search.hpp"
#include "flowrecon/similarity.hpp"

namespace py = pybind11;
using namespace flowrecon;

namespace {

py::object u128_to_py_int(U128 value) {
  return py::module_::import("builtins").attr("int")(u128_to_string(value));
}

SimWorld build_world(const PrimitiveSpace& space, const std::vector<std::string>& target,
                     const std::vector<std::string>& tasks,
                     const std::vector<std::pair<std::string, std::string>>& forbidden,
                     double noise) {
  std::set<std::pair<std::string, std::string>> forbidden_set(forbidden.begin(),
                                                              forbidden.end());
  return make_sim_world(space, target, tasks, std::move(forbidden_set), noise);
}

SearchOutcome search_world(const SimWorld& world, const SearchConfig& config,
                           const MetricConfig& metric, bool pruned) {
  const SimExecutor executor(world);
  const Evaluator evaluator = make_sfe_evaluator(metric);
  if (pruned) {
    return run_search(executor.world().space, config, executor, evaluator,
                      executor.world().tasks);
  }
  return run_search_unpruned(executor.world().space, config, executor, evaluator,
                             executor.world().tasks);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Chain-workflow reconstruction from black-box I/O pairs";

  py::class_<Primitive>(m, "Primitive")
      .def(py::init([](std::string id, std::string role, std::string model, std::string pattern,
                       std::vector<std::string> tools, long long cost) {
             return Primitive{std::move(id), std::move(role), std::move(model),
                              std::move(pattern), std::move(tools), cost};
           }),
           py::arg("id"), py::arg("role") = "", py::arg("model") = "default",
           py::arg("pattern") = "direct", py::arg("tools") = std::vector<std::string>{},
           py::arg("cost") = 1)
      .def_readonly("id", &Primitive::id)
      .def_readonly("role", &Primitive::role)
      .def_readonly("model", &Primitive::model)
      .def_readonly("pattern", &Primitive::pattern)
      .def_readonly("tools", &Primitive::tools)
      .def_readonly("cost", &Primitive::cost);

  py::class_<PrimitiveSpace>(m, "PrimitiveSpace")
      .def(py::init([](std::vector<Primitive> primitives) {
             return PrimitiveSpace(std::move(primitives));
           }),
           py::arg("primitives"))
      .def("__len__", &PrimitiveSpace::size)
      .def("index_of", &PrimitiveSpace::index_of, py::arg("id"))
      .def_property_readonly("primitives", &PrimitiveSpace::primitives);

  py::class_<Workflow>(m, "Workflow")
      .def(py::init([](std::vector<std::string> steps) { return Workflow{std::move(steps)}; }),
           py::arg("steps"))
      .def_readonly("steps", &Workflow::steps)
      .def("__len__", &Workflow::length);

  py::class_<ObservationPair>(m, "ObservationPair")
      .def(py::init([](std::string task, std::string output) {
             return ObservationPair{std::move(task), std::move(output)};
           }),
           py::arg("task"), py::arg("output"))
      .def_readonly("task", &ObservationPair::task)
      .def_readonly("output", &ObservationPair::output);

  m.def(
      "validate_workflow",
      [](const Workflow& w, const PrimitiveSpace& s, int l_max) -> py::object {
        const auto violation = validate_workflow(w, s, l_max);
        return violation ? py::cast(*violation) : py::none();
      },
      py::arg("workflow"), py::arg("space"), py::arg("l_max"),
      "Returns None when valid, otherwise the first violated invariant.");
  m.def("load_dataset", &load_dataset, py::arg("path"));
  m.def("load_space", &load_space, py::arg("path"));
  m.def("load_world", &load_world, py::arg("path"));
  m.def("strip_tools", &strip_tools, py::arg("space"),
        py::arg("keep") = std::vector<std::string>{});

  py::class_<MetricConfig>(m, "MetricConfig")
      .def(py::init([](int n_max, double ngram_weight, double jaccard_weight) {
             MetricConfig config{n_max, ngram_weight, jaccard_weight};
             config.validate();
             return config;
           }),
           py::arg("n_max") = 4, py::arg("ngram_weight") = 0.5, py::arg("jaccard_weight") = 0.5)
      .def_readonly("n_max", &MetricConfig::n_max)
      .def_readonly("ngram_weight", &MetricConfig::ngram_weight)
      .def_readonly("jaccard_weight", &MetricConfig::jaccard_weight);

  m.def("tokenize", &tokenize, py::arg("text"));
  m.def("sim_ngram", &sim_ngram, py::arg("candidate"), py::arg("reference"),
        py::arg("config") = MetricConfig{});
  m.def("sim_jaccard", &sim_jaccard, py::arg("a"), py::arg("b"));
  m.def("sfe", &sfe, py::arg("candidate"), py::arg("reference"),
        py::arg("config") = MetricConfig{});

  py::class_<ExecutionResult>(m, "ExecutionResult")
      .def_readonly("output", &ExecutionResult::output)
      .def_readonly("failed_at", &ExecutionResult::failed_at)
      .def_readonly("tokens", &ExecutionResult::tokens)
      .def("failed", &ExecutionResult::failed);

  py::class_<SimWorld>(m, "SimWorld")
      .def_property_readonly("space", [](const SimWorld& w) { return w.space; })
      .def_property_readonly("hidden_target", [](const SimWorld& w) { return w.hidden_target; })
      .def_property_readonly("tasks", [](const SimWorld& w) { return w.tasks; })
      .def_readonly("noise", &SimWorld::noise);

  m.def("make_sim_world", &build_world, py::arg("space"), py::arg("target"), py::arg("tasks"),
        py::arg("forbidden") = std::vector<std::pair<std::string, std::string>>{},
        py::arg("noise") = 0.0);
  m.def("sim_execute", &sim_execute, py::arg("world"), py::arg("workflow"), py::arg("task"));
  m.def("mean_similarity",
        [](const SimWorld& world, const Workflow& workflow, const MetricConfig& metric) {
          return mean_similarity(world, make_sfe_evaluator(metric), workflow);
        },
        py::arg("world"), py::arg("workflow"), py::arg("metric") = MetricConfig{});

  py::class_<BruteForceResult>(m, "BruteForceResult")
      .def_readonly("workflow", &BruteForceResult::workflow)
      .def_readonly("similarity", &BruteForceResult::similarity);
  m.def("brute_force_optimum",
        [](const SimWorld& world, int l_max, const MetricConfig& metric) {
          return brute_force_optimum(world, make_sfe_evaluator(metric), l_max);
        },
        py::arg("world"), py::arg("l_max"), py::arg("metric") = MetricConfig{});

  py::class_<SearchConfig>(m, "SearchConfig")
      .def(py::init([](int l_max, int max_children, double beta, double kappa, int budget,
                       int rollout_minibatch, std::uint64_t seed, bool enable_terminator,
                       bool suffix_failures_terminal) {
             SearchConfig config{l_max,  max_children,      beta, kappa,

                                 budget, rollout_minibatch, seed, enable_terminator,
                                 suffix_failures_terminal};
             config.validate();
             return config;
           }),
           py::arg("l_max") = 6, py::arg("max_children") = 5, py::arg("beta") = 0.5,
           py::arg("kappa") = 1.4142135623730951, py::arg("budget") = 20,
           py::arg("rollout_minibatch") = 1, py::arg("seed") = 0,
           py::arg("enable_terminator") = false, py::arg("suffix_failures_terminal") = false)
      .def_readonly("l_max", &SearchConfig::l_max)
      .def_readonly("max_children", &SearchConfig::max_children)
      .def_readonly("beta", &SearchConfig::beta)
      .def_readonly("kappa", &SearchConfig::kappa)
      .def_readonly("budget", &SearchConfig::budget)
      .def_readonly("seed", &SearchConfig::seed);

  py::class_<RunRecord>(m, "RunRecord")
      .def_readonly("iteration", &RunRecord::iteration)
      .def_readonly("reward", &RunRecord::reward)
      .def_readonly("cumulative_tokens", &RunRecord::cumulative_tokens)
      .def_readonly("best_similarity", &RunRecord::best_similarity)
      .def_readonly("best_length", &RunRecord::best_length)
      .def_readonly("red_fraction", &RunRecord::red_fraction)
      .def_readonly("max_tree_depth", &RunRecord::max_tree_depth);

  py::class_<TreeMeasurement>(m, "TreeMeasurement")
      .def_readonly("depth_counts", &TreeMeasurement::depth_counts)
      .def_readonly("red_fraction", &TreeMeasurement::red_fraction)
      .def_readonly("realized_p", &TreeMeasurement::realized_p)
      .def_readonly("node_count", &TreeMeasurement::node_count);

  py::class_<SearchOutcome>(m, "SearchOutcome")
      .def_readonly("best_workflow", &SearchOutcome::best_workflow)
      .def_readonly("best_mean_reward", &SearchOutcome::best_mean_reward)
      .def_readonly("records", &SearchOutcome::records)
      .def_readonly("exhausted", &SearchOutcome::exhausted)
      .def_property_readonly("tree_measurement",
                             [](const SearchOutcome& o) { return measure_tree(o.tree); });

  m.def("run_search",
        [](const SimWorld& world, const SearchConfig& config, const MetricConfig& metric) {
          return search_world(world, config, metric, true);
        },
        py::arg("world"), py::arg("config") = SearchConfig{},
        py::arg("metric") = MetricConfig{});
  m.def("run_search_unpruned",
        [](const SimWorld& world, const SearchConfig& config, const MetricConfig& metric) {
          return search_world(world, config, metric, false);
        },
        py::arg("world"), py::arg("config") = SearchConfig{},
        py::arg("metric") = MetricConfig{});

  m.def("v_full", [](int b, int l_max) { return u128_to_py_int(v_full(b, l_max)); },
        py::arg("b"), py::arg("l_max"));
  m.def("v_eff", &v_eff, py::arg("b"), py::arg("p"), py::arg("l_max"));
  m.def("eta_lower", &eta_lower, py::arg("p"), py::arg("l_max"));
  m.def("eta_upper", &eta_upper, py::arg("beta"), py::arg("l_max"));

  py::class_<PairedTResult>(m, "PairedTResult")
      .def_readonly("mean", &PairedTResult::mean)
      .def_readonly("sd", &PairedTResult::sd)
      .def_readonly("t", &PairedTResult::t);
  m.def("paired_t", &paired_t, py::arg("differences"));

  m.attr("__version__") = "0.1.0";
}
