#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "flowrecon/primitives.hpp"
#include "flowrecon/similarity.hpp"

namespace flowrecon {

/// Outcome of running one workflow on one task.
///
/// `failed_at` indexes the first step that never completed: steps at indices
/// < failed_at were invoked. On success it is empty. `output` is empty
/// whenever `failed_at` is set. Under cost accounting every invoked step is
/// charged; usage-reporting executors charge what the backend reports.
struct ExecutionResult {
  std::string output;
  std::optional<int> failed_at;
  long long tokens = 0;

  bool failed() const { return failed_at.has_value(); }
};

/// Pluggable workflow runner. Implementations must be safe for concurrent
/// calls on a const instance.
class Executor {
 public:
  virtual ~Executor() = default;
  virtual ExecutionResult execute(const Workflow& workflow, const std::string& task) const = 0;
};

/// Deterministic stand-in for a black-box agentic system: a hidden target
/// chain, forbidden transitions that abort execution, and tasks whose target
/// outputs are the hidden chain's own traces.
struct SimWorld {
  PrimitiveSpace space;
  Workflow hidden_target;
  std::set<std::pair<std::string, std::string>> forbidden;
  std::vector<ObservationPair> tasks;
  double noise = 0.0;
};

/// Builds a world whose task outputs are the noise-free traces of the hidden
/// target. Throws ConfigError when the target is invalid over the space,
/// contains a forbidden transition, or `task_names` is empty.
SimWorld make_sim_world(PrimitiveSpace space, std::vector<std::string> target_steps,
                        const std::vector<std::string>& task_names,
                        std::set<std::pair<std::string, std::string>> forbidden = {},
                        double noise = 0.0);

/// The token a primitive contributes to a trace: its role, with attached tool
/// names appended. Stripping tools therefore changes the emitted trace.
std::string emit_token(const Primitive& primitive);

/// Runs a workflow in the simulated world. The trace is the task followed by
/// "|<token>" per executed step. Hitting a forbidden transition stops the run
/// with the failure bookkeeping described on ExecutionResult. With noise > 0
/// each emitted token is independently replaced by a sentinel, seeded from a
/// (task, workflow) hash so repeated calls agree.
ExecutionResult sim_execute(const SimWorld& world, const Workflow& workflow,
                            const std::string& task);

class SimExecutor : public Executor {
 public:
  explicit SimExecutor(SimWorld world) : world_(std::move(world)) {}

  ExecutionResult execute(const Workflow& workflow, const std::string& task) const override {
    return sim_execute(world_, workflow, task);
  }

  const SimWorld& world() const { return world_; }

 private:
  SimWorld world_;
};

/// Mean similarity of a workflow's outputs against all world tasks; failed
/// executions contribute 0.
double mean_similarity(const SimWorld& world, const Evaluator& evaluator,
                       const Workflow& workflow);

struct BruteForceResult {
  Workflow workflow;
  double similarity = 0.0;
};

/// Exhaustively evaluates every workflow of length 1..l_max, averaging
/// similarity over all world tasks. Ties prefer shorter workflows, then
/// lexicographically smaller id sequences. Throws LimitError when the
/// candidate count b + b^2 + ... + b^l_max exceeds 1e6.
BruteForceResult brute_force_optimum(const SimWorld& world, const Evaluator& evaluator,
                                     int l_max);

/// Loads a world description from JSON. Fields: "hidden_target" (id list),
/// "forbidden" (list of id pairs), "noise" (default 0), the space as either
/// inline "primitives" or a "space" file path, and tasks as either inline
/// "tasks" (list of task strings; outputs are generated as target traces) or
/// a "dataset" JSONL path. Relative paths resolve against the world file's
/// directory.
SimWorld load_world(const std::filesystem::path& path);

/// Same world (target, forbidden set, tasks, noise) over a different space.
/// Target outputs are kept as-is; used for tool-ablation variants.
SimWorld with_space(const SimWorld& world, PrimitiveSpace space);

}  // namespace flowrecon
