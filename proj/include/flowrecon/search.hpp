#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "flowrecon/execution.hpp"
#include "flowrecon/primitives.hpp"
#include "flowrecon/rng.hpp"
#include "flowrecon/similarity.hpp"

namespace flowrecon {

enum class NodeColor { kBlack, kRed };

/// Search parameters. Defaults match the documented configuration surface.
struct SearchConfig {
  int l_max = 6;
  int max_children = 5;                 // per-node branching cap M
  double beta = 0.5;                    // quantile level for the color threshold
  double kappa = 1.4142135623730951;    // UCB exploration constant, sqrt(2)
  int budget = 20;                      // iterations to run
  int rollout_minibatch = 1;            // tasks averaged per rollout
  std::uint64_t seed = 0;
  /// When set, rollout completion may draw a stop marker and end the
  /// workflow below l_max.
  bool enable_terminator = false;
  /// When set, a failure anywhere in an executed workflow marks the node
  /// terminal; by default only failures inside the node's own prefix do.
  bool suffix_failures_terminal = false;

  void validate() const;
};

/// One tree node: a workflow prefix plus visit statistics. `id` is the step
/// appended to the parent's prefix (empty at the root).
struct TreeNode {
  int parent = -1;
  std::string id;
  int depth = 0;
  std::vector<int> children;
  long long visits = 0;       // N
  double reward_sum = 0.0;    // Q
  long long rollouts = 0;     // simulations started here
  bool failed = false;        // killed by a deterministic prefix failure
  bool terminal = false;      // at depth cap, or failed
  NodeColor color = NodeColor::kBlack;
};

/// Flat-array tree; node 0 is the root. Indices stay valid for the lifetime
/// of the tree.
class SearchTree {
 public:
  SearchTree() { nodes_.push_back(TreeNode{}); }

  int root() const { return 0; }
  int size() const { return static_cast<int>(nodes_.size()); }
  int max_depth() const { return max_depth_; }

  const TreeNode& node(int index) const { return nodes_.at(static_cast<size_t>(index)); }
  TreeNode& node(int index) { return nodes_.at(static_cast<size_t>(index)); }

  /// Appends `id` under `parent`. Throws ConfigError when a sibling already
  /// carries the same id.
  int add_child(int parent, const std::string& id);

  /// The workflow prefix a node stands for, root steps first.
  std::vector<std::string> prefix_of(int index) const;

 private:
  std::vector<TreeNode> nodes_;
  int max_depth_ = 0;
};

/// Composite potential of a node: quality (mean reward) x depth ratio x
/// width ratio. Unvisited nodes score 0 so fresh nodes keep branching until
/// evidence accrues.
double node_score(const TreeNode& node, int l_max, int max_children);

/// Nearest-rank quantile: scores sorted ascending, 1-based index
/// ceil(beta * n) clamped to >= 1. beta = 0 yields the minimum.
double quantile_threshold(std::vector<double> scores, double beta);

struct RecolorResult {
  double theta = 0.0;
  int red_count = 0;
  int active_count = 0;

  double red_fraction() const {
    return active_count > 0 ? static_cast<double>(red_count) / active_count : 0.0;
  }
};

/// Recomputes every node's color. Active nodes are the non-terminal ones
/// (root included); a node turns Red iff its score reaches the beta-quantile
/// threshold of active scores. Terminal nodes are always Black.
RecolorResult recolor(SearchTree& tree, double beta, int l_max, int max_children);

/// UCB1 pick among `parent`'s children: mean reward plus
/// kappa * sqrt(ln N(parent) / N(child)). An unvisited child wins over all
/// visited ones; ties resolve to the child whose appended id comes first in
/// the primitive space. Throws ConfigError when the parent has no children.
int ucb_select(const SearchTree& tree, int parent, double kappa, const PrimitiveSpace& space);

struct Selection {
  int node = -1;  // -1 signals a fully exhausted tree (the run stops)
  bool expanded = false;
};

/// Color-guided walk: Red nodes descend through UCB (their choice is treated
/// as stabilized), Black nodes branch by creating a new child, with the
/// documented fallbacks when the branching cap or the primitive set runs out.
/// Descent only considers non-terminal children; a node left with no viable
/// child and no expansion capacity is exhausted and joins the terminal set,
/// so the walk reroutes instead of re-simulating dead branches.
Selection select_and_expand(SearchTree& tree, const PrimitiveSpace& space,
                            const SearchConfig& config, Rng& rng);

/// Classic UCT step used by the unpruned control: expand an untried
/// primitive wherever one remains, otherwise descend by UCB. Shares the
/// exhausted-subtree handling of select_and_expand.
Selection select_and_expand_uct(SearchTree& tree, const PrimitiveSpace& space,
                                const SearchConfig& config, Rng& rng);

struct RolloutOutcome {
  double reward = 0.0;
  long long tokens = 0;
  std::optional<int> failed_at;  // earliest failure over the minibatch
  Workflow completed;
  bool complete = false;         // a full-length (or terminator-ended) workflow ran
  bool marked_terminal = false;
};

/// Completes the node's prefix to full length by uniform seeded sampling,
/// evaluates it on `rollout_minibatch` tasks drawn with replacement, and
/// returns the mean similarity (failures contribute 0). A failure landing
/// inside the node's own prefix marks the node terminal. Nodes already
/// terminal through failure short-circuit to their recorded zero reward.
RolloutOutcome rollout(SearchTree& tree, int node, const PrimitiveSpace& space,
                       const SearchConfig& config, const Executor& executor,
                       const Evaluator& evaluator, const std::vector<ObservationPair>& dataset,
                       Rng& rng);

/// Adds one visit and `reward` to every node from `node` up to the root.
void backup(SearchTree& tree, int node, double reward);

/// Per-iteration log row.
struct RunRecord {
  int iteration = 0;
  double reward = 0.0;
  long long cumulative_tokens = 0;
  double best_similarity = 0.0;  // running max of observed rollout rewards
  int best_length = 0;
  double red_fraction = 0.0;
  int max_tree_depth = 0;
};

struct SearchOutcome {
  Workflow best_workflow;
  double best_mean_reward = 0.0;
  std::vector<RunRecord> records;
  SearchTree tree;
  bool exhausted = false;
};

/// Called after each iteration with the tree and the fresh record; used by
/// invariant checks and progress displays.
using IterationObserver = std::function<void(const SearchTree&, const RunRecord&)>;

/// Full search cycle: recolor, color-guided select/expand, rollout, backup,
/// one record per iteration. The returned workflow is the complete evaluated
/// workflow with the highest mean observed reward (ties: earliest discovery,
/// then lexicographic id order). Deterministic for a fixed seed. When the
/// whole tree exhausts before the budget, the run stops and reports
/// best-so-far with the `exhausted` flag set.
SearchOutcome run_search(const PrimitiveSpace& space, const SearchConfig& config,
                         const Executor& executor, const Evaluator& evaluator,
                         const std::vector<ObservationPair>& dataset,
                         const IterationObserver& observer = {});

/// Identical loop with coloring disabled and classic UCT selection; serves
/// as the unpruned control under the same budget accounting.
SearchOutcome run_search_unpruned(const PrimitiveSpace& space, const SearchConfig& config,
                                  const Executor& executor, const Evaluator& evaluator,
                                  const std::vector<ObservationPair>& dataset,
                                  const IterationObserver& observer = {});

}  // namespace flowrecon
