#include "flowrecon/search.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "flowrecon/errors.hpp"

namespace flowrecon {

void SearchConfig::validate() const {
  if (l_max < 1) throw ConfigError("l_max must be >= 1");
  if (max_children < 1) throw ConfigError("max_children must be >= 1");
  if (beta < 0.0 || beta >= 1.0) throw ConfigError("beta must lie in [0, 1)");
  if (kappa < 0.0) throw ConfigError("kappa must be >= 0");
  if (budget < 1) throw ConfigError("budget must be >= 1");
  if (rollout_minibatch < 1) throw ConfigError("rollout_minibatch must be >= 1");
}

int SearchTree::add_child(int parent, const std::string& id) {
  const TreeNode& parent_node = node(parent);
  for (const int child : parent_node.children) {
    if (node(child).id == id) {
      throw ConfigError("node already has a child for primitive '" + id + "'");
    }
  }
  TreeNode child;
  child.parent = parent;
  child.id = id;
  child.depth = parent_node.depth + 1;
  const int index = static_cast<int>(nodes_.size());
  nodes_.push_back(std::move(child));
  nodes_[static_cast<size_t>(parent)].children.push_back(index);
  max_depth_ = std::max(max_depth_, nodes_.back().depth);
  return index;
}

std::vector<std::string> SearchTree::prefix_of(int index) const {
  std::vector<std::string> steps;
  for (int current = index; current != 0; current = node(current).parent) {
    steps.push_back(node(current).id);
  }
  std::reverse(steps.begin(), steps.end());
  return steps;
}

double node_score(const TreeNode& node, int l_max, int max_children) {
  if (node.visits == 0) {
    return 0.0;
  }
  const double quality = node.reward_sum / static_cast<double>(node.visits);
  const double depth_ratio = static_cast<double>(node.depth + 1) / (l_max + 1);
  const double width_ratio =
      static_cast<double>(node.children.size()) / static_cast<double>(max_children);
  return quality * depth_ratio * width_ratio;
}

double quantile_threshold(std::vector<double> scores, double beta) {
  if (scores.empty()) {
    throw ConfigError("quantile of an empty score set");
  }
  std::sort(scores.begin(), scores.end());
  const auto n = static_cast<double>(scores.size());
  // Nudge below the product so rounding noise cannot push an exact integer
  // rank (for example 0.07 * 100) up to the next one.
  const auto rank =
      std::max<long long>(1, static_cast<long long>(std::ceil(beta * n - 1e-9)));
  return scores[static_cast<size_t>(rank - 1)];
}

RecolorResult recolor(SearchTree& tree, double beta, int l_max, int max_children) {
  RecolorResult result;
  std::vector<double> active_scores;
  for (int i = 0; i < tree.size(); ++i) {
    if (!tree.node(i).terminal) {
      active_scores.push_back(node_score(tree.node(i), l_max, max_children));
    }
  }
  result.active_count = static_cast<int>(active_scores.size());
  if (active_scores.empty()) {
    for (int i = 0; i < tree.size(); ++i) {
      tree.node(i).color = NodeColor::kBlack;
    }
    return result;
  }
  result.theta = quantile_threshold(active_scores, beta);
  for (int i = 0; i < tree.size(); ++i) {
    TreeNode& node = tree.node(i);
    if (!node.terminal && node_score(node, l_max, max_children) >= result.theta) {
      node.color = NodeColor::kRed;
      ++result.red_count;
    } else {
      node.color = NodeColor::kBlack;
    }
  }
  return result;
}

namespace {

int ucb_select_among(const SearchTree& tree, int parent, double kappa,
                     const PrimitiveSpace& space, const std::vector<int>& candidates) {
  const TreeNode& parent_node = tree.node(parent);
  if (candidates.empty()) {
    throw ConfigError("ucb_select on a childless node");
  }
  const double log_parent_visits =
      std::log(static_cast<double>(std::max<long long>(parent_node.visits, 1)));

  int best = -1;
  int best_order = -1;
  double best_value = 0.0;
  bool best_unvisited = false;
  for (const int child : candidates) {
    const TreeNode& child_node = tree.node(child);
    const int order = space.index_of(child_node.id);
    const bool unvisited = child_node.visits == 0;
    double value = 0.0;
    if (!unvisited) {
      value = child_node.reward_sum / static_cast<double>(child_node.visits) +
              kappa * std::sqrt(log_parent_visits / static_cast<double>(child_node.visits));
    }
    bool better;
    if (best < 0) {
      better = true;
    } else if (unvisited != best_unvisited) {
      better = unvisited;
    } else if (unvisited) {
      better = order < best_order;
    } else {
      better = value > best_value || (value == best_value && order < best_order);
    }
    if (better) {
      best = child;
      best_order = order;
      best_value = value;
      best_unvisited = unvisited;
    }
  }
  return best;
}

}  // namespace

int ucb_select(const SearchTree& tree, int parent, double kappa, const PrimitiveSpace& space) {
  return ucb_select_among(tree, parent, kappa, space, tree.node(parent).children);
}

namespace {

std::vector<int> viable_children(const SearchTree& tree, int node_index) {
  std::vector<int> viable;
  for (const int child : tree.node(node_index).children) {
    if (!tree.node(child).terminal) {
      viable.push_back(child);
    }
  }
  return viable;
}

// Ids not yet used by any child, in primitive-space order.
std::vector<int> untried_primitives(const SearchTree& tree, int node_index,
                                    const PrimitiveSpace& space) {
  std::vector<bool> used(static_cast<size_t>(space.size()), false);
  for (const int child : tree.node(node_index).children) {
    const int order = space.index_of(tree.node(child).id);
    if (order >= 0) {
      used[static_cast<size_t>(order)] = true;
    }
  }
  std::vector<int> untried;
  for (int i = 0; i < space.size(); ++i) {
    if (!used[static_cast<size_t>(i)]) {
      untried.push_back(i);
    }
  }
  return untried;
}

int expand_random_untried(SearchTree& tree, int node_index, const PrimitiveSpace& space,
                          const std::vector<int>& untried, int l_max, Rng& rng) {
  const int pick = untried[static_cast<size_t>(next_below(rng, untried.size()))];
  const int child = tree.add_child(node_index, space.at(pick).id);
  if (tree.node(child).depth >= l_max) {
    tree.node(child).terminal = true;
  }
  return child;
}

}  // namespace

Selection select_and_expand(SearchTree& tree, const PrimitiveSpace& space,
                            const SearchConfig& config, Rng& rng) {
  while (!tree.node(tree.root()).terminal) {
    int current = tree.root();
    while (true) {
      TreeNode& node = tree.node(current);
      if (node.terminal || node.depth >= config.l_max) {
        return {current, false};
      }
      const bool capped = static_cast<int>(node.children.size()) >= config.max_children;
      const std::vector<int> untried =
          capped ? std::vector<int>{} : untried_primitives(tree, current, space);
      if (node.color == NodeColor::kBlack && !untried.empty()) {
        return {expand_random_untried(tree, current, space, untried, config.l_max, rng), true};
      }
      const std::vector<int> viable = viable_children(tree, current);
      if (!viable.empty()) {
        current = ucb_select_among(tree, current, config.kappa, space, viable);
        continue;
      }
      if (!untried.empty()) {
        // Red without a live child (or a starved Black node) still branches.
        return {expand_random_untried(tree, current, space, untried, config.l_max, rng), true};
      }
      node.terminal = true;  // exhausted subtree; reroute from the root
      node.color = NodeColor::kBlack;
      break;
    }
  }
  return {-1, false};
}

Selection select_and_expand_uct(SearchTree& tree, const PrimitiveSpace& space,
                                const SearchConfig& config, Rng& rng) {
  while (!tree.node(tree.root()).terminal) {
    int current = tree.root();
    while (true) {
      TreeNode& node = tree.node(current);
      if (node.terminal || node.depth >= config.l_max) {
        return {current, false};
      }
      const std::vector<int> untried = untried_primitives(tree, current, space);
      if (!untried.empty()) {
        return {expand_random_untried(tree, current, space, untried, config.l_max, rng), true};
      }
      const std::vector<int> viable = viable_children(tree, current);
      if (!viable.empty()) {
        current = ucb_select_among(tree, current, config.kappa, space, viable);
        continue;
      }
      node.terminal = true;
      node.color = NodeColor::kBlack;
      break;
    }
  }
  return {-1, false};
}

RolloutOutcome rollout(SearchTree& tree, int node_index, const PrimitiveSpace& space,
                       const SearchConfig& config, const Executor& executor,
                       const Evaluator& evaluator, const std::vector<ObservationPair>& dataset,
                       Rng& rng) {
  if (dataset.empty()) {
    throw ConfigError("rollout needs a non-empty dataset");
  }
  TreeNode& node = tree.node(node_index);
  node.rollouts += 1;

  RolloutOutcome outcome;
  if (node.failed) {
    return outcome;  // recorded zero reward, nothing re-executed
  }

  Workflow workflow{tree.prefix_of(node_index)};
  while (workflow.length() < config.l_max) {
    const std::uint64_t choices =
        static_cast<std::uint64_t>(space.size()) + (config.enable_terminator ? 1 : 0);
    const std::uint64_t pick = next_below(rng, choices);
    if (pick == static_cast<std::uint64_t>(space.size())) {
      break;  // terminator drawn
    }
    workflow.steps.push_back(space.at(static_cast<int>(pick)).id);
  }

  double reward_total = 0.0;
  for (int i = 0; i < config.rollout_minibatch; ++i) {
    const auto task_index = static_cast<size_t>(next_below(rng, dataset.size()));
    const ObservationPair& pair = dataset[task_index];
    const ExecutionResult result = executor.execute(workflow, pair.task);
    outcome.tokens += result.tokens;
    if (result.failed()) {
      if (!outcome.failed_at || *result.failed_at < *outcome.failed_at) {
        outcome.failed_at = result.failed_at;
      }
    } else {
      reward_total += evaluator(result.output, pair.output);
    }
  }
  outcome.reward = reward_total / config.rollout_minibatch;
  outcome.completed = std::move(workflow);
  outcome.complete = true;

  if (outcome.failed_at &&
      (config.suffix_failures_terminal || *outcome.failed_at <= node.depth)) {
    node.failed = true;
    node.terminal = true;
    node.color = NodeColor::kBlack;
    outcome.marked_terminal = true;
  }
  return outcome;
}

void backup(SearchTree& tree, int node_index, double reward) {
  int current = node_index;
  while (current >= 0) {
    TreeNode& node = tree.node(current);
    node.visits += 1;
    node.reward_sum += reward;
    current = node.parent;
  }
}

namespace {

struct CompletionStats {
  double reward_sum = 0.0;
  long long count = 0;
  int first_iteration = 0;
};

SearchOutcome run_search_impl(const PrimitiveSpace& space, const SearchConfig& config,
                              const Executor& executor, const Evaluator& evaluator,
                              const std::vector<ObservationPair>& dataset, bool pruned,
                              const IterationObserver& observer) {
  config.validate();
  if (dataset.empty()) {
    throw ConfigError("run_search needs a non-empty dataset");
  }

  SearchOutcome outcome;
  SearchTree& tree = outcome.tree;
  Rng rng = make_rng(config.seed);

  // Ordered by id sequence, so full ties resolve lexicographically.
  std::map<std::vector<std::string>, CompletionStats> completions;

  long long cumulative_tokens = 0;
  double best_similarity = 0.0;
  int best_length = 0;
  bool has_best = false;

  for (int iteration = 1; iteration <= config.budget; ++iteration) {
    double red_fraction = 0.0;
    if (pruned) {
      red_fraction =
          recolor(tree, config.beta, config.l_max, config.max_children).red_fraction();
    }

    const Selection selection = pruned ? select_and_expand(tree, space, config, rng)
                                       : select_and_expand_uct(tree, space, config, rng);
    if (selection.node < 0) {
      outcome.exhausted = true;  // every node terminal; report best-so-far
      break;
    }

    RolloutOutcome rolled = rollout(tree, selection.node, space, config, executor, evaluator,
                                    dataset, rng);
    backup(tree, selection.node, rolled.reward);
    cumulative_tokens += rolled.tokens;
    const double reward = rolled.reward;
    if (rolled.complete) {
      CompletionStats& stats = completions[rolled.completed.steps];
      stats.reward_sum += rolled.reward;
      stats.count += 1;
      if (stats.count == 1) {
        stats.first_iteration = iteration;
      }
      if (!has_best || rolled.reward > best_similarity) {
        best_similarity = rolled.reward;
        best_length = rolled.completed.length();
        has_best = true;
      }
    }

    RunRecord record;
    record.iteration = iteration;
    record.reward = reward;
    record.cumulative_tokens = cumulative_tokens;
    record.best_similarity = best_similarity;
    record.best_length = best_length;
    record.red_fraction = red_fraction;
    record.max_tree_depth = tree.max_depth();
    outcome.records.push_back(record);
    if (observer) {
      observer(tree, record);
    }
  }

  double best_mean = -1.0;
  int best_first_iteration = 0;
  for (const auto& [steps, stats] : completions) {
    const double mean = stats.reward_sum / static_cast<double>(stats.count);
    const bool better =
        mean > best_mean || (mean == best_mean && stats.first_iteration < best_first_iteration);
    if (better) {
      best_mean = mean;
      best_first_iteration = stats.first_iteration;
      outcome.best_workflow = Workflow{steps};
    }
  }
  outcome.best_mean_reward = std::max(best_mean, 0.0);
  return outcome;
}

}  // namespace

SearchOutcome run_search(const PrimitiveSpace& space, const SearchConfig& config,
                         const Executor& executor, const Evaluator& evaluator,
                         const std::vector<ObservationPair>& dataset,
                         const IterationObserver& observer) {
  return run_search_impl(space, config, executor, evaluator, dataset, true, observer);
}

SearchOutcome run_search_unpruned(const PrimitiveSpace& space, const SearchConfig& config,
                                  const Executor& executor, const Evaluator& evaluator,
                                  const std::vector<ObservationPair>& dataset,
                                  const IterationObserver& observer) {
  return run_search_impl(space, config, executor, evaluator, dataset, false, observer);
}

}  // namespace flowrecon
