#include "flowrecon/execution.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "flowrecon/errors.hpp"
#include "flowrecon/rng.hpp"

namespace flowrecon {

using nlohmann::json;

namespace {

constexpr std::string_view kNoiseSentinel = "<noise>";

std::uint64_t noise_seed(const std::string& task, const Workflow& workflow) {
  std::string key = task;
  for (const std::string& id : workflow.steps) {
    key.push_back('\x1f');
    key += id;
  }
  return fnv1a64(key);
}

void check_target(const SimWorld& world) {
  if (world.hidden_target.length() < 1) {
    throw ConfigError("hidden target must have at least one step");
  }
  for (const std::string& id : world.hidden_target.steps) {
    if (world.space.index_of(id) < 0) {
      throw ConfigError("hidden target references unknown primitive '" + id + "'");
    }
  }
  for (int i = 0; i + 1 < world.hidden_target.length(); ++i) {
    const auto pair = std::make_pair(world.hidden_target.steps[static_cast<size_t>(i)],
                                     world.hidden_target.steps[static_cast<size_t>(i) + 1]);
    if (world.forbidden.contains(pair)) {
      throw ConfigError("hidden target contains forbidden transition " + pair.first + " -> " +
                        pair.second);
    }
  }
}

}  // namespace

std::string emit_token(const Primitive& primitive) {
  std::string token = primitive.role;
  for (const std::string& tool : primitive.tools) {
    token.push_back('+');
    token += tool;
  }
  return token;
}

ExecutionResult sim_execute(const SimWorld& world, const Workflow& workflow,
                            const std::string& task) {
  ExecutionResult result;
  Rng noise_rng = make_rng(noise_seed(task, workflow));
  std::string trace = task;
  for (int i = 0; i < workflow.length(); ++i) {
    const Primitive* primitive = world.space.find(workflow.steps[static_cast<size_t>(i)]);
    if (primitive == nullptr) {
      throw ConfigError("workflow references unknown primitive '" +
                        workflow.steps[static_cast<size_t>(i)] + "'");
    }
    result.tokens += primitive->cost;
    std::string token = emit_token(*primitive);
    if (world.noise > 0.0 && next_unit(noise_rng) < world.noise) {
      token = kNoiseSentinel;
    }
    trace.push_back('|');
    trace += token;
    if (i >= 1) {
      const auto pair = std::make_pair(workflow.steps[static_cast<size_t>(i) - 1],
                                       workflow.steps[static_cast<size_t>(i)]);
      if (world.forbidden.contains(pair)) {
        result.failed_at = i + 1;
        return result;
      }
    }
  }
  result.output = std::move(trace);
  return result;
}

SimWorld make_sim_world(PrimitiveSpace space, std::vector<std::string> target_steps,
                        const std::vector<std::string>& task_names,
                        std::set<std::pair<std::string, std::string>> forbidden, double noise) {
  if (noise < 0.0 || noise >= 1.0) {
    throw ConfigError("noise must lie in [0, 1)");
  }
  if (task_names.empty()) {
    throw ConfigError("a simulated world needs at least one task");
  }
  SimWorld world{std::move(space), Workflow{std::move(target_steps)}, std::move(forbidden),
                 {}, 0.0};
  check_target(world);
  for (const std::string& task : task_names) {
    if (task.empty()) {
      throw ConfigError("task names must be non-empty");
    }
    const ExecutionResult traced = sim_execute(world, world.hidden_target, task);
    world.tasks.push_back(ObservationPair{task, traced.output});
  }
  world.noise = noise;
  return world;
}

double mean_similarity(const SimWorld& world, const Evaluator& evaluator,
                       const Workflow& workflow) {
  if (world.tasks.empty()) {
    throw ConfigError("world has no tasks to average over");
  }
  double sum = 0.0;
  for (const ObservationPair& pair : world.tasks) {
    const ExecutionResult result = sim_execute(world, workflow, pair.task);
    if (!result.failed()) {
      sum += evaluator(result.output, pair.output);
    }
  }
  return sum / static_cast<double>(world.tasks.size());
}

BruteForceResult brute_force_optimum(const SimWorld& world, const Evaluator& evaluator,
                                     int l_max) {
  if (l_max < 1) {
    throw ConfigError("l_max must be >= 1");
  }
  const double b = world.space.size();
  double candidates = 0.0;
  for (int d = 1; d <= l_max; ++d) {
    candidates += std::pow(b, d);
    if (candidates > 1e6) {
      throw LimitError("brute force would enumerate more than 1e6 workflows");
    }
  }

  // Enumerating ids in sorted order and keeping only strict improvements
  // realizes the tie rule: shorter first, then lexicographic.
  std::vector<std::string> ids;
  ids.reserve(static_cast<size_t>(world.space.size()));
  for (const Primitive& p : world.space.primitives()) {
    ids.push_back(p.id);
  }
  std::sort(ids.begin(), ids.end());

  BruteForceResult best;
  best.similarity = -1.0;
  for (int length = 1; length <= l_max; ++length) {
    std::vector<size_t> odometer(static_cast<size_t>(length), 0);
    while (true) {
      Workflow candidate;
      candidate.steps.reserve(odometer.size());
      for (const size_t digit : odometer) {
        candidate.steps.push_back(ids[digit]);
      }
      const double similarity = mean_similarity(world, evaluator, candidate);
      if (similarity > best.similarity) {
        best.workflow = std::move(candidate);
        best.similarity = similarity;
      }
      int position = length - 1;
      while (position >= 0) {
        if (++odometer[static_cast<size_t>(position)] < ids.size()) {
          break;
        }
        odometer[static_cast<size_t>(position)] = 0;
        --position;
      }
      if (position < 0) {
        break;
      }
    }
  }
  return best;
}

SimWorld load_world(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open world file: " + path.string());
  }
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw FormatError(path.string() + ": invalid JSON");
  }
  const std::filesystem::path base = path.parent_path();

  std::optional<PrimitiveSpace> space;
  if (doc.contains("primitives")) {
    std::vector<Primitive> primitives;
    for (const auto& item : doc["primitives"]) {
      if (!item.is_object() || !item.contains("id")) {
        throw FormatError(path.string() + ": each primitive needs an \"id\"");
      }
      Primitive p;
      p.id = item["id"].get<std::string>();
      p.role = item.value("role", p.id);
      p.model = item.value("model", std::string{"default"});
      p.pattern = item.value("pattern", std::string{"direct"});
      if (item.contains("tools")) {
        for (const auto& tool : item["tools"]) {
          p.tools.push_back(tool.get<std::string>());
        }
      }
      p.cost = item.value("cost", 1LL);
      primitives.push_back(std::move(p));
    }
    space = PrimitiveSpace(std::move(primitives));
  } else if (doc.contains("space") && doc["space"].is_string()) {
    std::filesystem::path space_path = doc["space"].get<std::string>();
    if (space_path.is_relative()) {
      space_path = base / space_path;
    }
    space = load_space(space_path);
  } else {
    throw FormatError(path.string() + ": world needs inline \"primitives\" or a \"space\" path");
  }

  if (!doc.contains("hidden_target") || !doc["hidden_target"].is_array()) {
    throw FormatError(path.string() + ": missing \"hidden_target\" id list");
  }
  std::vector<std::string> target;
  for (const auto& id : doc["hidden_target"]) {
    target.push_back(id.get<std::string>());
  }

  std::set<std::pair<std::string, std::string>> forbidden;
  if (doc.contains("forbidden")) {
    for (const auto& pair : doc["forbidden"]) {
      if (!pair.is_array() || pair.size() != 2) {
        throw FormatError(path.string() + ": forbidden entries must be [from, to] pairs");
      }
      forbidden.emplace(pair[0].get<std::string>(), pair[1].get<std::string>());
    }
  }
  const double noise = doc.value("noise", 0.0);

  if (doc.contains("tasks") && doc["tasks"].is_array()) {
    std::vector<std::string> task_names;
    for (const auto& task : doc["tasks"]) {
      task_names.push_back(task.get<std::string>());
    }
    return make_sim_world(std::move(*space), std::move(target), task_names, std::move(forbidden),
                          noise);
  }
  if (doc.contains("dataset") && doc["dataset"].is_string()) {
    std::filesystem::path dataset_path = doc["dataset"].get<std::string>();
    if (dataset_path.is_relative()) {
      dataset_path = base / dataset_path;
    }
    SimWorld world{std::move(*space), Workflow{std::move(target)}, std::move(forbidden),
                   load_dataset(dataset_path), 0.0};
    if (world.tasks.empty()) {
      throw FormatError(path.string() + ": dataset provides no tasks");
    }
    check_target(world);
    if (noise < 0.0 || noise >= 1.0) {
      throw ConfigError("noise must lie in [0, 1)");
    }
    world.noise = noise;
    return world;
  }
  throw FormatError(path.string() + ": world needs inline \"tasks\" or a \"dataset\" path");
}

SimWorld with_space(const SimWorld& world, PrimitiveSpace space) {
  SimWorld replaced{std::move(space), world.hidden_target, world.forbidden, world.tasks,
                    world.noise};
  check_target(replaced);
  return replaced;
}

}  // namespace flowrecon
