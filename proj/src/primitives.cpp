#include "flowrecon/primitives.hpp"

#include <fstream>
#include <unordered_set>
#include <utility>

#include <json.hpp>

#include "flowrecon/errors.hpp"

namespace flowrecon {

using nlohmann::json;

PrimitiveSpace::PrimitiveSpace(std::vector<Primitive> primitives)
    : primitives_(std::move(primitives)) {
  if (primitives_.empty()) {
    throw ConfigError("primitive space must contain at least one primitive");
  }
  for (int i = 0; i < static_cast<int>(primitives_.size()); ++i) {
    const Primitive& p = primitives_[static_cast<size_t>(i)];
    if (p.id.empty()) {
      throw ConfigError("primitive id must be non-empty");
    }
    if (p.cost < 0) {
      throw ConfigError("primitive '" + p.id + "' has negative cost");
    }
    if (!index_.emplace(p.id, i).second) {
      throw ConfigError("duplicate primitive id '" + p.id + "'");
    }
  }
}

int PrimitiveSpace::index_of(const std::string& id) const {
  const auto it = index_.find(id);
  return it == index_.end() ? -1 : it->second;
}

const Primitive* PrimitiveSpace::find(const std::string& id) const {
  const auto it = index_.find(id);
  return it == index_.end() ? nullptr : &primitives_[static_cast<size_t>(it->second)];
}

std::optional<std::string> validate_workflow(const Workflow& workflow,
                                             const PrimitiveSpace& space,
                                             int l_max) {
  if (workflow.length() < 1) {
    return "length < 1";
  }
  if (workflow.length() > l_max) {
    return "length > l_max";
  }
  for (const std::string& id : workflow.steps) {
    if (space.index_of(id) < 0) {
      return "unknown primitive " + id;
    }
  }
  return std::nullopt;
}

std::vector<ObservationPair> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open dataset file: " + path.string());
  }
  std::vector<ObservationPair> pairs;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) {
      continue;
    }
    json record = json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object()) {
      throw FormatError(path.string() + ": line " + std::to_string(line_number) +
                        " is not a JSON object");
    }
    if (!record.contains("task") || !record["task"].is_string()) {
      throw FormatError(path.string() + ": line " + std::to_string(line_number) +
                        " missing string field \"task\"");
    }
    if (!record.contains("output") || !record["output"].is_string()) {
      throw FormatError(path.string() + ": line " + std::to_string(line_number) +
                        " missing string field \"output\"");
    }
    ObservationPair pair{record["task"].get<std::string>(),
                         record["output"].get<std::string>()};
    if (pair.task.empty() || pair.output.empty()) {
      throw FormatError(path.string() + ": line " + std::to_string(line_number) +
                        " has an empty task or output");
    }
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

namespace {

Primitive parse_primitive(const json& item, const std::string& where) {
  if (!item.is_object() || !item.contains("id") || !item["id"].is_string()) {
    throw FormatError(where + ": each primitive needs a string \"id\"");
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
  return p;
}

}  // namespace

PrimitiveSpace load_space(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open primitive-space file: " + path.string());
  }
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) {
    throw FormatError(path.string() + ": invalid JSON");
  }
  const json* list = nullptr;
  if (doc.is_array()) {
    list = &doc;
  } else if (doc.is_object() && doc.contains("primitives") && doc["primitives"].is_array()) {
    list = &doc["primitives"];
  } else {
    throw FormatError(path.string() +
                      ": expected an array of primitives or an object with a \"primitives\" array");
  }
  std::vector<Primitive> primitives;
  for (const auto& item : *list) {
    primitives.push_back(parse_primitive(item, path.string()));
  }
  return PrimitiveSpace(std::move(primitives));
}

PrimitiveSpace strip_tools(const PrimitiveSpace& space, const std::vector<std::string>& keep) {
  const std::unordered_set<std::string> kept(keep.begin(), keep.end());
  std::vector<Primitive> primitives = space.primitives();
  for (Primitive& p : primitives) {
    if (kept.empty()) {
      p.tools.clear();
      continue;
    }
    std::vector<std::string> retained;
    for (std::string& tool : p.tools) {
      if (kept.contains(tool)) {
        retained.push_back(std::move(tool));
      }
    }
    p.tools = std::move(retained);
  }
  return PrimitiveSpace(std::move(primitives));
}

}  // namespace flowrecon
