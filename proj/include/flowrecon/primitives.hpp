#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace flowrecon {

/// One atomic search unit: a role/model/thought-pattern triple plus an
/// attached toolset. The search treats every field except `id` as an opaque
/// label; only executors interpret them. `cost` is the simulated token charge
/// per invocation.
struct Primitive {
  std::string id;
  std::string role;
  std::string model;
  std::string pattern;
  std::vector<std::string> tools;
  long long cost = 1;
};

/// Ordered collection of primitives. The ordering is stable and doubles as
/// the deterministic tie-break order for the search.
class PrimitiveSpace {
 public:
  explicit PrimitiveSpace(std::vector<Primitive> primitives);

  int size() const { return static_cast<int>(primitives_.size()); }
  const Primitive& at(int index) const { return primitives_.at(static_cast<size_t>(index)); }
  const std::vector<Primitive>& primitives() const { return primitives_; }

  /// Index in declaration order, or -1 when the id is unknown.
  int index_of(const std::string& id) const;
  const Primitive* find(const std::string& id) const;

 private:
  std::vector<Primitive> primitives_;
  std::unordered_map<std::string, int> index_;
};

/// An ordered chain of primitive ids. A complete workflow has length in
/// [1, l_max]; prefixes held by search nodes may be empty.
struct Workflow {
  std::vector<std::string> steps;

  int length() const { return static_cast<int>(steps.size()); }
  bool operator==(const Workflow& other) const = default;
};

/// One observed (task, target output) pair from the system being
/// reconstructed.
struct ObservationPair {
  std::string task;
  std::string output;
};

/// Checks the complete-workflow invariants against a space and length cap.
/// Returns std::nullopt when the workflow is valid, otherwise a description
/// of the first violated invariant.
std::optional<std::string> validate_workflow(const Workflow& workflow,
                                             const PrimitiveSpace& space,
                                             int l_max);

/// Loads a JSONL dataset: one object per line with string fields "task" and
/// "output". Throws IoError on a missing file and FormatError (naming the
/// line number) on malformed or empty records. An empty file yields an empty
/// list.
std::vector<ObservationPair> load_dataset(const std::filesystem::path& path);

/// Loads a primitive space from JSON: either a top-level array of primitive
/// objects or an object with a "primitives" array. Keys: id, role, model,
/// pattern, tools (list, optional), cost (integer, optional, default 1).
PrimitiveSpace load_space(const std::filesystem::path& path);

/// Returns a copy of the space with every primitive's toolset emptied
/// (`keep` empty) or intersected with `keep`.
PrimitiveSpace strip_tools(const PrimitiveSpace& space,
                           const std::vector<std::string>& keep = {});

}  // namespace flowrecon
