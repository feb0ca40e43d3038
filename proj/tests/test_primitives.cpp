#include "flowrecon/primitives.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "flowrecon/errors.hpp"

using namespace flowrecon;

namespace {

PrimitiveSpace make_space(const std::vector<std::string>& ids) {
  std::vector<Primitive> primitives;
  for (const std::string& id : ids) {
    primitives.push_back(Primitive{id, id, "default", "direct", {}, 1});
  }
  return PrimitiveSpace(std::move(primitives));
}

std::filesystem::path scratch_file(const std::string& name, const std::string& contents) {
  const std::filesystem::path path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path, std::ios::binary);
  out << contents;
  return path;
}

// All id sequences of exactly `length` over `ids`, in odometer order.
std::vector<std::vector<std::string>> all_sequences(const std::vector<std::string>& ids,
                                                    int length) {
  std::vector<std::vector<std::string>> out;
  std::vector<size_t> odo(static_cast<size_t>(length), 0);
  while (true) {
    std::vector<std::string> seq;
    for (const size_t d : odo) seq.push_back(ids[d]);
    out.push_back(std::move(seq));
    int pos = length - 1;
    while (pos >= 0 && ++odo[static_cast<size_t>(pos)] == ids.size()) {
      odo[static_cast<size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return out;
}

}  // namespace

TEST_CASE("validate_workflow accepts a minimal valid workflow") {
  const PrimitiveSpace space = make_space({"A", "B"});
  CHECK_FALSE(validate_workflow(Workflow{{"A"}}, space, 3).has_value());
}

TEST_CASE("validate_workflow names the first violated invariant") {
  const PrimitiveSpace space = make_space({"A", "B"});
  CHECK_EQ(validate_workflow(Workflow{{}}, space, 3).value(), "length < 1");
  CHECK_EQ(validate_workflow(Workflow{{"A", "Z"}}, space, 3).value(), "unknown primitive Z");
  CHECK_EQ(validate_workflow(Workflow{{"A", "B", "A", "B"}}, space, 3).value(),
           "length > l_max");
}

TEST_CASE("enumeration of length-d workflows has exactly b^d members, all valid") {
  for (int b = 2; b <= 5; ++b) {
    std::vector<std::string> ids;
    for (int i = 0; i < b; ++i) ids.push_back(std::string(1, static_cast<char>('a' + i)));
    const PrimitiveSpace space = make_space(ids);
    for (int d = 1; d <= 3; ++d) {
      const auto sequences = all_sequences(ids, d);
      long long expected = 1;
      for (int k = 0; k < d; ++k) expected *= b;
      CHECK_EQ(static_cast<long long>(sequences.size()), expected);
      for (const auto& seq : sequences) {
        CHECK_FALSE(validate_workflow(Workflow{seq}, space, 3).has_value());
      }
    }
  }
}

TEST_CASE("load_dataset reads records in order") {
  const auto path = scratch_file("fr_dataset_ok.jsonl",
                                 "{\"task\": \"t1\", \"output\": \"o1\"}\n"
                                 "{\"task\": \"t2\", \"output\": \"o2\"}\n");
  const auto pairs = load_dataset(path);
  REQUIRE_EQ(pairs.size(), 2);
  CHECK_EQ(pairs[0].task, "t1");
  CHECK_EQ(pairs[1].output, "o2");
}

TEST_CASE("load_dataset reports the offending line number") {
  const auto path = scratch_file("fr_dataset_bad.jsonl",
                                 "{\"task\": \"t1\", \"output\": \"o1\"}\n"
                                 "{\"task\": \"t2\", \"output\": \"o2\"}\n"
                                 "{\"task\": \"t3\"}\n");
  CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains("line 3"), FormatError);
}

TEST_CASE("load_dataset rejects empty fields and accepts an empty file") {
  const auto empty = scratch_file("fr_dataset_empty.jsonl", "");
  CHECK(load_dataset(empty).empty());
  const auto blank = scratch_file("fr_dataset_blank.jsonl", "{\"task\": \"\", \"output\": \"o\"}\n");
  CHECK_THROWS_AS(load_dataset(blank), FormatError);
  CHECK_THROWS_AS(load_dataset("/nonexistent/fr_nope.jsonl"), IoError);
}

TEST_CASE("load_space parses primitives with defaults") {
  const auto path = scratch_file(
      "fr_space.json",
      R"({"primitives": [
            {"id": "coder", "role": "coder", "model": "m1", "pattern": "cot",
             "tools": ["repl"], "cost": 3},
            {"id": "critic"}
          ]})");
  const PrimitiveSpace space = load_space(path);
  REQUIRE_EQ(space.size(), 2);
  CHECK_EQ(space.at(0).cost, 3);
  CHECK_EQ(space.at(0).tools, std::vector<std::string>{"repl"});
  CHECK_EQ(space.at(1).cost, 1);
  CHECK_EQ(space.at(1).role, "critic");
  CHECK_EQ(space.index_of("critic"), 1);
  CHECK_EQ(space.index_of("ghost"), -1);
}

TEST_CASE("load_space also accepts a bare array") {
  const auto path = scratch_file("fr_space_array.json", R"([{"id": "a"}, {"id": "b"}])");
  CHECK_EQ(load_space(path).size(), 2);
}

TEST_CASE("PrimitiveSpace rejects duplicates, empties, and negative costs") {
  const Primitive duplicate{"x", "r", "m", "p", {}, 1};
  CHECK_THROWS_AS(PrimitiveSpace({duplicate, duplicate}), ConfigError);
  CHECK_THROWS_AS(PrimitiveSpace({}), ConfigError);
  CHECK_THROWS_AS(PrimitiveSpace({Primitive{"x", "r", "m", "p", {}, -1}}), ConfigError);
}

TEST_CASE("strip_tools empties or filters toolsets") {
  std::vector<Primitive> primitives{
      Primitive{"a", "a", "m", "p", {"web", "repl"}, 1},
      Primitive{"b", "b", "m", "p", {"repl"}, 1},
  };
  const PrimitiveSpace space(primitives);
  const PrimitiveSpace none = strip_tools(space);
  CHECK(none.at(0).tools.empty());
  CHECK(none.at(1).tools.empty());
  const PrimitiveSpace selected = strip_tools(space, {"web"});
  CHECK_EQ(selected.at(0).tools, std::vector<std::string>{"web"});
  CHECK(selected.at(1).tools.empty());
}
