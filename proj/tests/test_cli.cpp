#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <doctest.h>

namespace {

struct CommandResult {
  int status = -1;
  std::string output;  // stdout + stderr
};

// The ctest harness exports FLOWRECON_CLI; direct binary runs without it
// skip these cases.
#define REQUIRE_CLI_OR_SKIP()                                              \
  if (std::getenv("FLOWRECON_CLI") == nullptr) {                           \
    MESSAGE("FLOWRECON_CLI not set; skipping CLI case");                   \
    return;                                                                \
  }

std::string cli_path() {
  return std::getenv("FLOWRECON_CLI");
}

CommandResult run_cli(const std::string& args) {
  const std::string command = cli_path() + " " + args + " 2>&1";
  FILE* pipe = ::popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CommandResult result;
  std::array<char, 512> buffer{};
  while (::fgets(buffer.data(), buffer.size(), pipe) != nullptr) {
    result.output += buffer.data();
  }
  const int raw = ::pclose(pipe);
  result.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return result;
}

std::filesystem::path scratch_file(const std::string& name, const std::string& contents) {
  const std::filesystem::path path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path, std::ios::binary);
  out << contents;
  return path;
}

}  // namespace

TEST_CASE("bounds prints the hand-computed volume row") {
  REQUIRE_CLI_OR_SKIP();
  const CommandResult result = run_cli("bounds --b 3 --l-max 2 --p 0.5 --beta 0.5");
  CHECK_EQ(result.status, 0);
  CHECK(result.output.find("v_full") != std::string::npos);
  CHECK(result.output.find("3,2,0.500000,0.500000,13,") != std::string::npos);
}

TEST_CASE("bruteforce prints the exact hidden-sequence optimum") {
  REQUIRE_CLI_OR_SKIP();
  const auto world = scratch_file("fr_cli_world.json", R"({
    "primitives": [{"id": "A"}, {"id": "B"}, {"id": "C"}],
    "hidden_target": ["B", "A"],
    "tasks": ["t1", "t2"]
  })");
  const CommandResult result = run_cli("bruteforce --world " + world.string() + " --l-max 2");
  CHECK_EQ(result.status, 0);
  CHECK(result.output.find("B,A 1.000000") != std::string::npos);
}

TEST_CASE("search with a missing config file names the path and exits nonzero") {
  REQUIRE_CLI_OR_SKIP();
  const CommandResult result =
      run_cli("search --config /nonexistent/cfg.json --world w.json --out /tmp/fr_cli_x");
  CHECK_EQ(result.status, 3);
  CHECK(result.output.find("/nonexistent/cfg.json") != std::string::npos);
}

TEST_CASE("unknown flags exit with the usage status") {
  REQUIRE_CLI_OR_SKIP();
  const CommandResult result = run_cli("bounds --b 3 --l-max 2 --frobnicate");
  CHECK_EQ(result.status, 2);
}

TEST_CASE("bruteforce rejects oversized candidate spaces with the guard status") {
  REQUIRE_CLI_OR_SKIP();
  const auto world = scratch_file("fr_cli_world_big.json", R"({
    "primitives": [{"id": "a"}, {"id": "b"}, {"id": "c"}, {"id": "d"}, {"id": "e"},
                   {"id": "f"}, {"id": "g"}, {"id": "h"}, {"id": "i"}, {"id": "j"}],
    "hidden_target": ["a"],
    "tasks": ["t"]
  })");
  const CommandResult result = run_cli("bruteforce --world " + world.string() + " --l-max 7");
  CHECK_EQ(result.status, 5);
  CHECK(result.output.find("error:") != std::string::npos);
}

TEST_CASE("eval scores two text files with six decimals") {
  REQUIRE_CLI_OR_SKIP();
  const auto left = scratch_file("fr_cli_left.txt", "a b");
  const auto right = scratch_file("fr_cli_right.txt", "b c");
  const CommandResult result =
      run_cli("eval --metric jaccard " + left.string() + " " + right.string());
  CHECK_EQ(result.status, 0);
  CHECK(result.output.find("0.333333") != std::string::npos);
}

TEST_CASE("search runs end to end against a world file") {
  REQUIRE_CLI_OR_SKIP();
  const auto world = scratch_file("fr_cli_world2.json", R"({
    "primitives": [{"id": "A"}, {"id": "B"}],
    "hidden_target": ["B", "A"],
    "tasks": ["t1", "t2"]
  })");
  const auto config = scratch_file("fr_cli_cfg.json", R"({
    "search": {"l_max": 2, "budget": 40, "seed": 3}
  })");
  const std::filesystem::path out = std::filesystem::temp_directory_path() / "fr_cli_run";
  const CommandResult result = run_cli("search --config " + config.string() + " --world " +
                                       world.string() + " --out " + out.string());
  CHECK_EQ(result.status, 0);
  CHECK(result.output.find("B,A 1.000000") != std::string::npos);
  CHECK(std::filesystem::exists(out.string() + ".csv"));
  CHECK(std::filesystem::exists(out.string() + ".jsonl"));
  CHECK(std::filesystem::exists(out.string() + "_summary.json"));
  std::ifstream csv(out.string() + ".csv");
  std::string header;
  std::getline(csv, header);
  CHECK_EQ(header,
           "iteration,reward,cumulative_tokens,best_similarity,best_length,red_fraction,"
           "max_tree_depth");
}
