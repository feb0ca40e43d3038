#include "flowrecon/config.hpp"

#include <fstream>

#include <json.hpp>

#include "flowrecon/errors.hpp"

namespace flowrecon {

using nlohmann::json;

namespace {

json load_json_object(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) {
    throw IoError(std::string("cannot open ") + what + " file: " + path.string());
  }
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw FormatError(path.string() + ": invalid JSON");
  }
  return doc;
}

SearchConfig search_from_json(const json& block) {
  SearchConfig config;
  config.l_max = block.value("l_max", config.l_max);
  config.max_children = block.value("max_children", config.max_children);
  config.beta = block.value("beta", config.beta);
  config.kappa = block.value("kappa", config.kappa);
  config.budget = block.value("budget", config.budget);
  config.rollout_minibatch = block.value("rollout_minibatch", config.rollout_minibatch);
  config.seed = block.value("seed", config.seed);
  config.enable_terminator = block.value("enable_terminator", config.enable_terminator);
  config.suffix_failures_terminal =
      block.value("suffix_failures_terminal", config.suffix_failures_terminal);
  config.validate();
  return config;
}

MetricConfig metric_from_json(const json& block) {
  MetricConfig config;
  config.n_max = block.value("n_max", config.n_max);
  config.ngram_weight = block.value("ngram_weight", config.ngram_weight);
  config.jaccard_weight = block.value("jaccard_weight", config.jaccard_weight);
  config.validate();
  return config;
}

HttpConfig http_from_json(const json& block) {
  HttpConfig config;
  config.base_url = block.value("base_url", config.base_url);
  config.path = block.value("path", config.path);
  config.api_key = block.value("api_key", config.api_key);
  config.api_key_env = block.value("api_key_env", config.api_key_env);
  config.temperature = block.value("temperature", config.temperature);
  config.max_retries = block.value("max_retries", config.max_retries);
  config.timeout_seconds = block.value("timeout_seconds", config.timeout_seconds);
  return config;
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
  const json doc = load_json_object(path, "config");
  RunConfig config;
  if (doc.contains("space") && doc["space"].is_string()) {
    std::filesystem::path space_path = doc["space"].get<std::string>();
    if (space_path.is_relative()) {
      space_path = path.parent_path() / space_path;
    }
    config.space_path = space_path;
  }
  if (doc.contains("search")) {
    config.search = search_from_json(doc["search"]);
  }
  if (doc.contains("metric")) {
    config.metric = metric_from_json(doc["metric"]);
  }
  if (doc.contains("http")) {
    config.http = http_from_json(doc["http"]);
  }
  return config;
}

BenchSpec load_bench_spec(const std::filesystem::path& path) {
  const json doc = load_json_object(path, "bench spec");
  const auto resolve = [&path](const std::string& relative) {
    std::filesystem::path p = relative;
    return p.is_relative() ? path.parent_path() / p : p;
  };

  BenchSpec spec;
  if (doc.contains("world") && doc["world"].is_string()) {
    spec.world = load_world(resolve(doc["world"].get<std::string>()));
  } else if (doc.value("executor", std::string{}) == "http") {
    if (!doc.contains("space") || !doc.contains("dataset")) {
      throw FormatError(path.string() + ": an http bench needs \"space\" and \"dataset\" paths");
    }
    HttpBenchTarget target{
        doc.contains("http") ? http_from_json(doc["http"]) : HttpConfig{},
        load_space(resolve(doc["space"].get<std::string>())),
        load_dataset(resolve(doc["dataset"].get<std::string>()))};
    spec.http = std::move(target);
  } else {
    throw FormatError(path.string() +
                      ": bench spec needs a \"world\" path or \"executor\": \"http\" with "
                      "\"space\" and \"dataset\"");
  }
  if (doc.contains("search")) {
    spec.search = search_from_json(doc["search"]);
  }
  if (doc.contains("metric")) {
    spec.metric = metric_from_json(doc["metric"]);
  }
  if (doc.contains("seeds")) {
    spec.seeds.clear();
    for (const auto& seed : doc["seeds"]) {
      spec.seeds.push_back(seed.get<int>());
    }
  }
  if (doc.contains("variants")) {
    spec.variants.clear();
    for (const auto& name : doc["variants"]) {
      spec.variants.push_back(parse_variant(name.get<std::string>()));
    }
  }
  if (doc.contains("selected_tools")) {
    for (const auto& tool : doc["selected_tools"]) {
      spec.selected_tools.push_back(tool.get<std::string>());
    }
  }
  if (doc.contains("threshold")) {
    const json& threshold = doc["threshold"];
    if (threshold.is_number()) {
      spec.threshold = threshold.get<double>();
    } else if (threshold.is_string() && threshold.get<std::string>() == "unpruned-median") {
      spec.threshold_auto = true;
    } else {
      throw FormatError(path.string() + ": threshold must be a number or \"unpruned-median\"");
    }
  }
  spec.validate();
  return spec;
}

std::string config_echo_json(const SearchConfig& search, const MetricConfig& metric) {
  json doc;
  doc["search"] = {
      {"l_max", search.l_max},
      {"max_children", search.max_children},
      {"beta", search.beta},
      {"kappa", search.kappa},
      {"budget", search.budget},
      {"rollout_minibatch", search.rollout_minibatch},
      {"seed", search.seed},
      {"enable_terminator", search.enable_terminator},
      {"suffix_failures_terminal", search.suffix_failures_terminal},
  };
  doc["metric"] = {
      {"n_max", metric.n_max},
      {"ngram_weight", metric.ngram_weight},
      {"jaccard_weight", metric.jaccard_weight},
  };
  return doc.dump();
}

}  // namespace flowrecon
