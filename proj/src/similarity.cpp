#include "flowrecon/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

#include "flowrecon/errors.hpp"

namespace flowrecon {

void MetricConfig::validate() const {
  if (n_max < 1) {
    throw ConfigError("metric n_max must be >= 1");
  }
  if (ngram_weight < 0.0 || jaccard_weight < 0.0) {
    throw ConfigError("metric weights must be non-negative");
  }
  if (std::abs(ngram_weight + jaccard_weight - 1.0) > 1e-9) {
    throw ConfigError("metric weights must sum to 1");
  }
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (const char c : text) {
    if (c == '|' || std::isspace(static_cast<unsigned char>(c))) {
      if (!current.empty()) {
        tokens.push_back(std::move(current));
        current.clear();
      }
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) {
    tokens.push_back(std::move(current));
  }
  return tokens;
}

namespace {

// Clipped n-gram match count: each candidate n-gram matches at most as often
// as it occurs in the reference.
std::pair<long long, long long> clipped_ngram_counts(const std::vector<std::string>& candidate,
                                                     const std::vector<std::string>& reference,
                                                     int n) {
  const long long total = static_cast<long long>(candidate.size()) - n + 1;
  if (total <= 0) {
    return {0, 0};
  }
  using Gram = std::vector<std::string_view>;
  std::map<Gram, long long> reference_counts;
  for (size_t i = 0; i + n <= reference.size(); ++i) {
    Gram gram(reference.begin() + static_cast<long>(i),
              reference.begin() + static_cast<long>(i) + n);
    ++reference_counts[gram];
  }
  std::map<Gram, long long> candidate_counts;
  for (size_t i = 0; i + n <= candidate.size(); ++i) {
    Gram gram(candidate.begin() + static_cast<long>(i),
              candidate.begin() + static_cast<long>(i) + n);
    ++candidate_counts[gram];
  }
  long long clipped = 0;
  for (const auto& [gram, count] : candidate_counts) {
    const auto it = reference_counts.find(gram);
    if (it != reference_counts.end()) {
      clipped += std::min(count, it->second);
    }
  }
  return {clipped, total};
}

}  // namespace

double sim_ngram(std::string_view candidate, std::string_view reference,
                 const MetricConfig& config) {
  config.validate();
  const std::vector<std::string> cand = tokenize(candidate);
  const std::vector<std::string> ref = tokenize(reference);
  if (cand.empty()) {
    return 0.0;
  }
  const int max_order = std::min<int>(config.n_max, static_cast<int>(cand.size()));
  double log_sum = 0.0;
  for (int n = 1; n <= max_order; ++n) {
    const auto [clipped, total] = clipped_ngram_counts(cand, ref, n);
    const double precision =
        clipped > 0 ? static_cast<double>(clipped) / static_cast<double>(total)
                    : 1.0 / static_cast<double>(total + 1);
    log_sum += std::log(precision);
  }
  const double geometric_mean = std::exp(log_sum / max_order);
  const double brevity = std::min(
      1.0, std::exp(1.0 - static_cast<double>(ref.size()) / static_cast<double>(cand.size())));
  return std::min(1.0, geometric_mean * brevity);
}

double sim_jaccard(std::string_view a, std::string_view b) {
  const std::vector<std::string> tokens_a = tokenize(a);
  const std::vector<std::string> tokens_b = tokenize(b);
  const std::unordered_set<std::string> set_a(tokens_a.begin(), tokens_a.end());
  const std::unordered_set<std::string> set_b(tokens_b.begin(), tokens_b.end());
  if (set_a.empty() && set_b.empty()) {
    return 1.0;
  }
  if (set_a.empty() || set_b.empty()) {
    return 0.0;
  }
  size_t intersection = 0;
  for (const std::string& token : set_a) {
    if (set_b.contains(token)) {
      ++intersection;
    }
  }
  const size_t unions = set_a.size() + set_b.size() - intersection;
  return static_cast<double>(intersection) / static_cast<double>(unions);
}

double sfe(std::string_view candidate, std::string_view reference, const MetricConfig& config) {
  config.validate();
  return config.ngram_weight * sim_ngram(candidate, reference, config) +
         config.jaccard_weight * sim_jaccard(candidate, reference);
}

Evaluator make_sfe_evaluator(const MetricConfig& config) {
  config.validate();
  return [config](const std::string& candidate, const std::string& reference) {
    return sfe(candidate, reference, config);
  };
}

}  // namespace flowrecon
