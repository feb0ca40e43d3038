#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace flowrecon {

/// Knobs for the text-level output-similarity proxy. Weights must sum to 1.
struct MetricConfig {
  int n_max = 4;
  double ngram_weight = 0.5;
  double jaccard_weight = 0.5;

  /// Throws ConfigError when n_max < 1 or the weights do not sum to 1
  /// within 1e-9 (or are negative).
  void validate() const;
};

/// Splits on whitespace and '|'. Empty tokens are dropped.
std::vector<std::string> tokenize(std::string_view text);

/// BLEU-style score: clipped n-gram precisions for n = 1..min(n_max, candidate
/// length), combined by geometric mean and scaled by the brevity penalty
/// min(1, exp(1 - |reference| / |candidate|)). A precision with zero matches
/// falls back to the add-one floor 1 / (count + 1) so a single missing order
/// does not annihilate the score. An empty candidate scores 0.
double sim_ngram(std::string_view candidate, std::string_view reference,
                 const MetricConfig& config = {});

/// Token-set overlap |intersection| / |union|. Both sides empty -> 1,
/// exactly one empty -> 0.
double sim_jaccard(std::string_view a, std::string_view b);

/// Static functional-equivalence proxy: the configured weighted sum of
/// sim_ngram and sim_jaccard. Always in [0, 1].
double sfe(std::string_view candidate, std::string_view reference,
           const MetricConfig& config = {});

/// Output evaluator signature used by the search: Sim(candidate output,
/// target output) in [0, 1].
using Evaluator = std::function<double(const std::string&, const std::string&)>;

/// Wraps sfe with a fixed config into an Evaluator.
Evaluator make_sfe_evaluator(const MetricConfig& config = {});

}  // namespace flowrecon
