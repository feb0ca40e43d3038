#pragma once

#include <map>
#include <string>

#include "flowrecon/search.hpp"

namespace flowrecon {

/// 128-bit unsigned value; wide enough for every search volume this project
/// measures (b <= 10, l_max <= 20 needs ~2^67).
using U128 = unsigned __int128;

std::string u128_to_string(U128 value);

/// Total search volume without pruning: sum of b^d for d = 0..l_max,
/// evaluated in exact integer arithmetic. Throws LimitError when the result
/// would not fit in 128 bits.
U128 v_full(int b, int l_max);

/// Effective frontier under realized pruning rate p: the geometric sum of
/// (b(1-p))^d for d = 0..l_max, in closed form.
double v_eff(int b, double p, int l_max);

/// Lower bound on the acceleration ratio: (1 / (1-p))^l_max.
double eta_lower(double p, int l_max);

/// Upper bound from the quantile rule: (1 / (1-beta))^l_max.
double eta_upper(double beta, int l_max);

/// Snapshot statistics of a finished search tree. realized_p equals the Red
/// fraction over non-terminal nodes: Red nodes are exactly those whose
/// further branching is suppressed.
struct TreeMeasurement {
  std::map<int, long long> depth_counts;
  double red_fraction = 0.0;
  double realized_p = 0.0;
  long long node_count = 0;
};

TreeMeasurement measure_tree(const SearchTree& tree);

}  // namespace flowrecon
