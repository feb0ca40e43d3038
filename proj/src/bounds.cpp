#include "flowrecon/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "flowrecon/errors.hpp"

namespace flowrecon {

std::string u128_to_string(U128 value) {
  if (value == 0) {
    return "0";
  }
  std::string digits;
  while (value > 0) {
    digits.push_back(static_cast<char>('0' + static_cast<int>(value % 10)));
    value /= 10;
  }
  std::reverse(digits.begin(), digits.end());
  return digits;
}

U128 v_full(int b, int l_max) {
  if (b < 2) throw ConfigError("v_full requires b >= 2");
  if (l_max < 0) throw ConfigError("v_full requires l_max >= 0");
  const U128 max = ~static_cast<U128>(0);
  U128 sum = 0;
  U128 power = 1;
  for (int d = 0; d <= l_max; ++d) {
    if (sum > max - power) {
      throw LimitError("v_full overflows 128-bit arithmetic");
    }
    sum += power;
    if (d < l_max) {
      if (power > max / static_cast<U128>(b)) {
        throw LimitError("v_full overflows 128-bit arithmetic");
      }
      power *= static_cast<U128>(b);
    }
  }
  return sum;
}

double v_eff(int b, double p, int l_max) {
  if (b < 2) throw ConfigError("v_eff requires b >= 2");
  if (l_max < 0) throw ConfigError("v_eff requires l_max >= 0");
  if (p < 0.0 || p >= 1.0) throw ConfigError("p must lie in [0, 1)");
  const double ratio = b * (1.0 - p);
  if (ratio == 1.0) {
    return static_cast<double>(l_max + 1);
  }
  return (std::pow(ratio, l_max + 1) - 1.0) / (ratio - 1.0);
}

double eta_lower(double p, int l_max) {
  if (p < 0.0 || p >= 1.0) throw ConfigError("p must lie in [0, 1)");
  if (l_max < 0) throw ConfigError("l_max must be >= 0");
  return std::pow(1.0 / (1.0 - p), l_max);
}

double eta_upper(double beta, int l_max) {
  if (beta < 0.0 || beta >= 1.0) throw ConfigError("beta must lie in [0, 1)");
  if (l_max < 0) throw ConfigError("l_max must be >= 0");
  return std::pow(1.0 / (1.0 - beta), l_max);
}

TreeMeasurement measure_tree(const SearchTree& tree) {
  TreeMeasurement out;
  long long red = 0;
  long long active = 0;
  for (int i = 0; i < tree.size(); ++i) {
    const TreeNode& node = tree.node(i);
    ++out.depth_counts[node.depth];
    if (!node.terminal) {
      ++active;
      if (node.color == NodeColor::kRed) {
        ++red;
      }
    }
  }
  out.node_count = tree.size();
  out.red_fraction = active > 0 ? static_cast<double>(red) / static_cast<double>(active) : 0.0;
  out.realized_p = out.red_fraction;
  return out;
}

}  // namespace flowrecon
