#pragma once

#include <stdexcept>
#include <string>

namespace flowrecon {

/// A file could not be found or opened.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A file was readable but its contents are malformed or violate a contract.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid parameter values (out-of-range config fields and the like).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An operation would exceed a hard resource guard (search-space size,
/// integer range).
struct LimitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Transport / authentication problems talking to a backend. Distinct from
/// in-band workflow failure: these abort the run instead of scoring zero.
struct InfrastructureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace flowrecon
