#pragma once

#include <stdexcept>
#include <string>

namespace biasaudit {

// Error taxonomy maps onto CLI exit codes: config=2, data=3, geometry=4.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a facet has no members (or one empty side) so the metric is
// undefined for that group; the audit records these as null cells instead of
// failing the run.
struct FacetError : DataError {
  using DataError::DataError;
};

struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int internal = 1;
inline constexpr int config = 2;
inline constexpr int data = 3;
inline constexpr int geometry = 4;
}  // namespace exit_code

}  // namespace biasaudit
