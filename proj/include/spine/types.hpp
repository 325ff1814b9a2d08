#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace spine {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Workspace dimensionality of the spine model. Planar models live in the
// X-Z plane with a single scalar rotation; spatial models use XYZ positions
// and Euler angles.
enum class Dimension { planar2d, spatial3d };

inline const char* to_string(Dimension d) {
  return d == Dimension::planar2d ? "planar2d" : "spatial3d";
}

// Thrown when a config file or a config struct fails validation. `where`
// carries "file:line" when the error came from parsing.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
  ConfigError(const std::string& where, const std::string& msg)
      : std::runtime_error(where + ": " + msg) {}
};

}  // namespace spine
