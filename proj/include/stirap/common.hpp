#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace stirap {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

// Internal units: hbar = 1, time in microseconds, angular frequency in rad/us.
namespace units {
constexpr double from_ghz(double f) { return kTwoPi * 1.0e3 * f; }
constexpr double from_mhz(double f) { return kTwoPi * f; }
constexpr double to_ghz(double w) { return w / (kTwoPi * 1.0e3); }
constexpr double to_mhz(double w) { return w / kTwoPi; }
}  // namespace units

/// Invalid user input (configuration, parameter record, precondition).
/// `path` names the offending field, e.g. "pulses.T_us".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& what)
      : std::runtime_error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// A numerical method failed or an invariant was violated during a computation.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace stirap
