#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace genusg {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr Complex kTwoPiI{0.0, 2.0 * std::numbers::pi};

/// Failure categories. The C API and the CLI map these onto status and exit codes.
enum class ErrorKind {
  InvalidInput,     // malformed configuration or arguments
  Domain,           // parameters outside the Schottky sewing domain
  NumericalGuard,   // pole proximity, ill-conditioning, singular matrices
  NotConverged,     // truncated series or quadrature did not meet tolerance
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Neumaier-compensated complex accumulator.
class CompensatedSum {
 public:
  void add(Complex v) {
    add_part(sum_re_, comp_re_, v.real());
    add_part(sum_im_, comp_im_, v.imag());
  }
  Complex value() const { return {sum_re_ + comp_re_, sum_im_ + comp_im_}; }

 private:
  static void add_part(double& sum, double& comp, double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  double sum_re_ = 0.0, comp_re_ = 0.0, sum_im_ = 0.0, comp_im_ = 0.0;
};

}  // namespace genusg
