// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace smartcomp {

using Complex = std::complex<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// Raised when an instance, config, or argument breaks a documented invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A linear solver could not reach its tolerances within the iteration cap.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The QoS targets of some slot cannot be met; users or SINR targets must be
/// dropped before a schedule exists.
class AdmissionControlRequired : public std::runtime_error {
 public:
  AdmissionControlRequired(int slot, std::string detail)
      : std::runtime_error("admission control required: slot " +
                           std::to_string(slot + 1) + ": " + detail),
        slot_(slot) {}
  int slot() const { return slot_; }

 private:
  int slot_;
};

/// The multiplier left the price band so a per-BS cost subproblem is
/// unbounded below.
class StepsizeTooAggressive : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Buy/sell price pair per slot. psi = (alpha-beta)/2, phi = (alpha+beta)/2.
struct PriceCurve {
  std::vector<double> alpha;
  std::vector<double> beta;

  int slots() const { return static_cast<int>(alpha.size()); }
  double psi(int t) const { return 0.5 * (alpha[t] - beta[t]); }
  double phi(int t) const { return 0.5 * (alpha[t] + beta[t]); }

  /// Throws ValidationError unless alpha^t > beta^t >= 0 for every slot.
  void validate() const;

  static PriceCurve fromRatio(std::vector<double> alpha, double ratio);
};

}  // namespace smartcomp
