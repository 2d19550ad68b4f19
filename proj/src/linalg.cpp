// SPDX-License-Identifier: Apache-2.0
#include "smartcomp/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace smartcomp {

void PriceCurve::validate() const {
  if (alpha.empty()) throw ValidationError("prices: alpha is empty");
  if (alpha.size() != beta.size())
    throw ValidationError("prices: alpha and beta lengths differ");
  for (std::size_t t = 0; t < alpha.size(); ++t) {
    if (!std::isfinite(alpha[t]) || !std::isfinite(beta[t]))
      throw ValidationError("prices: non-finite price at slot " + std::to_string(t + 1));
    if (beta[t] < 0.0)
      throw ValidationError("prices: beta must be >= 0 (slot " + std::to_string(t + 1) + ")");
    if (!(alpha[t] > beta[t]))
      throw ValidationError("prices: alpha must exceed beta (slot " + std::to_string(t + 1) +
                            ": alpha=" + std::to_string(alpha[t]) +
                            ", beta=" + std::to_string(beta[t]) + ")");
  }
}

PriceCurve PriceCurve::fromRatio(std::vector<double> alpha, double ratio) {
  PriceCurve p;
  p.beta.reserve(alpha.size());
  for (double a : alpha) p.beta.push_back(ratio * a);
  p.alpha = std::move(alpha);
  return p;
}

}  // namespace smartcomp

namespace smartcomp::linalg {

HermitianMatrix::HermitianMatrix(const CMat& a) {
  if (a.rows() != a.cols()) throw ValidationError("HermitianMatrix: matrix is not square");
  if (a.rows() == 0) throw ValidationError("HermitianMatrix: order must be >= 1");
  CMat skew = a - a.adjoint();
  double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if (skew.cwiseAbs().maxCoeff() > kHermitianTol * scale)
    throw ValidationError("HermitianMatrix: input is not Hermitian");
  a_ = 0.5 * (a + a.adjoint());
}

HermitianMatrix HermitianMatrix::identity(int n) {
  return HermitianMatrix(CMat::Identity(n, n));
}

HermitianMatrix HermitianMatrix::outer(const CVec& w) {
  CMat o = w * w.adjoint();
  return HermitianMatrix(0.5 * (o + o.adjoint()));
}

HermitianMatrix HermitianMatrix::operator+(const HermitianMatrix& o) const {
  return HermitianMatrix(a_ + o.a_);
}
HermitianMatrix HermitianMatrix::operator-(const HermitianMatrix& o) const {
  return HermitianMatrix(a_ - o.a_);
}
HermitianMatrix HermitianMatrix::operator*(double s) const { return HermitianMatrix(a_ * s); }

Eigh eigh(const HermitianMatrix& a) {
  Eigen::SelfAdjointEigenSolver<CMat> es(a.matrix());
  if (es.info() != Eigen::Success) throw NumericalFailure("eigh: no convergence");
  return {es.eigenvalues(), es.eigenvectors()};
}

EighReal eighReal(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(a);
  if (es.info() != Eigen::Success) throw NumericalFailure("eighReal: no convergence");
  return {es.eigenvalues(), es.eigenvectors()};
}

Mat realEmbed(const CMat& a) {
  const Eigen::Index r = a.rows(), c = a.cols();
  Mat e(2 * r, 2 * c);
  e.topLeftCorner(r, c) = a.real();
  e.topRightCorner(r, c) = -a.imag();
  e.bottomLeftCorner(r, c) = a.imag();
  e.bottomRightCorner(r, c) = a.real();
  return e;
}

CMat realUnembed(const Mat& e) {
  const Eigen::Index r = e.rows() / 2, c = e.cols() / 2;
  Mat re = 0.5 * (e.topLeftCorner(r, c) + e.bottomRightCorner(r, c));
  Mat im = 0.5 * (e.bottomLeftCorner(r, c) - e.topRightCorner(r, c));
  CMat a(r, c);
  a.real() = re;
  a.imag() = im;
  return a;
}

double minEigenvalue(const HermitianMatrix& a) {
  Eigen::SelfAdjointEigenSolver<CMat> es(a.matrix(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalFailure("minEigenvalue: no convergence");
  return es.eigenvalues()(0);
}

double minEigenvalueReal(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(a, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalFailure("minEigenvalueReal: no convergence");
  return es.eigenvalues()(0);
}

bool isPsd(const HermitianMatrix& a, double tol) { return minEigenvalue(a) >= -tol; }

bool isPsdReal(const Mat& a, double tol) { return minEigenvalueReal(0.5 * (a + a.transpose())) >= -tol; }

}  // namespace smartcomp::linalg
