// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "smartcomp/common.hpp"

namespace smartcomp::linalg {

inline constexpr double kDefaultPsdTol = 1e-9;
inline constexpr double kHermitianTol = 1e-12;

/// Dense complex Hermitian matrix. Construction rejects inputs with
/// ||A - A^H||_max > 1e-12 * max(1, ||A||_max) and stores the exact
/// Hermitian part.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(const CMat& a);

  static HermitianMatrix identity(int n);
  static HermitianMatrix outer(const CVec& w);

  int order() const { return static_cast<int>(a_.rows()); }
  const CMat& matrix() const { return a_; }
  Complex operator()(int r, int c) const { return a_(r, c); }
  double trace() const { return a_.diagonal().real().sum(); }

  HermitianMatrix operator+(const HermitianMatrix& o) const;
  HermitianMatrix operator-(const HermitianMatrix& o) const;
  HermitianMatrix operator*(double s) const;

 private:
  CMat a_;
};

struct Eigh {
  Vec values;   // ascending
  CMat vectors; // columns orthonormal
};

/// Eigendecomposition of a Hermitian matrix. Throws NumericalFailure if the
/// underlying iteration does not converge.
Eigh eigh(const HermitianMatrix& a);

/// Real symmetric eigendecomposition, same conventions.
struct EighReal {
  Vec values;
  Mat vectors;
};
EighReal eighReal(const Mat& a);

/// [[Re A, -Im A], [Im A, Re A]]. A ring homomorphism from complex matrices
/// into real ones; for Hermitian A the image is symmetric and each
/// eigenvalue of A appears twice.
Mat realEmbed(const CMat& a);
inline Mat realEmbed(const HermitianMatrix& a) { return realEmbed(a.matrix()); }

/// Inverse of realEmbed on its range; averages the two redundant copies so it
/// is the orthogonal projection onto embedded matrices.
CMat realUnembed(const Mat& e);

double minEigenvalue(const HermitianMatrix& a);
double minEigenvalueReal(const Mat& a);

/// lambda_min(A) >= -tol. Every PSD query in the project routes through here.
bool isPsd(const HermitianMatrix& a, double tol = kDefaultPsdTol);
bool isPsdReal(const Mat& a, double tol = kDefaultPsdTol);

}  // namespace smartcomp::linalg
