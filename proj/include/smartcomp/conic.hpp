// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <iosfwd>
#include <memory>

#include "smartcomp/common.hpp"

namespace smartcomp::conic {

/// Product cone: nonnegative orthant of dimension lp, then real symmetric
/// PSD blocks of the listed orders.
struct ConeSpec {
  int lp = 0;
  std::vector<int> sdp;

  int degree() const;
};

/// Element of the space the cone lives in. SDP blocks are stored as full
/// symmetric matrices.
struct ConeVec {
  Vec lp;
  std::vector<Mat> sdp;

  static ConeVec zeros(const ConeSpec& spec);
  static ConeVec identity(const ConeSpec& spec);

  double dot(const ConeVec& o) const;
  double norm() const { return std::sqrt(dot(*this)); }
  void axpy(double a, const ConeVec& x);
  void scale(double a);
};

/// Nesterov-Todd scaling W with W z = W^{-T} s = lambda. LP part is
/// diag(lpW); block j acts as u -> R_j' u R_j.
struct Scaling {
  Vec lpW;
  Vec lpLambda;
  std::vector<Mat> R;
  std::vector<Mat> Rinv;
  std::vector<Mat> Winv;  // (R R')^{-1}
  std::vector<Vec> lambda;

  static Scaling identity(const ConeSpec& spec);

  ConeVec applyW(const ConeVec& u) const;         // W u
  ConeVec applyWT(const ConeVec& u) const;        // W' u
  ConeVec applyWinvT(const ConeVec& u) const;     // W^{-T} u
  ConeVec applyWtW(const ConeVec& u) const;       // W'W u
  ConeVec applyWtWinv(const ConeVec& u) const;    // (W'W)^{-1} u
};

/// Linear map x -> G x into the cone space, plus a solver for the reduced
/// normal equations G' (W'W)^{-1} G.
class ConicOperator {
 public:
  virtual ~ConicOperator() = default;
  virtual int numVars() const = 0;
  virtual const ConeSpec& cones() const = 0;
  virtual ConeVec apply(const Vec& x) const = 0;
  virtual Vec applyAdjoint(const ConeVec& z) const = 0;
  virtual void factor(const Scaling& w) = 0;
  virtual Vec solveNormal(const Vec& r) const = 0;
};

/// G stored column by column. Normal matrix formed densely, Cholesky.
class DenseConicOperator : public ConicOperator {
 public:
  DenseConicOperator(ConeSpec spec, std::vector<ConeVec> columns);

  int numVars() const override { return static_cast<int>(cols_.size()); }
  const ConeSpec& cones() const override { return spec_; }
  ConeVec apply(const Vec& x) const override;
  Vec applyAdjoint(const ConeVec& z) const override;
  void factor(const Scaling& w) override;
  Vec solveNormal(const Vec& r) const override;

 private:
  ConeSpec spec_;
  std::vector<ConeVec> cols_;
  Eigen::LDLT<Mat> ldlt_;
};

enum class IpmStatus { Optimal, PrimalInfeasible, DualInfeasible, NumericalFailure, IterationLimit };

const char* statusName(IpmStatus s);
std::ostream& operator<<(std::ostream& os, IpmStatus s);

struct IpmOptions {
  int maxIter = 200;
  double feastol = 1e-8;
  double abstol = 1e-12;
  double reltol = 1e-9;
  // Accepted as optimal when progress stalls but these hold.
  double looseFeastol = 1e-7;
  double looseGaptol = 1e-7;
  int refinement = 2;
  double stepFraction = 0.99;
  bool verbose = false;  // one line per iteration on stderr
};

struct IpmResult {
  IpmStatus status = IpmStatus::NumericalFailure;
  Vec x;
  ConeVec s;
  ConeVec z;
  double pcost = 0;
  double dcost = 0;
  double gap = 0;      // s'z at the returned point
  double relgap = 0;
  double pres = 0;     // relative primal residual
  double dres = 0;     // relative dual residual
  double certificate = 0;  // residual of the infeasibility ray when one is returned
  int iterations = 0;
};

/// Homogeneous self-dual primal-dual method for
///   min c'x  s.t.  G x + s = h,  s in K
/// with dual  max -h'z  s.t.  G'z + c = 0,  z in K.
IpmResult ipmSolve(ConicOperator& op, const Vec& c, const ConeVec& h, const IpmOptions& opts = {});

/// Plain-text dump: header line "conic <nvars> <lp> <nblocks> <orders...>",
/// then c, h and every column of G, one labelled record per line, entries
/// of SDP blocks written in row-major order of the full matrix.
void dumpProblem(std::ostream& os, const ConicOperator& op, const Vec& c, const ConeVec& h);

}  // namespace smartcomp::conic
