// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <span>

#include "smartcomp/conic.hpp"
#include "smartcomp/linalg.hpp"
#include "smartcomp/model.hpp"

namespace smartcomp {

/// Robust uses the S-procedure LMI per user; NonRobust the scalar nominal
/// constraint h^H Y h >= sigma^2. A robust user with epsilon = 0 is handled
/// by the scalar form as well, since both describe the same set.
enum class BeamformingMode { Robust, NonRobust };

enum class SdpStatus { Optimal, Infeasible, NumericalFailure };

const char* statusName(SdpStatus s);

struct SlotSubproblem {
  int slot = 0;
  Vec weights;  // lambda_i^t, length I
  BeamformingMode mode = BeamformingMode::Robust;
};

struct SdpSolution {
  SdpStatus status = SdpStatus::NumericalFailure;
  std::vector<CMat> X;  // K lifted beamformers
  Vec tau;              // K; zero where the scalar form is used
  Vec transmit;         // I, sum_k tr(B_i X_k)
  double objective = 0;
  double pres = 0;
  double dres = 0;
  double gap = 0;
  double relgap = 0;
  double certificate = 0;  // infeasibility ray residual when Infeasible
  double minEigX = 0;
  double minEigGamma = 0;
  double powerSlack = 0;   // min_i cap_i - transmit_i
  int iterations = 0;
  std::string detail;
};

/// Y_k = X_k / gamma_k - sum_{l != k} X_l.
CMat buildY(std::span<const CMat> Xs, int k, double gamma);

/// [[Y + tau I, Y h], [h^H Y, h^H Y h - sigma2 - tau eps^2]].
linalg::HermitianMatrix buildGamma(std::span<const CMat> Xs, int k, const ChannelEstimate& ch,
                                   double tau);

/// Coordinates of Hermitian N x N matrices in the basis E_jj,
/// (E_jl + E_lj)/sqrt2, i(E_jl - E_lj)/sqrt2 (j < l), orthonormal under
/// Re tr(A B).
int hermitianParamCount(int N);
Vec hermitianToParams(const CMat& x);
CMat hermitianFromParams(const Vec& p, int N);

/// Slot subproblem in conic form. Variables: the K lifted matrices in
/// Hermitian coordinates, then one S-procedure multiplier per robust user.
class BeamformingOperator : public conic::ConicOperator {
 public:
  enum class Solver { Auto, Dense, Woodbury };

  BeamformingOperator(const ProblemInstance& inst, int slot, BeamformingMode mode,
                      Solver solver = Solver::Auto);

  int numVars() const override { return nvars_; }
  const conic::ConeSpec& cones() const override { return spec_; }
  conic::ConeVec apply(const Vec& x) const override;
  Vec applyAdjoint(const conic::ConeVec& z) const override;
  void factor(const conic::Scaling& w) override;
  Vec solveNormal(const Vec& r) const override;

  Vec cost(const Vec& weights) const;
  const conic::ConeVec& rhs() const { return h_; }

  int users() const { return K_; }
  int order() const { return N_; }
  bool robust(int k) const { return gammaBlock_[k] >= 0; }
  int tauIndex(int k) const { return tauVar_[k]; }
  bool usesWoodbury() const { return woodbury_; }

  std::vector<CMat> lifted(const Vec& x) const;
  Vec tau(const Vec& x) const;

 private:
  struct User {
    CVec h;
    double eps2 = 0;
    double sigma2 = 1;
    double a = 1;  // 1 + 1/gamma
  };

  void solveReduced(const Vec& r, Vec& x) const;

  int K_ = 0, N_ = 0, I_ = 0, n_ = 0, nvars_ = 0;
  std::vector<User> users_;
  std::vector<int> gammaBlock_;  // sdp block of user k, -1 for scalar form
  std::vector<int> tauVar_;      // variable index of tau_k, -1 for scalar form
  std::vector<int> tauLp_;       // lp index of tau_k >= 0
  std::vector<int> scalarLp_;    // lp index of the scalar constraint, -1 if robust
  int powerLp_ = 0;              // first lp index of the power caps
  int xBlock_ = 0;               // sdp index of the first X_k >= 0 block
  std::vector<Vec> beta_;        // Hermitian coordinates of B_i
  std::vector<Mat> embE_;        // real embedding of [I, h_k]
  conic::ConeSpec spec_;
  conic::ConeVec h_;
  bool woodbury_ = false;

  // Factorization state.
  std::vector<Mat> Q_;    // reduced user terms Q_k - p_k p_k'/h_k
  std::vector<Vec> p_;
  Vec htau_;
  Mat S_;
  std::vector<Eigen::LLT<Mat>> Dfac_;
  std::vector<Mat> F_;    // D_l^{-1} [I, a_l Q_l]
  Eigen::PartialPivLU<Mat> cap_;
  Eigen::LLT<Mat> dense_;
  Eigen::LDLT<Mat> denseLdlt_;
  bool denseUsesLdlt_ = false;
};

/// Solves the slot subproblem: minimize sum_i lambda_i sum_k tr(B_i X_k)
/// over the QoS constraints of every user and the per-BS transmit caps.
SdpSolution solveSlotSdp(const ProblemInstance& inst, const SlotSubproblem& sub,
                         const conic::IpmOptions& opts = {},
                         BeamformingOperator::Solver solver = BeamformingOperator::Solver::Auto);

/// Users of the slot whose QoS target cannot be met even without
/// interference (each solved alone against the transmit caps).
std::vector<int> infeasibleUsers(const ProblemInstance& inst, int slot, BeamformingMode mode,
                                 const conic::IpmOptions& opts = {});

/// Writes the subproblem in the plain-text conic format of conic::dumpProblem.
void dumpSlotSdp(std::ostream& os, const ProblemInstance& inst, const SlotSubproblem& sub);

}  // namespace smartcomp
