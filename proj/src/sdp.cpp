// SPDX-License-Identifier: Apache-2.0
#include "smartcomp/sdp.hpp"

#include <cmath>
#include <ostream>

namespace smartcomp {

using conic::ConeSpec;
using conic::ConeVec;

const char* statusName(SdpStatus s) {
  switch (s) {
    case SdpStatus::Optimal: return "Optimal";
    case SdpStatus::Infeasible: return "Infeasible";
    case SdpStatus::NumericalFailure: return "NumericalFailure";
  }
  return "?";
}

CMat buildY(std::span<const CMat> Xs, int k, double gamma) {
  CMat y = Xs[k] / gamma;
  for (std::size_t l = 0; l < Xs.size(); ++l)
    if (static_cast<int>(l) != k) y -= Xs[l];
  return y;
}

linalg::HermitianMatrix buildGamma(std::span<const CMat> Xs, int k, const ChannelEstimate& ch,
                                   double tau) {
  const int N = static_cast<int>(ch.hHat.size());
  CMat y = buildY(Xs, k, ch.gamma);
  y = 0.5 * (y + y.adjoint());
  CVec yh = y * ch.hHat;
  CMat g(N + 1, N + 1);
  g.topLeftCorner(N, N) = y + tau * CMat::Identity(N, N);
  g.topRightCorner(N, 1) = yh;
  g.bottomLeftCorner(1, N) = yh.adjoint();
  g(N, N) = ch.hHat.dot(yh).real() - ch.sigma2 - tau * ch.epsilon * ch.epsilon;
  return linalg::HermitianMatrix(g);
}

int hermitianParamCount(int N) { return N * N; }

Vec hermitianToParams(const CMat& x) {
  const int N = static_cast<int>(x.rows());
  Vec p(N * N);
  const double r2 = std::sqrt(2.0);
  int a = 0;
  for (int j = 0; j < N; ++j) p(a++) = x(j, j).real();
  for (int j = 0; j < N; ++j)
    for (int l = j + 1; l < N; ++l) {
      Complex v = 0.5 * (x(j, l) + std::conj(x(l, j)));
      p(a++) = r2 * v.real();
      p(a++) = r2 * v.imag();
    }
  return p;
}

CMat hermitianFromParams(const Vec& p, int N) {
  CMat x = CMat::Zero(N, N);
  const double r2 = std::sqrt(2.0);
  int a = 0;
  for (int j = 0; j < N; ++j) x(j, j) = p(a++);
  for (int j = 0; j < N; ++j)
    for (int l = j + 1; l < N; ++l) {
      Complex v(p(a) / r2, p(a + 1) / r2);
      a += 2;
      x(j, l) = v;
      x(l, j) = std::conj(v);
    }
  return x;
}

namespace {

struct Entry {
  int p, q;
  double v;
};

// Nonzeros of the real embedding of each Hermitian basis element.
std::vector<std::vector<Entry>> embeddedBasis(int N) {
  std::vector<std::vector<Entry>> b;
  const double s = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < N; ++j) b.push_back({{j, j, 1.0}, {j + N, j + N, 1.0}});
  for (int j = 0; j < N; ++j)
    for (int l = j + 1; l < N; ++l) {
      b.push_back({{j, l, s}, {l, j, s}, {j + N, l + N, s}, {l + N, j + N, s}});
      b.push_back({{j, l + N, -s}, {l, j + N, s}, {j + N, l, s}, {l + N, j, -s}});
    }
  return b;
}

// Q(a,b) = tr(A_a V A_b V) over embedded basis elements.
Mat quadForm(const std::vector<std::vector<Entry>>& basis, const Mat& V) {
  const int n = static_cast<int>(basis.size());
  Mat q(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b <= a; ++b) {
      double acc = 0;
      for (const auto& ea : basis[a])
        for (const auto& eb : basis[b]) acc += ea.v * eb.v * V(ea.q, eb.p) * V(eb.q, ea.p);
      q(a, b) = q(b, a) = acc;
    }
  return q;
}

// Inverse of the real embedding up to a factor: (M11 + M22) + i (M21 - M12),
// so that <emb(A), M> = Re tr(A^H fold(M)).
CMat fold(const Mat& m) {
  const int N = static_cast<int>(m.rows() / 2);
  CMat c(N, N);
  c.real() = m.topLeftCorner(N, N) + m.bottomRightCorner(N, N);
  c.imag() = m.bottomLeftCorner(N, N) - m.topRightCorner(N, N);
  return c;
}

Vec project(const CMat& c) { return hermitianToParams(0.5 * (c + c.adjoint())); }

Mat embeddedJ(int N, double eps2) {
  Mat j = Mat::Zero(2 * (N + 1), 2 * (N + 1));
  for (int a = 0; a < N; ++a) {
    j(a, a) = 1;
    j(a + N + 1, a + N + 1) = 1;
  }
  j(N, N) = -eps2;
  j(2 * N + 1, 2 * N + 1) = -eps2;
  return j;
}

}  // namespace

BeamformingOperator::BeamformingOperator(const ProblemInstance& inst, int slot, BeamformingMode mode,
                                         Solver solver) {
  const auto& d = inst.dims;
  if (slot < 0 || slot >= d.T) throw ValidationError("slot subproblem: slot out of range");
  K_ = d.K;
  N_ = d.beamLength();
  I_ = d.I;
  n_ = hermitianParamCount(N_);

  users_.resize(K_);
  gammaBlock_.assign(K_, -1);
  tauVar_.assign(K_, -1);
  tauLp_.assign(K_, -1);
  scalarLp_.assign(K_, -1);
  int robustCount = 0;
  for (int k = 0; k < K_; ++k) {
    const auto& ch = inst.channel(k, slot);
    users_[k].h = ch.hHat;
    users_[k].eps2 = ch.epsilon * ch.epsilon;
    users_[k].sigma2 = ch.sigma2;
    users_[k].a = 1.0 + 1.0 / ch.gamma;
    if (mode == BeamformingMode::Robust && ch.epsilon > 0) {
      gammaBlock_[k] = robustCount;
      tauVar_[k] = K_ * n_ + robustCount;
      tauLp_[k] = robustCount;
      ++robustCount;
    }
  }
  nvars_ = K_ * n_ + robustCount;
  powerLp_ = robustCount;
  int lp = robustCount + I_;
  for (int k = 0; k < K_; ++k)
    if (gammaBlock_[k] < 0) scalarLp_[k] = lp++;
  spec_.lp = lp;
  for (int r = 0; r < robustCount; ++r) spec_.sdp.push_back(2 * (N_ + 1));
  xBlock_ = robustCount;
  for (int k = 0; k < K_; ++k) spec_.sdp.push_back(2 * N_);

  embE_.resize(K_);
  for (int k = 0; k < K_; ++k) {
    CMat e(N_, N_ + 1);
    e.leftCols(N_) = CMat::Identity(N_, N_);
    e.col(N_) = users_[k].h;
    embE_[k] = linalg::realEmbed(e);
  }
  for (int i = 0; i < I_; ++i) {
    Vec diag = selectionDiagonal(i, d, inst.bs[i].xi);
    beta_.push_back(hermitianToParams(CMat(diag.cast<Complex>().asDiagonal())));
  }

  h_ = ConeVec::zeros(spec_);
  for (int k = 0; k < K_; ++k) {
    if (gammaBlock_[k] >= 0) {
      Mat& m = h_.sdp[gammaBlock_[k]];
      m(N_, N_) = -users_[k].sigma2;
      m(2 * N_ + 1, 2 * N_ + 1) = -users_[k].sigma2;
    } else {
      h_.lp(scalarLp_[k]) = -users_[k].sigma2;
    }
  }
  for (int i = 0; i < I_; ++i) h_.lp(powerLp_ + i) = inst.bs[i].transmitCap();

  switch (solver) {
    case Solver::Dense: woodbury_ = false; break;
    case Solver::Woodbury: woodbury_ = true; break;
    case Solver::Auto: woodbury_ = K_ * n_ > 800; break;
  }
}

std::vector<CMat> BeamformingOperator::lifted(const Vec& x) const {
  std::vector<CMat> xs;
  for (int k = 0; k < K_; ++k) xs.push_back(hermitianFromParams(x.segment(k * n_, n_), N_));
  return xs;
}

Vec BeamformingOperator::tau(const Vec& x) const {
  Vec t = Vec::Zero(K_);
  for (int k = 0; k < K_; ++k)
    if (tauVar_[k] >= 0) t(k) = x(tauVar_[k]);
  return t;
}

Vec BeamformingOperator::cost(const Vec& weights) const {
  if (weights.size() != I_) throw ValidationError("slot subproblem: weight vector must have length I");
  Vec c = Vec::Zero(nvars_);
  Vec per = Vec::Zero(n_);
  for (int i = 0; i < I_; ++i) per += weights(i) * beta_[i];
  for (int k = 0; k < K_; ++k) c.segment(k * n_, n_) = per;
  return c;
}

ConeVec BeamformingOperator::apply(const Vec& x) const {
  ConeVec out = ConeVec::zeros(spec_);
  auto xs = lifted(x);
  CMat sum = CMat::Zero(N_, N_);
  for (const auto& m : xs) sum += m;
  for (int k = 0; k < K_; ++k) {
    CMat y = users_[k].a * xs[k] - sum;
    const CVec& h = users_[k].h;
    if (gammaBlock_[k] >= 0) {
      const double t = x(tauVar_[k]);
      CMat e(N_, N_ + 1);
      e.leftCols(N_) = CMat::Identity(N_, N_);
      e.col(N_) = h;
      CMat g = e.adjoint() * y * e;
      for (int a = 0; a < N_; ++a) g(a, a) += t;
      g(N_, N_) -= t * users_[k].eps2;
      out.sdp[gammaBlock_[k]] = -linalg::realEmbed(g);
      out.lp(tauLp_[k]) = -t;
    } else {
      out.lp(scalarLp_[k]) = -h.dot(y * h).real();
    }
    out.sdp[xBlock_ + k] = -linalg::realEmbed(xs[k]);
  }
  for (int i = 0; i < I_; ++i) {
    double v = 0;
    for (int k = 0; k < K_; ++k) v += beta_[i].dot(x.segment(k * n_, n_));
    out.lp(powerLp_ + i) = v;
  }
  return out;
}

Vec BeamformingOperator::applyAdjoint(const ConeVec& z) const {
  Vec g = Vec::Zero(nvars_);
  std::vector<CMat> c(K_);
  CMat csum = CMat::Zero(N_, N_);
  for (int k = 0; k < K_; ++k) {
    if (gammaBlock_[k] >= 0) {
      const Mat& zk = z.sdp[gammaBlock_[k]];
      c[k] = fold(embE_[k] * zk * embE_[k].transpose());
      double jz = 0;
      for (int a = 0; a < N_; ++a) jz += zk(a, a) + zk(a + N_ + 1, a + N_ + 1);
      jz -= users_[k].eps2 * (zk(N_, N_) + zk(2 * N_ + 1, 2 * N_ + 1));
      g(tauVar_[k]) = -jz - z.lp(tauLp_[k]);
    } else {
      c[k] = z.lp(scalarLp_[k]) * (users_[k].h * users_[k].h.adjoint());
    }
    csum += c[k];
  }
  Vec power = Vec::Zero(n_);
  for (int i = 0; i < I_; ++i) power += z.lp(powerLp_ + i) * beta_[i];
  for (int l = 0; l < K_; ++l) {
    CMat m = users_[l].a * c[l] - csum;
    g.segment(l * n_, n_) = -project(m) - project(fold(z.sdp[xBlock_ + l])) + power;
  }
  return g;
}

void BeamformingOperator::factor(const conic::Scaling& w) {
  static thread_local int cachedN = -1;
  static thread_local std::vector<std::vector<Entry>> basis;
  if (cachedN != N_) {
    basis = embeddedBasis(N_);
    cachedN = N_;
  }
  Q_.assign(K_, Mat());
  p_.assign(K_, Vec());
  htau_ = Vec::Zero(K_);
  std::vector<Mat> R(K_);
  for (int k = 0; k < K_; ++k) {
    if (gammaBlock_[k] >= 0) {
      const Mat& W = w.Winv[gammaBlock_[k]];
      const Mat& E = embE_[k];
      Mat V = E * W * E.transpose();
      Q_[k] = quadForm(basis, V);
      Mat J = embeddedJ(N_, users_[k].eps2);
      Mat WJW = W * J * W;
      p_[k] = project(fold(E * WJW * E.transpose()));
      double lpw = w.lpW(tauLp_[k]);
      htau_(k) = (J * WJW).trace() + 1.0 / (lpw * lpw);
      Q_[k] -= p_[k] * p_[k].transpose() / htau_(k);
    } else {
      double lpw = w.lpW(scalarLp_[k]);
      Vec gk = hermitianToParams(users_[k].h * users_[k].h.adjoint());
      Q_[k] = gk * gk.transpose() / (lpw * lpw);
    }
    R[k] = quadForm(basis, w.Winv[xBlock_ + k]);
  }
  S_ = Mat::Zero(n_, n_);
  for (int k = 0; k < K_; ++k) S_ += Q_[k];
  for (int i = 0; i < I_; ++i) {
    double lpw = w.lpW(powerLp_ + i);
    S_ += beta_[i] * beta_[i].transpose() / (lpw * lpw);
  }

  if (!woodbury_) {
    const int m = K_ * n_;
    Mat H(m, m);
    for (int l = 0; l < K_; ++l)
      for (int q = 0; q <= l; ++q) {
        Mat b = S_ - users_[l].a * Q_[l] - users_[q].a * Q_[q];
        if (l == q) b += users_[l].a * users_[l].a * Q_[l] + R[l];
        H.block(l * n_, q * n_, n_, n_) = b;
        if (l != q) H.block(q * n_, l * n_, n_, n_) = b.transpose();
      }
    dense_.compute(H);
    denseUsesLdlt_ = dense_.info() != Eigen::Success;
    if (denseUsesLdlt_) {
      denseLdlt_.compute(H);
      if (denseLdlt_.info() != Eigen::Success)
        throw NumericalFailure("beamforming: normal matrix factorization failed");
    }
    return;
  }

  Dfac_.assign(K_, Eigen::LLT<Mat>());
  F_.assign(K_, Mat());
  Mat cap = Mat::Zero(2 * n_, 2 * n_);
  cap.topRightCorner(n_, n_) = -Mat::Identity(n_, n_);
  cap.bottomLeftCorner(n_, n_) = -Mat::Identity(n_, n_);
  cap.bottomRightCorner(n_, n_) = -S_;
  for (int l = 0; l < K_; ++l) {
    const double a = users_[l].a;
    Mat D = a * a * Q_[l] + R[l];
    Dfac_[l].compute(D);
    if (Dfac_[l].info() != Eigen::Success)
      throw NumericalFailure("beamforming: block factorization failed");
    Mat U(n_, 2 * n_);
    U.leftCols(n_) = Mat::Identity(n_, n_);
    U.rightCols(n_) = a * Q_[l];
    F_[l] = Dfac_[l].solve(U);
    cap.topRows(n_) += F_[l];
    cap.bottomRows(n_) += a * Q_[l] * F_[l];
  }
  cap_.compute(cap);
}

void BeamformingOperator::solveReduced(const Vec& r, Vec& x) const {
  if (!woodbury_) {
    x = denseUsesLdlt_ ? Vec(denseLdlt_.solve(r)) : Vec(dense_.solve(r));
    return;
  }
  x.resize(K_ * n_);
  Vec t = Vec::Zero(2 * n_);
  for (int l = 0; l < K_; ++l) {
    Vec y = Dfac_[l].solve(r.segment(l * n_, n_));
    x.segment(l * n_, n_) = y;
    t.head(n_) += y;
    t.tail(n_) += users_[l].a * Q_[l] * y;
  }
  Vec u = cap_.solve(t);
  for (int l = 0; l < K_; ++l) x.segment(l * n_, n_) -= F_[l] * u;
}

Vec BeamformingOperator::solveNormal(const Vec& r) const {
  Vec rx = r.head(K_ * n_);
  Vec common = Vec::Zero(n_);
  for (int k = 0; k < K_; ++k)
    if (tauVar_[k] >= 0) common += p_[k] * (r(tauVar_[k]) / htau_(k));
  for (int l = 0; l < K_; ++l) {
    rx.segment(l * n_, n_) += common;
    if (tauVar_[l] >= 0) rx.segment(l * n_, n_) -= users_[l].a * p_[l] * (r(tauVar_[l]) / htau_(l));
  }
  Vec x;
  solveReduced(rx, x);
  Vec out(nvars_);
  out.head(K_ * n_) = x;
  Vec sum = Vec::Zero(n_);
  for (int l = 0; l < K_; ++l) sum += x.segment(l * n_, n_);
  for (int k = 0; k < K_; ++k) {
    if (tauVar_[k] < 0) continue;
    Vec y = users_[k].a * x.segment(k * n_, n_) - sum;
    out(tauVar_[k]) = (r(tauVar_[k]) - p_[k].dot(y)) / htau_(k);
  }
  return out;
}

SdpSolution solveSlotSdp(const ProblemInstance& inst, const SlotSubproblem& sub,
                         const conic::IpmOptions& opts, BeamformingOperator::Solver solver) {
  BeamformingOperator op(inst, sub.slot, sub.mode, solver);
  Vec c = op.cost(sub.weights);
  if (!c.allFinite()) throw ValidationError("slot subproblem: non-finite weights");
  auto r = conic::ipmSolve(op, c, op.rhs(), opts);

  SdpSolution out;
  out.iterations = r.iterations;
  out.pres = r.pres;
  out.dres = r.dres;
  out.gap = r.gap;
  out.relgap = r.relgap;
  out.certificate = r.certificate;
  if (r.status == conic::IpmStatus::PrimalInfeasible) {
    out.status = SdpStatus::Infeasible;
    out.detail = "QoS targets cannot be met within the transmit caps";
    return out;
  }
  if (r.status != conic::IpmStatus::Optimal) {
    out.status = SdpStatus::NumericalFailure;
    out.detail = std::string("interior-point status ") + conic::statusName(r.status);
    return out;
  }
  out.status = SdpStatus::Optimal;
  out.X = op.lifted(r.x);
  for (auto& x : out.X) x = 0.5 * (x + x.adjoint());
  out.tau = op.tau(r.x);

  const auto& d = inst.dims;
  out.transmit = Vec::Zero(d.I);
  for (int i = 0; i < d.I; ++i)
    for (int k = 0; k < d.K; ++k) out.transmit(i) += selectedTrace(out.X[k], i, d, inst.bs[i].xi);
  out.objective = sub.weights.dot(out.transmit);

  out.minEigX = std::numeric_limits<double>::infinity();
  out.minEigGamma = std::numeric_limits<double>::infinity();
  for (int k = 0; k < d.K; ++k) {
    out.minEigX = std::min(out.minEigX, linalg::minEigenvalue(linalg::HermitianMatrix(out.X[k])));
    const auto& ch = inst.channel(k, sub.slot);
    if (op.robust(k)) {
      out.minEigGamma = std::min(out.minEigGamma, linalg::minEigenvalue(buildGamma(out.X, k, ch, out.tau(k))));
    } else {
      CMat y = buildY(out.X, k, ch.gamma);
      out.minEigGamma = std::min(out.minEigGamma, ch.hHat.dot(y * ch.hHat).real() - ch.sigma2);
    }
  }
  out.powerSlack = std::numeric_limits<double>::infinity();
  for (int i = 0; i < d.I; ++i)
    out.powerSlack = std::min(out.powerSlack, inst.bs[i].transmitCap() - out.transmit(i));
  return out;
}

std::vector<int> infeasibleUsers(const ProblemInstance& inst, int slot, BeamformingMode mode,
                                 const conic::IpmOptions& opts) {
  std::vector<int> out;
  for (int k = 0; k < inst.dims.K; ++k) {
    ProblemInstance one = inst;
    one.dims.K = 1;
    one.dims.T = 1;
    one.channels = {inst.channel(k, slot)};
    one.prices.alpha = {inst.prices.alpha[slot]};
    one.prices.beta = {inst.prices.beta[slot]};
    for (auto& b : one.bs) {
      b.res = SingletonSet{Vec::Zero(1)};
      b.prices.reset();
    }
    auto s = solveSlotSdp(one, {0, Vec::Ones(inst.dims.I), mode}, opts);
    if (s.status == SdpStatus::Infeasible) out.push_back(k);
  }
  return out;
}

void dumpSlotSdp(std::ostream& os, const ProblemInstance& inst, const SlotSubproblem& sub) {
  BeamformingOperator op(inst, sub.slot, sub.mode, BeamformingOperator::Solver::Dense);
  conic::dumpProblem(os, op, op.cost(sub.weights), op.rhs());
}

}  // namespace smartcomp
