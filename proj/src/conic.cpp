// SPDX-License-Identifier: Apache-2.0
#include "smartcomp/conic.hpp"

#include <algorithm>
#include <iomanip>
#include <limits>
#include <optional>
#include <iostream>
#include <ostream>

namespace smartcomp::conic {

int ConeSpec::degree() const {
  int d = lp;
  for (int n : sdp) d += n;
  return d;
}

ConeVec ConeVec::zeros(const ConeSpec& spec) {
  ConeVec v;
  v.lp = Vec::Zero(spec.lp);
  for (int n : spec.sdp) v.sdp.push_back(Mat::Zero(n, n));
  return v;
}

ConeVec ConeVec::identity(const ConeSpec& spec) {
  ConeVec v;
  v.lp = Vec::Ones(spec.lp);
  for (int n : spec.sdp) v.sdp.push_back(Mat::Identity(n, n));
  return v;
}

double ConeVec::dot(const ConeVec& o) const {
  double d = lp.dot(o.lp);
  for (std::size_t j = 0; j < sdp.size(); ++j) d += sdp[j].cwiseProduct(o.sdp[j]).sum();
  return d;
}

void ConeVec::axpy(double a, const ConeVec& x) {
  lp += a * x.lp;
  for (std::size_t j = 0; j < sdp.size(); ++j) sdp[j] += a * x.sdp[j];
}

void ConeVec::scale(double a) {
  lp *= a;
  for (auto& m : sdp) m *= a;
}

Scaling Scaling::identity(const ConeSpec& spec) {
  Scaling w;
  w.lpW = Vec::Ones(spec.lp);
  w.lpLambda = Vec::Ones(spec.lp);
  for (int n : spec.sdp) {
    w.R.push_back(Mat::Identity(n, n));
    w.Rinv.push_back(Mat::Identity(n, n));
    w.Winv.push_back(Mat::Identity(n, n));
    w.lambda.push_back(Vec::Ones(n));
  }
  return w;
}

ConeVec Scaling::applyW(const ConeVec& u) const {
  ConeVec v;
  v.lp = u.lp.cwiseProduct(lpW);
  for (std::size_t j = 0; j < R.size(); ++j) v.sdp.push_back(R[j].transpose() * u.sdp[j] * R[j]);
  return v;
}

ConeVec Scaling::applyWT(const ConeVec& u) const {
  ConeVec v;
  v.lp = u.lp.cwiseProduct(lpW);
  for (std::size_t j = 0; j < R.size(); ++j) v.sdp.push_back(R[j] * u.sdp[j] * R[j].transpose());
  return v;
}

ConeVec Scaling::applyWinvT(const ConeVec& u) const {
  ConeVec v;
  v.lp = u.lp.cwiseQuotient(lpW);
  for (std::size_t j = 0; j < R.size(); ++j)
    v.sdp.push_back(Rinv[j] * u.sdp[j] * Rinv[j].transpose());
  return v;
}

ConeVec Scaling::applyWtW(const ConeVec& u) const {
  ConeVec v;
  v.lp = u.lp.cwiseProduct(lpW).cwiseProduct(lpW);
  for (std::size_t j = 0; j < R.size(); ++j) {
    Mat p = R[j] * R[j].transpose();
    v.sdp.push_back(p * u.sdp[j] * p);
  }
  return v;
}

ConeVec Scaling::applyWtWinv(const ConeVec& u) const {
  ConeVec v;
  v.lp = u.lp.cwiseQuotient(lpW).cwiseQuotient(lpW);
  for (std::size_t j = 0; j < R.size(); ++j) v.sdp.push_back(Winv[j] * u.sdp[j] * Winv[j]);
  return v;
}

DenseConicOperator::DenseConicOperator(ConeSpec spec, std::vector<ConeVec> columns)
    : spec_(std::move(spec)), cols_(std::move(columns)) {}

ConeVec DenseConicOperator::apply(const Vec& x) const {
  ConeVec out = ConeVec::zeros(spec_);
  for (std::size_t a = 0; a < cols_.size(); ++a)
    if (x(a) != 0.0) out.axpy(x(a), cols_[a]);
  return out;
}

Vec DenseConicOperator::applyAdjoint(const ConeVec& z) const {
  Vec g(cols_.size());
  for (std::size_t a = 0; a < cols_.size(); ++a) g(a) = cols_[a].dot(z);
  return g;
}

void DenseConicOperator::factor(const Scaling& w) {
  const int m = numVars();
  std::vector<ConeVec> scaled;
  scaled.reserve(m);
  for (const auto& c : cols_) scaled.push_back(w.applyWtWinv(c));
  Mat h(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b <= a; ++b) h(a, b) = h(b, a) = cols_[a].dot(scaled[b]);
  ldlt_.compute(h);
  if (ldlt_.info() != Eigen::Success) throw NumericalFailure("conic: normal matrix factorization failed");
}

Vec DenseConicOperator::solveNormal(const Vec& r) const { return ldlt_.solve(r); }

const char* statusName(IpmStatus s) {
  switch (s) {
    case IpmStatus::Optimal: return "Optimal";
    case IpmStatus::PrimalInfeasible: return "PrimalInfeasible";
    case IpmStatus::DualInfeasible: return "DualInfeasible";
    case IpmStatus::NumericalFailure: return "NumericalFailure";
    case IpmStatus::IterationLimit: return "IterationLimit";
  }
  return "?";
}

std::ostream& operator<<(std::ostream& os, IpmStatus s) { return os << statusName(s); }

namespace {

// u o v for the Jordan product of the cone; lambda is diagonal in the scaled space.
ConeVec jordan(const ConeVec& u, const ConeVec& v) {
  ConeVec w;
  w.lp = u.lp.cwiseProduct(v.lp);
  for (std::size_t j = 0; j < u.sdp.size(); ++j)
    w.sdp.push_back(0.5 * (u.sdp[j] * v.sdp[j] + v.sdp[j] * u.sdp[j]));
  return w;
}

ConeVec lambdaSquare(const Scaling& w) {
  ConeVec v;
  v.lp = w.lpLambda.cwiseProduct(w.lpLambda);
  for (const auto& l : w.lambda) v.sdp.push_back(l.cwiseProduct(l).asDiagonal());
  return v;
}

ConeVec lambdaVec(const Scaling& w) {
  ConeVec v;
  v.lp = w.lpLambda;
  for (const auto& l : w.lambda) v.sdp.push_back(l.asDiagonal());
  return v;
}

// Solves lambda o x = d.
ConeVec lambdaDivide(const Scaling& w, const ConeVec& d) {
  ConeVec x;
  x.lp = d.lp.cwiseQuotient(w.lpLambda);
  for (std::size_t j = 0; j < d.sdp.size(); ++j) {
    const Vec& l = w.lambda[j];
    Mat m = d.sdp[j];
    for (int a = 0; a < m.rows(); ++a)
      for (int b = 0; b < m.cols(); ++b) m(a, b) *= 2.0 / (l(a) + l(b));
    x.sdp.push_back(m);
  }
  return x;
}

// Largest alpha with lambda + alpha*d in the cone (infinity if unrestricted).
double maxStep(const Scaling& w, const ConeVec& d) {
  double a = std::numeric_limits<double>::infinity();
  for (int i = 0; i < d.lp.size(); ++i)
    if (d.lp(i) < 0) a = std::min(a, -w.lpLambda(i) / d.lp(i));
  for (std::size_t j = 0; j < d.sdp.size(); ++j) {
    Vec isq = w.lambda[j].cwiseSqrt().cwiseInverse();
    Mat m = isq.asDiagonal() * d.sdp[j] * isq.asDiagonal();
    m = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
    double mn = es.eigenvalues()(0);
    if (mn < 0) a = std::min(a, -1.0 / mn);
  }
  return a;
}

// Replaces the scaling by the NT scaling of (W^{-T} s_new, W z_new), which are
// given in the current scaled space.
void updateScaling(Scaling& w, const ConeVec& sTilde, const ConeVec& zTilde) {
  for (int i = 0; i < sTilde.lp.size(); ++i) {
    double s = sTilde.lp(i), z = zTilde.lp(i);
    if (!(s > 0) || !(z > 0)) throw NumericalFailure("conic: iterate left the orthant");
    w.lpW(i) *= std::sqrt(s / z);
    w.lpLambda(i) = std::sqrt(s * z);
  }
  for (std::size_t j = 0; j < sTilde.sdp.size(); ++j) {
    Mat sm = 0.5 * (sTilde.sdp[j] + sTilde.sdp[j].transpose());
    Mat zm = 0.5 * (zTilde.sdp[j] + zTilde.sdp[j].transpose());
    Eigen::LLT<Mat> ls(sm), lz(zm);
    if (ls.info() != Eigen::Success || lz.info() != Eigen::Success)
      throw NumericalFailure("conic: iterate left the semidefinite cone");
    Mat Ls = ls.matrixL();
    Mat Lz = lz.matrixL();
    Eigen::JacobiSVD<Mat> svd(Lz.transpose() * Ls, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Vec lam = svd.singularValues();
    if (!(lam.minCoeff() > 0)) throw NumericalFailure("conic: degenerate scaling");
    Vec isq = lam.cwiseSqrt().cwiseInverse();
    Mat Rt = Ls * svd.matrixV() * isq.asDiagonal();
    Mat RtInv = isq.asDiagonal() * svd.matrixU().transpose() * Lz.transpose();
    w.R[j] = w.R[j] * Rt;
    w.Rinv[j] = RtInv * w.Rinv[j];
    w.Winv[j] = w.Rinv[j].transpose() * w.Rinv[j];
    w.Winv[j] = 0.5 * (w.Winv[j] + w.Winv[j].transpose());
    w.lambda[j] = lam;
  }
}

struct KktSolver {
  ConicOperator& op;
  const Scaling& w;
  int refinement;

  // [0 G'; G -W'W] [ux; uz] = [bx; bz]
  void solve(const Vec& bx, const ConeVec& bz, Vec& ux, ConeVec& uz) const {
    solveOnce(bx, bz, ux, uz);
    for (int r = 0; r < refinement; ++r) {
      Vec rx = bx - op.applyAdjoint(uz);
      ConeVec rz = bz;
      rz.axpy(-1.0, op.apply(ux));
      rz.axpy(1.0, w.applyWtW(uz));
      Vec dx;
      ConeVec dz;
      solveOnce(rx, rz, dx, dz);
      ux += dx;
      uz.axpy(1.0, dz);
    }
  }

  void solveOnce(const Vec& bx, const ConeVec& bz, Vec& ux, ConeVec& uz) const {
    ConeVec t = w.applyWtWinv(bz);
    ux = op.solveNormal(bx + op.applyAdjoint(t));
    ConeVec g = op.apply(ux);
    g.axpy(-1.0, bz);
    uz = w.applyWtWinv(g);
  }
};

}  // namespace

IpmResult ipmSolve(ConicOperator& op, const Vec& c, const ConeVec& h, const IpmOptions& opts) {
  const ConeSpec& spec = op.cones();
  const int n = op.numVars();
  if (c.size() != n) throw ValidationError("ipmSolve: cost vector length mismatch");
  const double nu = spec.degree();
  const double resx0 = std::max(1.0, c.norm());
  const double resz0 = std::max(1.0, h.norm());

  Vec x = Vec::Zero(n);
  ConeVec s = ConeVec::identity(spec);
  ConeVec z = ConeVec::identity(spec);
  double tau = 1, kappa = 1;
  Scaling w = Scaling::identity(spec);

  IpmResult res;
  auto fill = [&](IpmStatus st, int it) {
    res.status = st;
    res.iterations = it;
    res.x = x / tau;
    res.s = s;
    res.s.scale(1.0 / tau);
    res.z = z;
    res.z.scale(1.0 / tau);
    return res;
  };

  // Best iterate meeting the loose tolerances, returned if progress stalls.
  std::optional<IpmResult> best;
  double bestScore = std::numeric_limits<double>::infinity();
  auto fallback = [&](IpmStatus st, int it) {
    if (best) {
      best->iterations = it;
      return *best;
    }
    return fill(st, it);
  };

  for (int it = 0; it <= opts.maxIter; ++it) {
    ConeVec gx = op.apply(x);
    Vec rx = op.applyAdjoint(z) + tau * c;
    ConeVec rz = gx;
    rz.axpy(1.0, s);
    rz.axpy(-tau, h);
    const double cx = c.dot(x), hz = h.dot(z);
    const double rt = kappa + cx + hz;
    const double sz = s.dot(z);

    res.pcost = cx / tau;
    res.dcost = -hz / tau;
    res.gap = sz / (tau * tau);
    res.pres = rz.norm() / tau / resz0;
    res.dres = rx.norm() / tau / resx0;
    if (res.pcost < 0)
      res.relgap = res.gap / -res.pcost;
    else if (res.dcost > 0)
      res.relgap = res.gap / res.dcost;
    else
      res.relgap = std::numeric_limits<double>::infinity();
    if (opts.verbose)
      std::cerr << "ipm " << it << " pcost " << res.pcost << " dcost " << res.dcost << " gap "
                << res.gap << " pres " << res.pres << " dres " << res.dres << " tau " << tau
                << " kappa " << kappa << '\n';
    if (res.pres <= opts.looseFeastol && res.dres <= opts.looseFeastol &&
        (res.relgap <= opts.looseGaptol || res.gap <= opts.abstol)) {
      double score = std::max({res.pres, res.dres, std::min(res.relgap, res.gap)});
      if (score < bestScore) {
        bestScore = score;
        best = fill(IpmStatus::Optimal, it);
      }
    }

    if (res.pres <= opts.feastol && res.dres <= opts.feastol &&
        (res.gap <= opts.abstol || res.relgap <= opts.reltol))
      return fill(IpmStatus::Optimal, it);

    if (hz < 0) {
      double pinf = op.applyAdjoint(z).norm() / resx0 / -hz;
      if (pinf <= opts.feastol) {
        res.certificate = pinf;
        res.status = IpmStatus::PrimalInfeasible;
        res.iterations = it;
        res.z = z;
        res.z.scale(-1.0 / hz);
        res.x = x;
        res.s = s;
        return res;
      }
    }
    if (cx < 0) {
      ConeVec r = gx;
      r.axpy(1.0, s);
      double dinf = r.norm() / resz0 / -cx;
      if (dinf <= opts.feastol) {
        res.certificate = dinf;
        res.status = IpmStatus::DualInfeasible;
        res.iterations = it;
        res.x = x / -cx;
        res.s = s;
        res.s.scale(-1.0 / cx);
        res.z = z;
        return res;
      }
    }
    if (it == opts.maxIter) break;

    const double mu = (sz + tau * kappa) / (nu + 1.0);
    try {
      op.factor(w);
    } catch (const NumericalFailure&) {
      return fallback(IpmStatus::NumericalFailure, it);
    }
    KktSolver kkt{op, w, opts.refinement};

    Vec x2;
    ConeVec z2;
    kkt.solve(-c, h, x2, z2);
    const double den = c.dot(x2) + h.dot(z2) - kappa / tau;

    ConeVec lsq = lambdaSquare(w);
    Vec dx;
    ConeVec dz, dsScaled, dzScaled;
    double dtau = 0, dkappa = 0;
    double sigma = 0;
    ConeVec dsAff, dzAff;
    double dtauAff = 0, dkappaAff = 0;

    for (int pass = 0; pass < 2; ++pass) {
      ConeVec ds;
      double dk;
      double eta;
      if (pass == 0) {
        ds = lsq;
        ds.scale(-1.0);
        dk = -tau * kappa;
        eta = 1.0;
      } else {
        ds = lsq;
        ds.scale(-1.0);
        ds.axpy(-1.0, jordan(dsAff, dzAff));
        ds.axpy(sigma * mu, ConeVec::identity(spec));
        dk = -tau * kappa - dtauAff * dkappaAff + sigma * mu;
        eta = 1.0 - sigma;
      }
      ConeVec q = lambdaDivide(w, ds);
      Vec bx = -eta * rx;
      ConeVec bz = rz;
      bz.scale(-eta);
      bz.axpy(-1.0, w.applyWT(q));
      Vec x1;
      ConeVec z1;
      kkt.solve(bx, bz, x1, z1);
      dtau = (-eta * rt - dk / tau - c.dot(x1) - h.dot(z1)) / den;
      dx = x1 + dtau * x2;
      dz = z1;
      dz.axpy(dtau, z2);
      dzScaled = w.applyW(dz);
      dsScaled = q;
      dsScaled.axpy(-1.0, dzScaled);
      dkappa = (dk - kappa * dtau) / tau;

      double amax = std::min(maxStep(w, dsScaled), maxStep(w, dzScaled));
      if (dtau < 0) amax = std::min(amax, -tau / dtau);
      if (dkappa < 0) amax = std::min(amax, -kappa / dkappa);
      if (pass == 0) {
        double aAff = std::min(1.0, amax);
        sigma = std::pow(1.0 - aAff, 3);
        dsAff = dsScaled;
        dzAff = dzScaled;
        dtauAff = dtau;
        dkappaAff = dkappa;
      } else {
        double step = std::min(1.0, opts.stepFraction * amax);
        if (!(step > 1e-14) || !dx.allFinite())
          return fallback(IpmStatus::NumericalFailure, it);
        x += step * dx;
        tau += step * dtau;
        kappa += step * dkappa;
        ConeVec lam = lambdaVec(w);
        ConeVec sT = lam, zT = lam;
        sT.axpy(step, dsScaled);
        zT.axpy(step, dzScaled);
        try {
          updateScaling(w, sT, zT);
        } catch (const NumericalFailure&) {
          return fallback(IpmStatus::NumericalFailure, it);
        }
        // s = W' lambda, z = W^{-1} lambda
        ConeVec lamNew = lambdaVec(w);
        s = w.applyWT(lamNew);
        z.lp = lamNew.lp.cwiseQuotient(w.lpW);
        for (std::size_t j = 0; j < z.sdp.size(); ++j)
          z.sdp[j] = w.Rinv[j].transpose() * lamNew.sdp[j] * w.Rinv[j];
      }
    }
  }
  return fallback(IpmStatus::IterationLimit, opts.maxIter);
}

void dumpProblem(std::ostream& os, const ConicOperator& op, const Vec& c, const ConeVec& h) {
  const ConeSpec& spec = op.cones();
  auto writeCone = [&](const ConeVec& v) {
    for (int i = 0; i < v.lp.size(); ++i) os << ' ' << v.lp(i);
    for (const auto& m : v.sdp)
      for (int a = 0; a < m.rows(); ++a)
        for (int b = 0; b < m.cols(); ++b) os << ' ' << m(a, b);
  };
  os << std::setprecision(17);
  os << "conic " << op.numVars() << ' ' << spec.lp << ' ' << spec.sdp.size();
  for (int n : spec.sdp) os << ' ' << n;
  os << "\nc";
  for (int i = 0; i < c.size(); ++i) os << ' ' << c(i);
  os << "\nh";
  writeCone(h);
  os << '\n';
  for (int a = 0; a < op.numVars(); ++a) {
    Vec e = Vec::Zero(op.numVars());
    e(a) = 1;
    os << "G " << a;
    writeCone(op.apply(e));
    os << '\n';
  }
}

}  // namespace smartcomp::conic
