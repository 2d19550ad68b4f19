// SPDX-License-Identifier: Apache-2.0
#include "smartcomp/bundle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "smartcomp/cost.hpp"

namespace smartcomp {

const char* statusName(BundleStatus s) {
  switch (s) {
    case BundleStatus::Converged: return "Converged";
    case BundleStatus::IterationLimit: return "IterationLimit";
    case BundleStatus::Unbounded: return "Unbounded";
  }
  return "?";
}

namespace {

// min 0.5 xi'H xi - b'xi  over the probability simplex.
struct SimplexQp {
  Mat H;
  Vec b;
  Vec xi;
  double nu = 0;
  int iterations = 0;

  Vec gradient() const { return H * xi - b; }

  void solve(int start) {
    const int n = static_cast<int>(b.size());
    xi = Vec::Zero(n);
    xi(start) = 1;
    std::vector<char> free(n, 0);
    free[start] = 1;
    const int cap = 50 * n + 100;
    bool stationary = true;  // a single vertex is stationary on its face
    for (iterations = 0; iterations < cap; ++iterations) {
      Vec g = gradient();
      if (stationary) {
        // Check the multipliers of the inactive bounds.
        nu = 0;
        int f = 0;
        for (int i = 0; i < n; ++i)
          if (free[i]) {
            nu += g(i);
            ++f;
          }
        nu /= f;
        int enter = -1;
        double worst = -1e-13 * (1.0 + std::abs(nu));
        for (int i = 0; i < n; ++i) {
          if (free[i]) continue;
          double mu = g(i) - nu;
          if (mu < worst) {
            worst = mu;
            enter = i;
          }
        }
        if (enter < 0) return;
        free[enter] = 1;
        stationary = false;
        continue;
      }

      std::vector<int> F;
      for (int i = 0; i < n; ++i)
        if (free[i]) F.push_back(i);
      const int f = static_cast<int>(F.size());

      // KKT of the equality-constrained step on the free set.
      Mat K = Mat::Zero(f + 1, f + 1);
      Vec r = Vec::Zero(f + 1);
      for (int a = 0; a < f; ++a) {
        for (int c = 0; c < f; ++c) K(a, c) = H(F[a], F[c]);
        K(a, f) = 1;
        K(f, a) = 1;
        r(a) = -g(F[a]);
      }
      Eigen::CompleteOrthogonalDecomposition<Mat> cod(K);
      cod.setThreshold(1e-13);
      Vec sol = cod.solve(r);
      Vec resid = r - K * sol;
      bool ray = resid.norm() > 1e-10 * (1.0 + r.norm() + K.norm());
      Vec d = Vec::Zero(n);
      // A ray is a null direction of H on the free face along which the
      // objective decreases linearly.
      for (int a = 0; a < f; ++a) d(F[a]) = ray ? resid(a) : sol(a);

      double step = ray ? std::numeric_limits<double>::infinity() : 1.0;
      int block = -1;
      for (int i : F) {
        if (d(i) < 0) {
          double s = -xi(i) / d(i);
          if (s < step) {
            step = s;
            block = i;
          }
        }
      }
      if (block < 0 && ray) return;  // cannot happen for a nonzero direction summing to zero
      xi += step * d;
      for (int i : F) xi(i) = std::max(0.0, xi(i));
      if (block >= 0) {
        xi(block) = 0;
        free[block] = 0;
      } else {
        stationary = true;
      }
      xi /= xi.sum();
    }
  }
};

}  // namespace

ProxQpResult solveProximalQp(const BundleState& state) {
  const int n = static_cast<int>(state.cuts.size());
  if (n == 0) throw ValidationError("solveProximalQp: empty bundle");
  const int T = static_cast<int>(state.center.size());
  const double rho = state.rho;
  Mat G(T, n);
  SimplexQp qp;
  qp.b = Vec(n);
  for (int i = 0; i < n; ++i) {
    const Cut& c = state.cuts[i];
    G.col(i) = c.subgrad;
    qp.b(i) = c.at(state.center);
  }
  qp.H = G.transpose() * G / rho;

  // Start from the single cut with the best dual value; ties to the lowest index.
  int start = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    double v = qp.b(i) - 0.5 * qp.H(i, i);
    if (v > best + 1e-15 * (1 + std::abs(best))) {
      best = v;
      start = i;
    }
  }
  qp.solve(start);

  ProxQpResult out;
  out.xi = qp.xi;
  out.iterations = qp.iterations;
  out.p = state.center - G * qp.xi / rho;
  out.model = -std::numeric_limits<double>::infinity();
  for (const Cut& c : state.cuts) out.model = std::max(out.model, c.at(out.p));
  double prox = out.model + 0.5 * rho * (out.p - state.center).squaredNorm();
  out.eta = std::max(0.0, state.centerValue - prox);

  Vec g = qp.gradient();
  double nu = 0, wsum = 0;
  for (int i = 0; i < n; ++i)
    if (qp.xi(i) > 0) {
      nu += qp.xi(i) * g(i);
      wsum += qp.xi(i);
    }
  nu /= wsum;
  out.kkt = std::abs(qp.xi.sum() - 1.0);
  for (int i = 0; i < n; ++i) {
    out.kkt = std::max(out.kkt, std::max(0.0, -qp.xi(i)));
    out.kkt = std::max(out.kkt, std::max(0.0, nu - g(i)));
    out.kkt = std::max(out.kkt, std::abs(qp.xi(i) * (g(i) - nu)));
  }
  return out;
}

double updateWeight(double rho, bool serious, const BundleOptions& opt) {
  return serious ? std::max(rho / 10, opt.rhoMin) : std::min(10 * rho, opt.rhoMax);
}

double updateWeight(const BundleState& state, bool serious) {
  return updateWeight(state.rho, serious, state.options);
}

namespace {

void addCut(BundleState& st, Cut cut, int iteration) {
  if (static_cast<int>(st.cuts.size()) >= st.options.maxCuts) {
    int victim = 0;
    for (int i = 0; i < static_cast<int>(st.cuts.size()); ++i)
      if (!st.active[i]) {
        victim = i;
        break;
      }
    st.cuts.erase(st.cuts.begin() + victim);
    st.age.erase(st.age.begin() + victim);
    st.active.erase(st.active.begin() + victim);
  }
  st.cuts.push_back(std::move(cut));
  st.age.push_back(iteration);
  st.active.push_back(1);
}

}  // namespace

BundleResult bundleMinimize(const BundleOracle& oracle, const Vec& p0, const BundleOptions& opt) {
  if (!p0.allFinite()) throw ValidationError("bundleMinimize: non-finite start point");
  if (!(opt.theta > 0 && opt.theta < 1)) throw ValidationError("bundleMinimize: theta must lie in (0,1)");
  if (!(opt.rhoMin > 0 && opt.rhoMin <= opt.rho0 && opt.rho0 <= opt.rhoMax))
    throw ValidationError("bundleMinimize: need 0 < rhoMin <= rho0 <= rhoMax");
  if (opt.maxCuts < 2) throw ValidationError("bundleMinimize: maxCuts must be at least 2");

  BundleState st;
  st.options = opt;
  st.rho = opt.rho0;
  st.center = p0;
  OracleValue v0 = oracle(p0);
  st.centerValue = v0.value;
  addCut(st, {p0, v0.value, std::move(v0.subgrad)}, 0);

  BundleResult res;
  res.status = BundleStatus::IterationLimit;
  res.initialValue = st.centerValue;
  for (int l = 0; l < opt.maxIter; ++l) {
    ProxQpResult qp = solveProximalQp(st);
    for (int i = 0; i < static_cast<int>(st.cuts.size()); ++i) st.active[i] = qp.xi(i) > 0;
    st.eta = qp.eta;
    if (qp.eta <= opt.etaTol * (1 + std::abs(st.centerValue)) ||
        (qp.p - st.center).norm() <= opt.stepTol) {
      res.status = BundleStatus::Converged;
      break;
    }
    OracleValue v = oracle(qp.p);
    bool serious = st.centerValue - v.value >= opt.theta * qp.eta;
    double rhoUsed = st.rho;
    if (serious) {
      st.center = qp.p;
      st.centerValue = v.value;
      ++res.seriousSteps;
    }
    addCut(st, {qp.p, v.value, std::move(v.subgrad)}, l + 1);
    st.rho = updateWeight(st, serious);
    res.iterations = l + 1;
    res.trace.push_back({l + 1, st.centerValue, qp.eta, rhoUsed, serious});
  }
  res.p = st.center;
  res.value = st.centerValue;
  return res;
}

void writeBundleTrace(std::ostream& os, const BundleResult& r) {
  os << "iteration,value,eta,rho,step\n";
  os.precision(17);
  for (const auto& row : r.trace)
    os << row.iteration << ',' << row.value << ',' << row.eta << ',' << row.rho << ','
       << (row.serious ? "serious" : "null") << '\n';
}

CostSubproblem CostSubproblem::forBs(const BsParams& bs, const PriceCurve& prices, const Vec& lambda,
                                     bool useBox) {
  CostSubproblem s;
  s.set = bs.res;
  s.prices = bs.prices ? *bs.prices : prices;
  s.lambda = lambda;
  s.useBox = useBox;
  const int T = static_cast<int>(lambda.size());
  s.lower = Vec::Constant(T, bs.Pc + bs.battery.PbMin);
  s.upper = Vec::Constant(T, bs.PgMax + bs.battery.PbMax);
  s.start = Vec::Constant(T, 0.5 * (bs.Pc + bs.PgMax));
  return s;
}

double CostSubproblem::penaltySlope(int t) const {
  return std::abs(prices.alpha[t]) + std::abs(prices.beta[t]) + std::abs(lambda(t)) + 1.0;
}

OracleValue CostSubproblem::evaluate(const Vec& p) const {
  CostEval c = tildeGSubgradient(p, lambda, set, prices);
  OracleValue out{c.value, std::move(c.subgrad)};
  if (!useBox) return out;
  for (int t = 0; t < p.size(); ++t) {
    double m = penaltySlope(t);
    if (p(t) < lower(t)) {
      out.value += m * (lower(t) - p(t));
      out.subgrad(t) -= m;
    } else if (p(t) > upper(t)) {
      out.value += m * (p(t) - upper(t));
      out.subgrad(t) += m;
    }
  }
  return out;
}

bool CostSubproblem::unbounded() const {
  if (useBox) return false;
  for (int t = 0; t < lambda.size(); ++t)
    if (lambda(t) > prices.alpha[t] || lambda(t) < prices.beta[t]) return true;
  return false;
}

BundleResult solveCostSubproblem(const CostSubproblem& sub, const BundleOptions& opt) {
  if (sub.unbounded()) {
    BundleResult r;
    r.status = BundleStatus::Unbounded;
    r.value = -std::numeric_limits<double>::infinity();
    return r;
  }
  return bundleMinimize([&](const Vec& p) { return sub.evaluate(p); }, sub.start, opt);
}

BundleResult subgradientReference(const BundleOracle& oracle, const Vec& p0, int iterations,
                                  double a0, int stages, double shrink) {
  if (stages < 1 || iterations < stages || !(shrink >= 1))
    throw ValidationError("subgradientReference: bad schedule");
  BundleResult r;
  r.p = p0;
  r.value = std::numeric_limits<double>::infinity();
  const int per = iterations / stages;
  double a = a0;
  for (int s = 0; s < stages; ++s, a /= shrink) {
    Vec p = r.p;
    for (int j = 0; j < per; ++j) {
      OracleValue v = oracle(p);
      if (v.value < r.value) {
        r.value = v.value;
        r.p = p;
      }
      double gn = v.subgrad.norm();
      if (gn == 0) break;
      p -= (a / std::sqrt(1.0 + j)) * v.subgrad / gn;
    }
  }
  r.iterations = per * stages;
  r.status = BundleStatus::IterationLimit;
  return r;
}

}  // namespace smartcomp
