#include "doctest.h"

#include <random>
#include <sstream>

#include "smartcomp/presets.hpp"
#include "smartcomp/sdp.hpp"

using namespace smartcomp;

namespace {

ProblemInstance smallInstance(int K, int I, int M, std::uint64_t seed, double eps = 0.05) {
  PresetOptions o;
  o.K = K;
  o.I = I;
  o.M = M;
  o.T = 2;
  o.epsilon = eps;
  o.seed = seed;
  return generateInstance(o);
}

ProblemInstance scalarInstance(double hNorm2, double gamma, double sigma2, double pgMax) {
  ProblemInstance inst;
  inst.dims = {1, 1, 1, 1};
  inst.prices = PriceCurve::fromRatio({1.0}, 0.5);
  BsParams b;
  b.battery = {5, 30, -10, 10, 0.95};
  b.Pc = 1;
  b.PgMax = pgMax;
  b.res = SingletonSet{Vec::Ones(1)};
  inst.bs.push_back(b);
  ChannelEstimate c;
  c.hHat = CVec::Constant(1, Complex(std::sqrt(hNorm2), 0));
  c.epsilon = 0;
  c.sigma2 = sigma2;
  c.gamma = gamma;
  inst.channels.push_back(c);
  return buildInstance(inst);
}

conic::ConeVec randomCone(const conic::ConeSpec& spec, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  conic::ConeVec v = conic::ConeVec::zeros(spec);
  for (int i = 0; i < v.lp.size(); ++i) v.lp(i) = g(rng);
  for (auto& m : v.sdp) {
    for (int a = 0; a < m.rows(); ++a)
      for (int b = 0; b < m.cols(); ++b) m(a, b) = g(rng);
    m = 0.5 * (m + m.transpose()).eval();
  }
  return v;
}

}  // namespace

TEST_CASE("sdp: Hermitian coordinates round trip and are orthonormal") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  const int N = 4;
  CMat a(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) a(i, j) = Complex(g(rng), g(rng));
  a = 0.5 * (a + a.adjoint()).eval();
  CHECK((hermitianFromParams(hermitianToParams(a), N) - a).norm() < 1e-14);
  CMat b(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) b(i, j) = Complex(g(rng), g(rng));
  b = 0.5 * (b + b.adjoint()).eval();
  CHECK(hermitianToParams(a).dot(hermitianToParams(b)) == doctest::Approx((a * b).trace().real()));
}

TEST_CASE("sdp: buildGamma reduces to the nominal constraint") {
  ChannelEstimate ch;
  ch.hHat = CVec::Zero(2);
  ch.hHat << Complex(1, 0), Complex(0, 1);
  ch.sigma2 = 1;
  ch.gamma = 0.5;
  ch.epsilon = 0;
  double p = 0.3;
  std::vector<CMat> xs = {p * ch.hHat * ch.hHat.adjoint() / ch.hHat.squaredNorm()};
  auto g = buildGamma(xs, 0, ch, 0.0);
  // corner entry = p ||h||^2 / gamma - sigma2
  CHECK(g(2, 2).real() == doctest::Approx(p * 2 / 0.5 - 1));
  std::vector<CMat> zero = {CMat::Zero(2, 2)};
  auto g0 = buildGamma(zero, 0, ch, 0.0);
  CHECK(g0(2, 2).real() == doctest::Approx(-1));
  CHECK_FALSE(linalg::isPsd(g0));
}

TEST_CASE("sdp: operator adjoint is consistent") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  auto inst = smallInstance(3, 2, 2, 11);
  inst.channel(1, 0).epsilon = 0;  // one user in the scalar form
  for (auto mode : {BeamformingMode::Robust, BeamformingMode::NonRobust}) {
    BeamformingOperator op(inst, 0, mode);
    Vec x(op.numVars());
    for (int i = 0; i < x.size(); ++i) x(i) = g(rng);
    auto z = randomCone(op.cones(), rng);
    CHECK(op.apply(x).dot(z) == doctest::Approx(x.dot(op.applyAdjoint(z))).epsilon(1e-12));
  }
}

TEST_CASE("sdp: normal-equation solvers agree with the operator definition") {
  std::mt19937_64 rng(9);
  auto inst = smallInstance(3, 2, 2, 4);
  inst.channel(2, 1).epsilon = 0;
  for (auto solver : {BeamformingOperator::Solver::Dense, BeamformingOperator::Solver::Woodbury}) {
    BeamformingOperator op(inst, 1, BeamformingMode::Robust, solver);
    // Random interior scaling: NT scaling of random s, z pairs.
    auto spec = op.cones();
    conic::Scaling w = conic::Scaling::identity(spec);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    for (int i = 0; i < w.lpW.size(); ++i) w.lpW(i) = u(rng);
    for (std::size_t j = 0; j < w.R.size(); ++j) {
      int n = spec.sdp[j];
      Mat r = Mat::Identity(n, n);
      std::normal_distribution<double> g(0, 0.2);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) r(a, b) += g(rng);
      w.R[j] = r;
      w.Rinv[j] = r.inverse();
      w.Winv[j] = (r * r.transpose()).inverse();
    }
    op.factor(w);
    Vec rhs = Vec::Random(op.numVars());
    Vec x = op.solveNormal(rhs);
    Vec back = op.applyAdjoint(w.applyWtWinv(op.apply(x)));
    CHECK((back - rhs).norm() <= 1e-8 * rhs.norm());
  }
}

TEST_CASE("sdp: single-user closed form") {
  auto inst = scalarInstance(1.0, 1.0, 1.0, 20.0);
  SlotSubproblem sub{0, Vec::Ones(1), BeamformingMode::Robust};
  auto s = solveSlotSdp(inst, sub);
  REQUIRE(s.status == SdpStatus::Optimal);
  CHECK(s.objective == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(s.X[0](0, 0).real() == doctest::Approx(1.0).epsilon(1e-7));

  auto s2 = solveSlotSdp(scalarInstance(2.0, 3.0, 0.5, 20.0), sub);
  REQUIRE(s2.status == SdpStatus::Optimal);
  CHECK(s2.objective == doctest::Approx(3.0 * 0.5 / 2.0).epsilon(1e-7));
}

TEST_CASE("sdp: unattainable QoS is reported infeasible") {
  auto inst = scalarInstance(1.0, 1e6, 1.0, 2.0);
  SlotSubproblem sub{0, Vec::Ones(1), BeamformingMode::Robust};
  CHECK(solveSlotSdp(inst, sub).status == SdpStatus::Infeasible);

  auto multi = smallInstance(3, 2, 2, 2);
  for (auto& c : multi.channels) c.gamma = 1e6;
  SlotSubproblem sub2{0, Vec::Ones(2), BeamformingMode::Robust};
  CHECK(solveSlotSdp(multi, sub2).status == SdpStatus::Infeasible);
}

TEST_CASE("sdp: dense and Woodbury paths and the generic operator give the same optimum") {
  auto inst = smallInstance(4, 2, 2, 21);
  SlotSubproblem sub{0, Vec(2), BeamformingMode::Robust};
  sub.weights << 0.7, 1.3;
  auto a = solveSlotSdp(inst, sub, {}, BeamformingOperator::Solver::Dense);
  auto b = solveSlotSdp(inst, sub, {}, BeamformingOperator::Solver::Woodbury);
  REQUIRE(a.status == SdpStatus::Optimal);
  REQUIRE(b.status == SdpStatus::Optimal);
  CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-7));

  BeamformingOperator op(inst, 0, BeamformingMode::Robust);
  std::vector<conic::ConeVec> cols;
  for (int v = 0; v < op.numVars(); ++v) {
    Vec e = Vec::Zero(op.numVars());
    e(v) = 1;
    cols.push_back(op.apply(e));
  }
  conic::DenseConicOperator generic(op.cones(), cols);
  auto r = conic::ipmSolve(generic, op.cost(sub.weights), op.rhs());
  REQUIRE(r.status == conic::IpmStatus::Optimal);
  CHECK(r.pcost == doctest::Approx(a.objective).epsilon(1e-7));
}

TEST_CASE("sdp: optimal solutions pass the feasibility audit") {
  auto inst = smallInstance(10, 2, 2, 1);
  for (int t = 0; t < 2; ++t) {
    SlotSubproblem sub{t, Vec::Constant(2, inst.prices.phi(t)), BeamformingMode::Robust};
    auto s = solveSlotSdp(inst, sub);
    REQUIRE(s.status == SdpStatus::Optimal);
    CHECK(s.minEigX >= -1e-7);
    CHECK(s.minEigGamma >= -1e-7);
    CHECK(s.powerSlack >= -1e-7);
    CHECK(s.pres <= 1e-7);
    CHECK(s.relgap <= 1e-7);
  }
}

TEST_CASE("sdp: objective is nondecreasing in each weight") {
  auto inst = smallInstance(4, 2, 2, 8);
  double prev = -1;
  for (double w : {0.0, 0.25, 0.5, 1.0, 2.0}) {
    SlotSubproblem sub{0, Vec(2), BeamformingMode::Robust};
    sub.weights << w, 0.5;
    auto s = solveSlotSdp(inst, sub);
    REQUIRE(s.status == SdpStatus::Optimal);
    CHECK(s.objective >= prev - 1e-7);
    prev = s.objective;
  }
}

TEST_CASE("sdp: debug dump has one record per variable") {
  auto inst = smallInstance(2, 1, 2, 3);
  SlotSubproblem sub{0, Vec::Ones(1), BeamformingMode::Robust};
  std::ostringstream os;
  dumpSlotSdp(os, inst, sub);
  BeamformingOperator op(inst, 0, BeamformingMode::Robust);
  std::string text = os.str();
  CHECK(text.rfind("conic ", 0) == 0);
  CHECK(static_cast<int>(std::count(text.begin(), text.end(), '\n')) == 3 + op.numVars());
}
