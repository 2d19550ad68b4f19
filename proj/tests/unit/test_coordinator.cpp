#include "doctest.h"

#include <random>
#include <sstream>

#include "smartcomp/coordinator.hpp"
#include "smartcomp/linalg.hpp"
#include "smartcomp/presets.hpp"

using namespace smartcomp;

namespace {

ProblemInstance smallInstance(std::uint64_t seed, double r = 0.3, int T = 3) {
  PresetOptions o;
  o.K = 2;
  o.I = 2;
  o.M = 2;
  o.T = T;
  o.r = r;
  o.seed = seed;
  return generateInstance(o);
}

CoordinatorOptions quickOptions(int iters) {
  CoordinatorOptions c;
  c.maxIter = iters;
  c.tolGap = 0;
  c.tolResidual = 0;
  return c;
}

PrimalIterate randomIterate(std::mt19937_64& rng, int I, int T, int K, int N) {
  std::normal_distribution<double> n(0, 1);
  auto rmat = [&](int r, int c) {
    Mat m(r, c);
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < c; ++b) m(a, b) = n(rng);
    return m;
  };
  PrimalIterate z;
  for (int i = 0; i < K * T; ++i) {
    CMat x(N, N);
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b) x(a, b) = Complex(n(rng), n(rng));
    z.X.push_back(x);
  }
  z.tau = rmat(K, T);
  z.transmit = rmat(I, T);
  z.Pb = rmat(I, T);
  z.C = rmat(I, T);
  z.P = rmat(I, T);
  return z;
}

}  // namespace

TEST_CASE("stepsize rules") {
  Stepsize c{StepRule::Constant, 0.1};
  CHECK(c.at(0) == 0.1);
  CHECK(c.at(7) == 0.1);
  Stepsize d{StepRule::Diminishing, 0.1};
  CHECK(d.at(0) == doctest::Approx(0.1));
  CHECK(d.at(4) == doctest::Approx(0.02));
  CHECK_THROWS_AS(Stepsize({StepRule::Constant, 0.0}).validate(), ValidationError);
  CHECK_THROWS_AS(Stepsize({StepRule::Constant, -1.0}).validate(), ValidationError);
}

TEST_CASE("cesaro recursion matches the direct weighted sum") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  std::vector<PrimalIterate> zs;
  std::vector<double> mus;
  AveragedPrimal avg;
  for (int j = 0; j < 20; ++j) {
    zs.push_back(randomIterate(rng, 2, 3, 2, 4));
    mus.push_back(u(rng));
    cesaroUpdate(avg, zs.back(), mus.back());
  }
  double total = 0;
  for (double m : mus) total += m;
  Mat pb = Mat::Zero(2, 3);
  CMat x0 = CMat::Zero(4, 4);
  Mat tau = Mat::Zero(2, 3);
  for (int j = 0; j < 20; ++j) {
    pb += mus[j] / total * zs[j].Pb;
    x0 += mus[j] / total * zs[j].X[0];
    tau += mus[j] / total * zs[j].tau;
  }
  CHECK(avg.count == 20);
  CHECK(avg.muSum == doctest::Approx(total).epsilon(1e-14));
  CHECK((avg.mean.Pb - pb).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((avg.mean.X[0] - x0).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((avg.mean.tau - tau).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("cesaro with constant steps is the running mean, one iterate is itself") {
  std::mt19937_64 rng(5);
  AveragedPrimal avg;
  auto z1 = randomIterate(rng, 2, 2, 1, 2);
  cesaroUpdate(avg, z1, 0.3);
  CHECK(avg.mean.P == z1.P);
  CHECK(avg.mean.X[1] == z1.X[1]);
  Mat sum = z1.P;
  for (int j = 2; j <= 10; ++j) {
    auto z = randomIterate(rng, 2, 2, 1, 2);
    sum += z.P;
    cesaroUpdate(avg, z, 0.3);
    CHECK((avg.mean.P - sum / j).cwiseAbs().maxCoeff() <= 1e-12);
  }
  CHECK_THROWS_AS(cesaroUpdate(avg, z1, 0.0), ValidationError);
}

TEST_CASE("dual step moves lambda along the returned subgradient") {
  auto inst = smallInstance(11);
  auto opt = quickOptions(1);
  DualState st;
  st.lambda = Mat::Zero(inst.dims.I, inst.dims.T);
  st.step = {StepRule::Constant, 0.1};
  AveragedPrimal avg;
  auto ev = dualStep(st, inst, opt, avg);
  CHECK((st.lambda - 0.1 * ev.g).cwiseAbs().maxCoeff() == 0.0);
  CHECK(st.iteration == 1);
  CHECK(st.muSum == doctest::Approx(0.1));

  // g = Pc + transmit + Pb - P for the returned iterate.
  Mat g = ev.z.transmit + ev.z.Pb - ev.z.P;
  for (int i = 0; i < inst.dims.I; ++i) g.row(i).array() += inst.bs[i].Pc;
  CHECK((g - ev.g).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("weak duality and the feasibility audit on a small instance") {
  for (std::uint64_t seed : {1, 2}) {
    auto inst = smallInstance(seed);
    auto opt = quickOptions(25);
    auto res = solve(inst, opt);
    const auto& d = inst.dims;
    for (const auto& rec : res.report.records) CHECK(rec.gap >= -1e-6 * (1 + std::abs(rec.primal)));
    CHECK(res.report.gap >= -1e-6 * (1 + std::abs(res.report.primal)));

    const auto& s = res.schedule;
    CHECK(res.report.couplingResidual <= 1e-4);
    for (int i = 0; i < d.I; ++i) {
      const auto& b = inst.bs[i].battery;
      Vec pb = s.Pb.row(i).transpose();
      Vec c = s.C.row(i).transpose();
      CHECK(batteryResidual(pb, c, b) <= 1e-4);
      for (int t = 0; t < d.T; ++t) {
        CHECK(pb(t) >= b.PbMin - 1e-4);
        CHECK(pb(t) <= b.PbMax + 1e-4);
        double prev = t == 0 ? b.C0 : c(t - 1);
        CHECK(pb(t) + b.varpi * prev >= -1e-4);
        CHECK(inst.bs[i].Pc + s.transmit(i, t) <= inst.bs[i].PgMax + 1e-4);
      }
    }
    for (int k = 0; k < d.K; ++k)
      for (int t = 0; t < d.T; ++t) {
        const auto& x = s.lifted(k, t, d.T);
        CHECK(linalg::minEigenvalue(linalg::HermitianMatrix(0.5 * (x + x.adjoint()))) >= -1e-4);
        std::vector<CMat> xs;
        for (int l = 0; l < d.K; ++l) xs.push_back(s.lifted(l, t, d.T));
        auto gam = buildGamma(xs, k, inst.channel(k, t), s.tau(k, t));
        CHECK(linalg::minEigenvalue(gam) >= -1e-4);
      }
  }
}

TEST_CASE("distributed mode equals monolithic mode and logs every message") {
  auto inst = smallInstance(4);
  auto opt = quickOptions(6);
  auto mono = solve(inst, opt);
  opt.distributed = true;
  opt.recordMessages = true;
  auto dist = solve(inst, opt);
  CHECK((mono.dual.lambda - dist.dual.lambda).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((mono.schedule.P - dist.schedule.P).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((mono.schedule.Pb - dist.schedule.Pb).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(std::abs(mono.report.primal - dist.report.primal) <= 1e-12);
  REQUIRE(dist.messages.entries.size() == static_cast<std::size_t>(2 * inst.dims.I * 6));

  // Per iteration: I downlinks in BS order, then I uplinks.
  const int I = inst.dims.I;
  for (int j = 0; j < 6; ++j)
    for (int q = 0; q < 2 * I; ++q) {
      const auto& m = dist.messages.entries[j * 2 * I + q];
      CHECK(m.iteration == j);
      CHECK(m.bs == q % I);
      CHECK(m.kind == (q < I ? MessageKind::Multipliers : MessageKind::Decisions));
    }

  std::stringstream ss;
  dist.messages.writeJsonLines(ss);
  auto back = MessageLog::readJsonLines(ss);
  CHECK(back.entries == dist.messages.entries);
}

TEST_CASE("message payloads round-trip bit-exactly") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int rep = 0; rep < 50; ++rep) {
    Message m;
    m.iteration = rep;
    m.bs = rep % 3;
    m.kind = rep % 2 ? MessageKind::Decisions : MessageKind::Multipliers;
    for (int t = 0; t < 8; ++t) {
      double v = u(rng) * std::pow(10.0, rep % 7 - 3);
      if (m.kind == MessageKind::Multipliers) {
        m.lambda.push_back(v);
      } else {
        m.Pb.push_back(v);
        m.P.push_back(-v / 3);
      }
    }
    if (m.kind == MessageKind::Decisions) {
      m.lpObjective = u(rng) / 7;
      m.costValue = std::nextafter(u(rng), 0.0);
    }
    CHECK(deserialize(serialize(m)) == m);
  }
  CHECK_THROWS_AS(deserialize("{not json"), ValidationError);
  CHECK_THROWS_AS(deserialize(R"({"iteration":0,"kind":"other","bs":0})"), ValidationError);
}

TEST_CASE("solve is deterministic, with and without threads") {
  auto inst = smallInstance(6);
  auto opt = quickOptions(5);
  auto a = solve(inst, opt);
  auto b = solve(inst, opt);
  opt.threads = 3;
  auto c = solve(inst, opt);
  REQUIRE(a.report.records.size() == b.report.records.size());
  for (std::size_t j = 0; j < a.report.records.size(); ++j) {
    CHECK(a.report.records[j].dual == b.report.records[j].dual);
    CHECK(a.report.records[j].primal == b.report.records[j].primal);
    CHECK(a.report.records[j].dual == c.report.records[j].dual);
  }
  CHECK(a.schedule.P == b.schedule.P);
  CHECK(a.schedule.P == c.schedule.P);
  CHECK(a.dual.lambda == c.dual.lambda);
}

TEST_CASE("stopping rules and the iteration log") {
  auto inst = smallInstance(7, 1.0);
  CoordinatorOptions opt;
  auto res = solve(inst, opt);
  CHECK(res.report.status == SolveStatus::GapReached);
  CHECK(res.report.relGap <= 1e-3);
  CHECK(res.report.iterations == static_cast<int>(res.report.records.size()));

  auto capped = solve(smallInstance(7), quickOptions(3));
  CHECK(capped.report.status == SolveStatus::IterationCap);
  CHECK(capped.report.iterations == 3);

  std::stringstream ss;
  writeIterationLog(ss, capped.report);
  std::string line;
  std::getline(ss, line);
  CHECK(line == "iteration,objective,subgrad_norm,residual,dual,gap,rel_gap");
  int rows = 0;
  while (std::getline(ss, line)) ++rows;
  CHECK(rows == 3);
}

TEST_CASE("battery projection: fixed points, feasibility and the projection inequality") {
  BatteryParams b{5, 30, -10, 10, 0.95};
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-2, 2);
  std::vector<Vec> feasible;
  for (int rep = 0; rep < 20; ++rep) {
    Vec lambda(8);
    for (int t = 0; t < 8; ++t) lambda(t) = u(rng);
    feasible.push_back(solveBatteryLp({lambda, b}).Pb);
  }
  for (const auto& f : feasible) CHECK((projectBattery(f, b) - f).lpNorm<Eigen::Infinity>() <= 1e-12);

  std::uniform_real_distribution<double> wide(-25, 25);
  for (int rep = 0; rep < 20; ++rep) {
    Vec y(8);
    for (int t = 0; t < 8; ++t) y(t) = wide(rng);
    Vec p = projectBattery(y, b);
    Vec c = batteryLevels(p, b);
    CHECK(batteryResidual(p, c, b) <= 1e-9);
    for (int t = 0; t < 8; ++t) {
      CHECK(p(t) >= b.PbMin - 1e-9);
      CHECK(p(t) <= b.PbMax + 1e-9);
      CHECK(p(t) + b.varpi * (t == 0 ? b.C0 : c(t - 1)) >= -1e-9);
    }
    // Variational inequality of the Euclidean projection onto a convex set.
    for (const auto& f : feasible) CHECK((y - p).dot(f - p) <= 1e-6);
  }
}

TEST_CASE("battery levels follow the dynamics") {
  BatteryParams b{5, 30, -10, 10, 0.95};
  Vec pb(4);
  pb << 1, -2, 3, 0.5;
  Vec c = batteryLevels(pb, b);
  CHECK(c(0) == 6);
  CHECK(c(1) == 4);
  CHECK(c(2) == 7);
  CHECK(c(3) == 7.5);
}
