#include "doctest.h"

#include <random>

#include "smartcomp/linalg.hpp"
#include "smartcomp/model.hpp"
#include "smartcomp/presets.hpp"

using namespace smartcomp;

namespace {

CMat randomComplex(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g(0, 1);
  CMat a(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) a(r, c) = Complex(g(rng), g(rng));
  return a;
}

ProblemInstance tiny() {
  PresetOptions o;
  o.K = 2;
  o.I = 2;
  o.M = 2;
  o.T = 3;
  return generateInstance(o);
}

}  // namespace

TEST_CASE("real embedding is a ring homomorphism and doubles the spectrum") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    CMat a = randomComplex(rng, 4), b = randomComplex(rng, 4);
    CHECK((linalg::realEmbed(a * b) - linalg::realEmbed(a) * linalg::realEmbed(b)).norm() <= 1e-12);
    CHECK((linalg::realEmbed(a + b) - linalg::realEmbed(a) - linalg::realEmbed(b)).norm() <= 1e-12);
    CHECK((linalg::realUnembed(linalg::realEmbed(a)) - a).norm() <= 1e-13);

    linalg::HermitianMatrix h(a + a.adjoint());
    Vec ev = linalg::eigh(h).values;
    Vec er = linalg::eighReal(linalg::realEmbed(h)).values;
    REQUIRE(er.size() == 2 * ev.size());
    for (int j = 0; j < ev.size(); ++j) {
      CHECK(er(2 * j) == doctest::Approx(ev(j)).epsilon(1e-10));
      CHECK(er(2 * j + 1) == doctest::Approx(ev(j)).epsilon(1e-10));
    }
  }
}

TEST_CASE("Hermitian construction and PSD queries") {
  std::mt19937_64 rng(4);
  CMat a = randomComplex(rng, 3);
  CHECK_THROWS_AS(linalg::HermitianMatrix{a}, ValidationError);
  linalg::HermitianMatrix g(a * a.adjoint());
  CHECK(linalg::isPsd(g));
  CHECK_FALSE(linalg::isPsd(g * -1.0 - linalg::HermitianMatrix::identity(3) * 1e-6));
  CHECK(linalg::minEigenvalue(linalg::HermitianMatrix::identity(5)) == doctest::Approx(1.0));
  CVec w = a.col(0);
  CHECK(linalg::HermitianMatrix::outer(w).trace() == doctest::Approx(w.squaredNorm()));
}

TEST_CASE("selection matrices pick one BS's antennas scaled by 1/xi") {
  Dimensions d{4, 3, 2, 2};
  double sum = 0;
  for (int i = 0; i < d.I; ++i) {
    Mat b = selectionMatrix(i, d, 0.5);
    CHECK(b.rows() == 6);
    for (int r = 0; r < 6; ++r) {
      double expect = (r / d.M == i) ? 2.0 : 0.0;
      CHECK(b(r, r) == expect);
    }
    CHECK((b - Mat(b.diagonal().asDiagonal())).norm() == 0.0);
    sum += b.trace();
  }
  CHECK(sum == 12.0);

  std::mt19937_64 rng(5);
  CMat x = randomComplex(rng, 6);
  x = x * x.adjoint();
  for (int i = 0; i < d.I; ++i) {
    double direct = (selectionMatrix(i, d, 0.8).cast<Complex>() * x).trace().real();
    CHECK(selectedTrace(x, i, d, 0.8) == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("SINR of hand-worked examples") {
  std::vector<CVec> w(1, CVec(2));
  w[0] << Complex(2, 0), Complex(0, 0);
  CVec h(2);
  h << Complex(1, 0), Complex(0, 1);
  CHECK(evaluateSinr(w, 0, h, 1.0) == doctest::Approx(4.0));

  std::vector<CVec> two(2, CVec(2));
  two[0] << Complex(1, 0), Complex(0, 0);
  two[1] << Complex(0, 0), Complex(1, 0);
  CVec g(2);
  g << Complex(1, 0), Complex(1, 0);
  CHECK(evaluateSinr(two, 0, g, 1.0) == doctest::Approx(0.5));
  CHECK(evaluateSinr(two, 1, g, 3.0) == doctest::Approx(0.25));
}

TEST_CASE("instance validation names the violated invariant") {
  CHECK_NOTHROW(tiny().validate());
  auto expectThrow = [](auto mutate, const char* needle) {
    ProblemInstance p = tiny();
    mutate(p);
    try {
      p.validate();
      FAIL("accepted an invalid instance: " << needle);
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  expectThrow([](ProblemInstance& p) { p.prices.beta = p.prices.alpha; }, "");
  expectThrow([](ProblemInstance& p) { p.bs[0].battery.C0 = p.bs[0].battery.Cmax + 1; }, "C0");
  expectThrow([](ProblemInstance& p) { p.bs[1].battery.PbMin = 0.5; }, "PbMin");
  expectThrow([](ProblemInstance& p) { p.bs[1].battery.varpi = 1.5; }, "varpi");
  expectThrow([](ProblemInstance& p) { p.bs[0].PgMax = p.bs[0].Pc - 1; }, "PgMax");
  expectThrow([](ProblemInstance& p) { p.bs[0].xi = 0; }, "xi");
  expectThrow([](ProblemInstance& p) { p.channels.pop_back(); }, "channels");
  expectThrow([](ProblemInstance& p) { p.channel(1, 2).epsilon = -0.1; }, "epsilon");
  expectThrow([](ProblemInstance& p) { p.channel(0, 0).sigma2 = 0; }, "sigma2");
  expectThrow([](ProblemInstance& p) { p.channel(0, 1).gamma = 0; }, "gamma");
  expectThrow([](ProblemInstance& p) { p.channel(0, 1).hHat.resize(3); }, "hHat");
  expectThrow([](ProblemInstance& p) { p.dims.T = 0; }, "");
}
