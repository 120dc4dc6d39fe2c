#include <gcftrack/gcc_phat.hpp>

#include <doctest.h>

#include "oracles.hpp"

#include <random>

using namespace gcftrack;

namespace {

Eigen::VectorXd noise(Index n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd x(n);
  for (Index i = 0; i < n; ++i) x(i) = g(rng);
  return x;
}

// Circular delay: out[t] = x[t - d].
Eigen::VectorXd delayed(const Eigen::VectorXd& x, Index d) {
  const Index n = x.size();
  Eigen::VectorXd out(n);
  for (Index t = 0; t < n; ++t) out(t) = x(((t - d) % n + n) % n);
  return out;
}

}  // namespace

TEST_CASE("identical spectra peak at lag 0 with value 1") {
  const Eigen::VectorXcd s = oracle::dft(noise(256, 1));
  const GccCorrelation r = gcc_phat(s, s, 20);
  CHECK(r.values.size() == 41);
  CHECK(r.peak_lag() == 0);
  CHECK(r.peak_value() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("delayed white noise peaks at the delay and matches the time-domain oracle") {
  const Index n = 256;
  const Eigen::VectorXd a = noise(n, 2);
  const Eigen::VectorXd b = delayed(a, 7);
  const Eigen::VectorXcd sa = oracle::dft(a), sb = oracle::dft(b);
  const GccCorrelation r = gcc_phat(sa, sb, 20);
  CHECK(r.peak_lag() == 7);
  CHECK(r.peak_value() == doctest::Approx(1.0).epsilon(1e-9));

  const Eigen::VectorXd wa = oracle::inverse_dft(oracle::whiten(sa), n);
  const Eigen::VectorXd wb = oracle::inverse_dft(oracle::whiten(sb), n);
  const Eigen::VectorXd expected = oracle::circular_xcorr(wa, wb, 20);
  CHECK((r.values - expected).cwiseAbs().maxCoeff() < 1e-9);

  const GccCorrelation back = gcc_phat(sb, sa, 20);
  CHECK(back.peak_lag() == -7);
}

TEST_CASE("independent noise matches the oracle too") {
  const Index n = 128;
  const Eigen::VectorXcd sa = oracle::dft(noise(n, 3)), sb = oracle::dft(noise(n, 4));
  const GccCorrelation r = gcc_phat(sa, sb, 10);
  const Eigen::VectorXd expected = oracle::circular_xcorr(oracle::inverse_dft(oracle::whiten(sa), n),
                                                          oracle::inverse_dft(oracle::whiten(sb), n), 10);
  CHECK((r.values - expected).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(r.values.cwiseAbs().maxCoeff() <= 1.0 + 1e-9);
}

TEST_CASE("zero input gives a zero correlation") {
  const Eigen::VectorXcd z = Eigen::VectorXcd::Zero(129);
  const Eigen::VectorXcd s = oracle::dft(noise(256, 5));
  CHECK(gcc_phat(z, z, 10).values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(gcc_phat(s, z, 10).values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("swap symmetry, scale invariance and delay equivariance") {
  const Index n = 256;
  const Eigen::VectorXd a = noise(n, 6), b = noise(n, 7);
  const Eigen::VectorXcd sa = oracle::dft(a), sb = oracle::dft(b);
  const GccCorrelation ab = gcc_phat(sa, sb, 30);
  const GccCorrelation ba = gcc_phat(sb, sa, 30);
  for (Index k = -30; k <= 30; ++k) CHECK(ab.at_lag(k) == doctest::Approx(ba.at_lag(-k)).epsilon(1e-10));

  const Eigen::VectorXcd scaled_a = 3.7 * sa, scaled_b = 1e-3 * sb;
  const GccCorrelation sc = gcc_phat(scaled_a, scaled_b, 30);
  CHECK((sc.values - ab.values).cwiseAbs().maxCoeff() < 1e-10);

  const GccCorrelation sh = gcc_phat(sa, oracle::dft(delayed(b, 5)), 30);
  for (Index k = -25; k <= 25; ++k) CHECK(sh.at_lag(k + 5) == doctest::Approx(ab.at_lag(k)).epsilon(1e-9));
}

TEST_CASE("peak_lag prefers the most negative lag on ties") {
  GccCorrelation c;
  c.max_lag = 2;
  c.values = Eigen::VectorXd::Zero(5);
  c.values(1) = 0.5;
  c.values(3) = 0.5;
  CHECK(c.peak_lag() == -1);
}

TEST_CASE("correlation_at interpolates linearly inside the lag range") {
  GccCorrelation c;
  c.max_lag = 3;
  c.values.resize(7);
  c.values << 0.1, -0.2, 0.4, 1.0, 0.3, -0.5, 0.2;
  const double fs = 1000.0;
  for (Index k = -3; k <= 3; ++k) CHECK(*correlation_at(c, static_cast<double>(k) / fs, fs) == c.at_lag(k));
  CHECK(*correlation_at(c, 0.5 / fs, fs) == doctest::Approx(0.65));
  CHECK(*correlation_at(c, -2.25 / fs, fs) == doctest::Approx(0.1 + 0.75 * -0.3));

  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 1000; ++i) {
    const double lag = u(rng);
    const double v = *correlation_at(c, lag / fs, fs);
    const auto lo = static_cast<Index>(std::floor(lag));
    const double a = c.at_lag(lo), b = c.at_lag(std::min<Index>(lo + 1, 3));
    CHECK(v >= std::min(a, b) - 1e-15);
    CHECK(v <= std::max(a, b) + 1e-15);
  }
  CHECK_FALSE(correlation_at(c, 3.01 / fs, fs).has_value());
  CHECK_FALSE(correlation_at(c, -3.5 / fs, fs).has_value());
}

TEST_CASE("max_lag_for and argument checks") {
  CHECK(max_lag_for(0.32, 48000.0) == static_cast<Index>(std::ceil(0.32 / 343.0 * 48000.0)) + 2);
  const Eigen::VectorXcd s = oracle::dft(noise(64, 9));
  const Eigen::VectorXcd t = oracle::dft(noise(128, 9));
  CHECK_THROWS_AS(gcc_phat(s, t, 4), InputError);
  CHECK_THROWS_AS(gcc_phat(s, s, 4, 0.0), InputError);
  CHECK_THROWS_AS(gcc_phat(s, s, 32), InputError);
}
