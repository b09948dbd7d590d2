#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "hullbound/functionals.hpp"
#include "hullbound/rng.hpp"

using namespace hullbound;

namespace {

const double kSqrt2OverPi = std::sqrt(2.0 / M_PI);

// Root of sqrt(2/pi) exp(-m^2/2) = m by Newton, independent of the library.
double gaussian_single_point_root() {
  double m = 0.6;
  for (int i = 0; i < 50; ++i) {
    const double f = kSqrt2OverPi * std::exp(-m * m / 2) - m;
    const double df = -m * kSqrt2OverPi * std::exp(-m * m / 2) - 1.0;
    m -= f / df;
  }
  return m;
}

// Exact Rademacher tail sum by enumerating all sign patterns.
double rademacher_tail_exact(const Eigen::MatrixXd& S, double u) {
  const Eigen::Index n = S.rows();
  double total = 0.0;
  for (long mask = 0; mask < (1L << n); ++mask) {
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = (mask >> i) & 1 ? 1.0 : -1.0;
    for (Eigen::Index j = 0; j < S.cols(); ++j) {
      const double y = std::abs(x.dot(S.col(j)));
      if (y >= u && y > 0.0) total += y;
    }
  }
  return total / static_cast<double>(1L << n);
}

double rademacher_tilde_exact(const Eigen::MatrixXd& S) {
  double lo = 0.0, hi = rademacher_tail_exact(S, 0.0);
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (rademacher_tail_exact(S, mid) <= mid ? hi : lo) = mid;
  }
  return hi;
}

Eigen::MatrixXd random_points(Eigen::Index n, Eigen::Index count, std::uint64_t seed) {
  Stream s(seed, tag_of("functional test"), 0);
  Eigen::MatrixXd S(n, count);
  for (Eigen::Index j = 0; j < count; ++j)
    for (Eigen::Index i = 0; i < n; ++i) S(i, j) = s.normal();
  return S;
}

FunctionalConfig config_with(std::uint64_t samples, std::uint64_t seed, ProfileMode mode = ProfileMode::Auto) {
  FunctionalConfig c;
  c.budget = {samples, seed};
  c.mode = mode;
  return c;
}

}  // namespace

TEST_CASE("gaussian single point: M~ root and M limit") {
  const Eigen::MatrixXd e1 = Eigen::MatrixXd::Identity(3, 1);
  const FunctionalConfig cfg = config_with(1000, 1);
  const Estimate mt = tilde_m(e1, RandomFamily::gaussian(), cfg);
  CHECK(mt.closed_form());
  CHECK(mt.value == doctest::Approx(gaussian_single_point_root()).epsilon(1e-10));
  CHECK(std::abs(mt.value - 0.647) < 0.01);
  const Estimate mb = big_m(e1, RandomFamily::gaussian(), cfg);
  CHECK(mb.value == doctest::Approx(kSqrt2OverPi).epsilon(1e-12));
}

TEST_CASE("zero point lists give zero") {
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(2, 3);
  const FunctionalConfig cfg = config_with(1000, 1);
  CHECK(tilde_m(zero, RandomFamily::gaussian(), cfg).value == 0.0);
  CHECK(big_m(zero, RandomFamily::gaussian(), cfg).value == 0.0);
  CHECK(tilde_m(zero, RandomFamily::rademacher(), cfg).value == 0.0);
}

TEST_CASE("matrix path matches exact rademacher enumeration") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const Eigen::MatrixXd S = random_points(6, 5, seed);
    const double exact = rademacher_tilde_exact(S);
    const Estimate mt = tilde_m(S, RandomFamily::rademacher(), config_with(100000, seed));
    INFO("seed " << seed << " exact " << exact << " mc " << mt.value << " se " << mt.std_error);
    CHECK(mt.std_error > 0.0);
    CHECK(std::abs(mt.value - exact) <= 4.0 * mt.std_error + 1e-3 * exact);
    TailSumProfile prof(S, RandomFamily::rademacher(), config_with(100000, seed));
    const Estimate t = prof.estimate(exact);
    CHECK(std::abs(t.value - rademacher_tail_exact(S, exact)) <= 4.0 * t.std_error);
  }
}

TEST_CASE("scalar and matrix paths agree with the gaussian closed form") {
  const Eigen::MatrixXd S = random_points(4, 12, 7);
  const auto G = RandomFamily::gaussian();
  const double closed = tilde_m(S, G, config_with(1000, 1, ProfileMode::Closed)).value;
  for (auto mode : {ProfileMode::ScalarMc, ProfileMode::MatrixMc}) {
    const Estimate e = tilde_m(S, G, config_with(200000, 3, mode));
    CHECK(std::abs(e.value - closed) <= 4.0 * e.std_error);
  }
  const double closed_big = big_m(S, G, config_with(1000, 1, ProfileMode::Closed)).value;
  const Estimate eb = big_m(S, G, config_with(200000, 3, ProfileMode::MatrixMc));
  CHECK(std::abs(eb.value - closed_big) <= 4.0 * eb.std_error + 1e-3 * closed_big);
}

TEST_CASE("sandwich on random instances") {
  Stream pick(5, tag_of("sandwich instances"), 0);
  for (int k = 0; k < 30; ++k) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(pick.next_u64() % 8);
    const Eigen::Index N = 1 + static_cast<Eigen::Index>(pick.next_u64() % 16);
    const Eigen::MatrixXd S = random_points(n, N, 100 + static_cast<std::uint64_t>(k));
    const auto fam = k % 2 ? RandomFamily::rademacher() : RandomFamily::gaussian();
    const FunctionalConfig cfg = config_with(20000, static_cast<std::uint64_t>(k) + 1);
    TailSumProfile prof(S, fam, cfg);
    const Estimate mt = tilde_m(prof, cfg);
    const Estimate mb = big_m_detail(prof, mt, cfg).estimate;
    INFO("k " << k << " n " << n << " N " << N << " mt " << mt.value << " +- " << mt.std_error << " M " << mb.value
              << " +- " << mb.std_error);
    CHECK(sandwich_holds(mt, mb));
  }
}

TEST_CASE("homogeneity and monotonicity") {
  const Eigen::MatrixXd S = random_points(3, 6, 11);
  for (const auto& fam : {RandomFamily::gaussian(), RandomFamily::student(9)}) {
    const FunctionalConfig cfg = config_with(50000, 4);
    const Estimate a = tilde_m(S, fam, cfg);
    const Estimate b = tilde_m(2.0 * S, fam, cfg);
    CHECK(b.value == doctest::Approx(2.0 * a.value).epsilon(1e-6));
    const Estimate big = tilde_m(Eigen::MatrixXd(S.leftCols(4)), fam, cfg);
    CHECK(big.value <= a.value + 3.0 * combined_stderr(a, big));
  }
}

TEST_CASE("stable family uses the scalar path") {
  const Eigen::MatrixXd S = random_points(3, 4, 2);
  TailSumProfile prof(S, RandomFamily::stable(1.5), config_with(100000, 1));
  CHECK(prof.mode() == ProfileMode::ScalarMc);
  const FunctionalConfig cfg = config_with(100000, 1);
  const Estimate mt = tilde_m(prof, cfg);
  CHECK(mt.value > 0.0);
  CHECK(sandwich_holds(mt, big_m_detail(prof, mt, cfg).estimate));
}

TEST_CASE("little m: single gaussian point") {
  const Eigen::MatrixXd e1 = Eigen::MatrixXd::Identity(2, 1);
  const double p = std::log(M_E + 1.0);
  const double oracle = std::pow(std::pow(2.0, p / 2) * std::tgamma((p + 1) / 2) / std::sqrt(M_PI), 1.0 / p);
  const auto r = little_m(e1, RandomFamily::gaussian(), OrderingMode::Heuristic, config_with(1000, 1));
  CHECK(r.estimate.value == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("little m: heuristic equals brute force on small instances") {
  Stream pick(6, tag_of("little m instances"), 0);
  int checked = 0;
  for (int k = 0; k < 40; ++k) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(pick.next_u64() % 5);
    const Eigen::Index N = 1 + static_cast<Eigen::Index>(pick.next_u64() % 6);
    const Eigen::MatrixXd S = random_points(n, N, 500 + static_cast<std::uint64_t>(k));
    const auto fam = k % 2 ? RandomFamily::rademacher() : RandomFamily::gaussian();
    FunctionalConfig cfg = config_with(1000, 3);
    cfg.norm_samples = 4000;
    const auto h = little_m(S, fam, OrderingMode::Heuristic, cfg);
    const auto e = little_m(S, fam, OrderingMode::ExactSmall, cfg);
    CHECK(h.estimate.value == e.estimate.value);
    ++checked;
  }
  CHECK(checked == 40);
  CHECK_THROWS_AS(little_m(random_points(2, 9, 1), RandomFamily::gaussian(), OrderingMode::ExactSmall,
                           config_with(10, 1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(little_m(random_points(2, 9, 1), RandomFamily::stable(1.5), OrderingMode::Heuristic,
                           config_with(10, 1)),
                  InfiniteMomentError);
}

TEST_CASE("little m is homogeneous") {
  const Eigen::MatrixXd S = random_points(3, 5, 9);
  const FunctionalConfig cfg = config_with(1000, 1);
  const double a = little_m(S, RandomFamily::gaussian(), OrderingMode::Heuristic, cfg).estimate.value;
  const double b = little_m(3.0 * S, RandomFamily::gaussian(), OrderingMode::Heuristic, cfg).estimate.value;
  CHECK(b == doctest::Approx(3.0 * a));
}

TEST_CASE("b_sup closed-form checks") {
  const McBudget budget{400000, 8};
  const Estimate b1 = b_sup(IndexSet::l1_ball(1), RandomFamily::gaussian(), budget);
  CHECK(std::abs(b1.value - kSqrt2OverPi) <= 4.0 * b1.std_error);
  const Estimate b2 = b_sup(IndexSet::l2_ball(2), RandomFamily::gaussian(), budget);
  CHECK(std::abs(b2.value - std::sqrt(M_PI / 2.0)) <= 4.0 * b2.std_error);
  const Estimate b3 = b_sup(IndexSet::l2_ball(2).scaled(3.0), RandomFamily::gaussian(), budget);
  CHECK(b3.value == doctest::Approx(3.0 * b2.value).epsilon(1e-12));
  Eigen::VectorXd shift(2);
  shift << 0.7, -1.1;
  const Estimate bt = b_sup(IndexSet::l2_ball(2).translated(shift), RandomFamily::gaussian(), {400000, 9});
  CHECK(std::abs(bt.value - b2.value) <= 3.0 * combined_stderr(bt, b2));
}

TEST_CASE("compare: canonical cover of B1") {
  for (Eigen::Index n : {2, 8, 32}) {
    const FunctionalReport r =
        compare(IndexSet::l1_ball(n), canonical_l1_cover(n), RandomFamily::gaussian(), config_with(100000, 2));
    CHECK(r.sandwich_ok);
    CHECK(r.upper_bound_ok);
    CHECK(r.ratio <= 4.0);
    CHECK(r.m_little.has_value());
  }
}

TEST_CASE("compare: a cover of B2 in the plane and a segment") {
  HullCover c = canonical_l1_cover(2);
  c.points *= std::sqrt(2.0);
  const FunctionalReport r = compare(IndexSet::l2_ball(2), c, RandomFamily::gaussian(), config_with(100000, 3));
  CHECK(r.upper_bound_ok);
  // segment [a, b] on a line: S = {(b - a)/2}, center (a + b)/2
  Eigen::MatrixXd ends(2, 2);
  ends << 0.2, 1.4, -0.3, 0.9;
  const IndexSet seg = IndexSet::finite(ends);
  HullCover sc;
  sc.center = 0.5 * (ends.col(0) + ends.col(1));
  sc.points = 0.5 * (ends.col(1) - ends.col(0));
  sc.provenance = Provenance::Net;
  const FunctionalReport s = compare(seg, sc, RandomFamily::gaussian(), config_with(200000, 4));
  CHECK(s.m_tilde.value <= s.b_sup->value + 3.0 * s.b_sup->std_error);
  CHECK(format_table(s).find("M~") != std::string::npos);
  CHECK(to_json(s).at("m_tilde").at("value").get<double>() == s.m_tilde.value);
}

TEST_CASE("b_sup of a stable ball is integrated, not sampled") {
  const auto fam = RandomFamily::stable(1.5);
  const Estimate b = b_sup(IndexSet::l2_ball(8).scaled(2.0), fam, {1000, 3});
  CHECK(b.std_error == 0.0);
  CHECK(b.value == doctest::Approx(2.0 * stable_l2_norm_mean(1.5, 8)));
  // the sampled estimate agrees loosely despite the heavy tail
  const Estimate mc = b_sup(IndexSet::l1_ball(1), fam, {200000, 3});
  CHECK(mc.value == doctest::Approx(fam.abs_moment(1.0)).epsilon(0.05));
}

TEST_CASE("stable scalar profile carries an exact tail") {
  const auto fam = RandomFamily::stable(1.2);
  Eigen::MatrixXd S = Eigen::MatrixXd::Identity(3, 3);
  S(0, 1) = 2.0;
  FunctionalConfig fc;
  fc.budget = {100000, 5};
  const TailSumProfile profile(S, fam, fc);
  CHECK(profile.mode() == ProfileMode::ScalarMc);
  double scale_sum = 0.0;
  for (Eigen::Index j = 0; j < S.cols(); ++j) scale_sum += *linear_form_scale(fam, S.col(j));
  const Estimate e0 = profile.estimate(0.0);
  CHECK(std::abs(e0.value - scale_sum * fam.abs_moment(1.0)) <= 4.0 * e0.std_error);
  CHECK(profile.value(0.0) == doctest::Approx(e0.value));
  // far out every term is the series
  double far = 0.0;
  for (Eigen::Index j = 0; j < S.cols(); ++j) {
    const double s = *linear_form_scale(fam, S.col(j));
    far += s * stable_tail_mean_series(1.2, 1e4 / s);
  }
  CHECK(profile.value(1e4) == doctest::Approx(far).epsilon(1e-12));
}
