#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "hullbound/geometry.hpp"
#include "hullbound/rng.hpp"

using namespace hullbound;

namespace {

Eigen::VectorXd gaussian_vector(Stream& s, Eigen::Index n) {
  Eigen::VectorXd g(n);
  for (Eigen::Index i = 0; i < n; ++i) g[i] = s.normal();
  return g;
}

double lq_norm(const Eigen::VectorXd& v, double q) {
  if (std::isinf(q)) return v.cwiseAbs().maxCoeff();
  return std::pow(v.array().abs().pow(q).sum(), 1.0 / q);
}

// Lower bound on h_T(x) from sampled boundary points of B_q^n.
double sampled_lq_support(double q, const Eigen::VectorXd& x, int draws) {
  Stream s(99, tag_of("oracle"), 0);
  double best = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < draws; ++k) {
    const Eigen::VectorXd g = gaussian_vector(s, x.size());
    best = std::max(best, g.dot(x) / lq_norm(g, q));
  }
  return best;
}

}  // namespace

TEST_CASE("support functions dominate sampled points and are attained") {
  Stream s(7, tag_of("geometry test"), 0);
  for (double q : {2.0, 3.0, 4.0, std::numeric_limits<double>::infinity()}) {
    const IndexSet T = IndexSet::lq_ball(6, q);
    for (int rep = 0; rep < 5; ++rep) {
      const Eigen::VectorXd x = gaussian_vector(s, 6);
      const double h = support(T, x);
      CHECK(h >= sampled_lq_support(q, x, 4000) - 1e-12);
      // explicit maximizer from the equality case of Hölder
      Eigen::VectorXd t(6);
      if (std::isinf(q)) {
        t = x.array().sign();
      } else {
        const double qd = q / (q - 1.0);
        t = x.array().sign() * x.array().abs().pow(qd - 1.0);
        t /= lq_norm(t, q);
      }
      CHECK(lq_norm(t, q) <= 1.0 + 1e-12);
      CHECK(t.dot(x) == doctest::Approx(h).epsilon(1e-10));
    }
  }
}

TEST_CASE("ellipsoid support matches the boundary maximizer") {
  const Eigen::MatrixXd U = haar_orthogonal(5, 3);
  Eigen::VectorXd a(5);
  a << 3.0, 1.0, 0.5, 0.25, 2.0;
  const IndexSet E = IndexSet::ellipsoid(U, a);
  Stream s(8, tag_of("geometry test"), 0);
  const Eigen::VectorXd x = gaussian_vector(s, 5);
  // t = U diag(a^2) U^T x / |diag(a) U^T x| lies on the boundary
  const Eigen::VectorXd y = a.asDiagonal() * (U.transpose() * x);
  const Eigen::VectorXd t = U * (a.asDiagonal() * y) / y.norm();
  const Eigen::VectorXd coords = (U.transpose() * t).cwiseQuotient(a);
  CHECK(coords.norm() == doctest::Approx(1.0));
  CHECK(support(E, x) == doctest::Approx(t.dot(x)));
}

TEST_CASE("scaling and translation act on the support function") {
  Stream s(9, tag_of("geometry test"), 0);
  const Eigen::VectorXd x = gaussian_vector(s, 4);
  const Eigen::VectorXd shift = gaussian_vector(s, 4);
  const IndexSet T = IndexSet::l1_ball(4).scaled(2.5).translated(shift);
  CHECK(support(T, x) == doctest::Approx(2.5 * x.cwiseAbs().maxCoeff() + shift.dot(x)));
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(4, 4);
  A(0, 1) = 0.5;
  const IndexSet L = IndexSet::linear_image_lq(A, 2.0);
  CHECK(support(L, x) == doctest::Approx((A.transpose() * x).norm()));
}

TEST_CASE("haar matrices are orthogonal and their first column looks uniform") {
  const Eigen::MatrixXd Q = haar_orthogonal(12, 5);
  CHECK((Q.transpose() * Q - Eigen::MatrixXd::Identity(12, 12)).cwiseAbs().maxCoeff() < 1e-12);
  // Q(0,0) over many seeds: mean 0, second moment 1/n
  double m1 = 0.0, m2 = 0.0;
  const int reps = 4000;
  for (int r = 0; r < reps; ++r) {
    const double v = haar_orthogonal(4, 1000 + static_cast<std::uint64_t>(r))(0, 0);
    m1 += v;
    m2 += v * v;
  }
  m1 /= reps;
  m2 /= reps;
  CHECK(std::abs(m1) < 4.0 * std::sqrt(0.25 / reps));
  CHECK(m2 == doctest::Approx(0.25).epsilon(0.05));
}

TEST_CASE("absolute hull membership on the cross-polytope") {
  const Eigen::MatrixXd S = Eigen::MatrixXd::Identity(3, 3);
  Eigen::VectorXd inside(3), outside(3);
  inside << 0.2, -0.3, 0.4;
  outside << 0.5, -0.5, 0.2;
  const Membership in = member_abs_hull(inside, S);
  CHECK(in.member);
  CHECK(in.gauge == doctest::Approx(0.9));
  CHECK((S * in.weights - inside).norm() < 1e-9);
  const Membership out = member_abs_hull(outside, S);
  CHECK_FALSE(out.member);
  CHECK(out.gauge == doctest::Approx(1.2));
  // dual witness separates: <x,y> / max|<s,y>| equals the gauge
  const double hS = (S.transpose() * out.witness).cwiseAbs().maxCoeff();
  CHECK(outside.dot(out.witness) / hS == doctest::Approx(1.2));
}

TEST_CASE("membership gauge matches an independent support oracle") {
  // gauge_K(x) = max_y <x,y> / h_K(y); check against a dense direction scan in 2D.
  Stream s(11, tag_of("geometry test"), 0);
  Eigen::MatrixXd S(2, 5);
  for (int j = 0; j < 5; ++j) S.col(j) = gaussian_vector(s, 2);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::VectorXd x = gaussian_vector(s, 2);
    double scan = 0.0;
    for (int k = 0; k < 200000; ++k) {
      const double th = M_PI * k / 200000.0;
      Eigen::Vector2d y(std::cos(th), std::sin(th));
      scan = std::max(scan, std::abs(x.dot(y)) / (S.transpose() * y).cwiseAbs().maxCoeff());
    }
    // the scan is a lower bound, off by O(step) at a kink of the ratio
    const double g = member_abs_hull(x, S).gauge;
    CHECK(g >= scan - 1e-12);
    CHECK(g == doctest::Approx(scan).epsilon(1e-4));
  }
}

TEST_CASE("points outside the span have infinite gauge") {
  Eigen::MatrixXd S(3, 1);
  S << 1.0, 0.0, 0.0;
  Eigen::VectorXd x(3);
  x << 0.1, 0.2, 0.0;
  const Membership m = member_abs_hull(x, S);
  CHECK_FALSE(m.member);
  CHECK(std::isinf(m.gauge));
  CHECK(std::abs(m.witness[0]) < 1e-12);
}

TEST_CASE("frank-wolfe fallback agrees with the LP route") {
  Stream s(12, tag_of("geometry test"), 0);
  Eigen::MatrixXd S(4, 30);
  for (int j = 0; j < 30; ++j) S.col(j) = gaussian_vector(s, 4);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(30);
  w[3] = 0.3;
  w[10] = -0.4;
  const Eigen::VectorXd x = S * w;
  CHECK(member_abs_hull(x, S, 1e-6, 100000).member);
  CHECK(member_abs_hull(x, S, 1e-6, 10).member);
  CHECK_FALSE(member_abs_hull(5.0 * x / member_abs_hull(x, S).gauge, S, 1e-6, 10).member);
}

TEST_CASE("containment probe on the canonical cover of B1") {
  const IndexSet T = IndexSet::l1_ball(8);
  const ProbeReport ok = containment_probe(T, canonical_l1_cover(8), 2000, 3);
  CHECK(ok.consistent(1e-9));
  CHECK(ok.vertices_checked == 16);
  CHECK(ok.vertex_gauge == doctest::Approx(1.0));
  const ProbeReport bad = containment_probe(T.scaled(1.5), canonical_l1_cover(8), 2000, 3);
  CHECK_FALSE(bad.consistent(1e-6));
  CHECK(bad.worst_ratio == doctest::Approx(1.5));
  // B2 is not inside B1: ratio sqrt(n) in the direction (1,...,1)
  const ProbeReport b2 = containment_probe(IndexSet::l2_ball(8), canonical_l1_cover(8), 4000, 3);
  CHECK(b2.worst_ratio > 1.5);
  CHECK(b2.worst_ratio <= std::sqrt(8.0) + 1e-9);
}

TEST_CASE("probe is reproducible for a fixed seed") {
  const IndexSet T = IndexSet::l2_ball(5);
  HullCover c = canonical_l1_cover(5);
  c.points *= 3.0;
  const auto a = containment_probe(T, c, 1000, 17);
  const auto b = containment_probe(T, c, 1000, 17);
  CHECK(a.worst_ratio == b.worst_ratio);
  CHECK(a.witness == b.witness);
}

TEST_CASE("JSON round trips") {
  const IndexSet E = IndexSet::ellipsoid(haar_orthogonal(3, 1), Eigen::Vector3d(1.0, 2.0, 0.5)).scaled(2.0);
  const IndexSet E2 = index_set_from_json(nlohmann::json::parse(to_json(E).dump()));
  CHECK(E2.kind() == SetKind::Ellipsoid);
  CHECK(E2.matrix() == E.matrix());
  CHECK(E2.radius() == E.radius());
  const IndexSet C = IndexSet::lq_ball(4, std::numeric_limits<double>::infinity());
  CHECK(std::isinf(index_set_from_json(to_json(C)).q()));
  HullCover cov = canonical_l1_cover(3);
  cov.claimed_radius = 1.0 / 3.0;
  const HullCover back = hull_cover_from_json(nlohmann::json::parse(to_json(cov).dump()));
  CHECK(back.points == cov.points);
  CHECK(back.claimed_radius == cov.claimed_radius);
  CHECK(back.provenance == Provenance::Canonical);
}

TEST_CASE("invalid inputs are rejected") {
  CHECK_THROWS_AS(IndexSet::lq_ball(3, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(IndexSet::ellipsoid(Eigen::MatrixXd::Ones(2, 2), Eigen::Vector2d(1, 1)), std::invalid_argument);
  CHECK_THROWS_AS(support(IndexSet::l2_ball(3), Eigen::VectorXd::Ones(2)), std::invalid_argument);
}
