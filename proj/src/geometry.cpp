#include "hullbound/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hullbound/parallel.hpp"
#include "hullbound/rng.hpp"
#include "hullbound/simplex.hpp"
#include "hullbound/text.hpp"

namespace hullbound {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr Eigen::Index kDirectionChunk = 256;

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

// Column-wise l_p norm, p in [1, inf].
Eigen::VectorXd column_norms(const Eigen::MatrixXd& M, double p) {
  if (p == 1.0) return M.cwiseAbs().colwise().sum().transpose();
  if (p == 2.0) return M.colwise().norm().transpose();
  if (std::isinf(p)) return M.cwiseAbs().colwise().maxCoeff().transpose();
  return M.array().abs().pow(p).colwise().sum().pow(1.0 / p).matrix().transpose();
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& M) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    require(static_cast<Eigen::Index>(j.at(i).size()) == cols, "ragged matrix in JSON record");
    for (Eigen::Index k = 0; k < cols; ++k) M(i, k) = j.at(i).at(k).get<double>();
  }
  return M;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

nlohmann::json exponent_to_json(double q) { return std::isinf(q) ? nlohmann::json("inf") : nlohmann::json(q); }

double exponent_from_json(const nlohmann::json& j) {
  return j.is_string() ? parse_number(j.get<std::string>()) : j.get<double>();
}

void check_q(double q) { require(q >= 2.0, "l_q sets need q in [2, inf]"); }

}  // namespace

// ---------------------------------------------------------------------------
// IndexSet

IndexSet IndexSet::l1_ball(Eigen::Index n) {
  require(n >= 1, "l1_ball: n must be >= 1");
  return IndexSet(SetKind::L1Ball, n);
}

IndexSet IndexSet::l2_ball(Eigen::Index n) {
  require(n >= 1, "l2_ball: n must be >= 1");
  return IndexSet(SetKind::L2Ball, n);
}

IndexSet IndexSet::ellipsoid(Eigen::MatrixXd axes, Eigen::VectorXd lengths) {
  const Eigen::Index n = axes.rows();
  require(n >= 1 && axes.cols() == n, "ellipsoid: axes must be a square matrix");
  require(lengths.size() == n, "ellipsoid: need one length per axis");
  require((lengths.array() > 0.0).all() && lengths.allFinite(), "ellipsoid: lengths must be positive");
  const double err = (axes.transpose() * axes - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
  require(err <= 1e-10, "ellipsoid: axes are not orthonormal (error " + format_number(err) + ")");
  IndexSet T(SetKind::Ellipsoid, n);
  T.matrix_ = std::move(axes);
  T.lengths_ = std::move(lengths);
  return T;
}

IndexSet IndexSet::lq_ball(Eigen::Index n, double q) {
  require(n >= 1, "lq_ball: n must be >= 1");
  check_q(q);
  IndexSet T(SetKind::LqBall, n);
  T.q_ = q;
  return T;
}

IndexSet IndexSet::linear_image_lq(Eigen::MatrixXd A, double q) {
  require(A.rows() >= 1 && A.rows() == A.cols(), "linear_image_lq: A must be square");
  require(A.allFinite(), "linear_image_lq: A must be finite");
  check_q(q);
  IndexSet T(SetKind::LinearImageLq, A.rows());
  T.matrix_ = std::move(A);
  T.q_ = q;
  return T;
}

IndexSet IndexSet::finite(PointList points) {
  require(points.rows() >= 1 && points.cols() >= 1, "finite: need at least one point");
  require(points.allFinite(), "finite: points must be finite");
  IndexSet T(SetKind::FinitePointSet, points.rows());
  T.matrix_ = std::move(points);
  return T;
}

IndexSet IndexSet::scaled(double c) const {
  require(c > 0.0 && std::isfinite(c), "scaled: factor must be positive");
  IndexSet out = *this;
  out.radius_ *= c;
  out.offset_ *= c;
  return out;
}

IndexSet IndexSet::translated(const Eigen::VectorXd& shift) const {
  require(shift.size() == n_, "translated: dimension mismatch");
  IndexSet out = *this;
  out.offset_ += shift;
  return out;
}

double IndexSet::dual_exponent() const { return std::isinf(q_) ? 1.0 : q_ / (q_ - 1.0); }

std::string IndexSet::name() const {
  const std::string n = std::to_string(n_);
  switch (kind_) {
    case SetKind::L1Ball:
      return "l1_ball(" + n + ")";
    case SetKind::L2Ball:
      return "l2_ball(" + n + ")";
    case SetKind::Ellipsoid:
      return "ellipsoid(" + n + ")";
    case SetKind::LqBall:
      return "lq_ball(" + n + ",q=" + format_number(q_) + ")";
    case SetKind::LinearImageLq:
      return "linear_image_lq(" + n + ",q=" + format_number(q_) + ")";
    case SetKind::FinitePointSet:
      return "finite(" + n + "," + std::to_string(matrix_.cols()) + " points)";
  }
  return "?";
}

Eigen::VectorXd support_batch(const IndexSet& T, const Eigen::Ref<const Eigen::MatrixXd>& X) {
  require(X.rows() == T.dim(), "support: dimension mismatch (set " + std::to_string(T.dim()) + ", vector " +
                                   std::to_string(X.rows()) + ")");
  Eigen::VectorXd base;
  switch (T.kind()) {
    case SetKind::L1Ball:
      base = X.cwiseAbs().colwise().maxCoeff().transpose();
      break;
    case SetKind::L2Ball:
      base = X.colwise().norm().transpose();
      break;
    case SetKind::Ellipsoid:
      base = (T.lengths().asDiagonal() * (T.matrix().transpose() * X)).colwise().norm().transpose();
      break;
    case SetKind::LqBall:
      base = column_norms(X, T.dual_exponent());
      break;
    case SetKind::LinearImageLq:
      base = column_norms(T.matrix().transpose() * X, T.dual_exponent());
      break;
    case SetKind::FinitePointSet:
      base = (T.matrix().transpose() * X).colwise().maxCoeff().transpose();
      break;
  }
  return T.radius() * base + X.transpose() * T.offset();
}

double support(const IndexSet& T, const Eigen::Ref<const Eigen::VectorXd>& x) {
  require(x.size() == T.dim(), "support: dimension mismatch (set " + std::to_string(T.dim()) + ", vector " +
                                   std::to_string(x.size()) + ")");
  Eigen::MatrixXd col = x;
  return support_batch(T, col)[0];
}

Eigen::VectorXd abs_hull_support_batch(const PointList& S, const Eigen::Ref<const Eigen::MatrixXd>& D) {
  require(S.rows() == D.rows(), "abs_hull_support: dimension mismatch");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(D.cols());
  constexpr Eigen::Index block = 4096;
  for (Eigen::Index b = 0; b < S.cols(); b += block) {
    const Eigen::Index w = std::min(block, S.cols() - b);
    const Eigen::MatrixXd dots = S.middleCols(b, w).transpose() * D;
    out = out.cwiseMax(dots.cwiseAbs().colwise().maxCoeff().transpose());
  }
  return out;
}

// ---------------------------------------------------------------------------
// HullCover

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::Canonical:
      return "canonical";
    case Provenance::Net:
      return "net";
    case Provenance::BlockB2:
      return "block_b2";
    case Provenance::RotationB2:
      return "rotation_b2";
    case Provenance::EllipsoidDyadic:
      return "ellipsoid_dyadic";
    case Provenance::LqEmbed:
      return "lq_embed";
    case Provenance::GammaExtract:
      return "gamma_extract";
  }
  return "?";
}

Provenance provenance_from_string(const std::string& s) {
  for (auto p : {Provenance::Canonical, Provenance::Net, Provenance::BlockB2, Provenance::RotationB2,
                 Provenance::EllipsoidDyadic, Provenance::LqEmbed, Provenance::GammaExtract})
    if (to_string(p) == s) return p;
  throw std::invalid_argument("unknown cover provenance '" + s + "'");
}

void HullCover::validate() const {
  require(points.rows() == center.size(), "cover: center and points differ in dimension");
  require(points.cols() >= 1 || provenance == Provenance::GammaExtract, "cover: empty point list");
  require(points.allFinite() && center.allFinite(), "cover: non-finite coordinates");
  require(enumeration.empty() || enumeration.size() == static_cast<std::size_t>(points.cols()),
          "cover: enumeration length differs from point count");
}

HullCover canonical_l1_cover(Eigen::Index n) {
  require(n >= 1, "canonical_l1_cover: n must be >= 1");
  HullCover c;
  c.center = Eigen::VectorXd::Zero(n);
  c.points = Eigen::MatrixXd::Identity(n, n);
  c.provenance = Provenance::Canonical;
  c.parameters = {{"construction", "canonical_l1"}, {"n", n}};
  return c;
}

// ---------------------------------------------------------------------------
// Membership

namespace {

Membership frank_wolfe_membership(const Eigen::VectorXd& x, const PointList& S, double tol) {
  Membership out;
  const Eigen::Index N = S.cols();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(N);
  Eigen::VectorXd fit = Eigen::VectorXd::Zero(x.size());
  for (int iter = 0; iter < 20000; ++iter) {
    const Eigen::VectorXd r = fit - x;
    const Eigen::VectorXd g = S.transpose() * r;
    Eigen::Index i = 0;
    g.cwiseAbs().maxCoeff(&i);
    const double sgn = g[i] > 0.0 ? -1.0 : 1.0;
    const double gap = g.dot(w) + std::abs(g[i]);
    if (gap < tol * tol / 2.0) break;
    const Eigen::VectorXd d = sgn * S.col(i) - fit;
    const double dd = d.squaredNorm();
    if (dd == 0.0) break;
    const double step = std::clamp(-r.dot(d) / dd, 0.0, 1.0);
    w *= (1.0 - step);
    w[i] += step * sgn;
    fit += step * d;
  }
  out.weights = w;
  out.residual = (fit - x).norm();
  out.gauge = w.cwiseAbs().sum();
  out.member = out.residual <= tol;
  return out;
}

}  // namespace

Membership member_abs_hull(const Eigen::VectorXd& x, const PointList& S, double tol, Eigen::Index lp_point_limit) {
  require(tol > 0.0, "member_abs_hull: tol must be positive");
  require(x.size() == S.rows(), "member_abs_hull: dimension mismatch");
  const Eigen::Index n = S.rows();
  const Eigen::Index N = S.cols();
  Membership out;
  if (x.isZero(0.0)) {
    out.member = true;
    out.weights = Eigen::VectorXd::Zero(N);
    return out;
  }
  if (N == 0) {
    out.gauge = kInf;
    out.residual = x.norm();
    out.witness = x.normalized();
    return out;
  }
  if (N > lp_point_limit) return frank_wolfe_membership(x, S, tol);

  Eigen::MatrixXd A(n, 2 * N);
  A << S, -S;
  const LpResult lp = solve_standard_lp(A, x, Eigen::VectorXd::Ones(2 * N), 1e-11);
  if (lp.status != LpResult::Status::Optimal) {
    out.gauge = kInf;
    // Direction orthogonal to span(S): unbounded support ratio.
    const Eigen::VectorXd proj = S * S.completeOrthogonalDecomposition().solve(x);
    const Eigen::VectorXd perp = x - proj;
    out.residual = perp.norm();
    out.witness = perp.norm() > 0.0 ? Eigen::VectorXd(perp.normalized()) : Eigen::VectorXd(x.normalized());
    out.weights = Eigen::VectorXd::Zero(N);
    return out;
  }
  const Eigen::VectorXd lambda = lp.solution.head(N) - lp.solution.tail(N);
  out.gauge = lambda.cwiseAbs().sum();
  out.weights = lambda / std::max(1.0, out.gauge);
  out.residual = (S * out.weights - x).norm();
  out.member = out.residual <= tol;
  if (lp.dual.size() == n && lp.dual.norm() > 0.0) out.witness = lp.dual.normalized();
  return out;
}

// ---------------------------------------------------------------------------
// Probes and random geometry

Eigen::MatrixXd random_unit_vectors(Eigen::Index n, Eigen::Index count, std::uint64_t seed, std::uint64_t tag) {
  Eigen::MatrixXd D(n, count);
  for_each_chunk(static_cast<std::size_t>(count), kDirectionChunk,
                 [&](std::size_t c, std::size_t begin, std::size_t end) {
                   Stream s(seed, tag, c);
                   for (auto j = static_cast<Eigen::Index>(begin); j < static_cast<Eigen::Index>(end); ++j) {
                     for (Eigen::Index i = 0; i < n; ++i) D(i, j) = s.normal();
                     D.col(j).normalize();
                   }
                 });
  return D;
}

ProbeReport containment_probe(const IndexSet& T, const HullCover& cover, std::uint64_t directions,
                              std::uint64_t seed, std::size_t max_vertices) {
  require(directions >= 1, "containment_probe: need at least one direction");
  require(cover.dim() == T.dim(), "containment_probe: cover and set differ in dimension");
  const Eigen::Index n = T.dim();
  const std::uint64_t tag = tag_of("containment_probe");
  const std::size_t chunks = (directions + kDirectionChunk - 1) / kDirectionChunk;
  std::vector<double> chunk_worst(chunks, -kInf);
  std::vector<Eigen::VectorXd> chunk_witness(chunks);
  for_each_chunk(directions, kDirectionChunk, [&](std::size_t c, std::size_t begin, std::size_t end) {
    Stream s(seed, tag, c);
    Eigen::MatrixXd D(n, static_cast<Eigen::Index>(end - begin));
    for (Eigen::Index j = 0; j < D.cols(); ++j) {
      for (Eigen::Index i = 0; i < n; ++i) D(i, j) = s.normal();
      D.col(j).normalize();
    }
    const Eigen::VectorXd hT = support_batch(T, D) - D.transpose() * cover.center;
    const Eigen::VectorXd hS = abs_hull_support_batch(cover.points, D);
    for (Eigen::Index j = 0; j < D.cols(); ++j) {
      double ratio = 0.0;
      if (hS[j] > 0.0)
        ratio = hT[j] / hS[j];
      else if (hT[j] > 0.0)
        ratio = kInf;
      if (ratio > chunk_worst[c]) {
        chunk_worst[c] = ratio;
        chunk_witness[c] = D.col(j);
      }
    }
  });
  ProbeReport rep;
  rep.directions = directions;
  rep.worst_ratio = -kInf;
  for (std::size_t c = 0; c < chunks; ++c) {
    if (chunk_worst[c] > rep.worst_ratio) {
      rep.worst_ratio = chunk_worst[c];
      rep.witness = chunk_witness[c];
    }
  }

  // Exact check on extreme points where the body has finitely many.
  PointList vertices;
  if (T.kind() == SetKind::L1Ball) {
    vertices.resize(n, 2 * n);
    vertices << T.radius() * Eigen::MatrixXd::Identity(n, n), -T.radius() * Eigen::MatrixXd::Identity(n, n);
  } else if (T.kind() == SetKind::FinitePointSet) {
    vertices = T.radius() * T.matrix();
  }
  if (vertices.cols() > 0 && static_cast<std::size_t>(vertices.cols()) <= max_vertices) {
    vertices.colwise() += T.offset() - cover.center;
    for (Eigen::Index v = 0; v < vertices.cols(); ++v) {
      const Membership m = member_abs_hull(vertices.col(v), cover.points, 1e-9);
      ++rep.vertices_checked;
      rep.vertex_gauge = std::max(rep.vertex_gauge, m.gauge);
      if (m.gauge > rep.worst_ratio) {
        rep.worst_ratio = m.gauge;
        rep.witness = m.witness.size() == n ? m.witness : Eigen::VectorXd(vertices.col(v).normalized());
      }
    }
  }
  return rep;
}

Eigen::MatrixXd haar_orthogonal(Eigen::Index n, std::uint64_t seed, std::uint64_t tag) {
  require(n >= 1, "haar_orthogonal: n must be >= 1");
  Stream s(seed, tag_of("haar_orthogonal") ^ tag, 0);
  Eigen::MatrixXd G(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) G(i, j) = s.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd& R = qr.matrixQR();
  for (Eigen::Index j = 0; j < n; ++j)
    if (R(j, j) < 0.0) Q.col(j) *= -1.0;
  return Q;
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json to_json(const IndexSet& T) {
  nlohmann::json j;
  switch (T.kind()) {
    case SetKind::L1Ball:
      j["kind"] = "l1_ball";
      break;
    case SetKind::L2Ball:
      j["kind"] = "l2_ball";
      break;
    case SetKind::Ellipsoid:
      j["kind"] = "ellipsoid";
      j["axes"] = matrix_to_json(T.matrix());
      j["lengths"] = vector_to_json(T.lengths());
      break;
    case SetKind::LqBall:
      j["kind"] = "lq_ball";
      j["q"] = exponent_to_json(T.q());
      break;
    case SetKind::LinearImageLq:
      j["kind"] = "linear_image_lq";
      j["matrix"] = matrix_to_json(T.matrix());
      j["q"] = exponent_to_json(T.q());
      break;
    case SetKind::FinitePointSet:
      j["kind"] = "finite";
      j["points"] = matrix_to_json(T.matrix().transpose());
      break;
  }
  j["n"] = T.dim();
  j["radius"] = T.radius();
  j["offset"] = vector_to_json(T.offset());
  return j;
}

IndexSet index_set_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const auto n = j.contains("n") ? j.at("n").get<Eigen::Index>() : Eigen::Index{0};
  IndexSet base = IndexSet::l2_ball(1);
  if (kind == "l1_ball") {
    base = IndexSet::l1_ball(n);
  } else if (kind == "l2_ball") {
    base = IndexSet::l2_ball(n);
  } else if (kind == "ellipsoid") {
    base = IndexSet::ellipsoid(matrix_from_json(j.at("axes")), vector_from_json(j.at("lengths")));
  } else if (kind == "lq_ball") {
    base = IndexSet::lq_ball(n, exponent_from_json(j.at("q")));
  } else if (kind == "linear_image_lq") {
    base = IndexSet::linear_image_lq(matrix_from_json(j.at("matrix")), exponent_from_json(j.at("q")));
  } else if (kind == "finite") {
    base = IndexSet::finite(matrix_from_json(j.at("points")).transpose());
  } else {
    throw std::invalid_argument("unknown index set kind '" + kind + "'");
  }
  if (j.contains("radius") && j.at("radius").get<double>() != 1.0) base = base.scaled(j.at("radius").get<double>());
  if (j.contains("offset")) {
    const Eigen::VectorXd off = vector_from_json(j.at("offset"));
    if (!off.isZero(0.0)) base = base.translated(off);
  }
  return base;
}

nlohmann::json to_json(const HullCover& cover) {
  nlohmann::json j;
  j["provenance"] = to_string(cover.provenance);
  j["n"] = cover.dim();
  j["size"] = cover.size();
  j["claimed_radius"] = cover.claimed_radius;
  j["parameters"] = cover.parameters;
  j["center"] = vector_to_json(cover.center);
  j["points"] = matrix_to_json(cover.points.transpose());
  if (!cover.enumeration.empty()) j["enumeration"] = cover.enumeration;
  return j;
}

HullCover hull_cover_from_json(const nlohmann::json& j) {
  HullCover c;
  c.provenance = provenance_from_string(j.at("provenance").get<std::string>());
  c.center = vector_from_json(j.at("center"));
  const auto& pts = j.at("points");
  if (pts.empty())
    c.points = Eigen::MatrixXd(c.center.size(), 0);
  else
    c.points = matrix_from_json(pts).transpose();
  c.claimed_radius = j.value("claimed_radius", 1.0);
  c.parameters = j.value("parameters", nlohmann::json::object());
  if (j.contains("enumeration")) c.enumeration = j.at("enumeration").get<std::vector<std::int64_t>>();
  c.validate();
  return c;
}

}  // namespace hullbound
