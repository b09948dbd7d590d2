#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace hullbound {

/// Finite point list in R^n, one point per column.
using PointList = Eigen::MatrixXd;

enum class SetKind { L1Ball, L2Ball, Ellipsoid, LqBall, LinearImageLq, FinitePointSet };

/// A bounded index set T = offset + radius * Base, where Base is one of the
/// supported bodies. Every variant has an exact support function.
class IndexSet {
 public:
  static IndexSet l1_ball(Eigen::Index n);
  static IndexSet l2_ball(Eigen::Index n);
  /// {t : sum_i <t,u_i>^2 / a_i^2 <= 1} with u_i the columns of `axes`.
  static IndexSet ellipsoid(Eigen::MatrixXd axes, Eigen::VectorXd lengths);
  /// q in [2, inf]; pass INFINITY for the cube.
  static IndexSet lq_ball(Eigen::Index n, double q);
  /// A * B_q^n.
  static IndexSet linear_image_lq(Eigen::MatrixXd A, double q);
  static IndexSet finite(PointList points);

  IndexSet scaled(double c) const;
  IndexSet translated(const Eigen::VectorXd& shift) const;

  SetKind kind() const { return kind_; }
  Eigen::Index dim() const { return n_; }
  double radius() const { return radius_; }
  const Eigen::VectorXd& offset() const { return offset_; }
  double q() const { return q_; }
  /// Hölder dual of q (1 for q = inf).
  double dual_exponent() const;
  /// Ellipsoid axes / linear map A / finite points, depending on kind.
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  const Eigen::VectorXd& lengths() const { return lengths_; }

  std::string name() const;

 private:
  IndexSet(SetKind kind, Eigen::Index n) : kind_(kind), n_(n), offset_(Eigen::VectorXd::Zero(n)) {}

  SetKind kind_;
  Eigen::Index n_;
  double radius_ = 1.0;
  Eigen::VectorXd offset_;
  double q_ = 2.0;
  Eigen::MatrixXd matrix_;
  Eigen::VectorXd lengths_;
};

/// h_T(x) = sup_{t in T} <t, x>.
double support(const IndexSet& T, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Support values for every column of `directions`.
Eigen::VectorXd support_batch(const IndexSet& T, const Eigen::Ref<const Eigen::MatrixXd>& directions);

/// Support of the absolutely convex hull conv(S u -S): max_s |<s, x>| per column.
Eigen::VectorXd abs_hull_support_batch(const PointList& S, const Eigen::Ref<const Eigen::MatrixXd>& directions);

enum class Provenance { Canonical, Net, BlockB2, RotationB2, EllipsoidDyadic, LqEmbed, GammaExtract };

std::string to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

/// A center t0 and a finite point list S, scaled so that the construction's
/// containment claim T - t0 ⊂ conv(S u -S) holds with factor 1.
struct HullCover {
  Eigen::VectorXd center;
  PointList points;
  Provenance provenance = Provenance::Canonical;
  /// Factor R with T - t0 ⊂ R conv(S u -S) before rescaling.
  double claimed_radius = 1.0;
  /// Construction name, parameters and seed; enough to replay the build.
  nlohmann::json parameters = nlohmann::json::object();
  /// Index of each point in the chaining enumeration (GammaExtract only).
  std::vector<std::int64_t> enumeration;

  Eigen::Index dim() const { return points.rows(); }
  Eigen::Index size() const { return points.cols(); }
  /// Throws std::invalid_argument on an empty point list (allowed only for
  /// GammaExtract covers of singletons) or mismatched center dimension.
  void validate() const;
};

/// S = {e_1, ..., e_n}, the exact cover of B_1^n.
HullCover canonical_l1_cover(Eigen::Index n);

struct Membership {
  bool member = false;
  /// Weights with sum |w_i| <= 1 and |S w - x|_2 <= tol (when member).
  Eigen::VectorXd weights;
  /// Smallest sum |w_i| with S w = x (+inf when x is outside span S).
  double gauge = 0.0;
  double residual = 0.0;
  /// Direction y maximizing <x,y> / max_s |<s,y>| (LP route only).
  Eigen::VectorXd witness;
};

/// Decides x ∈ conv(S u -S) up to tol via the l1-minimal representation LP;
/// switches to conditional gradient above `lp_point_limit` points.
Membership member_abs_hull(const Eigen::VectorXd& x, const PointList& S, double tol = 1e-9,
                           Eigen::Index lp_point_limit = 100000);

struct ProbeReport {
  double worst_ratio = 0.0;
  Eigen::VectorXd witness;
  std::uint64_t directions = 0;
  /// Finite extreme-point check (L1 balls, finite sets): largest hull gauge.
  std::size_t vertices_checked = 0;
  double vertex_gauge = 0.0;
  bool consistent(double tol) const { return worst_ratio <= 1.0 + tol; }
};

/// Statistical falsifier for T - t0 ⊂ conv(S u -S): worst support ratio over
/// uniformly random unit directions, plus an exact check on finitely many
/// extreme points where the body has them.
ProbeReport containment_probe(const IndexSet& T, const HullCover& cover, std::uint64_t directions,
                              std::uint64_t seed, std::size_t max_vertices = 4096);

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix, diag(R) > 0).
Eigen::MatrixXd haar_orthogonal(Eigen::Index n, std::uint64_t seed, std::uint64_t tag = 0);

/// n uniformly random unit vectors (columns).
Eigen::MatrixXd random_unit_vectors(Eigen::Index n, Eigen::Index count, std::uint64_t seed, std::uint64_t tag);

// JSON records.
nlohmann::json to_json(const IndexSet& T);
IndexSet index_set_from_json(const nlohmann::json& j);
nlohmann::json to_json(const HullCover& cover);
HullCover hull_cover_from_json(const nlohmann::json& j);

}  // namespace hullbound
