#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hullbound/distributions.hpp"
#include "hullbound/estimate.hpp"
#include "hullbound/geometry.hpp"

namespace hullbound {

/// How tail sums over S are evaluated.
enum class ProfileMode {
  Auto,      // closed form when every summand has one, else the cheapest MC path
  Closed,    // X_t = s_t X_1 and the scalar tail mean is known
  ScalarMc,  // X_t = s_t X_1, tail mean from sorted draws of |X_1|
  MatrixMc,  // full sample matrix, Y = X S
};

struct FunctionalConfig {
  McBudget budget;
  ProfileMode mode = ProfileMode::Auto;
  int bisection_depth = 40;
  /// Geometric grid over [m~/16, 16 m~]; odd so that m~ itself is a node.
  int grid_points = 65;
  int golden_iterations = 60;
  /// Stored |<X,t>| values kept by the matrix path before the floor is raised.
  std::size_t stored_value_cap = 4'000'000;
  /// Draws per point when m_X needs sampled norms.
  std::uint64_t norm_samples = 20000;
  /// Largest |S| for which compare() also reports m_X.
  Eigen::Index little_m_limit = 512;
};

/// T(u) = sum_{t in S} E|X_t| 1{|X_t| >= u} on one fixed set of draws (common
/// random numbers for every u).
class TailSumProfile {
 public:
  TailSumProfile(const PointList& S, const RandomFamily& family, const FunctionalConfig& config);

  ProfileMode mode() const { return mode_; }
  /// T(u); u <= 0 gives the limit u -> 0+, i.e. sum_t E|X_t|.
  double value(double u) const;
  Estimate estimate(double u) const;
  /// Values below the floor are not resolved (matrix path only; 0 otherwise).
  double floor() const { return floor_; }
  /// Re-streams the draws so that T is resolved down to u. Returns false when
  /// the storage cap stops short of u.
  bool lower_floor(double u);
  std::uint64_t samples() const { return samples_; }
  std::uint64_t seed() const { return seed_; }

 private:
  void build_scalar();
  void stream_matrix(double floor);
  double value_scalar(double u) const;

  PointList S_;
  RandomFamily family_;
  ProfileMode mode_;
  std::uint64_t samples_ = 0;
  std::uint64_t seed_ = 0;
  std::size_t cap_ = 0;
  double floor_ = 0.0;
  bool capped_ = false;

  // closed / scalar paths
  Eigen::VectorXd scales_;  // s_t, sorted descending
  Eigen::VectorXd scale_prefix_;
  Eigen::VectorXd draws_;   // |X_1| sorted ascending
  Eigen::VectorXd draw_suffix_;
  /// Above this |X_1| level the scalar tail mean is exact (stable series); +inf otherwise.
  double exact_above_ = INFINITY;
  double exact_tail(double u) const;

  // matrix path
  Eigen::MatrixXd X_;                  // samples x n
  std::vector<double> stored_;         // descending
  std::vector<std::uint32_t> stored_row_;
  Eigen::VectorXd stored_prefix_;
  Eigen::VectorXd row_total_;
};

/// Root of T(m) = m by halving from m0 = T(0+) and bisection.
Estimate tilde_m(TailSumProfile& profile, const FunctionalConfig& config);
Estimate tilde_m(const PointList& S, const RandomFamily& family, const FunctionalConfig& config);

struct BigMResult {
  Estimate estimate;
  double argmin = 0.0;  // 0 means the infimum is approached as u -> 0+
  /// True when the minimizer might sit below the profile floor.
  bool floor_limited = false;
};

BigMResult big_m_detail(TailSumProfile& profile, const Estimate& m_tilde, const FunctionalConfig& config);
Estimate big_m(const PointList& S, const RandomFamily& family, const FunctionalConfig& config);

enum class OrderingMode { Heuristic, ExactSmall };

struct LittleMResult {
  Estimate estimate;
  /// ordering[i] is the column of S placed at position i + 1.
  std::vector<Eigen::Index> ordering;
};

/// m_X(S) = inf over enumerations of sup_i ||X_{t_i}||_{log(e+i)}.
LittleMResult little_m(const PointList& S, const RandomFamily& family, OrderingMode mode,
                       const FunctionalConfig& config);

/// E sup_{t in T} <t, X>.
Estimate b_sup(const IndexSet& T, const RandomFamily& family, const McBudget& budget);

struct FunctionalReport {
  Estimate m_tilde;
  Estimate m_big;
  std::optional<Estimate> m_little;
  std::optional<Estimate> b_sup;
  bool sandwich_ok = false;
  /// b_sup <= m_big within 4 combined standard errors.
  bool upper_bound_ok = true;
  double ratio = 0.0;  // m_big / b_sup
  std::size_t cover_size = 0;
  std::vector<std::string> notes;
};

bool sandwich_holds(const Estimate& m_tilde, const Estimate& m_big, double z = Estimate::kZ);

FunctionalReport compare(const IndexSet& T, const HullCover& cover, const RandomFamily& family,
                         const FunctionalConfig& config);

nlohmann::json to_json(const FunctionalReport& r);
/// Fixed-width table: functional, value, stderr, CI.
std::string format_table(const FunctionalReport& r);

}  // namespace hullbound
