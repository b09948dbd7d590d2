#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hullbound/distributions.hpp"
#include "hullbound/geometry.hpp"

namespace hullbound {

struct NetConfig {
  double separation = 0.5;
  /// Stop after this many consecutive rejected candidates.
  std::uint64_t budget = 2000;
  std::uint64_t seed = 1;
  Eigen::Index max_dim = 12;
  /// Abort (and report truncated) once the net would exceed this size; 0 = no cap.
  Eigen::Index max_points = 0;
};

struct NetResult {
  PointList points;  // columns in B_2^k
  bool truncated = false;
  std::uint64_t candidates = 0;
};

/// Greedy separated set in B_2^k: stream uniform candidates, keep those at
/// distance >= separation from every kept point. Memoized per configuration.
NetResult separated_net(Eigen::Index k, const NetConfig& config);

/// Union of per-block nets over l = ceil(n/k) consecutive coordinate blocks,
/// scaled by 2 sqrt(l) so that B_2^n ⊂ conv(S u -S).
HullCover block_cover_b2(Eigen::Index n, Eigen::Index k, const NetConfig& config);

struct RotationConfig {
  double c_log = 2.0;
  int trials = 64;
  double threshold_const = 2.0;
  std::uint64_t seed = 1;
  /// Draws shared by all trials when the selection sum needs sampling.
  std::uint64_t selection_samples = 512;
  NetConfig net;
};

struct RotationDiagnostics {
  Eigen::Index requested_block_dim = 0;
  Eigen::Index block_dim = 0;
  std::vector<double> trial_sums;
  int chosen_trial = 0;
  double achieved_sum = 0.0;
  double mean_sum = 0.0;
  double threshold = 0.0;
  std::vector<std::string> warnings;
};

struct RotationCover {
  HullCover cover;
  RotationDiagnostics diagnostics;
};

/// Block cover of B_2^n rotated by the best of `trials` Haar rotations, judged
/// by sum_i E|<X, U t_i>| 1{|<X, U t_i>| >= threshold_const sqrt(n)}.
RotationCover rotation_cover_b2(Eigen::Index n, const RandomFamily& family, const RotationConfig& config);

struct DyadicBlock {
  int k = 0;
  std::vector<Eigen::Index> indices;  // I_k
  Eigen::Index n_k = 0;
  Eigen::MatrixXd basis;              // columns u_i, i in I_k
  double c_k = 0.0;
};

struct BlockDecomposition {
  std::vector<DyadicBlock> blocks;
  Eigen::Index total_dim = 0;
  /// |a|_2 before normalization.
  double rescale = 1.0;
  double norm2_sum = 0.0;  // sum_k n_k 2^{-2k}
  double ck_sum = 0.0;     // sum_k c_k^{-2}
  bool invariants_hold() const { return norm2_sum >= 1.0 && norm2_sum < 4.0 && ck_sum <= 1.0; }
};

/// Dyadic classes I_k = {i : 2^{-k-1} < a_i <= 2^{-k}} of the normalized axis
/// lengths, with c_k = 2^{k+2} (2^k + n_k)^{-1/2}.
BlockDecomposition ellipsoid_blocks(const Eigen::VectorXd& a, const Eigen::MatrixXd& U);

/// Per-block rotation covers, placed at scale c_k 2^{-k} in span{u_i : i in I_k}.
HullCover ellipsoid_cover(const IndexSet& E, const RandomFamily& family, const RotationConfig& config);

struct LqEmbedding {
  Eigen::VectorXd d;     // diagonal of D
  IndexSet ellipsoid;    // A D B_2^n ⊃ A B_q^n
  double scale = 1.0;    // (sum_i |A e_i|^{q'})^{1/q'}
};

LqEmbedding lq_embed(const Eigen::MatrixXd& A, double q);

/// Cover of A B_q^n via the ellipsoid of lq_embed.
HullCover lq_cover(const Eigen::MatrixXd& A, double q, const RandomFamily& family, const RotationConfig& config);

struct GammaConfig {
  int max_levels = 4;
  McBudget budget;
  Eigen::Index max_points = 512;
  /// Cells at most this large are split by exhaustive search.
  Eigen::Index exhaustive_limit = 8;
};

/// Increasing partitions of a finite T, level n = 0..levels-1. Cells are
/// numbered per level; reps are column indices into `points`.
struct PartitionTree {
  PointList points;
  std::vector<std::vector<int>> cell;          // [level][point] -> cell id
  std::vector<std::vector<int>> rep;           // [level][cell] -> point index
  std::vector<std::vector<double>> diameter;   // [level][cell], under d_level

  int levels() const { return static_cast<int>(cell.size()); }
  /// Checks nesting, |A_n| <= 2^{2^n}, and rep membership.
  bool valid() const;
};

struct GammaResult {
  PartitionTree tree;
  double gamma_upper = 0.0;
};

/// d_n(s,t) = ||X_s - X_t||_{2^n} for all pairs.
Eigen::MatrixXd chaining_distances(const PointList& T, const RandomFamily& family, int level, const McBudget& budget);

/// sup_t sum_n Delta_n(A_n(t)) for a tree.
double gamma_of_tree(const PartitionTree& tree);

GammaResult gamma_partition(const PointList& T, const RandomFamily& family, const GammaConfig& config);

/// Normalized chaining increments, scaled by R = 2 sup_t sum_n d_{n+1}(pi_n t, pi_{n-1} t);
/// T - pi_0 ⊂ conv(S u -S) and T - T ⊂ conv(S u -S).
HullCover extract_cover_from_partition(const PartitionTree& tree, const RandomFamily& family, const McBudget& budget);

}  // namespace hullbound
