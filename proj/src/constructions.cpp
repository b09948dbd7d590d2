#include "hullbound/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

#include "hullbound/functionals.hpp"
#include "hullbound/rng.hpp"
#include "hullbound/text.hpp"

namespace hullbound {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

// N_n = 2^{2^n}, saturated.
std::uint64_t level_budget(int n) {
  if (n >= 6) return std::numeric_limits<std::uint64_t>::max();
  return std::uint64_t{1} << (std::uint64_t{1} << n);
}

NetResult build_net(Eigen::Index k, const NetConfig& cfg) {
  NetResult out;
  Stream s(cfg.seed, tag_of("separated_net"), static_cast<std::uint64_t>(k));
  const double sep2 = cfg.separation * cfg.separation;
  Eigen::MatrixXd P(k, 64);
  Eigen::Index m = 0;
  Eigen::VectorXd c(k);
  std::uint64_t rejected = 0;
  while (rejected < cfg.budget) {
    // uniform in the ball: Gaussian direction, radius U^{1/k}
    for (Eigen::Index i = 0; i < k; ++i) c[i] = s.normal();
    c *= std::pow(s.uniform(), 1.0 / static_cast<double>(k)) / c.norm();
    ++out.candidates;
    const bool accept = m == 0 || (P.leftCols(m).colwise() - c).colwise().squaredNorm().minCoeff() >= sep2;
    if (!accept) {
      ++rejected;
      continue;
    }
    rejected = 0;
    if (m == P.cols()) P.conservativeResize(Eigen::NoChange, 2 * m);
    P.col(m++) = c;
    if (cfg.max_points > 0 && m > cfg.max_points) {
      out.truncated = true;
      break;
    }
  }
  out.points = P.leftCols(m);
  return out;
}

}  // namespace

NetResult separated_net(Eigen::Index k, const NetConfig& config) {
  require(k >= 1, "separated_net: k must be >= 1");
  require(k <= config.max_dim, "separated_net: k = " + std::to_string(k) + " exceeds the 5^k budget limit (" +
                                   std::to_string(config.max_dim) + ")");
  require(config.separation > 0.0 && config.separation <= 2.0, "separated_net: separation must lie in (0, 2]");
  require(config.budget >= 1, "separated_net: rejection budget must be >= 1");
  using Key = std::tuple<Eigen::Index, double, std::uint64_t, std::uint64_t, Eigen::Index>;
  static std::mutex mutex;
  static std::map<Key, NetResult> cache;
  const Key key{k, config.separation, config.budget, config.seed, config.max_points};
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  NetResult net = build_net(k, config);
  std::lock_guard lock(mutex);
  return cache.emplace(key, std::move(net)).first->second;
}

HullCover block_cover_b2(Eigen::Index n, Eigen::Index k, const NetConfig& config) {
  require(n >= 1 && k >= 1 && k <= n, "block_cover_b2: need 1 <= k <= n");
  const Eigen::Index l = (n + k - 1) / k;
  std::vector<PointList> nets;
  Eigen::Index total = 0;
  for (Eigen::Index b = 0; b < l; ++b) {
    const Eigen::Index dim = std::min(k, n - b * k);
    const NetResult net = separated_net(dim, config);
    require(!net.truncated, "block_cover_b2: net in dimension " + std::to_string(dim) + " was truncated");
    nets.push_back(net.points);
    total += net.points.cols();
  }
  const double radius = 2.0 * std::sqrt(static_cast<double>(l));
  HullCover c;
  c.center = Eigen::VectorXd::Zero(n);
  c.points = Eigen::MatrixXd::Zero(n, total);
  Eigen::Index col = 0;
  for (Eigen::Index b = 0; b < l; ++b) {
    const auto& P = nets[static_cast<std::size_t>(b)];
    c.points.block(b * k, col, P.rows(), P.cols()) = radius * P;
    col += P.cols();
  }
  c.provenance = Provenance::BlockB2;
  c.claimed_radius = radius;
  c.parameters = {{"construction", "block_b2"},   {"n", n},
                  {"k", k},                       {"blocks", l},
                  {"separation", config.separation}, {"net_budget", config.budget},
                  {"seed", config.seed}};
  return c;
}

// ---------------------------------------------------------------------------
// Rotation-optimized cover

namespace {

double selection_sum(const PointList& P, const RandomFamily& family, double threshold, const RotationConfig& cfg,
                     const Eigen::MatrixXd* shared_draws) {
  if (!shared_draws) {
    FunctionalConfig fc;
    fc.budget = {cfg.selection_samples, cfg.seed};
    return TailSumProfile(P, family, fc).value(threshold);
  }
  const Eigen::MatrixXd& X = *shared_draws;
  double sum = 0.0;
  constexpr Eigen::Index block = 4096;
  for (Eigen::Index c0 = 0; c0 < P.cols(); c0 += block) {
    const Eigen::Index w = std::min(block, P.cols() - c0);
    const Eigen::ArrayXXd Y = (X * P.middleCols(c0, w)).array().abs();
    sum += (Y >= threshold).select(Y, 0.0).sum();
  }
  return sum / static_cast<double>(X.rows());
}

}  // namespace

RotationCover rotation_cover_b2(Eigen::Index n, const RandomFamily& family, const RotationConfig& config) {
  require(n >= 1, "rotation_cover_b2: n must be >= 1");
  require(config.trials >= 1, "rotation_cover_b2: trials must be >= 1");
  require(config.c_log > 0.0, "rotation_cover_b2: c_log must be positive");
  RotationCover out;
  auto& diag = out.diagnostics;
  if (!family.satisfies_four_plus_moment())
    diag.warnings.push_back(family.name() + " has no finite moment of order > 4; the size bound on M is not expected");

  const double nn = static_cast<double>(n);
  diag.requested_block_dim =
      std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::ceil(config.c_log * std::log(nn))), 1, n);
  // Largest block dimension up to the requested one whose cover stays within 10 n^2 points.
  const auto cap = static_cast<Eigen::Index>(10 * n * n);
  Eigen::Index k = 1;
  for (Eigen::Index kk = 1; kk <= diag.requested_block_dim; ++kk) {
    NetConfig nc = config.net;
    nc.max_points = cap;
    const Eigen::Index l = (n + kk - 1) / kk;
    Eigen::Index size = 0;
    bool fits = true;
    for (Eigen::Index b = 0; b < l && fits; ++b) {
      const NetResult net = separated_net(std::min(kk, n - b * kk), nc);
      size += net.points.cols();
      fits = !net.truncated && size <= cap;
    }
    if (!fits) break;
    k = kk;
  }
  diag.block_dim = k;
  if (k < diag.requested_block_dim)
    diag.warnings.push_back("block dimension lowered from " + std::to_string(diag.requested_block_dim) + " to " +
                            std::to_string(k) + " to keep |S| <= 10 n^2");
  NetConfig nc = config.net;
  nc.max_points = cap;
  const HullCover base = block_cover_b2(n, k, nc);

  diag.threshold = config.threshold_const * std::sqrt(nn) * family.unit_scale();
  // Gaussian and stable laws reduce to scalar tail sums; others share one draw matrix.
  const bool scalar = family.kind() == FamilyKind::Gaussian || family.kind() == FamilyKind::SymmetricStable;
  Eigen::MatrixXd draws;
  if (!scalar)
    draws = sample_matrix(family, n, static_cast<Eigen::Index>(config.selection_samples), config.seed,
                          tag_of("rotation_selection"));
  double best = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd best_U;
  for (int r = 0; r < config.trials; ++r) {
    const Eigen::MatrixXd U = haar_orthogonal(n, config.seed, static_cast<std::uint64_t>(r));
    const double s = selection_sum(U * base.points, family, diag.threshold, config, scalar ? nullptr : &draws);
    diag.trial_sums.push_back(s);
    if (s < best) {
      best = s;
      best_U = U;
      diag.chosen_trial = r;
    }
  }
  diag.achieved_sum = best;
  double mean = 0.0;
  for (double s : diag.trial_sums) mean += s;
  diag.mean_sum = mean / static_cast<double>(diag.trial_sums.size());

  out.cover = base;
  out.cover.points = best_U * base.points;
  out.cover.provenance = Provenance::RotationB2;
  out.cover.parameters = {{"construction", "rotation_b2"},
                          {"n", n},
                          {"family", family.record()},
                          {"c_log", config.c_log},
                          {"requested_block_dim", diag.requested_block_dim},
                          {"block_dim", k},
                          {"trials", config.trials},
                          {"chosen_trial", diag.chosen_trial},
                          {"threshold_const", config.threshold_const},
                          {"selection_samples", config.selection_samples},
                          {"separation", config.net.separation},
                          {"net_budget", config.net.budget},
                          {"seed", config.seed}};
  return out;
}

// ---------------------------------------------------------------------------
// Ellipsoids

BlockDecomposition ellipsoid_blocks(const Eigen::VectorXd& a, const Eigen::MatrixXd& U) {
  require(a.size() >= 1 && U.rows() == U.cols() && U.cols() == a.size(), "ellipsoid_blocks: shape mismatch");
  require((a.array() >= 0.0).all() && a.allFinite(), "ellipsoid_blocks: lengths must be nonnegative and finite");
  const double norm = a.norm();
  require(norm > 0.0, "ellipsoid_blocks: zero length vector");
  BlockDecomposition d;
  d.total_dim = a.size();
  d.rescale = norm;
  std::map<int, std::vector<Eigen::Index>> classes;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) continue;  // no contribution to the support function
    const double v = a[i] / norm;
    int e = 0;
    const double m = std::frexp(v, &e);  // v = m 2^e, m in [1/2, 1)
    // v in (2^{-k-1}, 2^{-k}]
    const int k = m == 0.5 ? 1 - e : -e;
    classes[k].push_back(i);
  }
  for (auto& [k, idx] : classes) {
    DyadicBlock b;
    b.k = k;
    b.indices = idx;
    b.n_k = static_cast<Eigen::Index>(idx.size());
    b.basis.resize(U.rows(), b.n_k);
    for (Eigen::Index j = 0; j < b.n_k; ++j) b.basis.col(j) = U.col(idx[static_cast<std::size_t>(j)]);
    b.c_k = std::ldexp(1.0, k + 2) / std::sqrt(std::ldexp(1.0, k) + static_cast<double>(b.n_k));
    d.norm2_sum += static_cast<double>(b.n_k) * std::ldexp(1.0, -2 * k);
    d.ck_sum += 1.0 / (b.c_k * b.c_k);
    d.blocks.push_back(std::move(b));
  }
  return d;
}

HullCover ellipsoid_cover(const IndexSet& E, const RandomFamily& family, const RotationConfig& config) {
  require(E.kind() == SetKind::Ellipsoid, "ellipsoid_cover: index set is not an ellipsoid");
  const Eigen::VectorXd a = E.radius() * E.lengths();
  const BlockDecomposition dec = ellipsoid_blocks(a, E.matrix());
  require(dec.invariants_hold(), "ellipsoid_cover: dyadic decomposition invariants fail");
  std::vector<Eigen::MatrixXd> parts;
  nlohmann::json blocks = nlohmann::json::array();
  Eigen::Index total = 0;
  for (const auto& b : dec.blocks) {
    RotationConfig rc = config;
    rc.seed = mix64(config.seed ^ (static_cast<std::uint64_t>(b.k) + 0x9e3779b97f4a7c15ULL));
    const RotationCover cov = rotation_cover_b2(b.n_k, family, rc);
    const double scale = dec.rescale * b.c_k * std::ldexp(1.0, -b.k);
    parts.push_back(scale * (b.basis * cov.cover.points));
    total += cov.cover.size();
    blocks.push_back({{"k", b.k},
                      {"n_k", b.n_k},
                      {"c_k", b.c_k},
                      {"block_dim", cov.diagnostics.block_dim},
                      {"chosen_trial", cov.diagnostics.chosen_trial},
                      {"size", cov.cover.size()}});
  }
  HullCover c;
  c.center = E.offset();
  c.points.resize(E.dim(), total);
  Eigen::Index col = 0;
  for (const auto& p : parts) {
    c.points.middleCols(col, p.cols()) = p;
    col += p.cols();
  }
  c.provenance = Provenance::EllipsoidDyadic;
  c.claimed_radius = dec.rescale;
  c.parameters = {{"construction", "ellipsoid_dyadic"},
                  {"n", E.dim()},
                  {"family", family.record()},
                  {"rescale", dec.rescale},
                  {"norm2_sum", dec.norm2_sum},
                  {"ck_sum", dec.ck_sum},
                  {"blocks", blocks},
                  {"trials", config.trials},
                  {"c_log", config.c_log},
                  {"threshold_const", config.threshold_const},
                  {"seed", config.seed}};
  return c;
}

LqEmbedding lq_embed(const Eigen::MatrixXd& A, double q) {
  require(q >= 2.0, "lq_embed: q must be >= 2 (1 < q < 2 is not covered)");
  require(A.rows() >= 1 && A.rows() == A.cols() && A.allFinite(), "lq_embed: A must be a finite square matrix");
  const double qd = std::isinf(q) ? 1.0 : q / (q - 1.0);
  const Eigen::VectorXd cols = A.colwise().norm().transpose();
  require((cols.array() > 0.0).all(), "lq_embed: A has a zero column");
  const double scale = std::pow(cols.array().pow(qd).sum(), 1.0 / qd);
  LqEmbedding out{(cols / scale).array().pow(qd / 2.0 - 1.0).matrix(), IndexSet::l2_ball(A.rows()), scale};
  const Eigen::MatrixXd AD = A * out.d.asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(AD, Eigen::ComputeFullU);
  const Eigen::VectorXd& sv = svd.singularValues();
  require(sv.minCoeff() > 1e-12 * sv.maxCoeff(), "lq_embed: A is singular");
  out.ellipsoid = IndexSet::ellipsoid(svd.matrixU(), sv);
  return out;
}

HullCover lq_cover(const Eigen::MatrixXd& A, double q, const RandomFamily& family, const RotationConfig& config) {
  const LqEmbedding emb = lq_embed(A, q);
  HullCover c = ellipsoid_cover(emb.ellipsoid, family, config);
  c.provenance = Provenance::LqEmbed;
  c.parameters["construction"] = "lq_embed";
  c.parameters["q"] = std::isinf(q) ? nlohmann::json("inf") : nlohmann::json(q);
  c.parameters["column_scale"] = emb.scale;
  c.parameters["d"] = std::vector<double>(emb.d.data(), emb.d.data() + emb.d.size());
  return c;
}

// ---------------------------------------------------------------------------
// Chaining partitions

namespace {

double chaining_norm(const RandomFamily& family, const Eigen::VectorXd& v, double p, const McBudget& budget) {
  if (v.isZero(0.0)) return 0.0;
  return lp_norm_linear(family, v, p, budget).value;
}

double cell_diameter(const std::vector<int>& members, const Eigen::MatrixXd& D) {
  double d = 0.0;
  for (std::size_t i = 0; i < members.size(); ++i)
    for (std::size_t j = i + 1; j < members.size(); ++j) d = std::max(d, D(members[i], members[j]));
  return d;
}

struct Split {
  std::vector<std::vector<int>> groups;
  std::vector<int> reps;
};

// Partition `members` into at most m groups.
Split split_cell(const std::vector<int>& members, std::uint64_t m, const Eigen::MatrixXd& D, int parent_rep,
                 std::size_t exhaustive_limit) {
  Split out;
  const std::size_t size = members.size();
  if (size <= m) {
    for (int p : members) {
      out.groups.push_back({p});
      out.reps.push_back(p);
    }
    return out;
  }
  if (size <= exhaustive_limit) {
    // restricted growth strings with at most m blocks; minimize the largest diameter
    std::vector<int> code(size, 0), max_prefix(size, 0), best;
    double best_cost = std::numeric_limits<double>::infinity();
    while (true) {
      int blocks = 0;
      for (int c : code) blocks = std::max(blocks, c + 1);
      if (static_cast<std::uint64_t>(blocks) <= m) {
        double cost = 0.0;
        for (std::size_t i = 0; i < size && cost < best_cost; ++i)
          for (std::size_t j = i + 1; j < size; ++j)
            if (code[i] == code[j]) cost = std::max(cost, D(members[i], members[j]));
        if (cost < best_cost) {
          best_cost = cost;
          best = code;
        }
      }
      // next restricted growth string
      std::size_t i = size - 1;
      while (i > 0 && code[i] == max_prefix[i - 1] + 1) --i;
      if (i == 0) break;
      ++code[i];
      for (std::size_t j = i + 1; j < size; ++j) code[j] = 0;
      for (std::size_t j = i; j < size; ++j) max_prefix[j] = std::max(max_prefix[j - 1], code[j]);
    }
    int blocks = 0;
    for (int c : best) blocks = std::max(blocks, c + 1);
    out.groups.assign(static_cast<std::size_t>(blocks), {});
    for (std::size_t i = 0; i < size; ++i) out.groups[static_cast<std::size_t>(best[i])].push_back(members[i]);
    for (const auto& g : out.groups)
      out.reps.push_back(std::find(g.begin(), g.end(), parent_rep) != g.end() ? parent_rep : g.front());
    return out;
  }
  // farthest-point centers, starting from the parent's representative
  std::vector<int> centers{parent_rep};
  std::vector<double> nearest(size);
  for (std::size_t i = 0; i < size; ++i) nearest[i] = D(members[i], parent_rep);
  while (centers.size() < m) {
    const auto it = std::max_element(nearest.begin(), nearest.end());
    if (*it <= 0.0) break;
    const int c = members[static_cast<std::size_t>(it - nearest.begin())];
    centers.push_back(c);
    for (std::size_t i = 0; i < size; ++i) nearest[i] = std::min(nearest[i], D(members[i], c));
  }
  out.groups.assign(centers.size(), {});
  for (int p : members) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < centers.size(); ++c)
      if (D(p, centers[c]) < D(p, centers[best])) best = c;
    out.groups[best].push_back(p);
  }
  out.reps = centers;
  return out;
}

}  // namespace

Eigen::MatrixXd chaining_distances(const PointList& T, const RandomFamily& family, int level, const McBudget& budget) {
  const double p = std::ldexp(1.0, level);
  if (!family.moment_finite(p))
    throw InfiniteMomentError(family.name() + " has no finite moment of order " + format_number(p) +
                              " needed at chaining level " + std::to_string(level));
  const Eigen::Index N = T.cols();
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(N, N);
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = i + 1; j < N; ++j) D(i, j) = D(j, i) = chaining_norm(family, T.col(i) - T.col(j), p, budget);
  return D;
}

bool PartitionTree::valid() const {
  const auto N = static_cast<std::size_t>(points.cols());
  if (cell.empty() || cell.size() != rep.size() || cell.size() != diameter.size()) return false;
  for (std::size_t n = 0; n < cell.size(); ++n) {
    if (cell[n].size() != N) return false;
    const std::size_t cells = rep[n].size();
    if (n == 0 && cells != 1) return false;
    if (cells > level_budget(static_cast<int>(n))) return false;
    for (std::size_t c = 0; c < cells; ++c)
      if (cell[n][static_cast<std::size_t>(rep[n][c])] != static_cast<int>(c)) return false;
    if (n == 0) continue;
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j)
        if (cell[n][i] == cell[n][j] && cell[n - 1][i] != cell[n - 1][j]) return false;
  }
  return true;
}

double gamma_of_tree(const PartitionTree& tree) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < tree.points.cols(); ++i) {
    double s = 0.0;
    for (int n = 0; n < tree.levels(); ++n)
      s += tree.diameter[static_cast<std::size_t>(n)][static_cast<std::size_t>(tree.cell[static_cast<std::size_t>(n)][static_cast<std::size_t>(i)])];
    best = std::max(best, s);
  }
  return best;
}

GammaResult gamma_partition(const PointList& T, const RandomFamily& family, const GammaConfig& config) {
  const Eigen::Index N = T.cols();
  require(N >= 1 && N <= config.max_points,
          "gamma_partition: |T| must lie in [1, " + std::to_string(config.max_points) + "]");
  require(config.max_levels >= 1, "gamma_partition: max_levels must be >= 1");
  require(level_budget(config.max_levels) >= static_cast<std::uint64_t>(N),
          "gamma_partition: " + std::to_string(config.max_levels) + " levels cannot reach singletons for |T| = " +
              std::to_string(N));
  GammaResult out;
  PartitionTree& tree = out.tree;
  tree.points = T;
  const auto n_pts = static_cast<std::size_t>(N);
  std::vector<int> all(n_pts);
  for (std::size_t i = 0; i < n_pts; ++i) all[i] = static_cast<int>(i);

  // level 0: one cell, represented by a 1-center under d_0
  Eigen::MatrixXd D = N > 1 ? chaining_distances(T, family, 0, config.budget) : Eigen::MatrixXd::Zero(1, 1);
  Eigen::Index center = 0;
  D.rowwise().maxCoeff().minCoeff(&center);
  tree.cell.push_back(std::vector<int>(n_pts, 0));
  tree.rep.push_back({static_cast<int>(center)});
  tree.diameter.push_back({cell_diameter(all, D)});

  for (int n = 1; n <= config.max_levels; ++n) {
    const auto& prev_cell = tree.cell.back();
    const auto& prev_rep = tree.rep.back();
    const std::size_t parents = prev_rep.size();
    const bool singletons = level_budget(n) >= static_cast<std::uint64_t>(N) || parents == n_pts;
    std::vector<int> cell(n_pts, -1);
    std::vector<int> reps;
    std::vector<double> diam;
    if (singletons) {
      for (std::size_t i = 0; i < n_pts; ++i) {
        cell[i] = static_cast<int>(i);
        reps.push_back(static_cast<int>(i));
        diam.push_back(0.0);
      }
    } else {
      D = chaining_distances(T, family, n, config.budget);
      std::vector<std::vector<int>> members(parents);
      for (std::size_t i = 0; i < n_pts; ++i) members[static_cast<std::size_t>(prev_cell[i])].push_back(static_cast<int>(i));
      // equal shares of N_n, leftovers to the widest parents
      std::vector<std::uint64_t> share(parents, level_budget(n) / parents);
      std::vector<std::size_t> order(parents);
      for (std::size_t c = 0; c < parents; ++c) order[c] = c;
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return tree.diameter.back()[a] > tree.diameter.back()[b];
      });
      for (std::uint64_t r = 0; r < level_budget(n) % parents; ++r) ++share[order[r]];
      for (std::size_t c = 0; c < parents; ++c) {
        const Split sp = split_cell(members[c], share[c], D, prev_rep[c],
                                    static_cast<std::size_t>(config.exhaustive_limit));
        for (std::size_t g = 0; g < sp.groups.size(); ++g) {
          const int id = static_cast<int>(reps.size());
          for (int p : sp.groups[g]) cell[static_cast<std::size_t>(p)] = id;
          reps.push_back(sp.reps[g]);
          diam.push_back(cell_diameter(sp.groups[g], D));
        }
      }
    }
    tree.cell.push_back(std::move(cell));
    tree.rep.push_back(std::move(reps));
    tree.diameter.push_back(std::move(diam));
  }
  out.gamma_upper = gamma_of_tree(tree);
  return out;
}

HullCover extract_cover_from_partition(const PartitionTree& tree, const RandomFamily& family, const McBudget& budget) {
  require(tree.valid(), "extract_cover: invalid partition tree");
  const Eigen::Index N = tree.points.cols();
  const int L = tree.levels();
  const auto& last = tree.cell.back();
  for (Eigen::Index i = 0; i < N; ++i)
    require(std::count(last.begin(), last.end(), last[static_cast<std::size_t>(i)]) == 1,
            "extract_cover: last level must consist of singletons");

  HullCover c;
  c.provenance = Provenance::GammaExtract;
  c.center = tree.points.col(tree.rep[0][0]);
  std::vector<Eigen::VectorXd> dirs;
  std::vector<double> path(static_cast<std::size_t>(N), 0.0);
  std::uint64_t block_start = 0;  // M_{n-1}
  for (int n = 1; n < L; ++n) {
    const double p = std::ldexp(1.0, n + 1);
    std::map<std::pair<int, int>, std::pair<std::int64_t, double>> seen;  // (pi_{n-1}, pi_n) -> (index, norm)
    std::int64_t next = 0;
    for (Eigen::Index t = 0; t < N; ++t) {
      const auto ti = static_cast<std::size_t>(t);
      const int a = tree.rep[static_cast<std::size_t>(n - 1)][static_cast<std::size_t>(tree.cell[static_cast<std::size_t>(n - 1)][ti])];
      const int b = tree.rep[static_cast<std::size_t>(n)][static_cast<std::size_t>(tree.cell[static_cast<std::size_t>(n)][ti])];
      if (a == b) continue;
      auto it = seen.find({a, b});
      if (it == seen.end()) {
        const Eigen::VectorXd v = tree.points.col(b) - tree.points.col(a);
        const double nu = chaining_norm(family, v, p, budget);
        std::int64_t idx = -1;
        if (nu > 0.0) {
          idx = static_cast<std::int64_t>(block_start) + next++;
          dirs.push_back(v / nu);
          c.enumeration.push_back(idx);
        }
        it = seen.emplace(std::pair{a, b}, std::pair{idx, nu}).first;
      }
      path[ti] += it->second.second;
    }
    block_start += level_budget(n);
  }
  const double R = 2.0 * (N > 0 ? *std::max_element(path.begin(), path.end()) : 0.0);
  c.points.resize(tree.points.rows(), static_cast<Eigen::Index>(dirs.size()));
  for (std::size_t j = 0; j < dirs.size(); ++j) c.points.col(static_cast<Eigen::Index>(j)) = R * dirs[j];
  c.claimed_radius = R;
  c.parameters = {{"construction", "gamma_extract"}, {"levels", L},       {"family", family.record()},
                  {"R", R},                          {"points", N},       {"seed", budget.seed}};
  return c;
}

}  // namespace hullbound
