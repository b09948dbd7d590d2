#include "hullbound/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "hullbound/parallel.hpp"
#include "hullbound/text.hpp"

namespace hullbound {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

Estimate sample_mean(double sum, double sum_sq, std::uint64_t count, std::uint64_t seed) {
  const double n = static_cast<double>(count);
  const double mean = sum / n;
  const double var = std::max(0.0, sum_sq / n - mean * mean) * n / std::max(1.0, n - 1.0);
  return {mean, std::sqrt(var / n), count, seed};
}

// Index of the first element < u in a descending range.
template <typename It>
std::size_t count_at_least(It begin, It end, double u) {
  return static_cast<std::size_t>(std::partition_point(begin, end, [u](double v) { return v >= u; }) - begin);
}

}  // namespace

// ---------------------------------------------------------------------------
// TailSumProfile

TailSumProfile::TailSumProfile(const PointList& S, const RandomFamily& family, const FunctionalConfig& config)
    : S_(S), family_(family), mode_(config.mode), seed_(config.budget.seed), cap_(config.stored_value_cap) {
  require(S.cols() >= 1, "tail sums need a nonempty point list");
  require(S.allFinite(), "tail sums need finite points");
  if (!family.mean_finite())
    throw InfiniteMomentError(family.name() + " has no finite first moment; the tail sum diverges");

  std::vector<double> scales;
  bool all_scaled = true;
  for (Eigen::Index j = 0; j < S.cols() && all_scaled; ++j) {
    if (auto s = linear_form_scale(family, S.col(j)))
      scales.push_back(*s);
    else
      all_scaled = false;
  }
  const bool closed_ok = all_scaled && family.scalar_truncated_mean(1.0).has_value();
  if (mode_ == ProfileMode::Auto)
    mode_ = closed_ok ? ProfileMode::Closed : all_scaled ? ProfileMode::ScalarMc : ProfileMode::MatrixMc;
  require(mode_ != ProfileMode::Closed || closed_ok, "no closed form for these tail sums");
  require(mode_ != ProfileMode::ScalarMc || all_scaled, "the scalar path needs X_t = s_t X_1 for every t");

  if (mode_ == ProfileMode::Closed || mode_ == ProfileMode::ScalarMc) {
    std::sort(scales.begin(), scales.end(), std::greater<>());
    scales_ = Eigen::Map<Eigen::VectorXd>(scales.data(), static_cast<Eigen::Index>(scales.size()));
    scale_prefix_.resize(scales_.size() + 1);
    scale_prefix_[0] = 0.0;
    for (Eigen::Index i = 0; i < scales_.size(); ++i) scale_prefix_[i + 1] = scale_prefix_[i] + scales_[i];
  }
  if (mode_ == ProfileMode::ScalarMc) {
    samples_ = config.budget.samples;
    build_scalar();
  }
  if (mode_ == ProfileMode::MatrixMc) {
    samples_ = config.budget.samples;
    require(samples_ >= 2 && samples_ <= 0xffffffffULL, "matrix tail sums need 2 <= samples < 2^32");
    X_ = sample_matrix(family, S.rows(), static_cast<Eigen::Index>(samples_), seed_, tag_of("tail_profile/matrix"));

    // Pilot on a few rows to place the first floor well below the root.
    const Eigen::Index pilot_rows =
        std::clamp<Eigen::Index>(static_cast<Eigen::Index>(cap_ / 4) / S.cols(), 16, 1024);
    const Eigen::Index rows = std::min<Eigen::Index>(pilot_rows, X_.rows());
    const Eigen::MatrixXd Y = (X_.topRows(rows) * S).cwiseAbs();
    std::vector<double> v(Y.data(), Y.data() + Y.size());
    std::sort(v.begin(), v.end(), std::greater<>());
    double acc = 0.0, root = 0.0;
    for (double x : v) {
      // T_pilot(x) >= x at the largest x where the running tail sum catches up
      acc += x / static_cast<double>(rows);
      if (acc >= x) {
        root = x;
        break;
      }
    }
    stream_matrix(root / 32.0);
  }
}

void TailSumProfile::build_scalar() {
  require(samples_ >= 2, "scalar tail sums need at least two samples");
  draws_ = sample_abs_scalar(family_, static_cast<Eigen::Index>(samples_), seed_, tag_of("tail_profile/scalar"));
  std::sort(draws_.data(), draws_.data() + draws_.size());
  // stable tails are heavy enough that the top draws carry most of the sum
  if (family_.kind() == FamilyKind::SymmetricStable) exact_above_ = kStableSeriesFrom;
  draw_suffix_.resize(draws_.size() + 1);
  draw_suffix_[draws_.size()] = 0.0;
  for (Eigen::Index k = draws_.size(); k-- > 0;) draw_suffix_[k] = draw_suffix_[k + 1] + draws_[k];
}

double TailSumProfile::value_scalar(double u) const {
  const double n = static_cast<double>(draws_.size());
  const auto end = std::lower_bound(draws_.data(), draws_.data() + draws_.size(), exact_above_) - draws_.data();
  double total = 0.0;
  for (Eigen::Index i = 0; i < scales_.size(); ++i) {
    const double s = scales_[i];
    if (s == 0.0) break;
    const double v = u / s;
    const auto k = std::lower_bound(draws_.data(), draws_.data() + draws_.size(), v) - draws_.data();
    if (k < end) total += s * (draw_suffix_[k] - draw_suffix_[end]);
  }
  return total / n + exact_tail(u);
}

double TailSumProfile::exact_tail(double u) const {
  if (!std::isfinite(exact_above_)) return 0.0;
  const double p = family_.parameter();
  double total = 0.0;
  for (Eigen::Index i = 0; i < scales_.size(); ++i) {
    const double s = scales_[i];
    if (s == 0.0) break;
    total += s * stable_tail_mean_series(p, std::max(u / s, exact_above_));
  }
  return total;
}

void TailSumProfile::stream_matrix(double floor) {
  floor_ = std::max(floor, 0.0);
  capped_ = false;
  stored_.clear();
  stored_row_.clear();
  row_total_ = Eigen::VectorXd::Zero(X_.rows());
  const Eigen::Index N = S_.cols();
  const Eigen::Index col_block = std::max<Eigen::Index>(1, (1 << 22) / kChunkRows);

  auto shrink = [&] {
    // Keep the largest half and raise the floor to the smallest kept value.
    const std::size_t keep = cap_ / 2;
    std::vector<std::size_t> idx(stored_.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(keep), idx.end(),
                     [&](std::size_t a, std::size_t b) { return stored_[a] > stored_[b]; });
    floor_ = stored_[idx[keep]];
    std::vector<double> v;
    std::vector<std::uint32_t> r;
    v.reserve(keep);
    r.reserve(keep);
    for (std::size_t i = 0; i < stored_.size(); ++i)
      if (stored_[i] > floor_) {
        v.push_back(stored_[i]);
        r.push_back(stored_row_[i]);
      }
    // strictly above: values equal to the new floor would be partially kept
    floor_ = std::nextafter(floor_, INFINITY);
    stored_.swap(v);
    stored_row_.swap(r);
    capped_ = true;
  };

  for (Eigen::Index r0 = 0; r0 < X_.rows(); r0 += kChunkRows) {
    const Eigen::Index rows = std::min<Eigen::Index>(kChunkRows, X_.rows() - r0);
    for (Eigen::Index c0 = 0; c0 < N; c0 += col_block) {
      const Eigen::Index cols = std::min(col_block, N - c0);
      const Eigen::MatrixXd Y = (X_.middleRows(r0, rows) * S_.middleCols(c0, cols)).cwiseAbs();
      row_total_.segment(r0, rows) += Y.rowwise().sum();
      for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index i = 0; i < rows; ++i) {
          const double y = Y(i, c);
          if (y >= floor_ && y > 0.0) {
            stored_.push_back(y);
            stored_row_.push_back(static_cast<std::uint32_t>(r0 + i));
          }
        }
      if (stored_.size() > cap_) shrink();
    }
  }

  std::vector<std::size_t> idx(stored_.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return stored_[a] != stored_[b] ? stored_[a] > stored_[b] : stored_row_[a] < stored_row_[b];
  });
  std::vector<double> v(idx.size());
  std::vector<std::uint32_t> r(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    v[i] = stored_[idx[i]];
    r[i] = stored_row_[idx[i]];
  }
  stored_.swap(v);
  stored_row_.swap(r);
  stored_prefix_.resize(static_cast<Eigen::Index>(stored_.size()) + 1);
  stored_prefix_[0] = 0.0;
  for (std::size_t i = 0; i < stored_.size(); ++i)
    stored_prefix_[static_cast<Eigen::Index>(i) + 1] = stored_prefix_[static_cast<Eigen::Index>(i)] + stored_[i];
}

bool TailSumProfile::lower_floor(double u) {
  if (mode_ != ProfileMode::MatrixMc || u >= floor_) return true;
  if (capped_) return false;
  stream_matrix(std::max(u, 0.0));
  return floor_ <= u;
}

double TailSumProfile::value(double u) const {
  switch (mode_) {
    case ProfileMode::Closed: {
      if (u <= 0.0) return scale_prefix_[scales_.size()] * family_.abs_moment(1.0);
      double total = 0.0;
      for (Eigen::Index i = 0; i < scales_.size(); ++i) {
        const double s = scales_[i];
        if (s == 0.0) break;
        total += s * *family_.scalar_truncated_mean(u / s);
      }
      return total;
    }
    case ProfileMode::ScalarMc:
      return value_scalar(std::max(u, 0.0));
    case ProfileMode::MatrixMc: {
      const double n = static_cast<double>(samples_);
      if (u <= 0.0) return row_total_.sum() / n;
      if (u < floor_) throw std::logic_error("tail sum requested below the resolved floor");
      const std::size_t k = count_at_least(stored_.begin(), stored_.end(), u);
      return stored_prefix_[static_cast<Eigen::Index>(k)] / n;
    }
    case ProfileMode::Auto:
      break;
  }
  throw std::logic_error("unresolved profile mode");
}

Estimate TailSumProfile::estimate(double u) const {
  if (mode_ == ProfileMode::Closed) {
    Estimate e = Estimate::exact(value(u));
    e.seed = seed_;
    return e;
  }
  double sum = 0.0, sum_sq = 0.0;
  if (mode_ == ProfileMode::ScalarMc) {
    // W_j = a_j * sum of s_t over {t : s_t a_j >= u}
    const double uu = std::max(u, 0.0);
    for (Eigen::Index j = 0; j < draws_.size(); ++j) {
      const double a = draws_[j];
      if (a == 0.0 || a >= exact_above_) continue;
      const std::size_t k =
          uu == 0.0 ? static_cast<std::size_t>(scales_.size())
                    : count_at_least(scales_.data(), scales_.data() + scales_.size(), uu / a);
      const double w = a * scale_prefix_[static_cast<Eigen::Index>(k)];
      sum += w;
      sum_sq += w * w;
    }
    Estimate e = sample_mean(sum, sum_sq, samples_, seed_);
    e.value += exact_tail(uu);
    return e;
  }
  Eigen::VectorXd W;
  if (u <= 0.0) {
    W = row_total_;
  } else {
    if (u < floor_) throw std::logic_error("tail sum requested below the resolved floor");
    W = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(samples_));
    const std::size_t k = count_at_least(stored_.begin(), stored_.end(), u);
    for (std::size_t i = 0; i < k; ++i) W[stored_row_[i]] += stored_[i];
  }
  return sample_mean(W.sum(), W.squaredNorm(), samples_, seed_);
}

// ---------------------------------------------------------------------------
// M~ and M

namespace {

void resolve(TailSumProfile& profile, double u) {
  if (u < profile.floor() && !profile.lower_floor(u))
    throw std::runtime_error("tail sum cannot be resolved down to " + format_number(u) +
                             " within the storage cap; raise stored_value_cap");
}

Estimate with_error(double value, double se, const TailSumProfile& profile) {
  const bool closed = profile.mode() == ProfileMode::Closed;
  return {value, closed ? 0.0 : se, closed ? 0 : profile.samples(), profile.seed()};
}

}  // namespace

Estimate tilde_m(TailSumProfile& profile, const FunctionalConfig& config) {
  const double m0 = profile.value(0.0);
  if (!std::isfinite(m0)) throw InfiniteMomentError("sum of E|X_t| over the cover diverges");
  if (m0 <= 0.0) return with_error(0.0, 0.0, profile);

  auto F = [&](double m) {
    resolve(profile, m);
    return profile.value(m) - m;
  };
  double hi = m0;  // F(m0) <= T(0+) - m0 = 0
  double lo = m0 / 2.0;
  for (int k = 0; F(lo) <= 0.0; ++k) {
    if (k > 2000 || lo == 0.0) return with_error(0.0, 0.0, profile);
    hi = lo;
    lo /= 2.0;
  }
  for (int k = 0; k < config.bisection_depth; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (F(mid) <= 0.0)
      hi = mid;
    else
      lo = mid;
  }
  if (profile.mode() == ProfileMode::Closed) return with_error(hi, 0.0, profile);

  // Noise in T at the root, divided by the crossing steepness 1 + |T'|.
  const double h = 0.05 * hi;
  resolve(profile, hi - h);
  const double slope = std::max(0.0, (profile.value(hi - h) - profile.value(hi + h)) / (2.0 * h));
  return with_error(hi, profile.estimate(hi).std_error / (1.0 + slope), profile);
}

Estimate tilde_m(const PointList& S, const RandomFamily& family, const FunctionalConfig& config) {
  TailSumProfile profile(S, family, config);
  return tilde_m(profile, config);
}

BigMResult big_m_detail(TailSumProfile& profile, const Estimate& m_tilde, const FunctionalConfig& config) {
  BigMResult out;
  const double m0 = profile.value(0.0);
  double best = m0;
  double arg = 0.0;
  if (m_tilde.value <= 0.0 || m0 <= 0.0) {
    out.estimate = with_error(0.0, 0.0, profile);
    return out;
  }
  require(config.grid_points >= 3 && config.grid_points % 2 == 1, "big_m grid needs an odd point count >= 3");

  std::vector<double> grid;
  const int G = config.grid_points;
  bool skipped = false;
  for (int i = 0; i < G; ++i) {
    const double u = m_tilde.value * std::pow(16.0, 2.0 * i / (G - 1) - 1.0);
    if (u < profile.floor() && !profile.lower_floor(u)) {
      skipped = true;
      continue;
    }
    grid.push_back(u);
  }
  auto objective = [&](double u) { return u + profile.value(u); };
  std::size_t ib = grid.size();
  double grid_best = INFINITY;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double f = objective(grid[i]);
    if (f < grid_best) {
      grid_best = f;
      ib = i;
    }
  }
  if (ib < grid.size()) {
    if (grid_best < best) {
      best = grid_best;
      arg = grid[ib];
    }
    // golden-section refinement between the neighbours of the best node
    double a = grid[ib > 0 ? ib - 1 : ib];
    double b = grid[ib + 1 < grid.size() ? ib + 1 : ib];
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = objective(c), fd = objective(d);
    for (int k = 0; k < config.golden_iterations && b - a > 0.0; ++k) {
      if (fc <= fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - r * (b - a);
        fc = objective(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + r * (b - a);
        fd = objective(d);
      }
      for (auto [u, f] : {std::pair{c, fc}, std::pair{d, fd}})
        if (f < best) {
          best = f;
          arg = u;
        }
    }
  }
  // Below the floor u + T(u) >= T(floor); a smaller value there is possible only if T(floor) < best.
  out.floor_limited = skipped && profile.value(profile.floor()) < best;
  out.argmin = arg;
  out.estimate = with_error(best, profile.estimate(arg).std_error, profile);
  return out;
}

Estimate big_m(const PointList& S, const RandomFamily& family, const FunctionalConfig& config) {
  TailSumProfile profile(S, family, config);
  const Estimate mt = tilde_m(profile, config);
  return big_m_detail(profile, mt, config).estimate;
}

bool sandwich_holds(const Estimate& mt, const Estimate& mb, double z) {
  // closed-form values still carry the bisection resolution (2^-40 of m0)
  const double slack = 1e-9 * std::max(std::abs(mt.value), std::abs(mb.value));
  const double se = std::hypot(mb.std_error, 2.0 * mt.std_error);
  return mt.value <= mb.value + z * combined_stderr(mt, mb) + slack && mb.value <= 2.0 * mt.value + z * se + slack;
}

// ---------------------------------------------------------------------------
// m_X

namespace {

// Entries are filled on demand: the heuristic only looks near its current ordering.
class CostMatrix {
 public:
  Eigen::VectorXd key;  // sort key ||X_t||_2 (or the largest needed order)
  std::uint64_t count = 0;

  double operator()(Eigen::Index t, Eigen::Index i) const {
    fill(t, i);
    return value_(t, i);
  }
  double error(Eigen::Index t, Eigen::Index i) const {
    fill(t, i);
    return error_(t, i);
  }

  CostMatrix(const PointList& S, const RandomFamily& family, const FunctionalConfig& config) {
    const Eigen::Index N = S.cols();
    const double p_max = std::log(std::numbers::e + static_cast<double>(N));
    if (!family.moment_finite(p_max))
      throw InfiniteMomentError(family.name() + " has no finite moment of order log(e+" + std::to_string(N) +
                                ") = " + format_number(p_max));
    const double key_p = family.moment_finite(2.0) ? 2.0 : p_max;
    value_ = Eigen::MatrixXd::Constant(N, N, NAN);
    error_ = Eigen::MatrixXd::Zero(N, N);
    key.resize(N);
    bool all_scaled = config.mode != ProfileMode::MatrixMc;
    std::vector<double> scales(static_cast<std::size_t>(N));
    for (Eigen::Index t = 0; t < N && all_scaled; ++t) {
      if (auto s = linear_form_scale(family, S.col(t)))
        scales[static_cast<std::size_t>(t)] = *s;
      else
        all_scaled = false;
    }
    if (all_scaled) {
      Eigen::VectorXd unit(N);
      for (Eigen::Index i = 0; i < N; ++i) {
        const double p = order(i);
        unit[i] = std::pow(family.abs_moment(p), 1.0 / p);
      }
      const double key_unit = std::pow(family.abs_moment(key_p), 1.0 / key_p);
      for (Eigen::Index t = 0; t < N; ++t) {
        value_.row(t) = scales[static_cast<std::size_t>(t)] * unit.transpose();
        key[t] = scales[static_cast<std::size_t>(t)] * key_unit;
      }
      return;
    }
    count = config.norm_samples;
    const Eigen::MatrixXd X = sample_matrix(family, S.rows(), static_cast<Eigen::Index>(config.norm_samples),
                                            config.budget.seed, tag_of("little_m"));
    logs_ = (X * S).array().abs().log();
    double se = 0.0;
    for (Eigen::Index t = 0; t < N; ++t) key[t] = norm(t, key_p, se);
  }

 private:
  mutable Eigen::MatrixXd value_;  // (point, position)
  mutable Eigen::MatrixXd error_;
  Eigen::ArrayXXd logs_;           // log |<X, t>| per draw (sampled path only)

  static double order(Eigen::Index i) { return std::log(std::numbers::e + static_cast<double>(i) + 1.0); }

  double norm(Eigen::Index t, double p, double& se) const {
    const double n = static_cast<double>(count);
    const Eigen::ArrayXd w = (p * logs_.col(t)).exp();
    const double mu = w.mean();
    const double var = std::max(0.0, (w - mu).square().mean());
    const double nrm = std::pow(mu, 1.0 / p);
    se = mu > 0.0 ? nrm / (p * mu) * std::sqrt(var / n) : 0.0;
    return nrm;
  }

  void fill(Eigen::Index t, Eigen::Index i) const {
    if (!std::isnan(value_(t, i))) return;
    double se = 0.0;
    value_(t, i) = norm(t, order(i), se);
    error_(t, i) = se;
  }
};

double bottleneck(const CostMatrix& C, const std::vector<Eigen::Index>& order, Eigen::Index* at = nullptr) {
  double worst = -INFINITY;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const double c = C(order[i], static_cast<Eigen::Index>(i));
    if (c > worst) {
      worst = c;
      if (at) *at = static_cast<Eigen::Index>(i);
    }
  }
  return worst;
}

}  // namespace

LittleMResult little_m(const PointList& S, const RandomFamily& family, OrderingMode mode,
                       const FunctionalConfig& config) {
  const Eigen::Index N = S.cols();
  require(N >= 1, "little_m: empty point list");
  require(mode != OrderingMode::ExactSmall || N <= 8, "little_m: exact enumeration is limited to |S| <= 8");
  const CostMatrix C(S, family, config);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(N));
  std::iota(order.begin(), order.end(), 0);
  if (mode == OrderingMode::ExactSmall) {
    std::vector<Eigen::Index> best = order;
    double best_value = bottleneck(C, order);
    while (std::next_permutation(order.begin(), order.end())) {
      const double v = bottleneck(C, order);
      if (v < best_value) {
        best_value = v;
        best = order;
      }
    }
    order = best;
  } else {
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return C.key[a] > C.key[b]; });
    // adjacent swaps; a swap must lower the pair (larger, smaller) lexicographically
    bool improved = true;
    for (Eigen::Index pass = 0; improved && pass < 4 * N + 4; ++pass) {
      improved = false;
      for (Eigen::Index i = 0; i + 1 < N; ++i) {
        const auto a = order[static_cast<std::size_t>(i)], b = order[static_cast<std::size_t>(i + 1)];
        const double x0 = C(a, i), x1 = C(b, i + 1);
        const double y0 = C(b, i), y1 = C(a, i + 1);
        const std::pair before{std::max(x0, x1), std::min(x0, x1)};
        const std::pair after{std::max(y0, y1), std::min(y0, y1)};
        if (after < before) {
          std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i + 1)]);
          improved = true;
        }
      }
    }
  }
  Eigen::Index at = 0;
  const double v = bottleneck(C, order, &at);
  LittleMResult out;
  out.ordering = order;
  out.estimate = {v, C.error(order[static_cast<std::size_t>(at)], at), C.count, config.budget.seed};
  return out;
}

// ---------------------------------------------------------------------------
// b_X

Estimate b_sup(const IndexSet& T, const RandomFamily& family, const McBudget& budget) {
  require(budget.samples >= 2, "b_sup: need at least two samples");
  if (!family.mean_finite())
    throw InfiniteMomentError(family.name() + " has no finite first moment; E sup_T <t,X> is infinite");
  // Sampled means of |X|_2 converge like N^{1/p - 1} here; integrate instead.
  if (T.kind() == SetKind::L2Ball && family.kind() == FamilyKind::SymmetricStable)
    return {T.radius() * stable_l2_norm_mean(family.parameter(), T.dim()), 0.0, 0, budget.seed};
  const std::size_t chunks = (budget.samples + kChunkRows - 1) / kChunkRows;
  std::vector<std::pair<double, double>> partial(chunks);
  const std::uint64_t tag = tag_of("b_sup");
  for_each_chunk(budget.samples, kChunkRows, [&](std::size_t c, std::size_t begin, std::size_t end) {
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(end - begin), T.dim());
    fill_sample_rows(family, budget.seed, tag, c, rows);
    const Eigen::MatrixXd directions = rows.transpose();
    const Eigen::VectorXd h = support_batch(T, directions);
    partial[c] = {h.sum(), h.squaredNorm()};
  });
  double sum = 0.0, sum_sq = 0.0;
  for (const auto& [s, q] : partial) {
    sum += s;
    sum_sq += q;
  }
  return sample_mean(sum, sum_sq, budget.samples, budget.seed);
}

// ---------------------------------------------------------------------------
// compare

FunctionalReport compare(const IndexSet& T, const HullCover& cover, const RandomFamily& family,
                         const FunctionalConfig& config) {
  cover.validate();
  require(cover.dim() == T.dim(), "compare: cover and index set differ in dimension");
  FunctionalReport rep;
  rep.cover_size = static_cast<std::size_t>(cover.size());
  TailSumProfile profile(cover.points, family, config);
  rep.m_tilde = tilde_m(profile, config);
  const BigMResult bm = big_m_detail(profile, rep.m_tilde, config);
  rep.m_big = bm.estimate;
  if (bm.floor_limited) rep.notes.push_back("M minimizer may lie below the resolved tail floor");
  rep.b_sup = b_sup(T, family, config.budget);
  if (cover.size() <= config.little_m_limit) {
    try {
      rep.m_little = little_m(cover.points, family, OrderingMode::Heuristic, config).estimate;
    } catch (const InfiniteMomentError& e) {
      rep.notes.push_back(std::string("m_X skipped: ") + e.what());
    }
  }
  rep.sandwich_ok = sandwich_holds(rep.m_tilde, rep.m_big);
  rep.upper_bound_ok = leq_within(*rep.b_sup, rep.m_big, 4.0);
  rep.ratio = rep.m_big.value / rep.b_sup->value;
  return rep;
}

nlohmann::json to_json(const FunctionalReport& r) {
  nlohmann::json j;
  j["m_tilde"] = r.m_tilde;
  j["m_big"] = r.m_big;
  j["m_little"] = r.m_little ? nlohmann::json(*r.m_little) : nlohmann::json(nullptr);
  j["b_sup"] = r.b_sup ? nlohmann::json(*r.b_sup) : nlohmann::json(nullptr);
  j["sandwich_ok"] = r.sandwich_ok;
  j["upper_bound_ok"] = r.upper_bound_ok;
  j["ratio_m_big_over_b"] = r.ratio;
  j["cover_size"] = r.cover_size;
  j["notes"] = r.notes;
  return j;
}

std::string format_table(const FunctionalReport& r) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %14s %12s %29s\n", "functional", "value", "stderr", "CI (z=3)");
  out += line;
  auto row = [&](const char* name, const Estimate& e) {
    std::snprintf(line, sizeof line, "%-10s %14.6g %12.4g   [%12.6g, %12.6g]\n", name, e.value, e.std_error,
                  e.lower(), e.upper());
    out += line;
  };
  row("M~", r.m_tilde);
  row("M", r.m_big);
  if (r.m_little) row("m", *r.m_little);
  if (r.b_sup) row("b", *r.b_sup);
  std::snprintf(line, sizeof line, "|S| = %zu  M/b = %.4g  sandwich %s  b<=M %s\n", r.cover_size, r.ratio,
                r.sandwich_ok ? "ok" : "FAIL", r.upper_bound_ok ? "ok" : "FAIL");
  out += line;
  for (const auto& n : r.notes) out += "note: " + n + "\n";
  return out;
}

}  // namespace hullbound
