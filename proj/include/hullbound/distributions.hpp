#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "hullbound/estimate.hpp"
#include "hullbound/rng.hpp"

namespace hullbound {

/// Raised when an operation needs a moment the coordinate law does not have.
class InfiniteMomentError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Explicit Monte-Carlo budget: a fixed sample count and the seed keying every
/// stream the operation draws from.
struct McBudget {
  std::uint64_t samples = 200000;
  std::uint64_t seed = 1;
};

enum class FamilyKind {
  Gaussian,
  Rademacher,
  UniformSymmetric,
  StudentLike,
  SymmetricWeibull,
  SymmetricStable,
  TwoPointMixture,
};

/// Moment regularity metadata: (E|X|^r)^{1/r} <= lambda (E X^2)^{1/2}, and
/// optionally ||X||_{2p} <= alpha ||X||_p.
struct Regularity {
  double r = 5.0;
  double lambda = 1.0;
  std::optional<double> alpha;

  friend bool operator==(const Regularity&, const Regularity&) = default;
};

/// Law of a single coordinate X_i. All kinds are symmetric about zero.
///
/// Finite-variance kinds are normalized so that E X^2 == variance(). The
/// symmetric stable kind uses the standard scale (characteristic function
/// exp(-|t|^p)) and reports an infinite variance.
class RandomFamily {
 public:
  static RandomFamily gaussian(double variance = 1.0);
  static RandomFamily rademacher(double variance = 1.0);
  static RandomFamily uniform(double variance = 1.0);
  /// Student t with df degrees of freedom, rescaled to the given variance. df > 2.
  static RandomFamily student(double df, double variance = 1.0);
  /// Symmetric Weibull, |X| ~ c (-log U)^{1/shape}, shape in (0, 1].
  static RandomFamily weibull(double shape, double variance = 1.0);
  /// Symmetric p-stable, p in (1, 2).
  static RandomFamily stable(double p);
  /// |X| takes value a with probability 1 - weight and ratio * a with
  /// probability weight; independent random sign.
  static RandomFamily two_point(double weight, double ratio, double variance = 1.0);

  /// Attaches regularity metadata after checking it against the closed-form
  /// moments; throws std::invalid_argument when the law violates it.
  RandomFamily with_regularity(const Regularity& reg) const;

  FamilyKind kind() const { return kind_; }
  double parameter() const { return param_; }
  double parameter2() const { return param2_; }
  double variance() const;
  /// sqrt(variance) for finite-variance kinds, 1 for the stable kind.
  double unit_scale() const;
  const std::optional<Regularity>& regularity() const { return regularity_; }

  double draw(Stream& stream) const;

  /// sup{p : E|X|^p < inf}; +inf when every moment is finite.
  double moment_limit() const;
  bool moment_finite(double p) const { return p < moment_limit(); }
  bool mean_finite() const { return moment_finite(1.0); }
  /// Existence of some r in (4, 8] with a finite r-th moment.
  bool satisfies_four_plus_moment() const { return moment_limit() > 4.0; }
  bool heavy_tailed() const;

  /// Closed-form E|X_1|^p (+inf beyond the moment limit).
  double abs_moment(double p) const;
  /// Closed-form E|X_1| 1{|X_1| >= u} where one is implemented.
  std::optional<double> scalar_truncated_mean(double u) const;

  std::string name() const;
  /// Plain-text configuration record, parseable by parse().
  std::string record() const;
  static RandomFamily parse(std::string_view text);

  friend bool operator==(const RandomFamily&, const RandomFamily&) = default;

 private:
  RandomFamily(FamilyKind kind, double param, double param2, double variance);

  FamilyKind kind_;
  double param_ = 0.0;
  double param2_ = 0.0;
  double variance_ = 1.0;
  double scale_ = 1.0;  // sampler scale derived from variance
  std::optional<Regularity> regularity_;
};

/// Rows per chunk in every sampled matrix; part of the reproducibility contract.
inline constexpr Eigen::Index kChunkRows = 4096;

/// Fills `rows` with the draws of chunk `chunk` (rows.rows() <= kChunkRows).
void fill_sample_rows(const RandomFamily& family, std::uint64_t seed, std::uint64_t tag,
                      std::size_t chunk, Eigen::Ref<Eigen::MatrixXd> rows);

/// count x n matrix of i.i.d. draws. Rows are generated in fixed chunks, each
/// from its own counter stream keyed by (seed, tag, chunk).
Eigen::MatrixXd sample_matrix(const RandomFamily& family, Eigen::Index n, Eigen::Index count,
                              std::uint64_t seed, std::uint64_t tag = tag_of("sample_matrix"));

/// Draws of |X_1| only, in the same chunked layout.
Eigen::VectorXd sample_abs_scalar(const RandomFamily& family, Eigen::Index count, std::uint64_t seed,
                                  std::uint64_t tag);

/// Scale s_t such that X_t has the law of s_t * X_1, when the family admits
/// one for this t (Gaussian: |t|_2, stable: |t|_p, any kind when t has a
/// single nonzero coordinate).
std::optional<double> linear_form_scale(const RandomFamily& family, const Eigen::VectorXd& t);

/// E|X_t| 1{|X_t| >= u}.
Estimate truncated_abs_mean(const RandomFamily& family, const Eigen::VectorXd& t, double u,
                            const McBudget& budget);

/// Both tail estimators for heavy-tailed laws: plain MC and a second pass that
/// samples the conditional law on {|X_t| >= u} by rejection.
struct TailReport {
  Estimate plain;
  Estimate conditioned;
  double tail_probability = 0.0;
  std::uint64_t accepted = 0;
  bool agree = true;  // |plain - conditioned| within 4 combined stderr
};

TailReport truncated_abs_mean_report(const RandomFamily& family, const Eigen::VectorXd& t, double u,
                                     const McBudget& budget);

/// E|X| 1{|X| >= v} for a symmetric p-stable X from the six-term tail series;
/// relative error below 1e-7 for v >= kStableSeriesFrom.
double stable_tail_mean_series(double p, double v);
inline constexpr double kStableSeriesFrom = 20.0;

/// E|X|_2 for n iid symmetric p-stable coordinates (E e^{iuX} = e^{-|u|^p}), by
/// quadrature of E sqrt(Y) = (4 pi)^{-1/2} int (1 - E e^{-sY}) s^{-3/2} ds.
double stable_l2_norm_mean(double p, Eigen::Index n);

/// ||X_t||_p = (E|X_t|^p)^{1/p}. Throws InfiniteMomentError for p beyond the
/// family's finite-moment range.
Estimate lp_norm_linear(const RandomFamily& family, const Eigen::VectorXd& t, double p,
                        const McBudget& budget);

struct MomentReport {
  bool passes = false;
  /// (E|X|^r)^{1/r} / (E X^2)^{1/2}; +inf when either moment diverges.
  double worst_ratio = 0.0;
  /// Monte-Carlo version of worst_ratio over the supplied budget.
  double empirical_ratio = 0.0;
  /// max over p in {1,2,4} of ||X||_{2p} / ||X||_p, when alpha is checked.
  std::optional<double> regular_growth_ratio;
  std::optional<bool> alpha_ok;
};

MomentReport moment_condition_check(const RandomFamily& family, double r, double lambda,
                                    const McBudget& budget, std::optional<double> alpha = std::nullopt);

}  // namespace hullbound
