#include "hullbound/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "hullbound/parallel.hpp"
#include "hullbound/text.hpp"

namespace hullbound {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kSqrtPi = std::sqrt(std::numbers::pi);

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

// E|g|^p for a standard normal g.
double gaussian_abs_moment(double p) {
  return std::pow(2.0, p / 2.0) * std::tgamma((p + 1.0) / 2.0) / kSqrtPi;
}

double student_density(double x, double df) {
  const double log_c = std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0) -
                       0.5 * std::log(df * std::numbers::pi);
  return std::exp(log_c - (df + 1.0) / 2.0 * std::log1p(x * x / df));
}

// Per-chunk accumulation of a scalar functional of the linear form X_t.
struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;
  double hits = 0.0;
};

template <typename Fn>
Moments accumulate_linear(const RandomFamily& family, const Eigen::VectorXd& t, std::uint64_t count,
                          std::uint64_t seed, std::uint64_t tag, Fn&& fn) {
  const auto total = static_cast<std::size_t>(count);
  const std::size_t chunks = (total + kChunkRows - 1) / kChunkRows;
  std::vector<Moments> partial(chunks);
  for_each_chunk(total, kChunkRows, [&](std::size_t c, std::size_t begin, std::size_t end) {
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(end - begin), t.size());
    fill_sample_rows(family, seed, tag, c, rows);
    const Eigen::VectorXd proj = rows * t;
    Moments m;
    for (Eigen::Index i = 0; i < proj.size(); ++i) {
      const double v = fn(proj[i]);
      m.sum += v;
      m.sum_sq += v * v;
      m.hits += v != 0.0 ? 1.0 : 0.0;
    }
    partial[c] = m;
  });
  Moments out;
  for (const auto& m : partial) {
    out.sum += m.sum;
    out.sum_sq += m.sum_sq;
    out.hits += m.hits;
  }
  return out;
}

Estimate mean_estimate(const Moments& m, std::uint64_t count, std::uint64_t seed, double factor = 1.0) {
  const double n = static_cast<double>(count);
  const double mean = m.sum / n;
  const double var = std::max(0.0, m.sum_sq / n - mean * mean) * n / std::max(1.0, n - 1.0);
  return {factor * mean, factor * std::sqrt(var / n), count, seed};
}

}  // namespace

// ---------------------------------------------------------------------------
// RandomFamily

RandomFamily::RandomFamily(FamilyKind kind, double param, double param2, double variance)
    : kind_(kind), param_(param), param2_(param2), variance_(variance) {
  const double sd = std::sqrt(variance);
  switch (kind_) {
    case FamilyKind::Gaussian:
    case FamilyKind::Rademacher:
      scale_ = sd;
      break;
    case FamilyKind::UniformSymmetric:
      scale_ = sd * std::sqrt(3.0);
      break;
    case FamilyKind::StudentLike:
      scale_ = sd * std::sqrt((param_ - 2.0) / param_);
      break;
    case FamilyKind::SymmetricWeibull:
      scale_ = sd / std::sqrt(std::tgamma(1.0 + 2.0 / param_));
      break;
    case FamilyKind::SymmetricStable:
      scale_ = 1.0;
      variance_ = kInf;
      break;
    case FamilyKind::TwoPointMixture:
      scale_ = sd / std::sqrt(1.0 - param_ + param_ * param2_ * param2_);
      break;
  }
}

RandomFamily RandomFamily::gaussian(double variance) {
  require(variance > 0.0 && std::isfinite(variance), "gaussian: variance must be positive");
  return {FamilyKind::Gaussian, 0.0, 0.0, variance};
}

RandomFamily RandomFamily::rademacher(double variance) {
  require(variance > 0.0 && std::isfinite(variance), "rademacher: variance must be positive");
  return {FamilyKind::Rademacher, 0.0, 0.0, variance};
}

RandomFamily RandomFamily::uniform(double variance) {
  require(variance > 0.0 && std::isfinite(variance), "uniform: variance must be positive");
  return {FamilyKind::UniformSymmetric, 0.0, 0.0, variance};
}

RandomFamily RandomFamily::student(double df, double variance) {
  require(df > 2.0 && std::isfinite(df), "student: df must be > 2 for a finite variance");
  require(variance > 0.0 && std::isfinite(variance), "student: variance must be positive");
  return {FamilyKind::StudentLike, df, 0.0, variance};
}

RandomFamily RandomFamily::weibull(double shape, double variance) {
  require(shape > 0.0 && shape <= 1.0, "weibull: shape must lie in (0, 1]");
  require(variance > 0.0 && std::isfinite(variance), "weibull: variance must be positive");
  return {FamilyKind::SymmetricWeibull, shape, 0.0, variance};
}

RandomFamily RandomFamily::stable(double p) {
  require(p > 1.0 && p < 2.0, "stable: stability index must lie in (1, 2)");
  return {FamilyKind::SymmetricStable, p, 0.0, kInf};
}

RandomFamily RandomFamily::two_point(double weight, double ratio, double variance) {
  require(weight > 0.0 && weight < 1.0, "two_point: weight must lie in (0, 1)");
  require(ratio > 0.0 && std::isfinite(ratio), "two_point: ratio must be positive");
  require(variance > 0.0 && std::isfinite(variance), "two_point: variance must be positive");
  return {FamilyKind::TwoPointMixture, weight, ratio, variance};
}

RandomFamily RandomFamily::with_regularity(const Regularity& reg) const {
  require(reg.r > 4.0 && reg.r <= 8.0, "regularity: r must lie in (4, 8]");
  require(reg.lambda >= 1.0, "regularity: lambda must be >= 1");
  require(!reg.alpha || *reg.alpha >= 1.0, "regularity: alpha must be >= 1");
  const auto check = moment_condition_check(*this, reg.r, reg.lambda, McBudget{1, 0}, reg.alpha);
  require(check.passes, name() + " violates the moment condition r=" + format_number(reg.r) +
                            " lambda=" + format_number(reg.lambda) +
                            " (ratio " + format_number(check.worst_ratio) + ")");
  require(!check.alpha_ok || *check.alpha_ok,
          name() + " violates regular moment growth with alpha=" + format_number(*reg.alpha));
  RandomFamily out = *this;
  out.regularity_ = reg;
  return out;
}

double RandomFamily::variance() const { return variance_; }

double RandomFamily::unit_scale() const {
  return kind_ == FamilyKind::SymmetricStable ? 1.0 : std::sqrt(variance_);
}

bool RandomFamily::heavy_tailed() const {
  return kind_ == FamilyKind::StudentLike || kind_ == FamilyKind::SymmetricWeibull ||
         kind_ == FamilyKind::SymmetricStable;
}

double RandomFamily::draw(Stream& s) const {
  switch (kind_) {
    case FamilyKind::Gaussian:
      return scale_ * s.normal();
    case FamilyKind::Rademacher:
      return scale_ * s.sign();
    case FamilyKind::UniformSymmetric:
      return scale_ * (2.0 * s.uniform() - 1.0);
    case FamilyKind::StudentLike: {
      const double z = s.normal();
      const double chi2 = 2.0 * s.gamma(param_ / 2.0);
      return scale_ * z / std::sqrt(chi2 / param_);
    }
    case FamilyKind::SymmetricWeibull:
      return scale_ * s.sign() * std::pow(s.exponential(), 1.0 / param_);
    case FamilyKind::SymmetricStable: {
      // Chambers-Mallows-Stuck, symmetric case.
      const double p = param_;
      const double v = std::numbers::pi * (s.uniform() - 0.5);
      const double w = s.exponential();
      return std::sin(p * v) / std::pow(std::cos(v), 1.0 / p) *
             std::pow(std::cos((1.0 - p) * v) / w, (1.0 - p) / p);
    }
    case FamilyKind::TwoPointMixture: {
      const double mag = s.uniform() < param_ ? param2_ : 1.0;
      return scale_ * s.sign() * mag;
    }
  }
  return 0.0;
}

double RandomFamily::moment_limit() const {
  switch (kind_) {
    case FamilyKind::StudentLike:
    case FamilyKind::SymmetricStable:
      return param_;
    default:
      return kInf;
  }
}

double RandomFamily::abs_moment(double p) const {
  if (p == 0.0) return 1.0;
  if (!moment_finite(p)) return kInf;
  switch (kind_) {
    case FamilyKind::Gaussian:
      return std::pow(scale_, p) * gaussian_abs_moment(p);
    case FamilyKind::Rademacher:
      return std::pow(scale_, p);
    case FamilyKind::UniformSymmetric:
      return std::pow(scale_, p) / (p + 1.0);
    case FamilyKind::StudentLike: {
      const double df = param_;
      const double log_m = p / 2.0 * std::log(df) + std::lgamma((p + 1.0) / 2.0) +
                           std::lgamma((df - p) / 2.0) - std::lgamma(df / 2.0) - std::log(kSqrtPi);
      return std::pow(scale_, p) * std::exp(log_m);
    }
    case FamilyKind::SymmetricWeibull:
      return std::pow(scale_, p) * std::tgamma(1.0 + p / param_);
    case FamilyKind::SymmetricStable: {
      const double a = param_;
      return std::pow(2.0, p) * std::tgamma((1.0 + p) / 2.0) * std::tgamma(1.0 - p / a) /
             (kSqrtPi * std::tgamma(1.0 - p / 2.0));
    }
    case FamilyKind::TwoPointMixture:
      return std::pow(scale_, p) * ((1.0 - param_) + param_ * std::pow(param2_, p));
  }
  return kInf;
}

std::optional<double> RandomFamily::scalar_truncated_mean(double u) const {
  u = std::max(u, 0.0);
  switch (kind_) {
    case FamilyKind::Gaussian:
      return scale_ * std::sqrt(2.0 / std::numbers::pi) * std::exp(-u * u / (2.0 * scale_ * scale_));
    case FamilyKind::Rademacher:
      return scale_ >= u ? scale_ : 0.0;
    case FamilyKind::UniformSymmetric:
      return u >= scale_ ? 0.0 : (scale_ * scale_ - u * u) / (2.0 * scale_);
    case FamilyKind::StudentLike: {
      const double df = param_;
      const double z = u / scale_;
      return scale_ * 2.0 * student_density(z, df) * (df + z * z) / (df - 1.0);
    }
    case FamilyKind::SymmetricWeibull: {
      const double x = std::pow(u / scale_, param_);
      return scale_ * boost::math::tgamma(1.0 + 1.0 / param_, x);
    }
    case FamilyKind::SymmetricStable:
      return std::nullopt;
    case FamilyKind::TwoPointMixture: {
      const double a = scale_;
      const double b = scale_ * param2_;
      return (a >= u ? (1.0 - param_) * a : 0.0) + (b >= u ? param_ * b : 0.0);
    }
  }
  return std::nullopt;
}

std::string RandomFamily::name() const {
  switch (kind_) {
    case FamilyKind::Gaussian:
      return "gaussian";
    case FamilyKind::Rademacher:
      return "rademacher";
    case FamilyKind::UniformSymmetric:
      return "uniform";
    case FamilyKind::StudentLike:
      return "student(df=" + format_number(param_) + ")";
    case FamilyKind::SymmetricWeibull:
      return "weibull(shape=" + format_number(param_) + ")";
    case FamilyKind::SymmetricStable:
      return "stable(p=" + format_number(param_) + ")";
    case FamilyKind::TwoPointMixture:
      return "twopoint(weight=" + format_number(param_) + ",ratio=" + format_number(param2_) + ")";
  }
  return "?";
}

std::string RandomFamily::record() const {
  std::string out = "kind=";
  switch (kind_) {
    case FamilyKind::Gaussian:
      out += "gaussian";
      break;
    case FamilyKind::Rademacher:
      out += "rademacher";
      break;
    case FamilyKind::UniformSymmetric:
      out += "uniform";
      break;
    case FamilyKind::StudentLike:
      out += "student df=" + format_number(param_);
      break;
    case FamilyKind::SymmetricWeibull:
      out += "weibull shape=" + format_number(param_);
      break;
    case FamilyKind::SymmetricStable:
      out += "stable p=" + format_number(param_);
      break;
    case FamilyKind::TwoPointMixture:
      out += "twopoint weight=" + format_number(param_) + " ratio=" + format_number(param2_);
      break;
  }
  if (kind_ != FamilyKind::SymmetricStable) out += " variance=" + format_number(variance_);
  if (regularity_) {
    out += " r=" + format_number(regularity_->r) + " lambda=" + format_number(regularity_->lambda);
    if (regularity_->alpha) out += " alpha=" + format_number(*regularity_->alpha);
  }
  return out;
}

RandomFamily RandomFamily::parse(std::string_view text) {
  const auto tokens = split_tokens(text, " \t\n,;()");
  require(!tokens.empty(), "family record is empty");
  std::string kind;
  std::optional<double> shorthand;
  double variance = 1.0;
  std::optional<double> df, shape, p, weight, ratio, r, lambda, alpha;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& tok = tokens[i];
    const auto eq = tok.find('=');
    const auto colon = tok.find(':');
    if (eq == std::string::npos) {
      require(i == 0, "unexpected token '" + tok + "' in family record");
      kind = tok.substr(0, colon);
      if (colon != std::string::npos) shorthand = parse_number(tok.substr(colon + 1));
      continue;
    }
    const std::string key = tok.substr(0, eq);
    const std::string val = tok.substr(eq + 1);
    if (key == "kind") {
      const auto c = val.find(':');
      kind = val.substr(0, c);
      if (c != std::string::npos) shorthand = parse_number(val.substr(c + 1));
    } else if (key == "variance") {
      variance = parse_number(val);
    } else if (key == "df") {
      df = parse_number(val);
    } else if (key == "shape") {
      shape = parse_number(val);
    } else if (key == "p" || key == "stability") {
      p = parse_number(val);
    } else if (key == "weight") {
      weight = parse_number(val);
    } else if (key == "ratio") {
      ratio = parse_number(val);
    } else if (key == "r") {
      r = parse_number(val);
    } else if (key == "lambda") {
      lambda = parse_number(val);
    } else if (key == "alpha") {
      alpha = parse_number(val);
    } else {
      throw std::invalid_argument("unknown family key '" + key + "'");
    }
  }
  std::transform(kind.begin(), kind.end(), kind.begin(), [](unsigned char c) { return std::tolower(c); });
  auto need = [&](std::optional<double> v, const char* what) {
    if (v) return *v;
    if (shorthand) return *shorthand;
    throw std::invalid_argument(std::string("family '") + kind + "' needs " + what);
  };
  RandomFamily fam = RandomFamily::gaussian();
  if (kind == "gaussian" || kind == "normal") {
    fam = gaussian(variance);
  } else if (kind == "rademacher" || kind == "bernoulli") {
    fam = rademacher(variance);
  } else if (kind == "uniform") {
    fam = uniform(variance);
  } else if (kind == "student" || kind == "studentlike" || kind == "t") {
    fam = student(need(df, "df"), variance);
  } else if (kind == "weibull") {
    fam = weibull(need(shape, "shape"), variance);
  } else if (kind == "stable") {
    fam = stable(need(p, "p"));
  } else if (kind == "twopoint" || kind == "two-point") {
    require(weight && ratio, "twopoint needs weight= and ratio=");
    fam = two_point(*weight, *ratio, variance);
  } else {
    throw std::invalid_argument("unknown family kind '" + kind + "'");
  }
  if (r || lambda || alpha) {
    require(r && lambda, "regularity block needs both r= and lambda=");
    fam = fam.with_regularity(Regularity{*r, *lambda, alpha});
  }
  return fam;
}

// ---------------------------------------------------------------------------
// Sampling

void fill_sample_rows(const RandomFamily& family, std::uint64_t seed, std::uint64_t tag, std::size_t chunk,
                      Eigen::Ref<Eigen::MatrixXd> rows) {
  Stream stream(seed, tag, chunk);
  for (Eigen::Index i = 0; i < rows.rows(); ++i)
    for (Eigen::Index j = 0; j < rows.cols(); ++j) rows(i, j) = family.draw(stream);
}

Eigen::MatrixXd sample_matrix(const RandomFamily& family, Eigen::Index n, Eigen::Index count,
                              std::uint64_t seed, std::uint64_t tag) {
  require(n >= 1 && count >= 1, "sample_matrix: n and count must be >= 1");
  Eigen::MatrixXd out(count, n);
  for_each_chunk(static_cast<std::size_t>(count), kChunkRows,
                 [&](std::size_t c, std::size_t begin, std::size_t end) {
                   const auto b = static_cast<Eigen::Index>(begin);
                   fill_sample_rows(family, seed, tag, c, out.middleRows(b, static_cast<Eigen::Index>(end) - b));
                 });
  return out;
}

Eigen::VectorXd sample_abs_scalar(const RandomFamily& family, Eigen::Index count, std::uint64_t seed,
                                  std::uint64_t tag) {
  Eigen::VectorXd out(count);
  for_each_chunk(static_cast<std::size_t>(count), kChunkRows,
                 [&](std::size_t c, std::size_t begin, std::size_t end) {
                   Stream stream(seed, tag, c);
                   for (std::size_t i = begin; i < end; ++i)
                     out[static_cast<Eigen::Index>(i)] = std::abs(family.draw(stream));
                 });
  return out;
}

std::optional<double> linear_form_scale(const RandomFamily& family, const Eigen::VectorXd& t) {
  if (family.kind() == FamilyKind::Gaussian) return t.norm();
  if (family.kind() == FamilyKind::SymmetricStable) {
    const double p = family.parameter();
    return std::pow(t.array().abs().pow(p).sum(), 1.0 / p);
  }
  Eigen::Index nonzero = 0;
  double scale = 0.0;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    if (t[i] != 0.0) {
      ++nonzero;
      scale = std::abs(t[i]);
    }
  }
  if (nonzero <= 1) return scale;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Operations

Estimate truncated_abs_mean(const RandomFamily& family, const Eigen::VectorXd& t, double u,
                            const McBudget& budget) {
  return truncated_abs_mean_report(family, t, u, budget).plain;
}

TailReport truncated_abs_mean_report(const RandomFamily& family, const Eigen::VectorXd& t, double u,
                                     const McBudget& budget) {
  require(u >= 0.0, "truncated_abs_mean: threshold u must be >= 0");
  require(t.allFinite(), "truncated_abs_mean: t must be finite");
  if (!family.mean_finite())
    throw InfiniteMomentError("truncated_abs_mean: " + family.name() + " has infinite mean");
  require(budget.samples >= 1, "truncated_abs_mean: budget must be >= 1 sample");

  TailReport rep;
  const auto scale = linear_form_scale(family, t);
  if (scale && *scale == 0.0) {
    rep.plain = rep.conditioned = Estimate::exact(0.0);
    return rep;
  }
  if (scale) {
    if (auto closed = family.scalar_truncated_mean(u / *scale)) {
      rep.plain = rep.conditioned = Estimate::exact(*scale * *closed);
      return rep;
    }
  }

  // Monte-Carlo: either the scalar reduction X_t = s X_1 or the full linear form.
  const std::uint64_t n_samples = budget.samples;
  auto linear_abs = [&](std::uint64_t tag, auto&& fn) {
    if (scale) {
      Eigen::VectorXd one(1);
      one[0] = *scale;
      return accumulate_linear(family, one, n_samples, budget.seed, tag, fn);
    }
    return accumulate_linear(family, t, n_samples, budget.seed, tag, fn);
  };
  const Moments tail = linear_abs(tag_of("truncated_abs_mean"), [u](double x) {
    const double a = std::abs(x);
    return a >= u ? a : 0.0;
  });
  rep.plain = mean_estimate(tail, n_samples, budget.seed);
  rep.tail_probability = tail.hits / static_cast<double>(n_samples);

  if (!family.heavy_tailed() || rep.tail_probability == 0.0) {
    rep.conditioned = rep.plain;
    return rep;
  }
  // Second pass: rejection sampling from the law conditioned on the tail event,
  // drawing until `samples` acceptances or 32x the budget in proposals.
  const std::uint64_t max_proposals = 32 * n_samples;
  const Eigen::VectorXd direction = scale ? Eigen::VectorXd::Constant(1, *scale) : t;
  double sum = 0.0, sum_sq = 0.0;
  std::uint64_t accepted = 0, proposals = 0;
  std::size_t chunk = 0;
  Eigen::MatrixXd rows(kChunkRows, direction.size());
  while (accepted < n_samples && proposals < max_proposals) {
    fill_sample_rows(family, budget.seed, tag_of("truncated_abs_mean/conditioned"), chunk++, rows);
    const Eigen::VectorXd proj = rows * direction;
    for (Eigen::Index i = 0; i < proj.size() && accepted < n_samples; ++i) {
      ++proposals;
      const double a = std::abs(proj[i]);
      if (a >= u) {
        ++accepted;
        sum += a;
        sum_sq += a * a;
      }
    }
  }
  rep.accepted = accepted;
  if (accepted < 2) {
    rep.conditioned = rep.plain;
    return rep;
  }
  const double cond_mean = sum / static_cast<double>(accepted);
  const double cond_var = std::max(0.0, sum_sq / static_cast<double>(accepted) - cond_mean * cond_mean);
  const double prob = rep.tail_probability;
  const double prob_se = std::sqrt(prob * (1.0 - prob) / static_cast<double>(n_samples));
  const double mean_se = std::sqrt(cond_var / static_cast<double>(accepted));
  rep.conditioned = {prob * cond_mean, std::hypot(prob * mean_se, cond_mean * prob_se), n_samples + proposals,
                     budget.seed};
  rep.agree = std::abs(rep.plain.value - rep.conditioned.value) <=
              4.0 * combined_stderr(rep.plain, rep.conditioned) + 1e-12 * std::abs(rep.plain.value);
  return rep;
}

Estimate lp_norm_linear(const RandomFamily& family, const Eigen::VectorXd& t, double p, const McBudget& budget) {
  require(p >= 1.0, "lp_norm_linear: p must be >= 1");
  if (!family.moment_finite(p))
    throw InfiniteMomentError("lp_norm_linear: " + family.name() + " has no finite moment of order " +
                              format_number(p));
  if (auto scale = linear_form_scale(family, t))
    return Estimate::exact(*scale * std::pow(family.abs_moment(p), 1.0 / p));
  const Moments m = accumulate_linear(family, t, budget.samples, budget.seed, tag_of("lp_norm_linear"),
                                      [p](double x) { return std::pow(std::abs(x), p); });
  const Estimate moment = mean_estimate(m, budget.samples, budget.seed);
  const double norm = std::pow(moment.value, 1.0 / p);
  // delta method: d(mu^{1/p}) = (1/p) mu^{1/p - 1} d(mu)
  const double se = moment.value > 0.0 ? norm / (p * moment.value) * moment.std_error : 0.0;
  return {norm, se, budget.samples, budget.seed};
}

MomentReport moment_condition_check(const RandomFamily& family, double r, double lambda, const McBudget& budget,
                                    std::optional<double> alpha) {
  require(r > 4.0 && r <= 8.0, "moment_condition_check: r must lie in (4, 8]");
  MomentReport rep;
  const double second = family.abs_moment(2.0);
  const double rth = family.abs_moment(r);
  rep.worst_ratio = (std::isfinite(second) && std::isfinite(rth)) ? std::pow(rth, 1.0 / r) / std::sqrt(second)
                                                                   : kInf;
  rep.passes = std::isfinite(rep.worst_ratio) && rep.worst_ratio <= lambda * (1.0 + 1e-12);

  if (budget.samples >= 2 && budget.seed != 0) {
    const Eigen::VectorXd draws =
        sample_abs_scalar(family, static_cast<Eigen::Index>(budget.samples), budget.seed, tag_of("moment_check"));
    const double m2 = draws.array().square().mean();
    const double mr = draws.array().pow(r).mean();
    rep.empirical_ratio = std::pow(mr, 1.0 / r) / std::sqrt(m2);
  }
  if (alpha) {
    double worst = 0.0;
    for (double p : {1.0, 2.0, 4.0}) {
      const double lo = std::pow(family.abs_moment(p), 1.0 / p);
      const double hi = std::pow(family.abs_moment(2.0 * p), 1.0 / (2.0 * p));
      worst = std::max(worst, std::isfinite(hi) ? hi / lo : kInf);
    }
    rep.regular_growth_ratio = worst;
    rep.alpha_ok = worst <= *alpha * (1.0 + 1e-12);
  }
  return rep;
}

double stable_tail_mean_series(double p, double v) {
  require(p > 1.0 && p < 2.0 && v > 0.0, "stable_tail_mean_series: need p in (1, 2) and v > 0");
  // 2 int_v^inf x f(x) dx with f(x) ~ (1/pi) sum_k (-1)^{k+1} Gamma(kp+1)/k! sin(k pi p/2) x^{-kp-1}
  double total = 0.0;
  for (int k = 1; k <= 6; ++k) {
    const double kp = k * p;
    const double sign = k % 2 ? 1.0 : -1.0;
    total += sign * std::exp(std::lgamma(kp + 1.0) - std::lgamma(k + 1.0)) * std::sin(k * std::numbers::pi * p / 2.0) *
             std::pow(v, 1.0 - kp) / (kp - 1.0);
  }
  return 2.0 / std::numbers::pi * total;
}

double stable_l2_norm_mean(double p, Eigen::Index n) {
  require(p > 1.0 && p < 2.0, "stable_l2_norm_mean: p must lie in (1, 2)");
  require(n >= 1, "stable_l2_norm_mean: n must be >= 1");
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  const double nn = static_cast<double>(n);
  const double root = std::sqrt(2.0 / std::numbers::pi);
  // 1 - E e^{-sX^2} = E_g [1 - exp(-(2s)^{p/2} |g|^p)], g standard normal
  auto one_minus_phi = [&](double s) {
    const double a = std::pow(2.0 * s, p / 2.0);
    auto f = [&](double g) { return -std::expm1(-a * std::pow(g, p)) * std::exp(-g * g / 2.0); };
    return std::min(1.0, root * (GK::integrate(f, 0.0, 1.0, 15, 1e-13) + GK::integrate(f, 1.0, 12.0, 15, 1e-13)));
  };
  // s = e^u on [lo, hi]; both tails in closed form
  constexpr double lo = -80.0, hi = 60.0;
  auto h = [&](double u) {
    const double q = one_minus_phi(std::exp(u));
    return -std::expm1(nn * std::log1p(-q)) * std::exp(-u / 2.0);
  };
  const double body = GK::integrate(h, lo, hi, 20, 1e-12);
  // small s: 1 - phi^n ~ n (2s)^{p/2} E|g|^p
  const double small = nn * std::pow(2.0, p / 2.0) * gaussian_abs_moment(p) * std::exp(lo * (p - 1.0) / 2.0) /
                       ((p - 1.0) / 2.0);
  const double large = 2.0 * std::exp(-hi / 2.0);
  return (small + body + large) / (2.0 * std::sqrt(std::numbers::pi));
}

}  // namespace hullbound
