// Acceptance run: one pass/fail line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "hullbound/constructions.hpp"
#include "hullbound/experiments.hpp"
#include "hullbound/functionals.hpp"
#include "hullbound/rng.hpp"
#include "hullbound/text.hpp"

using namespace hullbound;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  double budget = 0.0;  // seconds, 0 = none
};

// Every cover-based report feeds the upper-bound criterion.
std::vector<std::string> g_upper_failures;
std::size_t g_upper_rows = 0;

void collect_upper(const ExperimentReport& rep) {
  for (const auto& row : rep.rows) {
    if (!row.contains("upper_bound_ok")) continue;
    ++g_upper_rows;
    if (!row.at("upper_bound_ok").get<bool>())
      g_upper_failures.push_back(to_string(rep.config.experiment) + " n=" + row.at("n").dump());
  }
}

std::string failed_assertions(const ExperimentReport& rep) {
  std::string out;
  for (const auto& a : rep.assertions)
    if (!a.pass) out += " [" + to_string(rep.config.experiment) + "/" + a.name + ": " + a.detail + "]";
  return out;
}

ExperimentReport run(ExperimentKind kind, const std::string& family, auto&& tweak) {
  ExperimentConfig c;
  c.experiment = kind;
  c.family = family;
  tweak(c);
  ExperimentReport rep = run_experiment(c);
  collect_upper(rep);
  return rep;
}

Outcome timed(double budget, const std::function<Outcome()>& body) {
  const auto start = Clock::now();
  Outcome o = body();
  o.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  o.budget = budget;
  if (budget > 0.0 && o.seconds > budget) {
    o.pass = false;
    o.detail += " [over time budget]";
  }
  return o;
}

double gaussian_pnorm(double p) {
  return std::pow(std::pow(2.0, p / 2) * std::tgamma((p + 1) / 2) / std::sqrt(M_PI), 1.0 / p);
}

// Minimum over legal partition trees of |T| <= 5 points (Gaussian distances).
double brute_force_gamma(const Eigen::MatrixXd& T) {
  const int N = static_cast<int>(T.cols());
  auto d = [&](int i, int j, double p) { return (T.col(i) - T.col(j)).norm() * gaussian_pnorm(p); };
  double diam0 = 0.0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) diam0 = std::max(diam0, d(i, j, 1.0));
  if (N <= 4) return diam0;
  double best = INFINITY;
  std::vector<int> label(static_cast<std::size_t>(N));
  std::function<void(int)> rec = [&](int i) {
    if (i == N) {
      if (*std::max_element(label.begin(), label.end()) >= 4) return;
      double worst = 0.0;
      for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b)
          if (label[static_cast<std::size_t>(a)] == label[static_cast<std::size_t>(b)]) worst = std::max(worst, d(a, b, 2.0));
      best = std::min(best, worst);
      return;
    }
    for (int c = 0; c < N; ++c) {
      label[static_cast<std::size_t>(i)] = c;
      rec(i + 1);
    }
  };
  rec(0);
  return diam0 + best;
}

Outcome sandwich() {
  const std::vector<std::string> families = {"gaussian",   "rademacher", "uniform",         "student:9",
                                             "weibull:0.5", "stable:1.5", "twopoint weight=0.1 ratio=3"};
  std::size_t ok = 0, total = 0;
  std::string fails;
  for (const auto& f : families) {
    const auto rep = run(ExperimentKind::Sandwich, f, [](ExperimentConfig& c) {
      c.instances = 30;
      c.mc = 20000;
    });
    ok += rep.summary.at("sandwich_pass").get<std::size_t>();
    total += rep.rows.size();
    fails += failed_assertions(rep);
  }
  return {ok == total && total >= 200, std::to_string(ok) + "/" + std::to_string(total) + " instances" + fails};
}

Outcome b1() {
  bool pass = true;
  std::string detail, fails;
  for (const auto& f : {"gaussian", "rademacher", "weibull:0.5", "student:9"}) {
    const auto rep = run(ExperimentKind::B1, f, [](ExperimentConfig& c) {
      c.mc = 100000;
      c.directions = 2000;
    });
    const double worst = rep.summary.at("max_ratio_m_big_over_b").get<double>();
    pass = pass && worst <= 4.0 * 1.05;
    detail += std::string(detail.empty() ? "" : ", ") + f + " " + format_number(worst);
  }
  return {pass, "max M/b per family (bound 4.2): " + detail};
}

Outcome b2() {
  bool pass = true;
  std::string detail;
  for (const auto& f : {"gaussian", "student:9"}) {
    const auto rep = run(ExperimentKind::B2, f, [](ExperimentConfig& c) {
      c.mc = 4000;
      c.directions = 2000;
    });
    pass = pass && rep.passed();
    std::size_t biggest = 0;
    double probe = 0.0;
    for (const auto& r : rep.rows) {
      biggest = std::max(biggest, r.at("cover_size").get<std::size_t>());
      probe = std::max(probe, r.at("worst_ratio").get<double>());
    }
    detail += std::string(detail.empty() ? "" : "; ") + f + ": |S|max " + std::to_string(biggest) + ", probe " +
              format_number(probe) + ", max M/sqrt(n) " + format_number(rep.summary.at("m_big_over_sqrt_n_max")) +
              " vs 3x" + format_number(rep.summary.at("m_big_over_sqrt_n_at_smallest_n")) + failed_assertions(rep);
  }
  return {pass, detail};
}

Outcome ellipsoid() {
  bool pass = true;
  std::string detail;
  for (const auto& f : {"gaussian", "student:9"}) {
    const auto rep = run(ExperimentKind::Ellipsoid, f, [](ExperimentConfig& c) {
      c.mc = 4000;
      c.directions = 500;
      c.trials = 16;
      c.instances = 10;
    });
    bool invariants = true;
    for (const auto& a : rep.assertions)
      if (a.name == "block_invariants") invariants = a.pass;
    bool band = false;
    for (const auto& a : rep.assertions)
      if (a.name == "ratio_band") band = a.pass;
    pass = pass && invariants && band;
    detail += std::string(detail.empty() ? "" : "; ") + f + ": invariants " + (invariants ? "exact" : "broken") +
              ", M/b band " + format_number(rep.summary.at("ratio_band"));
  }
  return {pass, detail};
}

Outcome bq() {
  const auto rep = run(ExperimentKind::Bq, "gaussian", [](ExperimentConfig& c) {
    c.mc = 20000;
    c.directions = 2000;
    c.trials = 16;
  });
  bool band = false, probe = false, image = false;
  std::string extra;
  for (const auto& a : rep.assertions) {
    if (a.name == "b_scaling_band") band = a.pass, extra = a.detail;
    if (a.name == "containment_probe") probe = a.pass, extra += ", " + a.detail;
    if (a.name == "image_probe") image = a.pass, extra += ", " + a.detail;
  }
  return {band && probe && image, "band " + format_number(rep.summary.at("b_over_n_pow_band")) + " (" + extra + ")"};
}

Outcome stable() {
  bool pass = true;
  std::string detail;
  for (const auto& f : {"stable:1.5", "stable:1.2"}) {
    const auto rep = run(ExperimentKind::StableCounterexample, f, [](ExperimentConfig& c) {
      c.mc = 100000;
      c.directions = 1000;
      c.trials = 8;
    });
    bool slopes = true;
    for (const auto& a : rep.assertions)
      if (a.name == "slope_b_sup" || a.name == "slope_gap") slopes = slopes && a.pass;
    pass = pass && slopes;
    detail += std::string(detail.empty() ? "" : "; ") + f + ": slope b " +
              format_number(rep.summary.at("slope_b_sup")) + " (1/p " +
              format_number(rep.summary.at("expected_slope_b_sup")) + "), slope M/b " +
              format_number(rep.summary.at("slope_m_big_over_b")) + " (>= " +
              format_number(rep.summary.at("lower_slope_m_big_over_b").get<double>() - 0.1) + ")";
  }
  return {pass, detail};
}

Outcome chaining() {
  const auto rep = run(ExperimentKind::Gamma, "gaussian", [](ExperimentConfig& c) {
    c.mc = 20000;
    c.instances = 50;
  });
  bool constant = false, members = false, little = false;
  for (const auto& a : rep.assertions) {
    if (a.name == "gamma_constant") constant = a.pass;
    if (a.name == "pairwise_differences") members = a.pass;
    if (a.name == "m_little_vs_gamma") little = a.pass;
  }
  double worst_little = 0.0;
  for (const auto& r : rep.rows)
    if (!r.at("m_little_over_gamma").is_null()) worst_little = std::max(worst_little, r.at("m_little_over_gamma").get<double>());
  // brute force against the greedy tree for small sets
  const auto g = RandomFamily::gaussian();
  int matched = 0;
  const int cases = 60;
  for (int i = 0; i < cases; ++i) {
    Stream s(11, tag_of("acceptance_gamma_small"), static_cast<std::uint64_t>(i));
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(s.uniform() * 8.0);
    const Eigen::Index count = 1 + i % 5;
    Eigen::MatrixXd T(n, count);
    for (Eigen::Index c = 0; c < count; ++c)
      for (Eigen::Index r = 0; r < n; ++r) T(r, c) = s.normal();
    const double greedy = gamma_partition(T, g, {}).gamma_upper;
    const double brute = brute_force_gamma(T);
    matched += std::abs(greedy - brute) <= 1e-12 * std::max(1.0, brute);
  }
  return {constant && members && little && matched == cases,
          "C = " + format_number(rep.summary.at("measured_C")) + " (<= 50), pairwise differences " +
              (members ? "inside" : "OUTSIDE") + ", max m/gamma " + format_number(worst_little) +
              " (<= 10), brute force matched " + std::to_string(matched) + "/" + std::to_string(cases)};
}

Outcome oracles() {
  const auto g = RandomFamily::gaussian();
  const Eigen::MatrixXd e1 = Eigen::MatrixXd::Identity(1, 1);
  FunctionalConfig fc;
  const double mt = tilde_m(e1, g, fc).value;
  const double mb = big_m(e1, g, fc).value;
  int agree = 0;
  const int cases = 100;
  for (int i = 0; i < cases; ++i) {
    Stream s(5, tag_of("acceptance_little_m"), static_cast<std::uint64_t>(i));
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(s.uniform() * 5.0);
    const Eigen::Index count = 1 + static_cast<Eigen::Index>(s.uniform() * 6.0);
    Eigen::MatrixXd S(n, count);
    for (Eigen::Index c = 0; c < count; ++c) {
      const double scale = std::exp(s.normal());
      for (Eigen::Index r = 0; r < n; ++r) S(r, c) = scale * s.normal();
    }
    const RandomFamily fam = i % 2 ? RandomFamily::rademacher() : g;
    FunctionalConfig lc;
    lc.norm_samples = 4000;
    lc.budget.seed = static_cast<std::uint64_t>(i) + 1;
    const double h = little_m(S, fam, OrderingMode::Heuristic, lc).estimate.value;
    const double x = little_m(S, fam, OrderingMode::ExactSmall, lc).estimate.value;
    agree += std::abs(h - x) <= 1e-12 * std::max(1.0, x);
  }
  const bool pass = std::abs(mt - 0.647) <= 0.01 && std::abs(mb - std::sqrt(2.0 / M_PI)) <= 0.01 && agree == cases;
  return {pass, "tilde_m " + format_number(mt) + " (0.647 +- 0.01), big_m " + format_number(mb) + " (" +
                    format_number(std::sqrt(2.0 / M_PI)) + " +- 0.01), heuristic = exact on " +
                    std::to_string(agree) + "/" + std::to_string(cases)};
}

Outcome determinism() {
  std::vector<ExperimentConfig> configs;
  auto add = [&](ExperimentKind k, const std::string& f, auto&& tweak) {
    ExperimentConfig c;
    c.experiment = k;
    c.family = f;
    tweak(c);
    configs.push_back(c);
  };
  add(ExperimentKind::Sandwich, "student:9", [](ExperimentConfig& c) { c.instances = 20; c.mc = 20000; });
  add(ExperimentKind::B2, "student:9", [](ExperimentConfig& c) { c.dims = {8, 16}; c.mc = 4000; c.trials = 8; c.directions = 500; });
  add(ExperimentKind::Gamma, "gaussian", [](ExperimentConfig& c) { c.instances = 10; c.mc = 20000; });
  add(ExperimentKind::StableCounterexample, "stable:1.5", [](ExperimentConfig& c) { c.dims = {8, 16}; c.mc = 20000; c.trials = 4; c.directions = 500; });
  int identical = 0;
  for (const auto& c : configs) {
    const auto a = run_experiment(c), b = run_experiment(c);
    identical += a.json().dump() == b.json().dump() && a.csv() == b.csv();
  }
  return {identical == static_cast<int>(configs.size()),
          std::to_string(identical) + "/" + std::to_string(configs.size()) + " reports byte-identical on rerun"};
}

}  // namespace

int main() {
  std::vector<Outcome> out(11);
  out[1] = timed(120, sandwich);
  out[3] = timed(120, b1);
  out[4] = timed(300, b2);
  out[5] = timed(300, ellipsoid);
  out[6] = timed(180, bq);
  out[7] = timed(300, stable);
  out[8] = timed(180, chaining);
  out[9] = timed(0, oracles);
  out[10] = timed(0, determinism);
  std::string up = std::to_string(g_upper_rows - g_upper_failures.size()) + "/" + std::to_string(g_upper_rows) +
                   " cover rows with b <= M within 4 sigma";
  for (const auto& f : g_upper_failures) up += " [" + f + "]";
  out[2] = {g_upper_failures.empty() && g_upper_rows > 0, up, 0.0, 0.0};

  const char* names[] = {"",          "sandwich",         "upper bound", "B1 constant", "B2 cover",  "ellipsoid",
                         "lq balls",  "stable gap",       "gamma",       "oracles",     "determinism"};
  bool all = true;
  for (int k = 1; k <= 10; ++k) {
    const Outcome& o = out[static_cast<std::size_t>(k)];
    all = all && o.pass;
    std::string t = o.seconds > 0 ? " (" + format_number(std::round(o.seconds * 10) / 10) + " s" +
                                        (o.budget > 0 ? " of " + format_number(o.budget) : "") + ")"
                                  : "";
    std::printf("criterion %2d %-12s %s%s: %s\n", k, names[k], o.pass ? "PASS" : "FAIL", t.c_str(), o.detail.c_str());
  }
  std::printf("%s\n", all ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL");
  return all ? 0 : 1;
}
