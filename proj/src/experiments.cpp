#include "hullbound/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "hullbound/constructions.hpp"
#include "hullbound/functionals.hpp"
#include "hullbound/geometry.hpp"
#include "hullbound/rng.hpp"
#include "hullbound/text.hpp"

namespace hullbound {

namespace {

using json = nlohmann::json;

const std::vector<std::pair<ExperimentKind, std::string>> kNames = {
    {ExperimentKind::B1, "b1"},
    {ExperimentKind::B2, "b2"},
    {ExperimentKind::Ellipsoid, "ellipsoid"},
    {ExperimentKind::Bq, "bq"},
    {ExperimentKind::StableCounterexample, "stable-counterexample"},
    {ExperimentKind::Gamma, "gamma"},
    {ExperimentKind::Sandwich, "sandwich"},
};

json number_or_string(double x) { return std::isfinite(x) ? json(x) : json(format_number(x)); }

double json_number(const json& j) { return j.is_string() ? parse_number(j.get<std::string>()) : j.get<double>(); }

FunctionalConfig functional_config(const ExperimentConfig& c, std::uint64_t seed) {
  FunctionalConfig fc;
  fc.budget = {c.mc, seed};
  return fc;
}

RotationConfig rotation_config(const ExperimentConfig& c, std::uint64_t seed) {
  RotationConfig rc;
  rc.trials = c.trials;
  rc.seed = seed;
  rc.selection_samples = c.selection_samples;
  rc.c_log = c.c_log;
  return rc;
}

// Columns shared by every cover-based row.
void put_report(json& row, const FunctionalReport& r) {
  row["b_sup"] = r.b_sup->value;
  row["b_sup_stderr"] = r.b_sup->std_error;
  row["m_tilde"] = r.m_tilde.value;
  row["m_tilde_stderr"] = r.m_tilde.std_error;
  row["m_big"] = r.m_big.value;
  row["m_big_stderr"] = r.m_big.std_error;
  row["m_little"] = r.m_little ? json(r.m_little->value) : json(nullptr);
  row["cover_size"] = r.cover_size;
  row["ratio_m_big_over_b"] = r.ratio;
  row["sandwich_ok"] = r.sandwich_ok;
  row["upper_bound_ok"] = r.upper_bound_ok;
}

struct Runner {
  const ExperimentConfig& cfg;
  RandomFamily family;
  ExperimentReport& out;

  void add_row(json row, std::chrono::steady_clock::time_point start) {
    if (cfg.timing)
      row["runtime_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.rows.push_back(std::move(row));
  }

  void check(const std::string& name, bool pass, const std::string& detail) {
    out.assertions.push_back({name, pass, detail});
  }

  bool all(const char* key) const {
    return std::all_of(out.rows.begin(), out.rows.end(), [&](const json& r) { return r.at(key).get<bool>(); });
  }

  double max_of(const char* key) const {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& r : out.rows) m = std::max(m, r.at(key).get<double>());
    return m;
  }

  double min_of(const char* key) const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& r : out.rows) m = std::min(m, r.at(key).get<double>());
    return m;
  }

  void check_upper_bound() {
    check("upper_bound", all("upper_bound_ok"), "b_sup <= m_big within 4 standard errors on every row");
  }

  void check_probe(double tol) {
    const double worst = max_of("worst_ratio");
    check("containment_probe", worst <= 1.0 + tol, "worst support ratio " + format_number(worst));
  }

  json cover_row(long n, std::uint64_t seed, const IndexSet& T, const HullCover& cover) {
    const FunctionalReport r = compare(T, cover, family, functional_config(cfg, seed));
    json row{{"n", n}, {"seed", seed}};
    put_report(row, r);
    row["worst_ratio"] = containment_probe(T, cover, cfg.directions, seed).worst_ratio;
    return row;
  }

  void b1() {
    for (long n : cfg.dims)
      for (auto seed : cfg.seeds) {
        const auto start = std::chrono::steady_clock::now();
        add_row(cover_row(n, seed, IndexSet::l1_ball(n), canonical_l1_cover(n)), start);
      }
    const double worst = max_of("ratio_m_big_over_b");
    out.summary["max_ratio_m_big_over_b"] = worst;
    check("b1_constant", worst <= 4.0 * 1.05, "max M/b = " + format_number(worst) + " (bound 4.2)");
    check_upper_bound();
    check_probe(1e-2);
  }

  void b2() {
    for (long n : cfg.dims)
      for (auto seed : cfg.seeds) {
        const auto start = std::chrono::steady_clock::now();
        const RotationCover rc = rotation_cover_b2(n, family, rotation_config(cfg, seed));
        json row = cover_row(n, seed, IndexSet::l2_ball(n), rc.cover);
        row["block_dim"] = rc.diagnostics.block_dim;
        row["requested_block_dim"] = rc.diagnostics.requested_block_dim;
        row["selection_sum"] = rc.diagnostics.achieved_sum;
        row["selection_mean"] = rc.diagnostics.mean_sum;
        row["size_ok"] = static_cast<long>(rc.cover.size()) <= 10 * n * n;
        row["m_big_over_sqrt_n"] = row["m_big"].get<double>() / std::sqrt(static_cast<double>(n));
        add_row(std::move(row), start);
      }
    check("size_cap", all("size_ok"), "|S| <= 10 n^2 on every row");
    check_probe(1e-2);
    const long n0 = *std::min_element(cfg.dims.begin(), cfg.dims.end());
    double base = 0.0;
    for (const auto& r : out.rows)
      if (r.at("n").get<long>() == n0) base = std::max(base, r.at("m_big_over_sqrt_n").get<double>());
    const double top = max_of("m_big_over_sqrt_n");
    out.summary["m_big_over_sqrt_n_at_smallest_n"] = base;
    out.summary["m_big_over_sqrt_n_max"] = top;
    check("m_big_over_sqrt_n_bounded", top <= 3.0 * base,
          "max " + format_number(top) + " vs 3 x " + format_number(base) + " at n = " + std::to_string(n0));
    check_upper_bound();
  }

  void ellipsoid() {
    for (long n : cfg.dims)
      for (auto seed : cfg.seeds)
        for (int i = 0; i < cfg.instances; ++i) {
          const auto start = std::chrono::steady_clock::now();
          const auto id = static_cast<std::uint64_t>(n) * 1000 + static_cast<std::uint64_t>(i);
          Stream s(seed, tag_of("ellipsoid_instance"), id);
          Eigen::VectorXd a(n);
          for (long j = 0; j < n; ++j) a[j] = std::exp(4.0 * s.uniform() - 2.0);
          const Eigen::MatrixXd U = haar_orthogonal(n, seed, tag_of("ellipsoid_axes") ^ id);
          const IndexSet E = IndexSet::ellipsoid(U, a);
          const BlockDecomposition dec = ellipsoid_blocks(a, U);
          const HullCover cover = ellipsoid_cover(E, family, rotation_config(cfg, seed));
          json row = cover_row(n, seed, E, cover);
          row["instance"] = i;
          row["blocks"] = dec.blocks.size();
          row["norm2_sum"] = dec.norm2_sum;
          row["ck_sum"] = dec.ck_sum;
          row["invariants_ok"] = dec.invariants_hold();
          add_row(std::move(row), start);
        }
    check("block_invariants", all("invariants_ok"), "1 <= sum n_k 4^-k < 4 and sum c_k^-2 <= 1 on every instance");
    const double hi = max_of("ratio_m_big_over_b"), lo = min_of("ratio_m_big_over_b");
    out.summary["ratio_band"] = hi / lo;
    check("ratio_band", hi <= 3.0 * lo,
          "M/b in [" + format_number(lo) + ", " + format_number(hi) + "], band " + format_number(hi / lo));
    check_probe(1e-2);
    check_upper_bound();
  }

  void bq() {
    for (double q : cfg.qs)
      for (long n : cfg.dims)
        for (auto seed : cfg.seeds) {
          const auto start = std::chrono::steady_clock::now();
          const double qd = std::isinf(q) ? 1.0 : q / (q - 1.0);
          const IndexSet T = IndexSet::lq_ball(n, q);
          const HullCover cover =
              lq_cover(Eigen::MatrixXd::Identity(n, n), q, family, rotation_config(cfg, seed));
          json row = cover_row(n, seed, T, cover);
          row["q"] = number_or_string(q);
          // a generic linear image as well
          Stream s(seed, tag_of("bq_matrix"), static_cast<std::uint64_t>(n));
          Eigen::MatrixXd A(n, n);
          for (long i = 0; i < n * n; ++i) A.data()[i] = s.normal();
          const HullCover image = lq_cover(A, q, family, rotation_config(cfg, seed));
          row["image_worst_ratio"] =
              containment_probe(IndexSet::linear_image_lq(A, q), image, cfg.directions, seed).worst_ratio;
          row["b_over_n_pow"] = row["b_sup"].get<double>() / std::pow(static_cast<double>(n), 1.0 / qd);
          add_row(std::move(row), start);
        }
    const double hi = max_of("b_over_n_pow"), lo = min_of("b_over_n_pow");
    out.summary["b_over_n_pow_band"] = hi / lo;
    check("b_scaling_band", hi <= 2.0 * lo,
          "b/n^{1/q'} in [" + format_number(lo) + ", " + format_number(hi) + "]");
    check_probe(1e-2);
    const double image = max_of("image_worst_ratio");
    check("image_probe", image <= 1.0 + 1e-2, "worst support ratio on random A B_q " + format_number(image));
    check_upper_bound();
  }

  void stable() {
    if (family.kind() != FamilyKind::SymmetricStable)
      throw std::invalid_argument("stable-counterexample needs a stable family, got " + family.name());
    const double p = family.parameter();
    for (long n : cfg.dims)
      for (auto seed : cfg.seeds) {
        const auto start = std::chrono::steady_clock::now();
        const RotationCover rc = rotation_cover_b2(n, family, rotation_config(cfg, seed));
        json row = cover_row(n, seed, IndexSet::l2_ball(n), rc.cover);
        row["block_dim"] = rc.diagnostics.block_dim;
        add_row(std::move(row), start);
      }
    std::vector<double> ns, bs, ratios;
    for (const auto& r : out.rows) {
      ns.push_back(r.at("n").get<double>());
      bs.push_back(r.at("b_sup").get<double>());
      ratios.push_back(r.at("ratio_m_big_over_b").get<double>());
    }
    const double slope_b = loglog_slope(ns, bs), slope_r = loglog_slope(ns, ratios);
    out.summary["slope_b_sup"] = slope_b;
    out.summary["slope_m_big_over_b"] = slope_r;
    out.summary["expected_slope_b_sup"] = 1.0 / p;
    out.summary["lower_slope_m_big_over_b"] = 1.0 / p - 0.5;
    check("slope_b_sup", std::abs(slope_b - 1.0 / p) <= 0.08,
          "slope " + format_number(slope_b) + " vs 1/p = " + format_number(1.0 / p) + " +- 0.08");
    check("slope_gap", slope_r >= 1.0 / p - 0.5 - 0.1,
          "slope " + format_number(slope_r) + " vs 1/p - 1/2 - 0.1 = " + format_number(1.0 / p - 0.6));
    check_probe(1e-2);
    check_upper_bound();
  }

  void gamma() {
    const long max_n = cfg.dims.empty() ? 8 : *std::max_element(cfg.dims.begin(), cfg.dims.end());
    for (auto seed : cfg.seeds)
      for (int i = 0; i < cfg.instances; ++i) {
        const auto start = std::chrono::steady_clock::now();
        Stream s(seed, tag_of("gamma_instance"), static_cast<std::uint64_t>(i));
        const auto n = 1 + static_cast<Eigen::Index>(s.uniform() * static_cast<double>(max_n));
        const auto count = 2 + static_cast<Eigen::Index>(s.uniform() * 31.0);
        Eigen::MatrixXd T(n, count);
        for (Eigen::Index c = 0; c < count; ++c)
          for (Eigen::Index r = 0; r < n; ++r) T(r, c) = s.normal();
        GammaConfig gc;
        gc.budget = {cfg.mc, seed};
        const GammaResult g = gamma_partition(T, family, gc);
        const HullCover cover = extract_cover_from_partition(g.tree, family, gc.budget);
        bool members = true;
        for (Eigen::Index a = 0; a < count && members; ++a)
          for (Eigen::Index b = 0; b < count && members; ++b)
            if (a != b) members = member_abs_hull(T.col(a) - T.col(b), cover.points).member;
        const IndexSet set = IndexSet::finite(T);
        const FunctionalReport r = compare(set, cover, family, functional_config(cfg, seed));
        json row{{"n", n}, {"seed", seed}, {"instance", i}, {"points", count}};
        put_report(row, r);
        row["gamma_upper"] = g.gamma_upper;
        row["b_over_gamma"] = g.gamma_upper > 0 ? r.b_sup->value / g.gamma_upper : 0.0;
        row["m_little_over_gamma"] =
            r.m_little && g.gamma_upper > 0 ? json(r.m_little->value / g.gamma_upper) : json(nullptr);
        row["members_ok"] = members;
        row["m_little_ok"] = r.m_little && r.m_little->value <= 10.0 * g.gamma_upper;
        add_row(std::move(row), start);
      }
    const double c = max_of("b_over_gamma");
    out.summary["measured_C"] = c;
    check("gamma_constant", c <= 50.0, "b <= C gamma_upper with C = " + format_number(c));
    check("pairwise_differences", all("members_ok"), "T - T inside conv(S u -S) on every instance");
    check("m_little_vs_gamma", all("m_little_ok"), "little m(S) <= 10 gamma_upper on every instance");
    check_upper_bound();
  }

  void sandwich() {
    for (long n_max : cfg.dims)
      for (auto seed : cfg.seeds)
        for (int i = 0; i < cfg.instances; ++i) {
          const auto start = std::chrono::steady_clock::now();
          Stream s(seed, tag_of("sandwich_instance"), static_cast<std::uint64_t>(n_max) * 1000 + static_cast<std::uint64_t>(i));
          const auto n = 1 + static_cast<Eigen::Index>(s.uniform() * static_cast<double>(n_max));
          const auto count = 1 + static_cast<Eigen::Index>(s.uniform() * 12.0);
          Eigen::MatrixXd S(n, count);
          for (Eigen::Index c = 0; c < count; ++c) {
            const double scale = std::exp(s.normal());
            for (Eigen::Index r = 0; r < n; ++r) S(r, c) = s.uniform() < 0.3 ? 0.0 : scale * s.normal();
          }
          const FunctionalConfig fc = functional_config(cfg, seed);
          TailSumProfile profile(S, family, fc);
          const Estimate mt = tilde_m(profile, fc);
          const BigMResult mb = big_m_detail(profile, mt, fc);
          json row{{"n", n}, {"seed", seed}, {"instance", i}, {"cover_size", count}};
          row["m_tilde"] = mt.value;
          row["m_tilde_stderr"] = mt.std_error;
          row["m_big"] = mb.estimate.value;
          row["m_big_stderr"] = mb.estimate.std_error;
          row["floor_limited"] = mb.floor_limited;
          row["sandwich_ok"] = sandwich_holds(mt, mb.estimate);
          add_row(std::move(row), start);
        }
    std::size_t ok = 0;
    for (const auto& r : out.rows) ok += r.at("sandwich_ok").get<bool>();
    out.summary["sandwich_pass"] = ok;
    out.summary["instances"] = out.rows.size();
    check("sandwich", ok == out.rows.size(),
          std::to_string(ok) + " of " + std::to_string(out.rows.size()) + " instances satisfy m_tilde <= M <= 2 m_tilde");
  }
};

std::string csv_cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_float()) return format_number(v.get<double>());
  if (v.is_number()) return v.dump();
  std::string s = v.get<std::string>();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kNames)
    if (k == kind) return name;
  return "unknown";
}

ExperimentKind parse_experiment(const std::string& name) {
  for (const auto& [k, n] : kNames)
    if (n == name) return k;
  throw std::invalid_argument("unknown experiment '" + name + "'");
}

void ExperimentConfig::finalize() {
  if (dims.empty()) {
    switch (experiment) {
      case ExperimentKind::B1: dims = {2, 8, 32, 128}; break;
      case ExperimentKind::B2: dims = {8, 16, 32, 64}; break;
      case ExperimentKind::Ellipsoid: dims = {8, 16, 32}; break;
      case ExperimentKind::Bq: dims = {8, 32}; break;
      case ExperimentKind::StableCounterexample: dims = {8, 16, 32, 64, 128}; break;
      case ExperimentKind::Gamma: dims = {8}; break;
      case ExperimentKind::Sandwich: dims = {8}; break;
    }
  }
  if (qs.empty() && experiment == ExperimentKind::Bq) qs = {3.0, 4.0, INFINITY};
  if (dims.empty() || seeds.empty()) throw std::invalid_argument("experiment needs at least one dimension and seed");
  for (long n : dims)
    if (n < 1) throw std::invalid_argument("dimensions must be positive");
  if (mc == 0 || directions == 0 || trials < 1 || instances < 1 || selection_samples == 0)
    throw std::invalid_argument("experiment budgets must be positive");
  for (double q : qs)
    if (!(q >= 2.0)) throw std::invalid_argument("bq needs q >= 2");
  RandomFamily::parse(family);
}

json to_json(const ExperimentConfig& c) {
  json qs = json::array();
  for (double q : c.qs) qs.push_back(number_or_string(q));
  return {{"experiment", to_string(c.experiment)},
          {"family", RandomFamily::parse(c.family).record()},
          {"dims", c.dims},
          {"seeds", c.seeds},
          {"mc", c.mc},
          {"directions", c.directions},
          {"trials", c.trials},
          {"instances", c.instances},
          {"qs", qs},
          {"selection_samples", c.selection_samples},
          {"c_log", c.c_log},
          {"timing", c.timing}};
}

ExperimentConfig experiment_config_from_json(const json& j) {
  ExperimentConfig c;
  if (j.contains("experiment")) c.experiment = parse_experiment(j.at("experiment").get<std::string>());
  if (j.contains("family")) c.family = j.at("family").get<std::string>();
  if (j.contains("dims")) c.dims = j.at("dims").get<std::vector<long>>();
  if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (j.contains("mc")) c.mc = j.at("mc").get<std::uint64_t>();
  if (j.contains("directions")) c.directions = j.at("directions").get<std::uint64_t>();
  if (j.contains("trials")) c.trials = j.at("trials").get<int>();
  if (j.contains("instances")) c.instances = j.at("instances").get<int>();
  if (j.contains("qs"))
    for (const auto& q : j.at("qs")) c.qs.push_back(json_number(q));
  if (j.contains("selection_samples")) c.selection_samples = j.at("selection_samples").get<std::uint64_t>();
  if (j.contains("c_log")) c.c_log = j.at("c_log").get<double>();
  if (j.contains("timing")) c.timing = j.at("timing").get<bool>();
  return c;
}

bool ExperimentReport::passed() const {
  return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.pass; });
}

json ExperimentReport::json() const {
  nlohmann::json asserts = nlohmann::json::array();
  for (const auto& a : assertions) asserts.push_back({{"name", a.name}, {"pass", a.pass}, {"detail", a.detail}});
  return {{"config", to_json(config)}, {"rows", rows}, {"summary", summary}, {"assertions", asserts},
          {"passed", passed()}};
}

std::string ExperimentReport::csv() const {
  std::ostringstream os;
  if (rows.empty()) return "";
  std::vector<std::string> keys;
  for (const auto& r : rows)
    for (auto it = r.begin(); it != r.end(); ++it)
      if (std::find(keys.begin(), keys.end(), it.key()) == keys.end()) keys.push_back(it.key());
  std::sort(keys.begin(), keys.end());
  for (std::size_t k = 0; k < keys.size(); ++k) os << (k ? "," : "") << keys[k];
  os << '\n';
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < keys.size(); ++k) {
      if (k) os << ',';
      if (r.contains(keys[k])) os << csv_cell(r.at(keys[k]));
    }
    os << '\n';
  }
  return os.str();
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope needs two or more points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw std::invalid_argument("loglog_slope needs two distinct x values");
  return sxy / sxx;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  ExperimentReport out;
  out.config = config;
  out.config.finalize();
  Runner run{out.config, RandomFamily::parse(out.config.family), out};
  switch (out.config.experiment) {
    case ExperimentKind::B1: run.b1(); break;
    case ExperimentKind::B2: run.b2(); break;
    case ExperimentKind::Ellipsoid: run.ellipsoid(); break;
    case ExperimentKind::Bq: run.bq(); break;
    case ExperimentKind::StableCounterexample: run.stable(); break;
    case ExperimentKind::Gamma: run.gamma(); break;
    case ExperimentKind::Sandwich: run.sandwich(); break;
  }
  return out;
}

}  // namespace hullbound
