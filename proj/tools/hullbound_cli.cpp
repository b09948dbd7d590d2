#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hullbound/constructions.hpp"
#include "hullbound/experiments.hpp"
#include "hullbound/functionals.hpp"
#include "hullbound/geometry.hpp"
#include "hullbound/text.hpp"

using namespace hullbound;
using json = nlohmann::json;

namespace {

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("parse error in " + path + ": " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// --q accepts "inf".
double q_value(const std::string& s) { return parse_number(s); }

struct Common {
  std::string family = "gaussian";
  std::uint64_t seed = 1;
  std::uint64_t mc = 200000;
  std::string out;
  std::string format = "json";
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--family", c.family, "random family, e.g. gaussian, student:9, stable:1.5")->capture_default_str();
  app->add_option("--seed", c.seed, "master seed")->capture_default_str();
  app->add_option("--mc", c.mc, "Monte Carlo draws per estimate")->capture_default_str();
  app->add_option("--out", c.out, "output path (stdout if omitted)");
  app->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
}

FunctionalConfig functional_config(const Common& c) {
  FunctionalConfig fc;
  fc.budget = {c.mc, c.seed};
  return fc;
}

std::string report_csv(const json& flat) {
  std::string head, vals;
  for (auto it = flat.begin(); it != flat.end(); ++it) {
    head += (head.empty() ? "" : ",") + it.key();
    const json& v = it.value();
    std::string cell = v.is_null() ? "" : v.is_number_float() ? format_number(v.get<double>()) : v.is_string() ? v.get<std::string>() : v.dump();
    vals += (it == flat.begin() ? "" : ",") + cell;
  }
  return head + "\n" + vals + "\n";
}

json flatten_report(const FunctionalReport& r) {
  json f;
  f["m_tilde"] = r.m_tilde.value;
  f["m_tilde_stderr"] = r.m_tilde.std_error;
  f["m_big"] = r.m_big.value;
  f["m_big_stderr"] = r.m_big.std_error;
  f["m_little"] = r.m_little ? json(r.m_little->value) : json(nullptr);
  f["b_sup"] = r.b_sup ? json(r.b_sup->value) : json(nullptr);
  f["b_sup_stderr"] = r.b_sup ? json(r.b_sup->std_error) : json(nullptr);
  f["cover_size"] = r.cover_size;
  f["sandwich_ok"] = r.sandwich_ok;
  f["upper_bound_ok"] = r.upper_bound_ok;
  return f;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convex-hull bounds for expected suprema of canonical processes"};
  app.require_subcommand(1);

  // estimate
  Common est;
  std::string est_cover, est_set;
  auto* estimate = app.add_subcommand("estimate", "functionals of a cover (and b_sup of a set)");
  add_common(estimate, est);
  estimate->add_option("--cover", est_cover, "cover JSON file");
  estimate->add_option("--set", est_set, "index set JSON file");

  // cover
  Common cov;
  std::string cov_kind, cov_set, cov_set_out, cov_q = "inf";
  long cov_n = 8, cov_k = 0;
  int cov_trials = 64;
  double cov_scale = 1.0;
  auto* cover = app.add_subcommand("cover", "build a cover and write it as JSON");
  add_common(cover, cov);
  cover->add_option("kind", cov_kind, "canonical-l1 | block-b2 | rotation-b2 | ellipsoid | lq | gamma")
      ->required()
      ->check(CLI::IsMember({"canonical-l1", "block-b2", "rotation-b2", "ellipsoid", "lq", "gamma"}));
  cover->add_option("--n", cov_n, "dimension")->capture_default_str();
  cover->add_option("--k", cov_k, "block dimension for block-b2 (default ceil(2 ln n))");
  cover->add_option("--q", cov_q, "q for lq (number or inf)")->capture_default_str();
  cover->add_option("--trials", cov_trials, "rotation trials")->capture_default_str();
  cover->add_option("--set", cov_set, "index set JSON (ellipsoid, linear image of B_q, finite set)");
  cover->add_option("--set-out", cov_set_out, "also write the covered index set here");
  cover->add_option("--scale", cov_scale, "multiply the cover points by this factor")->capture_default_str();

  // verify
  Common ver;
  std::string ver_cover, ver_set;
  std::uint64_t ver_dirs = 10000;
  double ver_tol = 1e-2;
  auto* verify = app.add_subcommand("verify", "containment probe plus functional table");
  add_common(verify, ver);
  verify->add_option("--cover", ver_cover, "cover JSON file")->required();
  verify->add_option("--set", ver_set, "index set JSON file")->required();
  verify->add_option("--directions", ver_dirs, "random probe directions")->capture_default_str();
  verify->add_option("--tol", ver_tol, "allowed support-ratio excess")->capture_default_str();

  // experiment
  ExperimentConfig exp;
  std::string exp_name, exp_config, exp_out, exp_format = "json", exp_family;
  std::vector<long> exp_dims;
  std::vector<std::uint64_t> exp_seeds;
  std::vector<std::string> exp_qs;
  std::uint64_t exp_mc = 0, exp_dirs = 0, exp_sel = 0;
  int exp_trials = 0, exp_instances = 0;
  bool exp_timing = false;
  auto* experiment = app.add_subcommand("experiment", "run a named experiment");
  experiment->add_option("name", exp_name, "b1 | b2 | ellipsoid | bq | stable-counterexample | gamma | sandwich")
      ->required();
  experiment->add_option("--config", exp_config, "JSON config file; flags override it");
  experiment->add_option("--family", exp_family, "random family");
  experiment->add_option("--n", exp_dims, "dimensions");
  experiment->add_option("--seed", exp_seeds, "seeds");
  experiment->add_option("--mc", exp_mc, "Monte Carlo draws per estimate");
  experiment->add_option("--trials", exp_trials, "rotation trials");
  experiment->add_option("--directions", exp_dirs, "probe directions");
  experiment->add_option("--instances", exp_instances, "random instances per grid point");
  experiment->add_option("--selection-samples", exp_sel, "draws for the rotation selection sum");
  experiment->add_option("--q", exp_qs, "q values for bq (number or inf)");
  experiment->add_option("--out", exp_out, "report path; json reports also get a .csv table next to them");
  experiment->add_option("--format", exp_format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  experiment->add_flag("--timing", exp_timing, "record wall-clock time per row");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*estimate) {
      if (est_cover.empty() && est_set.empty()) throw std::runtime_error("estimate needs --cover and/or --set");
      const RandomFamily family = RandomFamily::parse(est.family);
      json flat;
      if (!est_cover.empty()) {
        const HullCover c = hull_cover_from_json(read_json(est_cover));
        FunctionalReport r;
        if (!est_set.empty()) {
          r = compare(index_set_from_json(read_json(est_set)), c, family, functional_config(est));
        } else {
          const auto fc = functional_config(est);
          TailSumProfile profile(c.points, family, fc);
          r.m_tilde = tilde_m(profile, fc);
          r.m_big = big_m_detail(profile, r.m_tilde, fc).estimate;
          r.sandwich_ok = sandwich_holds(r.m_tilde, r.m_big);
          r.cover_size = static_cast<std::size_t>(c.size());
          if (r.cover_size <= fc.little_m_limit) {
            try {
              r.m_little = little_m(c.points, family, OrderingMode::Heuristic, fc).estimate;
            } catch (const InfiniteMomentError& e) {
              r.notes.push_back(e.what());
            }
          }
        }
        if (est.format == "csv") {
          write_text(est.out, report_csv(flatten_report(r)));
        } else {
          json j = to_json(r);
          j["family"] = family.record();
          write_text(est.out, dump(j));
        }
      } else {
        const Estimate b = b_sup(index_set_from_json(read_json(est_set)), family, {est.mc, est.seed});
        flat = {{"b_sup", b.value}, {"b_sup_stderr", b.std_error}};
        write_text(est.out, est.format == "csv" ? report_csv(flat) : dump({{"family", family.record()}, {"b_sup", b}}));
      }
      return 0;
    }

    if (*cover) {
      const RandomFamily family = RandomFamily::parse(cov.family);
      RotationConfig rc;
      rc.seed = cov.seed;
      rc.trials = cov_trials;
      HullCover c;
      std::optional<IndexSet> set;
      std::vector<std::string> warnings;
      if (cov_kind == "canonical-l1") {
        c = canonical_l1_cover(cov_n);
        set = IndexSet::l1_ball(cov_n);
      } else if (cov_kind == "block-b2") {
        const long k = cov_k > 0 ? cov_k
                                 : std::clamp<long>(static_cast<long>(std::ceil(2.0 * std::log(static_cast<double>(cov_n)))), 1, cov_n);
        c = block_cover_b2(cov_n, k, rc.net);
        set = IndexSet::l2_ball(cov_n);
      } else if (cov_kind == "rotation-b2") {
        const RotationCover r = rotation_cover_b2(cov_n, family, rc);
        c = r.cover;
        warnings = r.diagnostics.warnings;
        set = IndexSet::l2_ball(cov_n);
      } else if (cov_kind == "ellipsoid") {
        if (cov_set.empty()) throw std::runtime_error("ellipsoid cover needs --set");
        set = index_set_from_json(read_json(cov_set));
        c = ellipsoid_cover(*set, family, rc);
      } else if (cov_kind == "lq") {
        const double q = q_value(cov_q);
        Eigen::MatrixXd A = Eigen::MatrixXd::Identity(cov_n, cov_n);
        if (!cov_set.empty()) {
          const IndexSet T = index_set_from_json(read_json(cov_set));
          if (T.kind() != SetKind::LinearImageLq && T.kind() != SetKind::LqBall)
            throw std::runtime_error("lq cover needs a B_q ball or a linear image of one");
          if (T.kind() == SetKind::LinearImageLq) A = T.matrix();
          set = T;
          c = lq_cover(A, T.q(), family, rc);
        } else {
          set = IndexSet::lq_ball(cov_n, q);
          c = lq_cover(A, q, family, rc);
        }
      } else {
        if (cov_set.empty()) throw std::runtime_error("gamma cover needs --set with a finite point set");
        set = index_set_from_json(read_json(cov_set));
        if (set->kind() != SetKind::FinitePointSet) throw std::runtime_error("gamma cover needs a finite point set");
        GammaConfig gc;
        gc.budget = {cov.mc, cov.seed};
        const GammaResult g = gamma_partition(set->matrix(), family, gc);
        c = extract_cover_from_partition(g.tree, family, gc.budget);
        c.parameters["gamma_upper"] = g.gamma_upper;
      }
      if (cov_scale != 1.0) {
        if (!(cov_scale > 0.0)) throw std::runtime_error("--scale must be positive");
        c.points *= cov_scale;
        c.claimed_radius *= cov_scale;
        c.parameters["scale"] = cov_scale;
      }
      for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
      write_text(cov.out, dump(to_json(c)));
      if (!cov_set_out.empty() && set) write_text(cov_set_out, dump(to_json(*set)));
      return 0;
    }

    if (*verify) {
      const RandomFamily family = RandomFamily::parse(ver.family);
      const HullCover c = hull_cover_from_json(read_json(ver_cover));
      const IndexSet T = index_set_from_json(read_json(ver_set));
      const ProbeReport probe = containment_probe(T, c, ver_dirs, ver.seed);
      const FunctionalReport r = compare(T, c, family, functional_config(ver));
      const bool contained = probe.consistent(ver_tol);
      const bool ok = contained && r.upper_bound_ok;
      json flat = flatten_report(r);
      flat["worst_ratio"] = probe.worst_ratio;
      flat["vertex_gauge"] = probe.vertex_gauge;
      flat["containment_ok"] = contained;
      flat["passed"] = ok;
      std::string text;
      if (ver.format == "csv") {
        text = report_csv(flat);
      } else {
        json j = to_json(r);
        j["family"] = family.record();
        j["worst_ratio"] = probe.worst_ratio;
        j["vertex_gauge"] = probe.vertex_gauge;
        j["vertices_checked"] = probe.vertices_checked;
        j["directions"] = probe.directions;
        j["witness"] = std::vector<double>(probe.witness.data(), probe.witness.data() + probe.witness.size());
        j["containment_ok"] = contained;
        j["passed"] = ok;
        text = dump(j);
      }
      if (!ver.out.empty()) write_text(ver.out, text);
      std::ostringstream os;
      os << "worst_ratio " << format_number(probe.worst_ratio) << "\n" << format_table(r);
      if (!contained) {
        os << "FAIL containment: support deficit along direction";
        for (Eigen::Index i = 0; i < probe.witness.size(); ++i) os << ' ' << format_number(probe.witness[i]);
        os << "\n";
      }
      if (!r.upper_bound_ok) os << "FAIL upper_bound: b_sup exceeds m_big beyond 4 standard errors\n";
      os << (ok ? "PASS\n" : "FAIL\n");
      std::cout << os.str();
      return ok ? 0 : 1;
    }

    if (*experiment) {
      if (!exp_config.empty()) exp = experiment_config_from_json(read_json(exp_config));
      exp.experiment = parse_experiment(exp_name);
      if (!exp_family.empty()) exp.family = exp_family;
      if (!exp_dims.empty()) exp.dims = exp_dims;
      if (!exp_seeds.empty()) exp.seeds = exp_seeds;
      if (exp_mc) exp.mc = exp_mc;
      if (exp_dirs) exp.directions = exp_dirs;
      if (exp_trials) exp.trials = exp_trials;
      if (exp_instances) exp.instances = exp_instances;
      if (exp_sel) exp.selection_samples = exp_sel;
      if (!exp_qs.empty()) {
        exp.qs.clear();
        for (const auto& q : exp_qs) exp.qs.push_back(q_value(q));
      }
      if (exp_timing) exp.timing = true;
      const ExperimentReport rep = run_experiment(exp);
      const std::string body = exp_format == "csv" ? rep.csv() : dump(rep.json());
      write_text(exp_out, body);
      if (exp_format == "json" && !exp_out.empty()) {
        std::string csv_path = exp_out;
        const auto dot = csv_path.rfind('.');
        csv_path = (dot == std::string::npos || csv_path.find('/', dot) != std::string::npos ? csv_path
                                                                                            : csv_path.substr(0, dot)) +
                   ".csv";
        write_text(csv_path, rep.csv());
      }
      for (const auto& a : rep.assertions)
        std::cerr << (a.pass ? "pass " : "FAIL ") << a.name << ": " << a.detail << "\n";
      return rep.passed() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
