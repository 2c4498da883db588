// ncpfr: experiment driver. Every subcommand reads an optional JSON config,
// writes CSV tables (units and config hash in the header) with SVG plots
// next to them, prints one line per check and exits 0 / 1 / 2.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ncpfr/common.hpp"
#include "ncpfr/flow.hpp"
#include "ncpfr/hilbert.hpp"
#include "ncpfr/io.hpp"
#include "ncpfr/jacobi.hpp"
#include "ncpfr/measures.hpp"
#include "ncpfr/parallel.hpp"
#include "ncpfr/polydyn.hpp"
#include "ncpfr/renorm.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace ncpfr;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitError = 2;

json poly(const char* family, double parameter) {
  return json{{"family", family}, {"parameter", parameter}};
}

json grid(double lo, double hi, int intervals) {
  json g = json::array();
  for (int k = 0; k <= intervals; ++k) g.push_back(lo + (hi - lo) * k / intervals);
  return g;
}

// Per-subcommand defaults; a config file overrides keys, flags override both.
json defaults_for(const std::string& cmd) {
  json c = {{"seed", 1}, {"precision", "double"}, {"max_d", kDefaultNodeCap}};
  if (cmd == "pressure") {
    c["polynomials"] = {poly("quadratic_a", 3)};
    c["n_range"] = {0, 0};  // 0: levels chosen from max_d
    c["t_grid"] = grid(0, 2, 20);
    c["x"] = {{"mode", "grid"}, {"points", {0.0}}};
    c["tolerances"] = {{"p0", 1e-9}, {"eps_hat", 0.05}};
  } else if (cmd == "lipschitz") {
    c["polynomials"] = {poly("quadratic_a", 5), poly("scaled_cheb3", 10)};
    c["n_range"] = {2, 8};
    c["t_grid"] = {0.0, 0.5, 1.0, 1.5, 2.0};
    c["x"] = {{"mode", "random"}, {"count", 20}};
    c["max_d"] = 8192;
    c["tolerances"] = {{"growth", 1.5}};
  } else if (cmd == "contraction") {
    c["polynomials"] = {poly("quadratic_a", 12)};
    c["n_range"] = {2, 8};
    c["t_grid"] = {0.0};
    c["x"] = {{"mode", "random"}, {"count", 20}};
    c["tolerances"] = {{"c_max", 0.9}, {"r2_min", 0.95}};
  } else if (cmd == "hilbert-norm") {
    c["polynomials"] = {poly("quadratic_a", 5)};
    c["n_range"] = {2, 8};
    c["t_grid"] = grid(0, 2, 8);
    c["x"] = {{"mode", "random"}, {"count", 5}};
    c["kernel"] = "stated";
    c["tolerances"] = {{"growth", 1.5}, {"koebe_factor", 1.5}, {"reference_n_max", 4}};
  } else if (cmd == "test-conditions") {
    c["polynomials"] = {poly("quadratic_a", 5)};
    c["n_range"] = {8, 8};
    c["t_grid"] = {0.0, 0.5, 1.5, 2.0};
    c["x"] = {{"mode", "grid"}, {"points", {0.0}}};
    c["tolerances"] = {{"eps_hat", 0.05}, {"exponent_rel", 0.2}, {"random_factor", 5.0},
                       {"random_count", 1000}};
  } else if (cmd == "flow-check") {
    c["polynomials"] = {poly("quadratic_a", 3)};
    c["n_range"] = {1, 6};
    c["t_grid"] = {0.0, 1.0, 2.0};
    c["x"] = {{"mode", "grid"}, {"points", {0.4}}};
    c["precision"] = "extended";
    c["tolerances"] = {{"identity", 1e-6}, {"r_closed", 1e-6}, {"resolvent", 1e-8},
                       {"ratio_lo", 30.0}, {"ratio_hi", 300.0}, {"abs_residual", 1e-4}};
  } else if (cmd == "renorm") {
    c["polynomials"] = {poly("quadratic_a", 12)};
    c["n_range"] = {1, 1};
    c["tolerances"] = {{"re", 1e-8}, {"c_max", 0.99}, {"m", 4}, {"pairs", 10},
                       {"independence", 1e-6}, {"start_steps", 5}, {"steps", 9},
                       {"defect_ratio", 0.9}, {"defect_levels", 3}, {"transport", 1e-6}};
  } else if (cmd == "weak-pfr") {
    c["polynomials"] = {poly("quadratic_a", 5)};
    c["n_range"] = {2, 8};
    c["t_grid"] = {0.0, 1.0};
    c["x"] = {{"mode", "random"}, {"count", 20}};
    c["tolerances"] = {{"q_max", 1.0}, {"center", 0.3}, {"alpha", 0.5}};
  }
  return c;
}

ExpandingPolynomial build_poly(const json& j) {
  const Family f = parse_family(j.at("family").get<std::string>());
  switch (f) {
    case Family::quadratic_a:
      return ExpandingPolynomial::make_quadratic(j.at("parameter").get<double>());
    case Family::scaled_cheb3:
      return ExpandingPolynomial::make_scaled_cheb3(j.at("parameter").get<double>());
    case Family::custom:
      break;
  }
  return ExpandingPolynomial::make_custom(j.at("coefficients").get<std::vector<double>>());
}

std::string poly_label(const json& j) {
  const std::string f = j.at("family").get<std::string>();
  if (f == "custom") return "custom";
  return f + "=" + format_double(j.at("parameter").get<double>());
}

struct Check {
  std::string name;
  double value = 0.0;
  std::string relation;
  double bound = 0.0;
  bool pass = false;
};

class Run {
 public:
  Run(std::string cmd, json cfg, fs::path out)
      : cmd_(std::move(cmd)), cfg_(std::move(cfg)), out_(std::move(out)) {
    hash_ = hex64(fnv1a(cfg_.dump()));
  }

  const json& cfg() const { return cfg_; }
  const std::string& hash() const { return hash_; }
  std::uint64_t seed() const { return cfg_.at("seed").get<std::uint64_t>(); }
  Precision precision() const { return parse_precision(cfg_.at("precision").get<std::string>()); }
  std::size_t cap() const { return cfg_.at("max_d").get<std::size_t>(); }
  double tol(const std::string& k) const { return cfg_.at("tolerances").at(k).get<double>(); }
  int n_lo() const { return cfg_.at("n_range").at(0).get<int>(); }
  int n_hi() const { return cfg_.at("n_range").at(1).get<int>(); }
  std::vector<int> levels() const {
    std::vector<int> v;
    for (int n = n_lo(); n <= n_hi(); ++n) v.push_back(n);
    return v;
  }
  std::vector<double> t_grid() const { return cfg_.at("t_grid").get<std::vector<double>>(); }

  std::vector<double> points(const ExpandingPolynomial& p) const {
    const json& x = cfg_.at("x");
    if (x.at("mode") == "grid") return x.at("points").get<std::vector<double>>();
    std::mt19937_64 rng(seed());
    return sample_julia_points(p, x.at("count").get<std::size_t>(), rng);
  }

  std::vector<std::pair<double, double>> pairs(const ExpandingPolynomial& p) const {
    const json& x = cfg_.at("x");
    if (x.at("mode") == "random") return sample_julia_pairs(p, x.at("count").get<std::size_t>(), seed());
    const auto pts = x.at("points").get<std::vector<double>>();
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j) out.emplace_back(pts[i], pts[j]);
    return out;
  }

  void check(std::string name, double value, const std::string& rel, double bound) {
    bool ok = false;
    if (rel == "<=") ok = value <= bound;
    else if (rel == "<") ok = value < bound;
    else if (rel == ">=") ok = value >= bound;
    else if (rel == ">") ok = value > bound;
    checks_.push_back({std::move(name), value, rel, bound, ok});
    const Check& c = checks_.back();
    std::printf("check %-44s %-24s %s %-12s %s\n", c.name.c_str(), format_double(c.value).c_str(),
                c.relation.c_str(), format_double(c.bound).c_str(), c.pass ? "pass" : "FAIL");
  }

  void flag(std::string name, bool ok) { check(std::move(name), ok ? 1.0 : 0.0, ">=", 1.0); }

  void note(const std::string& key, const std::string& value) {
    notes_.emplace_back(key, value);
    std::printf("info  %s=%s\n", key.c_str(), value.c_str());
  }

  void emit(const std::string& stem, const CsvTable& table, const std::optional<SvgPlot>& plot = {}) {
    write_file_atomic(out_ / (stem + ".csv"), table.render(hash_));
    if (plot) {
      SvgPlot p = *plot;
      p.csv_reference = stem + ".csv";
      write_file_atomic(out_ / (stem + ".svg"), p.render());
    }
  }

  int finish() {
    const bool all = std::all_of(checks_.begin(), checks_.end(), [](const Check& c) { return c.pass; });
    json s = {{"command", cmd_}, {"config_hash", hash_}, {"pass", all}, {"config", cfg_}};
    json arr = json::array();
    for (const auto& c : checks_)
      arr.push_back({{"name", c.name}, {"value", format_double(c.value)}, {"relation", c.relation},
                     {"bound", format_double(c.bound)}, {"pass", c.pass}});
    s["checks"] = arr;
    json info = json::object();
    for (const auto& [k, v] : notes_) info[k] = v;
    s["info"] = info;
    write_file_atomic(out_ / (cmd_ + "_summary.json"), s.dump(2) + "\n");
    std::size_t failed = 0;
    for (const auto& c : checks_)
      if (!c.pass) ++failed;
    std::printf("summary %s config_hash=%s checks=%zu failed=%zu %s\n", cmd_.c_str(), hash_.c_str(),
                checks_.size(), failed, all ? "pass" : "fail");
    return all ? kExitPass : kExitFail;
  }

 private:
  std::string cmd_;
  json cfg_;
  fs::path out_;
  std::string hash_;
  std::vector<Check> checks_;
  std::vector<std::pair<std::string, std::string>> notes_;
};

std::string tag(double v) { return format_double(v); }

// ---------------------------------------------------------------------------

void note_certificate(Run& run, const ExpandingPolynomial& p, const std::string& label) {
  // Reported only: the threshold A >= 9 is a convention, not a hypothesis we can check.
  const HyperbolicityCertificate cert = verify_hyperbolic(p, 8);
  run.note(label + " sufficiency_A", format_double(cert.sufficiency_A));
  run.note(label + " sufficiently_hyperbolic", cert.is_sufficient ? "yes" : "no");
}

void cmd_pressure(Run& run) {
  for (const json& pj : run.cfg().at("polynomials")) {
    const auto p = build_poly(pj);
    const std::string label = poly_label(pj);
    const Real x0 = static_cast<Real>(run.points(p).at(0));
    const OrbitLadder ladder = run.n_hi() == 0 ? make_default_ladder(p, run.cap(), x0)
                                               : make_orbit_ladder(p, run.n_lo(), run.n_hi(), x0);
    const PressureCurve curve = pressure_curve(ladder, run.t_grid());
    CsvTable tab("pressure " + label,
                 {{"t", "dimensionless"}, {"P", "log base N"}, {"max_residual", "log base N"}});
    for (std::size_t i = 0; i < curve.t_grid.size(); ++i)
      tab.add_row({curve.t_grid[i], curve.P_values[i], curve.max_residual[i]});
    SvgPlot plot{"pressure " + label, "t", "P(t)", false, "", {{label, curve.t_grid, curve.P_values}}};
    run.emit("pressure_" + label, tab, plot);
    run.note(label + ".levels", std::to_string(curve.n_lo) + ".." + std::to_string(curve.n_hi));

    const double P0 = pressure_estimate(ladder, 0.0).P;
    const double P1 = pressure_estimate(ladder, 1.0).P;
    run.check(label + " |P(0)-1|", std::fabs(P0 - 1.0), "<=", run.tol("p0"));
    run.check(label + " P(1)", P1, "<", 0.0);
    run.flag(label + " P strictly decreasing", curve.strictly_decreasing);

    const TwoSidedCheck two = two_sided_pressure_check(ladder, run.tol("eps_hat"));
    CsvTable ttab("two-sided pressure " + label, {{"t", "dimensionless"}, {"P(t)+P(2-t)", "log base N"}});
    for (std::size_t i = 0; i < two.t_grid.size(); ++i) ttab.add_row({two.t_grid[i], two.sums[i]});
    run.emit("two_sided_" + label, ttab,
             SvgPlot{"P(t)+P(2-t) " + label, "t", "sum", false, "", {{label, two.t_grid, two.sums}}});
    run.check(label + " max P(t)+P(2-t)", two.max_sum, "<", 0.0);

    const double delta = pressure_root(ladder);
    run.check(label + " delta", delta, ">", 0.0);
    run.check(label + " delta", delta, "<", 1.0);
    const Pressure2Fit fit2 = pressure2_exponent(ladder);
    run.check(label + " tau_hat", fit2.tau_hat, ">", 0.0);
  }
}

void cmd_lipschitz(Run& run, bool contraction) {
  for (const json& pj : run.cfg().at("polynomials")) {
    const auto p = build_poly(pj);
    const std::string label = poly_label(pj);
    const auto pairs = run.pairs(p);
    if (contraction) note_certificate(run, p, label);
    CsvTable tab((contraction ? "contraction " : "lipschitz ") + label,
                 {{"t", "dimensionless"}, {"n", "level"}, {"L_n", "operator norm per unit x"}});
    SvgPlot plot{(contraction ? "contraction " : "Lipschitz ") + label, "n", "L_n", true, "", {}};
    for (double t : run.t_grid()) {
      const ScalarContraction sc =
          scalar_contraction_experiment(p, t, run.levels(), pairs, run.precision(), run.cap());
      std::vector<double> nx;
      for (std::size_t i = 0; i < sc.levels.size(); ++i) {
        tab.add_row({t, static_cast<double>(sc.levels[i]), sc.L[i]});
        nx.push_back(sc.levels[i]);
      }
      plot.series.push_back({"t=" + tag(t), nx, sc.L});
      if (contraction) {
        std::printf("info  %s t=%s c_hat=%s r2=%s\n", label.c_str(), tag(t).c_str(),
                    format_double(sc.c_hat).c_str(), format_double(sc.r2).c_str());
        run.check(label + " t=" + tag(t) + " c_hat", sc.c_hat, "<=", run.tol("c_max"));
        run.check(label + " t=" + tag(t) + " R^2", sc.r2, ">=", run.tol("r2_min"));
      } else {
        const double worst = *std::max_element(sc.L.begin(), sc.L.end());
        const double ref = std::max(sc.L[0], sc.L.size() > 1 ? sc.L[1] : sc.L[0]);
        run.check(label + " t=" + tag(t) + " max L_n / max(L_lo, L_lo+1)", worst / ref, "<=",
                  run.tol("growth"));
      }
    }
    run.emit((contraction ? "contraction_" : "lipschitz_") + label, tab, plot);
  }
}

void cmd_hilbert(Run& run) {
  const KernelSign sign =
      run.cfg().value("kernel", std::string("stated")) == "conjugate" ? KernelSign::Conjugate : KernelSign::Stated;
  const int ref_n = static_cast<int>(run.tol("reference_n_max"));
  for (const json& pj : run.cfg().at("polynomials")) {
    const auto p = build_poly(pj);
    const std::string label = poly_label(pj);
    const auto xs = run.points(p);
    const auto rows = ht_norm_scan(p, run.t_grid(), run.levels(), xs, sign, run.cap());
    CsvTable tab("H_t norms " + label, {{"t", "dimensionless"}, {"n", "level"}, {"x", "position"},
                                        {"ht_norm", "operator norm"}, {"b_norm", "operator norm"},
                                        {"diag_max", "operator norm"}, {"koebe", "dimensionless"}});
    std::map<double, std::map<int, double>> norm, diag, koebe;
    for (const auto& r : rows) {
      tab.add_row({r.t, static_cast<double>(r.n), r.x, r.ht_norm, r.b_norm, r.diag_max, r.koebe});
      norm[r.t][r.n] = std::max(norm[r.t][r.n], r.ht_norm);
      diag[r.t][r.n] = std::max(diag[r.t][r.n], r.diag_max);
      koebe[r.t][r.n] = std::max(koebe[r.t][r.n], r.koebe);
    }
    SvgPlot plot{"||H_t|| " + label, "n", "max over x", false, "", {}};
    for (const auto& [t, byn] : norm) {
      double all = 0.0, ref = 0.0, kfit = 0.0, dmax = 0.0;
      std::vector<double> nx, ny;
      for (const auto& [n, v] : byn) {
        all = std::max(all, v);
        if (n <= ref_n) {
          ref = std::max(ref, v);
          kfit = std::max(kfit, koebe[t][n]);
        }
        dmax = std::max(dmax, diag[t][n]);
        nx.push_back(n);
        ny.push_back(v);
      }
      plot.series.push_back({"t=" + tag(t), nx, ny});
      run.check(label + " t=" + tag(t) + " max_n ||H|| / max_{n<=" + std::to_string(ref_n) + "}", all / ref,
                "<=", run.tol("growth"));
      run.check(label + " t=" + tag(t) + " max diag / fitted Koebe", kfit > 0 ? dmax / kfit : 0.0, "<=",
                run.tol("koebe_factor"));
    }
    run.emit("hilbert_norm_" + label, tab, plot);
  }
}

void cmd_test_conditions(Run& run) {
  const double eps = run.tol("eps_hat");
  const int n = run.n_hi();
  for (const json& pj : run.cfg().at("polynomials")) {
    const auto p = build_poly(pj);
    const std::string label = poly_label(pj);
    const Real x0 = static_cast<Real>(run.points(p).at(0));
    const OrbitLadder ladder = make_default_ladder(p, run.cap(), x0);
    const auto hierarchy = dyadic_hierarchy(p, n, run.cap());
    CsvTable prof("testing profile " + label,
                  {{"t", "dimensionless"}, {"depth", "n-k levels"}, {"sup_poisson", "weight product"},
                   {"sup_box", "weight product"}});
    CsvTable dbl("doubling " + label, {{"t", "dimensionless"}, {"level", "m"}, {"factor", "ratio"}});
    SvgPlot plot{"Poisson profile " + label, "n-k", "sup P_I u P_I v", true, "", {}};
    for (double t : run.t_grid()) {
      const double tau0 = gauge_exponent(ladder, t, eps);
      const TwoWeightSystem sys = step_weights(p, n, t, eps, static_cast<double>(x0), run.cap());
      const PoissonTestReport r = poisson_test_scan(sys, hierarchy, tau0, p.degree(),
                                                    static_cast<std::size_t>(run.tol("random_count")), run.seed());
      std::vector<double> dx;
      for (std::size_t i = 0; i < r.depth.size(); ++i) {
        prof.add_row({t, static_cast<double>(r.depth[i]), r.sup_poisson[i], r.sup_box[i]});
        dx.push_back(r.depth[i]);
      }
      for (std::size_t m = 0; m < r.doubling_factor.size(); ++m)
        dbl.add_row({t, static_cast<double>(m + 1), r.doubling_factor[m]});
      plot.series.push_back({"t=" + tag(t), dx, r.sup_poisson});
      const std::string key = label + " t=" + tag(t);
      run.note(key + " tau0", format_double(tau0));
      run.note(key + " fitted_exponent", format_double(r.fitted_exponent));
      run.note(key + " fitted_exponent_box", format_double(r.fitted_exponent_box));
      run.flag(key + " profile monotone", r.monotone);
      run.check(key + " |fit - 2 tau0| / (2 tau0)", std::fabs(r.fitted_exponent - 2 * tau0) / (2 * tau0), "<=",
                run.tol("exponent_rel"));
      run.check(key + " delta_hat", r.delta_hat, ">", 0.0);
      run.check(key + " sup random / sup dyadic", r.sup_random / r.sup_dyadic, "<=", run.tol("random_factor"));
    }
    run.emit("test_conditions_" + label, prof, plot);
    run.emit("doubling_" + label, dbl);
  }
}

void cmd_flow_check(Run& run) {
  const std::vector<std::complex<double>> zs = {{0.0, 2.0}, {3.0, 1.0}};
  for (const json& pj : run.cfg().at("polynomials")) {
    const auto p = build_poly(pj);
    const std::string label = poly_label(pj);
    CsvTable tab("flow identities " + label,
                 {{"t", "dimensionless"}, {"n", "level"}, {"x", "position"}, {"d", "count"},
                  {"resolvent", "relative"}, {"r_closed", "relative"}, {"column_sum", "relative"},
                  {"d_rows", "absolute"}, {"d_last_row", "absolute"}, {"lar2", "absolute"},
                  {"residual_h1e-3", "operator norm"}, {"residual_h1e-4", "operator norm"}});
    SvgPlot plot{"flow residual at h=1e-4 " + label, "n", "residual", true, "", {}};
    double w_res = 0, w_r = 0, w_col = 0, w_rows = 0, w_last = 0, w_lar2 = 0, w_abs = 0;
    double ratio_lo = 1e300, ratio_hi = 0;
    for (double t : run.t_grid()) {
      std::vector<double> nx, ny;
      for (double x : run.points(p))
        for (int n : run.levels()) {
          const FlowOperators ops = build_flow_ops(p, n, t, x, run.precision());
          double res = 0;
          for (auto z : zs) {
            const auto lhs = resolvent_00(ops.J, z);
            const auto rhs = stieltjes_transform(ops.measure, z);
            res = std::max(res, std::abs(lhs - rhs) / std::abs(rhs));
          }
          const RClosedFormReport rr = verify_R_closed_form(ops);
          const DIdentityReport dr = verify_D_identity(ops);
          const double r3 = flow_residual(p, n, t, x, 1e-3, run.precision());
          const double r4 = flow_residual(p, n, t, x, 1e-4, run.precision());
          const double d = static_cast<double>(ops.J.size());
          tab.add_row({t, static_cast<double>(n), x, d, res, rr.max_residual, rr.column_sum, dr.rows_residual,
                       dr.last_row_residual, dr.lar2_residual, r3, r4});
          nx.push_back(n);
          ny.push_back(r4);
          w_res = std::max(w_res, res);
          w_r = std::max(w_r, rr.max_residual);
          w_col = std::max(w_col, rr.column_sum);
          w_rows = std::max(w_rows, dr.rows_residual);
          w_last = std::max(w_last, dr.last_row_residual);
          w_lar2 = std::max(w_lar2, dr.lar2_residual);
          w_abs = std::max(w_abs, r4);
          if (d >= 2) {
            ratio_lo = std::min(ratio_lo, r3 / r4);
            ratio_hi = std::max(ratio_hi, r3 / r4);
          }
        }
      plot.series.push_back({"t=" + tag(t), nx, ny});
    }
    run.emit("flow_check_" + label, tab, plot);
    run.check(label + " resolvent identity", w_res, "<=", run.tol("resolvent"));
    run.check(label + " R closed form", w_r, "<=", run.tol("r_closed"));
    run.check(label + " R column sums", w_col, "<=", run.tol("r_closed"));
    run.check(label + " [J,D] rows 0..d-2", w_rows, "<=", run.tol("identity"));
    run.check(label + " [J,D] last row", w_last, "<=", run.tol("identity"));
    run.check(label + " LaR2", w_lar2, "<=", run.tol("identity"));
    run.check(label + " min residual(1e-3)/residual(1e-4)", ratio_lo, ">=", run.tol("ratio_lo"));
    run.check(label + " max residual(1e-3)/residual(1e-4)", ratio_hi, "<=", run.tol("ratio_hi"));
    run.check(label + " residual at h=1e-4", w_abs, "<=", run.tol("abs_residual"));
  }
}

void cmd_renorm(Run& run) {
  const int n = run.n_lo();
  for (const json& pj : run.cfg().at("polynomials")) {
    const auto p = build_poly(pj);
    const std::string label = poly_label(pj);
    const Precision prec = run.precision();
    note_certificate(run, p, label);

    const JacobiMatrix one{{0.0}, {}};
    const JacobiMatrix two{{0.0, 0.0}, {1.0}};
    const RenormResult rr = renorm_map(p, n, two, prec, kStandardZ, run.cap());
    CsvTable re("renormalization equation " + label,
                {{"re_z", "complex plane"}, {"im_z", "complex plane"}, {"re_residual", "relative"},
                 {"decimated_residual", "relative"}});
    double worst = 0;
    for (std::size_t i = 0; i < rr.z.size(); ++i) {
      const double dec = decimated_resolvent_residual(p, n, two, rr.J_out, rr.z[i]);
      re.add_row({rr.z[i].real(), rr.z[i].imag(), rr.re_residuals[i], dec});
      worst = std::max(worst, rr.re_residuals[i]);
    }
    run.emit("renorm_equation_" + label, re);
    run.check(label + " (0,0) RE residual", worst, "<=", run.tol("re"));

    const auto m = static_cast<std::size_t>(run.tol("m"));
    const auto pairs = static_cast<std::size_t>(run.tol("pairs"));
    const ContractionEstimate ce = contraction_estimate(p, n, m, pairs, run.seed(), prec);
    CsvTable ct("renormalization contraction " + label,
                {{"pair_id", "index"}, {"input_norm", "coefficient sup"}, {"output_norm", "coefficient sup"},
                 {"ratio", "dimensionless"}});
    for (std::size_t i = 0; i < ce.ratios.size(); ++i)
      ct.add_row({static_cast<double>(i), ce.input_norms[i], ce.output_norms[i], ce.ratios[i]});
    run.emit("renorm_contraction_" + label, ct);
    run.check(label + " c_hat", ce.c_hat, "<=", run.tol("c_max"));

    const int s0 = static_cast<int>(run.tol("start_steps"));
    const auto A = iterate_fixed_point(p, n, one, s0, 1, prec);
    const auto B = iterate_fixed_point(p, n, two, s0, 1, prec);
    const auto d = static_cast<std::size_t>(std::llround(std::pow(p.degree(), n)));
    const std::size_t window = std::min(A.J.size(), B.J.size()) - d * static_cast<std::size_t>(s0);
    run.check(label + " start independence", start_independence(A.J, B.J, window), "<=",
              run.tol("independence"));

    const int steps = static_cast<int>(run.tol("steps"));
    const int levels = static_cast<int>(run.tol("defect_levels"));
    const LimitPeriodicResult F = iterate_fixed_point(p, n, one, steps, levels + 1, prec);
    CsvTable dt("almost periodicity defects " + label,
                {{"l", "level"}, {"period", "indices"}, {"defect_a", "coefficient"}, {"defect_b", "coefficient"}});
    std::vector<double> lx, la, lb;
    for (std::size_t l = 0; l < F.periods.size(); ++l) {
      dt.add_row({static_cast<double>(l + 1), static_cast<double>(F.periods[l]), F.defect_a[l], F.defect_b[l]});
      lx.push_back(static_cast<double>(l + 1));
      la.push_back(F.defect_a[l]);
      lb.push_back(F.defect_b[l]);
    }
    run.emit("renorm_defects_" + label, dt,
             SvgPlot{"defects " + label, "l", "sup |c_{k+d^l} - c_k|", true, "", {{"a", lx, la}, {"b", lx, lb}}});
    for (int l = 0; l < levels; ++l) {
      const double ratio = static_cast<std::size_t>(l) < F.defect_ratio.size() ? F.defect_ratio[l] : 1e300;
      run.check(label + " defect ratio l=" + std::to_string(l + 1), ratio, "<=", run.tol("defect_ratio"));
    }

    CsvTable coeff("fixed point coefficients " + label, {{"k", "index"}, {"a", "coefficient"}, {"b", "coefficient"}});
    for (std::size_t k = 0; k < F.J.size(); ++k)
      coeff.add_row({static_cast<double>(k), F.J.a[k], k + 1 < F.J.size() ? F.J.b[k] : 0.0});
    run.emit("renorm_fixed_point_" + label, coeff);

    // t = 0 invariant measure from an independent base point, pulled back step by step.
    WeightedDiscreteMeasure mu = WeightedDiscreteMeasure::from_weights({0.5L}, {1.0L});
    for (int s = 0; s < steps * n; ++s) mu = pfr_pullback(p, mu, 0.0);
    run.check(label + " transport to invariant measure", transport_distance(spectral_measure(F.J), mu), "<=",
              run.tol("transport"));
  }
}

void cmd_weak_pfr(Run& run) {
  for (const json& pj : run.cfg().at("polynomials")) {
    const auto p = build_poly(pj);
    const std::string label = poly_label(pj);
    const auto pairs = run.pairs(p);
    CsvTable tab("weak PFR decay " + label,
                 {{"t", "dimensionless"}, {"n", "level"}, {"sup_difference", "integral of psi"}});
    SvgPlot plot{"weak PFR " + label, "n", "sup |int psi dmu1 - int psi dmu2|", true, "", {}};
    for (double t : run.t_grid()) {
      const WeakPfrResult r = weak_pfr_experiment(p, t, run.n_lo(), run.n_hi(), pairs, run.tol("center"),
                                                  run.tol("alpha"), run.cap());
      std::vector<double> nx;
      for (std::size_t i = 0; i < r.levels.size(); ++i) {
        tab.add_row({t, static_cast<double>(r.levels[i]), r.sup_difference[i]});
        nx.push_back(r.levels[i]);
      }
      plot.series.push_back({"t=" + tag(t), nx, r.sup_difference});
      run.note(label + " t=" + tag(t) + " r2", format_double(r.r2));
      run.check(label + " t=" + tag(t) + " q_hat", r.q_hat, "<", run.tol("q_max"));
    }
    run.emit("weak_pfr_" + label, tab, plot);
  }
}

json load_config(const std::string& cmd, const std::string& path) {
  json cfg = defaults_for(cmd);
  if (path.empty()) return cfg;
  std::ifstream f(path);
  if (!f) throw Error("cannot read config " + path);
  json user = json::parse(f);
  if (!user.is_object()) throw DomainError("config must be a JSON object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    if (it.key() == "tolerances") {
      for (auto jt = it.value().begin(); jt != it.value().end(); ++jt) cfg["tolerances"][jt.key()] = jt.value();
    } else if (it.key() != "out") {
      cfg[it.key()] = it.value();
    }
  }
  if (user.contains("out")) cfg["__out"] = user["out"];
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Balanced-measure Jacobi matrices of expanding polynomials: experiment driver.\n"
               "Threads: NCPFR_THREADS (default: hardware concurrency)."};
  app.require_subcommand(1);
  std::string config_path, out_dir = "out", precision;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_d;
  const std::vector<std::pair<std::string, std::string>> names = {
      {"pressure", "pressure curve, root, two-sided sum and tau_hat"},
      {"lipschitz", "per-level Lipschitz constants of x -> J(x)"},
      {"contraction", "geometric decay of those constants"},
      {"hilbert-norm", "operator norms of the weighted Hilbert matrices"},
      {"test-conditions", "Poisson and box testing profiles, doubling"},
      {"flow-check", "flow identities, R closed form, ODE residuals"},
      {"renorm", "renormalization map, contraction and fixed point"},
      {"weak-pfr", "decay of pulled-back Holder test functions"}};
  for (const auto& [name, help] : names) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON experiment config");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "RNG seed");
    sub->add_option("--precision", precision, "double or extended")->check(CLI::IsMember({"double", "extended"}));
    sub->add_option("--max-d", max_d, "cap on the number of preimage nodes");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitPass : kExitError;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    json cfg = load_config(cmd, config_path);
    fs::path out = out_dir;
    if (cfg.contains("__out") && app.get_subcommands().front()->count("--out") == 0)
      out = cfg["__out"].get<std::string>();
    cfg.erase("__out");
    if (seed) cfg["seed"] = *seed;
    if (!precision.empty()) cfg["precision"] = precision;
    if (max_d) cfg["max_d"] = *max_d;
    parse_precision(cfg.at("precision").get<std::string>());
    Run run(cmd, cfg, out);
    std::printf("run %s config_hash=%s threads=%zu out=%s\n", cmd.c_str(), run.hash().c_str(), thread_count(),
                out.string().c_str());
    if (cmd == "pressure") cmd_pressure(run);
    else if (cmd == "lipschitz") cmd_lipschitz(run, false);
    else if (cmd == "contraction") cmd_lipschitz(run, true);
    else if (cmd == "hilbert-norm") cmd_hilbert(run);
    else if (cmd == "test-conditions") cmd_test_conditions(run);
    else if (cmd == "flow-check") cmd_flow_check(run);
    else if (cmd == "renorm") cmd_renorm(run);
    else if (cmd == "weak-pfr") cmd_weak_pfr(run);
    return run.finish();
  } catch (const json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
  }
  return kExitError;
}
