// Batch front-end: experiment configs in, machine-readable reports out.
//
// Tasks: heat-trace, zeta, resolvent, residue, parametrix, verify.
// Outputs (per task) into --out: samples.csv, fit.json, residue.json,
// parametrix.json, verify.json.  All floating values are emitted as
// 17-significant-digit decimal strings, complex scalars as [re, im] pairs,
// so repeated runs produce byte-identical reports.
//
// Exit codes: 0 success, 1 failed invariant, 2 schema violation,
// 3 module precondition failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "shubin/parametrix.hpp"
#include "shubin/residue.hpp"

using namespace shubin;
using Json = nlohmann::ordered_json;

namespace {

struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json cplx(const Complex& z) { return Json::array({num17(z.real()), num17(z.imag())}); }

std::string rat_str(const Rational& r) {
  return numerator(r).str() + "/" + denominator(r).str();
}

int require_int(const Json& cfg, const char* key) {
  if (!cfg.contains(key) || !cfg[key].is_number_integer())
    throw SchemaError(std::string(key) + ": required integer field");
  return cfg[key].get<int>();
}

double parse_decimal(const Json& j, const char* what) {
  if (j.is_number_integer()) return static_cast<double>(j.get<long long>());
  if (!j.is_string()) throw SchemaError(std::string(what) + ": expected a decimal string");
  try {
    std::size_t used = 0;
    std::string s = j.get<std::string>();
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw SchemaError(std::string(what) + ": bad decimal literal");
  }
}

Complex parse_complex(const Json& j, const char* what) {
  if (!j.is_array() || j.size() != 2)
    throw SchemaError(std::string(what) + ": expected [re, im]");
  return {parse_decimal(j[0], what), parse_decimal(j[1], what)};
}

Rational parse_rational(const Json& j, const char* what) {
  if (j.is_number_integer()) return Rational(j.get<long long>());
  if (!j.is_string()) throw SchemaError(std::string(what) + ": expected a rational string");
  std::string s = j.get<std::string>();
  auto slash = s.find('/');
  try {
    long long num = std::stoll(slash == std::string::npos ? s : s.substr(0, slash));
    long long den = slash == std::string::npos ? 1 : std::stoll(s.substr(slash + 1));
    return Rational(num, den);
  } catch (const std::exception&) {
    throw SchemaError(std::string(what) + ": bad rational literal");
  }
}

GroupElement parse_element(const Json& j, int n) {
  GroupElement e = GroupElement::identity(n);
  if (j.contains("w")) {
    const auto& w = j["w"];
    if (!w.is_array() || static_cast<int>(w.size()) != n)
      throw SchemaError("element.w: expected n complex entries");
    for (int k = 0; k < n; ++k) e.w[k] = parse_complex(w[k], "element.w");
  }
  std::vector<int> sigma(n);
  for (int k = 0; k < n; ++k) sigma[k] = k;
  if (j.contains("perm")) {
    const auto& p = j["perm"];
    if (!p.is_array() || static_cast<int>(p.size()) != n)
      throw SchemaError("element.perm: expected n entries");
    for (int k = 0; k < n; ++k) {
      int v = p[k].get<int>();  // 1-based targets
      if (v < 1 || v > n) throw SchemaError("element.perm: entries must lie in 1..n");
      sigma[k] = v - 1;
    }
  }
  std::vector<double> angles(n, 0.0);
  if (j.contains("phases")) {
    const auto& ph = j["phases"];
    if (!ph.is_array() || static_cast<int>(ph.size()) != n)
      throw SchemaError("element.phases: expected n angle strings");
    for (int k = 0; k < n; ++k) angles[k] = parse_decimal(ph[k], "element.phases");
  }
  try {
    e.g = MonomialUnitary::from_angles(sigma, angles);
  } catch (const std::exception& ex) {
    throw SchemaError(std::string("element: ") + ex.what());
  }
  return e;
}

NumericSymbol parse_symbol(const Json& j, int n) {
  if (!j.contains("order")) throw SchemaError("symbol.order: required");
  NumericSymbol s(n, j["order"].get<int>());
  if (!j.contains("components") || !j["components"].is_array())
    throw SchemaError("symbol.components: expected a list");
  for (const auto& cj : j["components"]) {
    int drop = cj.at("drop").get<int>();
    NumericComponent c(2 * n, s.order() - drop);
    for (const auto& tj : cj.at("terms")) {
      Complex coef = parse_complex(tj.at("coef"), "symbol term coef");
      const auto& mj = tj.at("monomial");
      if (!mj.is_array() || static_cast<int>(mj.size()) != 2 * n)
        throw SchemaError("symbol term monomial: expected 2n integers");
      std::vector<int> mono;
      for (const auto& v : mj) mono.push_back(v.get<int>());
      Rational rp = tj.contains("radialPower")
                        ? parse_rational(tj["radialPower"], "symbol term radialPower")
                        : Rational(0);
      try {
        c.add_term(coef, MultiIndex(mono), rp);
      } catch (const std::exception& ex) {
        throw SchemaError(std::string("symbol term: ") + ex.what());
      }
    }
    s.set_component(drop, std::move(c));
  }
  return s;
}

struct RecipeSpec {
  OperatorRecipe A;
  int ordA = 0;
};

RecipeSpec parse_recipe(const Json& j, int n) {
  RecipeSpec out{recipe_identity(), 0};
  if (!j.contains("factors") || !j["factors"].is_array())
    throw SchemaError("recipe.factors: expected a list");
  for (const auto& fj : j["factors"]) {
    if (fj.contains("h0Power")) {
      int k = fj["h0Power"].get<int>();
      if (k < 0) throw SchemaError("recipe h0Power: negative exponent");
      out.A = recipe_product(out.A, recipe_H0_power(k, n));
      out.ordA -= 2 * k;
    } else if (fj.contains("poly")) {
      PolySymbol P;
      for (const auto& tj : fj["poly"]) {
        Complex coef = parse_complex(tj.at("coef"), "recipe poly coef");
        const auto& mj = tj.at("monomial");
        if (!mj.is_array() || static_cast<int>(mj.size()) != 2 * n)
          throw SchemaError("recipe poly monomial: expected 2n integers");
        std::vector<int> mono;
        for (const auto& v : mj) mono.push_back(v.get<int>());
        P.push_back({coef, MultiIndex(mono)});
      }
      out.A = recipe_product(out.A, recipe_weyl_poly(P, n));
      out.ordA += poly_degree(P);
    } else {
      throw SchemaError("recipe factor: expected h0Power or poly");
    }
  }
  return out;
}

std::vector<double> parse_grid(const Json& j) {
  std::vector<double> grid;
  if (j.contains("points")) {
    for (const auto& p : j["points"]) grid.push_back(parse_decimal(p, "grid.points"));
  } else if (j.contains("start") && j.contains("ratio") && j.contains("count")) {
    double t = parse_decimal(j["start"], "grid.start");
    double r = parse_decimal(j["ratio"], "grid.ratio");
    int count = j["count"].get<int>();
    if (count < 1 || r <= 0 || t <= 0) throw SchemaError("grid: bad geometric spec");
    for (int i = 0; i < count; ++i, t *= r) grid.push_back(t);
  } else {
    throw SchemaError("grid: expected points or start/ratio/count");
  }
  if (grid.empty()) throw SchemaError("grid: empty");
  return grid;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << text;
}

void write_json(const std::filesystem::path& path, const Json& j) {
  write_text(path, j.dump(2) + "\n");
}

Json fit_to_json(const FitResult& fit) {
  Json basis = Json::array();
  for (std::size_t k = 0; k < fit.basis.size(); ++k) {
    Json b;
    b["exponent"] = rat_str(fit.basis[k].exponent);
    b["log"] = fit.basis[k].has_log;
    b["coefficient"] = cplx(fit.coef[k]);
    basis.push_back(std::move(b));
  }
  Json out;
  out["basis"] = std::move(basis);
  out["residualNorm"] = num17(fit.residual_norm);
  out["conditioning"] = num17(fit.conditioning);
  return out;
}

// ---------------------------------------------------------------------------
// tasks
// ---------------------------------------------------------------------------

struct Options {
  std::filesystem::path out;
  int cutoff_override = -1;
};

int run_heat_trace(const Json& cfg, const Options& opt) {
  const int n = require_int(cfg, "n");
  AuxiliarySpec aux{cfg.contains("auxShift") ? parse_decimal(cfg["auxShift"], "auxShift") : 0.0,
                    2};
  GroupElement e = cfg.contains("element") ? parse_element(cfg["element"], n)
                                           : GroupElement::identity(n);
  RecipeSpec rs = cfg.contains("recipe") ? parse_recipe(cfg["recipe"], n)
                                         : RecipeSpec{recipe_identity(), 0};
  auto grid = cfg.contains("grid") ? parse_grid(cfg["grid"]) : default_grid();

  double growth_p = 0;
  for (const auto& f : rs.A(8)) growth_p += f.growth_p;

  std::string csv = "t,value_re,value_im,certified_tail\n";
  std::vector<std::pair<double, Complex>> samples;
  for (double t : grid) {
    int N = opt.cutoff_override > 0 ? opt.cutoff_override
                                    : heat_cutoff(t, n, growth_p, 1e-13);
    auto r = heat_trace(e, rs.A, t, aux, N);
    samples.push_back({t, r.value});
    csv += num17(t) + "," + num17(r.value.real()) + "," + num17(r.value.imag()) + "," +
           num17(r.certified_tail) + "\n";
  }
  write_text(opt.out / "samples.csv", csv);

  const int m = trace_detail::fixed_dim(e.g);
  int nTerms = cfg.contains("nTerms") ? cfg["nTerms"].get<int>() : 7;
  auto fit = fit_expansion(samples, m, rs.ordA, aux.m_order, nTerms);
  Json fj = fit_to_json(fit);
  fj["lattice"] = {{"m", m}, {"ordA", rs.ordA}, {"mfrak", aux.m_order}};
  write_json(opt.out / "fit.json", fj);
  return 0;
}

int run_zeta(const Json& cfg, const Options& opt) {
  const int n = require_int(cfg, "n");
  AuxiliarySpec aux{cfg.contains("auxShift") ? parse_decimal(cfg["auxShift"], "auxShift") : 0.0,
                    2};
  GroupElement e = cfg.contains("element") ? parse_element(cfg["element"], n)
                                           : GroupElement::identity(n);
  RecipeSpec rs = cfg.contains("recipe") ? parse_recipe(cfg["recipe"], n)
                                         : RecipeSpec{recipe_identity(), 0};
  if (!cfg.contains("arguments")) throw SchemaError("zeta: arguments required");
  int N = opt.cutoff_override > 0 ? opt.cutoff_override
                                  : (cfg.contains("cutoff") ? cfg["cutoff"].get<int>() : 20000);
  std::string csv = "z_re,z_im,value_re,value_im,certified_tail\n";
  for (const auto& zj : cfg["arguments"]) {
    Complex z = parse_complex(zj, "zeta argument");
    auto r = zeta_value(e, rs.A, rs.ordA, z, aux, N);
    csv += num17(z.real()) + "," + num17(z.imag()) + "," + num17(r.value.real()) + "," +
           num17(r.value.imag()) + "," + num17(r.certified_tail) + "\n";
  }
  write_text(opt.out / "samples.csv", csv);
  return 0;
}

int run_resolvent(const Json& cfg, const Options& opt) {
  const int n = require_int(cfg, "n");
  AuxiliarySpec aux{cfg.contains("auxShift") ? parse_decimal(cfg["auxShift"], "auxShift") : 0.0,
                    2};
  GroupElement e = cfg.contains("element") ? parse_element(cfg["element"], n)
                                           : GroupElement::identity(n);
  RecipeSpec rs = cfg.contains("recipe") ? parse_recipe(cfg["recipe"], n)
                                         : RecipeSpec{recipe_identity(), 0};
  if (!cfg.contains("shifts")) throw SchemaError("resolvent: shifts required");
  int K = cfg.contains("power") ? cfg["power"].get<int>() : n + 3;
  int N = opt.cutoff_override > 0 ? opt.cutoff_override
                                  : (cfg.contains("cutoff") ? cfg["cutoff"].get<int>() : 20000);
  std::string csv = "s,value_re,value_im,certified_tail\n";
  for (const auto& sj : cfg["shifts"]) {
    double s = parse_decimal(sj, "resolvent shift");
    auto r = resolvent_trace(e, rs.A, rs.ordA, Complex(-s, 0), K, aux, N);
    csv += num17(s) + "," + num17(r.value.real()) + "," + num17(r.value.imag()) + "," +
           num17(r.certified_tail) + "\n";
  }
  write_text(opt.out / "samples.csv", csv);
  return 0;
}

int run_residue(const Json& cfg, const Options& opt) {
  const int n = require_int(cfg, "n");
  AuxiliarySpec aux{cfg.contains("auxShift") ? parse_decimal(cfg["auxShift"], "auxShift") : 0.0,
                    2};
  GroupElement e = cfg.contains("element") ? parse_element(cfg["element"], n)
                                           : GroupElement::identity(n);
  if (!cfg.contains("symbol")) throw SchemaError("residue: symbol required");
  NumericSymbol A = parse_symbol(cfg["symbol"], n);
  int maxOrder = cfg.contains("maxOrder") ? cfg["maxOrder"].get<int>() : 16;

  Json rj;
  Complex symbolic = element_residue(e, A, maxOrder);
  rj["symbolic"] = cplx(symbolic);

  // closed printed form when the element is diagonal with a fixed sphere and
  // the symbol sits exactly at the critical order
  auto red = reduce_element(e, A);
  auto fpd = fixed_point_data(red.e.g);
  if (fpd.m5 > 0 && red.a.order() == -2 * fpd.m5) {
    Complex printed = residue_printed(red.e, red.a.component(0));
    rj["printed"] = cplx(printed);
    if (std::abs(printed) > 0) rj["assembledOverPrinted"] = cplx(symbolic / printed);
  }

  if (cfg.contains("recipe")) {
    RecipeSpec rs = parse_recipe(cfg["recipe"], n);
    auto grid = cfg.contains("grid") ? parse_grid(cfg["grid"]) : default_grid();
    int nTerms = cfg.contains("nTerms") ? cfg["nTerms"].get<int>() : -1;
    auto lc = log_coefficient(e, rs.A, rs.ordA, aux, grid, nTerms);
    Complex spectral = static_cast<double>(aux.m_order) * lc.value;
    rj["spectral"] = cplx(spectral);
    rj["spectralUncertainty"] = num17(static_cast<double>(aux.m_order) * lc.uncertainty);
    rj["crossEngineDifference"] = num17(std::abs(spectral - symbolic));
  }

  bool pass = true;
  if (cfg.contains("expected")) {
    Complex oracle = parse_complex(cfg["expected"], "expected");
    double tol = cfg.contains("tolerance") ? parse_decimal(cfg["tolerance"], "tolerance")
                                           : 1e-6;
    double defect = std::abs(symbolic - oracle);
    rj["oracle"] = cplx(oracle);
    rj["oracleDefect"] = num17(defect);
    pass = defect < tol;
    rj["pass"] = pass;
  }
  write_json(opt.out / "residue.json", rj);
  return pass ? 0 : 1;
}

int run_parametrix(const Json& cfg, const Options& opt) {
  const int n = require_int(cfg, "n");
  int depth = cfg.contains("depth") ? cfg["depth"].get<int>() : 6;
  auto h = oscillator_symbol(n);
  auto p = resolvent_parametrix(h, depth);

  Json terms = Json::array();
  for (const auto& [j, bucket] : p.drops()) {
    for (const auto& t : bucket) {
      Json tj;
      tj["drop"] = j;
      tj["ell"] = t.power;
      tj["K"] = p.K();
      Json comps = Json::array();
      for (const auto& st : t.d.terms()) {
        Json sj;
        sj["coef"] = Json::array({rat_str(st.coef.re), rat_str(st.coef.im)});
        sj["monomial"] = st.monomial.entries;
        sj["radialPower"] = rat_str(st.radial_power);
        comps.push_back(std::move(sj));
      }
      tj["terms"] = std::move(comps);
      terms.push_back(std::move(tj));
    }
  }
  auto residual = compose_check(p, h, depth);
  Json pj;
  pj["lead"] = p.lead();
  pj["depth"] = depth;
  pj["terms"] = std::move(terms);
  pj["identityResidualTerms"] = residual.size();
  write_json(opt.out / "parametrix.json", pj);
  return residual.empty() ? 0 : 1;
}

// default invariant suite: fast closed-form checks across the modules
int run_verify(const Options& opt) {
  const double pi = std::numbers::pi;
  Json checks = Json::array();
  bool all_pass = true;
  auto record = [&](const std::string& name, double defect, double tol) {
    bool pass = defect < tol;
    all_pass = all_pass && pass;
    Json c;
    c["name"] = name;
    c["defect"] = num17(defect);
    c["tolerance"] = num17(tol);
    c["pass"] = pass;
    checks.push_back(std::move(c));
  };

  AuxiliarySpec aux;
  {
    double t = 0.1;
    int N = heat_cutoff(t, 1, 0, 1e-13);
    Complex exact(1.0 / (2.0 * std::sinh(t / 2)), 0);
    auto r = heat_trace(GroupElement::identity(1), recipe_identity(), t, aux, N);
    record("heat-identity-closed-form", std::abs(r.value - exact) / std::abs(exact), 1e-8);

    double phi = 2 * pi / 5;
    auto g = GroupElement::rotation(MonomialUnitary::diagonal({std::polar(1.0, phi)}));
    Complex rot = std::exp(Complex(-t / 2, 0)) / (1.0 - std::exp(Complex(-t, -phi)));
    auto rr = heat_trace(g, recipe_identity(), t, aux, N);
    record("heat-rotation-closed-form", std::abs(rr.value - rot) / std::abs(rot), 1e-8);

    Complex w(0.8, -0.3);
    Complex tr = std::exp(Complex(-std::norm(w) / 4 / std::tanh(t / 2), 0)) * exact;
    auto rt = heat_trace(GroupElement::translation({w}), recipe_identity(), t, aux, N);
    record("heat-translation-closed-form", std::abs(rt.value - tr) / std::abs(tr), 1e-8);
  }
  for (int n = 1; n <= 2; ++n) {
    NumericComponent c(2 * n, -2 * n);
    c.add_term(std::pow(2.0, n), MultiIndex(2 * n), Rational(n));
    NumericSymbol A(n, -2 * n);
    A.set_component(0, c);
    double fact = n == 3 ? 2 : 1;
    Complex r = residue_assembled(GroupElement::identity(n), A,
                                  fixed_point_data(MonomialUnitary::identity(n)));
    record("residue-identity-n" + std::to_string(n), std::abs(r - 2.0 / fact), 1e-10);
  }
  {
    double phi = pi / 3;
    auto e = GroupElement::rotation(
        MonomialUnitary::diagonal({std::polar(1.0, phi), Complex(1, 0)}));
    NumericComponent c(4, -2);
    c.add_term(Complex(2, 0), MultiIndex(4), Rational(1));
    NumericSymbol A(2, -2);
    A.set_component(0, c);
    Complex expected = 2.0 / (1.0 - std::exp(Complex(0, -phi)));
    record("residue-rotation-closed-form",
           std::abs(residue_assembled(e, A, fixed_point_data(e.g)) - expected), 1e-10);

    auto inv = symbol_invert(oscillator_symbol(2), 6, Convention::Weyl);
    ExactComponent x2(4, 2);
    MultiIndex mono(4);
    mono[0] = 2;
    x2.add_term(GaussianRational(1), mono);
    auto comp = to_numeric(symbol_compose(ExactSymbol::from_principal(x2), inv, 6,
                                          Convention::Weyl));
    Complex z = std::exp(Complex(0, -phi));
    Complex oracle = (1.0 + z) / ((1.0 - z) * (1.0 - z));
    record("residue-case-iii-closed-form",
           std::abs(residue_case_iii(e, comp, fixed_point_data(e.g)) - oracle), 1e-10);
  }
  {
    auto h = oscillator_symbol(1);
    auto residual = compose_check(resolvent_parametrix(h, 4), h, 4);
    record("parametrix-identity", static_cast<double>(residual.size()), 0.5);
  }
  {
    PolySymbol P = {{Complex(1, 0), MultiIndex({2, 0})}};
    record("egorov-rotation-defect",
           egorov_defect(MonomialUnitary::diagonal({std::polar(1.0, pi / 5)}), P, 40), 1e-10);
  }
  {
    // cyclicity of the certified trace
    double t = 0.3;
    int N = heat_cutoff(t, 1, 0, 1e-13);
    auto f = trace_detail::element_factors(GroupElement::translation({Complex(0.5, 0.2)}),
                                           recipe_H0_power(1, 1), N);
    f.push_back(heat_factor(t, 1, 0.0, N));
    auto a = trace_product(f, static_cast<int>(f.size()) - 1);
    std::rotate(f.begin(), f.begin() + 1, f.end());
    auto b = trace_product(f, static_cast<int>(f.size()) - 2);
    record("trace-cyclicity", std::abs(a.value - b.value),
           a.certified_tail + b.certified_tail + 1e-12);
  }

  Json vj;
  vj["checks"] = std::move(checks);
  vj["pass"] = all_pass;
  write_json(opt.out / "verify.json", vj);
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trace expansion and localized residue toolkit"};
  std::string config_path;
  std::string out_dir;
  int threads = 1;
  int cutoff_override = -1;
  app.add_option("--config", config_path, "Experiment config (JSON); omit for task=verify");
  app.add_option("--out", out_dir, "Output directory (default $SHUBIN_OUT or .)");
  app.add_option("--threads", threads, "Worker threads for grid evaluation");
  app.add_option("--cutoff-override", cutoff_override, "Force this basis cutoff everywhere");
  CLI11_PARSE(app, argc, argv);

  if (out_dir.empty()) {
    const char* env = std::getenv("SHUBIN_OUT");
    out_dir = env && *env ? env : ".";
  }
  if (threads > 0) Eigen::setNbThreads(threads);

  try {
    Json cfg = Json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw SchemaError("cannot read config " + config_path);
      try {
        in >> cfg;
      } catch (const std::exception& ex) {
        throw SchemaError(std::string("config parse: ") + ex.what());
      }
    }
    Options opt;
    opt.out = out_dir;
    opt.cutoff_override = cutoff_override;
    std::filesystem::create_directories(opt.out);

    std::string task = cfg.contains("task") ? cfg["task"].get<std::string>() : "verify";
    if (task == "heat-trace") return run_heat_trace(cfg, opt);
    if (task == "zeta") return run_zeta(cfg, opt);
    if (task == "resolvent") return run_resolvent(cfg, opt);
    if (task == "residue") return run_residue(cfg, opt);
    if (task == "parametrix") return run_parametrix(cfg, opt);
    if (task == "verify") return run_verify(opt);
    throw SchemaError("unknown task: " + task);
  } catch (const SchemaError& ex) {
    std::fprintf(stderr, "schema error: %s\n", ex.what());
    return 2;
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 3;
  }
}
