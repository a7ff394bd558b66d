// oulab: batch front end for the Ornstein-Uhlenbeck lab.
//
// Every option may also be given in a flat key = value config file
// (--config FILE); flags override config keys and OULAB_SEED overrides the
// configured seed. Exit status: 0 all checks pass, 1 a check failed,
// 2 invalid input.

#include "oulab/covariance.hpp"
#include "oulab/errors.hpp"
#include "oulab/estimate_lab.hpp"
#include "oulab/hypotheses.hpp"
#include "oulab/measures.hpp"
#include "oulab/ou_evolution.hpp"
#include "oulab/parabolic_covering.hpp"
#include "oulab/test_functions.hpp"
#include "oulab/transform.hpp"
#include "oulab/verification/acceptance.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string_view>

namespace {

using namespace oulab;
using oulab::verification::FieldContext;
using oulab::verification::make_context;

constexpr int kExitFail = 1;
constexpr int kExitInvalid = 2;

struct Config {
  std::string command;
  std::string spec_path;
  std::string field = "benchmark";
  std::string coefficients = "ou";
  std::vector<double> window{0.0, 10.0};
  std::vector<double> box;
  std::vector<double> p{2.0};
  std::vector<std::string> only;
  std::vector<int> criteria{1, 2, 3, 4, 5, 6, 7, 8, 9};
  double tau = 0.0, h = 0.0;
  double r = 0.0;
  double s_end = 1.0;
  double t = 0.5;
  double tol = 0.0;
  int samples = 21;
  int count = 0;
  int pairs = 10;
  int dim = 1;
  std::string rho = "1";
  double kappa = 0.0, delta = 1.0, lambda = 1.0;
  int probes = 2000;
  std::uint64_t seed = verification::kDefaultSeed;
  std::string output;
  std::string csv;
  std::string grid_out;
};

// ---------------------------------------------------------------------------
// specs

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open spec file \"" + path + "\"");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("spec file \"" + path + "\": " + e.what());
  }
}

/// A spec document holds one field object, or named lists under "fields"
/// and "coefficients".
std::vector<nlohmann::json> spec_entries(const Config& c, const std::string& key) {
  if (c.spec_path.empty()) return {};
  const auto doc = load_json(c.spec_path);
  if (doc.contains(key)) {
    if (!doc[key].is_array()) throw InputError("spec: \"" + key + "\" must be a list");
    return doc[key].get<std::vector<nlohmann::json>>();
  }
  if (key == "fields" && doc.contains("Q")) return {doc};
  if (key == "coefficients" && doc.contains("V")) return {doc};
  return {};
}

CoefficientField select_field(const Config& c) {
  for (const auto& e : spec_entries(c, "fields"))
    if (e.value("name", std::string()) == c.field || (c.field.empty() && !e.contains("name")))
      return CoefficientField::from_json(e);
  if (!c.spec_path.empty()) {
    const auto entries = spec_entries(c, "fields");
    if (entries.size() == 1 && c.field == "benchmark" && !entries.front().contains("name"))
      return CoefficientField::from_json(entries.front());
  }
  return fixtures::by_name(c.field);
}

TimeWindow window_of(const Config& c) {
  if (c.window.size() != 2 || !(c.window[0] <= c.window[1])) throw ArgumentError("--window needs a <= b");
  return {c.window[0], c.window[1]};
}

Box box_of(const Config& c, int n, double lo, double hi) {
  if (c.box.empty()) return Box::cube(n, lo, hi);
  if (c.box.size() != 2 || !(c.box[0] < c.box[1])) throw ArgumentError("--box needs lo < hi");
  return Box::cube(n, c.box[0], c.box[1]);
}

std::vector<std::pair<double, double>> random_pairs(const TimeWindow& w, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(w.lo, w.hi);
  std::vector<std::pair<double, double>> out;
  for (int i = 0; i < count; ++i) {
    double a = U(rng), b = U(rng);
    if (a > b) std::swap(a, b);
    out.emplace_back(a, b);
  }
  return out;
}

// ---------------------------------------------------------------------------
// output

struct Outcome {
  ojson body = ojson::object();
  ojson checks = ojson::array();
  bool pass = true;

  void add(const std::string& id, bool ok, ojson j) {
    checks.push_back({{"id", id}, {"pass", ok}, {"report", std::move(j)}});
    pass = pass && ok;
  }
  void add(const CheckReport& r) { add(r.check, r.pass, r.to_json()); }
};

std::string timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void emit(const Config& c, const ojson& report) {
  const std::string text = report.dump(2) + "\n";
  if (c.output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(c.output);
  if (!out) throw InputError("cannot write \"" + c.output + "\"");
  out << text;
}

std::ofstream open_csv(const Config& c) {
  std::ofstream out(c.csv);
  if (!out) throw InputError("cannot write \"" + c.csv + "\"");
  out << std::setprecision(17);
  return out;
}

ojson config_json(const Config& c) {
  return {{"command", c.command}, {"field", c.field}, {"window", c.window}, {"seed", c.seed}};
}

// ---------------------------------------------------------------------------
// commands

Outcome cmd_hypotheses(const Config& c) {
  Outcome o;
  const auto field = select_field(c);
  const HypothesisReport hyp = check_hypotheses(field, window_of(c), c.samples);
  o.add("hypotheses", hyp.all_pass(), hyp.to_json());
  return o;
}

Outcome cmd_covariance(const Config& c) {
  Outcome o;
  const FieldContext ctx = make_context(select_field(c), window_of(c), c.samples);
  const TimeWindow w = window_of(c);
  const int k = std::max(2, c.count > 0 ? c.count : 11);
  std::vector<double> times;
  ojson qs = ojson::array();
  for (int i = 0; i < k; ++i) {
    const double s = w.lo + (w.hi - w.lo) * i / (k - 1);
    times.push_back(s);
    qs.push_back({{"s", s}, {"Q_s", to_json(ctx.family->Qs(s))}, {"log_det", ctx.family->log_det(s)}});
  }
  o.body["Q_s"] = qs;
  try {
    const CovarianceBounds b = covariance_bounds(*ctx.family, w);
    o.add("covariance_bounds", true,
          {{"C1", b.C1}, {"C2", b.C2}, {"proof_C1", b.proof_C1}, {"proof_C2", b.proof_C2}, {"det_min", b.det_min},
           {"det_max", b.det_max}, {"samples", b.samples}});
  } catch (const InternalConsistencyError& e) {
    o.add("covariance_bounds", false, {{"error", e.what()}});
  }
  if (!c.csv.empty()) {
    auto out = open_csv(c);
    write_measure_csv(out, *ctx.family, times);
  }
  return o;
}

Outcome cmd_evolve(const Config& c) {
  Outcome o;
  const FundamentalSolution fs(select_field(c));
  const int n = fs.dim();
  FdOptions opt;
  if (n >= 2) opt.h = 0.1, opt.tau = 0.02;
  if (c.h > 0) opt.h = c.h;
  if (c.tau > 0) opt.tau = c.tau;
  const Box box = box_of(c, n, n == 1 ? -8.0 : -6.0, n == 1 ? 8.0 : 6.0);
  const Corpus corpus = kernel_corpus(n, c.count > 0 ? c.count : 3, c.seed);
  std::ofstream csv;
  if (!c.csv.empty()) csv = open_csv(c), csv << "id,discrepancy,fine_discrepancy,order\n";
  for (const auto& m : corpus) {
    CheckReport r = cross_validate(fs, c.r, c.s_end, *m.fn, box, opt, c.tol > 0 ? c.tol : 5e-3, 1.8);
    r.parameters["id"] = m.id;
    if (csv.is_open())
      csv << m.id << ',' << r.defect << ',' << r.details.value("fine_defect", 0.0) << ','
          << r.details.value("observed_order", 0.0) << '\n';
    o.add(r);
  }
  if (!c.grid_out.empty() && !corpus.empty()) {
    const GridFunction u = fd_solve(fs, c.r, c.s_end, *corpus.front().fn, box, opt);
    std::ofstream g(c.grid_out, std::ios::binary);
    if (!g) throw InputError("cannot write \"" + c.grid_out + "\"");
    u.write_binary(g);
  }
  return o;
}

Outcome cmd_invariance(const Config& c) {
  Outcome o;
  const FieldContext ctx = make_context(select_field(c), window_of(c), c.samples);
  const Corpus corpus = kernel_corpus(ctx.fs->dim(), c.count > 0 ? c.count : 20, c.seed);
  const auto pairs = random_pairs(window_of(c), c.pairs, verification::derive_seed(c.seed, 1));
  const double tol = c.tol > 0 ? c.tol : 1e-5;
  std::ofstream csv;
  if (!c.csv.empty()) csv = open_csv(c), csv << "id,r,s,defect,covariance_identity_defect\n";
  double worst = 0.0, worst_cov = 0.0;
  bool ok = true;
  ojson failures = ojson::array();
  for (const auto& m : corpus)
    for (const auto& [r, s] : pairs) {
      const CheckReport rep = verify_invariance(*ctx.family, r, s, m.fn->slice(0), tol);
      const double cov = rep.details["covariance_identity_defect"].get<double>();
      worst = std::max(worst, rep.defect);
      worst_cov = std::max(worst_cov, cov);
      if (csv.is_open()) csv << m.id << ',' << r << ',' << s << ',' << rep.defect << ',' << cov << '\n';
      if (!rep.pass) {
        ok = false;
        failures.push_back({{"id", m.id}, {"report", rep.to_json()}});
      }
    }
  o.add("invariance", ok && worst_cov <= 1e-6,
        {{"members", corpus.size()}, {"pairs", pairs.size()}, {"defect", worst}, {"tolerance", tol},
         {"covariance_identity_defect", worst_cov}, {"failures", failures}});
  return o;
}

Outcome cmd_semigroup(const Config& c) {
  Outcome o;
  const FieldContext ctx = make_context(select_field(c), window_of(c), c.samples);
  const int n = ctx.fs->dim();
  const TimeWindow w = window_of(c);
  const Corpus corpus = kernel_corpus(n, c.count > 0 ? c.count : 10, c.seed);
  const auto pairs = random_pairs(w, c.pairs, verification::derive_seed(c.seed, 2));
  std::ofstream csv;
  if (!c.csv.empty()) csv = open_csv(c), csv << "id,r,s,p,lhs_minus_rhs\n";
  bool ok = true;
  double worst = -std::numeric_limits<double>::infinity();
  for (double p : c.p)
    for (const auto& m : corpus)
      for (const auto& [r, s] : pairs) {
        const CheckReport rep = verify_contraction(*ctx.family, r, s, m.fn->slice(0), p, c.tol > 0 ? c.tol : 1e-6);
        ok = ok && rep.pass;
        worst = std::max(worst, rep.defect);
        if (csv.is_open()) csv << m.id << ',' << r << ',' << s << ',' << p << ',' << rep.defect << '\n';
      }
  o.add("contraction", ok, {{"p", c.p}, {"members", corpus.size()}, {"pairs", pairs.size()}, {"worst", worst}});
  const Box box = box_of(c, n, -3.0, 3.0);
  const GridSpec g = GridSpec::uniform(w, c.tau > 0 ? c.tau : 0.25, box, c.h > 0 ? c.h : (n == 1 ? 0.25 : 0.5));
  const auto f = make_gaussian_bump(1.0, Vector::Zero(n), 0.5, 0.5 * (w.lo + w.hi));
  o.add(verify_positivity_and_nu(*ctx.family, w, c.t, f->function(), g, 1e-6, 1e-10));
  return o;
}

Outcome cmd_transform(const Config& c) {
  Outcome o;
  const FieldContext ctx = make_context(select_field(c), window_of(c), c.samples);
  const int n = ctx.fs->dim();
  const WeightFunction wf(ctx.family);
  const TimeWindow w = window_of(c);
  const Box box = box_of(c, n, -6.0, 6.0);
  const double h = c.h > 0 ? c.h : (n == 1 ? 0.1 : 0.25);
  const GridSpec fit = GridSpec::uniform(w, 0.5, box, h);
  const GridSpec check = GridSpec::uniform(w, 0.25, box, h / 2);
  ojson constants = ojson::array();
  for (double p : c.p) {
    try {
      const TransformConstants k = fit_transform_constants(wf, p, fit);
      constants.push_back(k.to_json());
      o.add(check_vf_conditions(wf, k, check));
    } catch (const ConstantsFitError& e) {
      o.add("vf_conditions", false, {{"p", p}, {"error", e.what()}});
    }
  }
  o.body["constants"] = constants;
  const double mid = 0.5 * (w.lo + w.hi);
  const auto u = make_gaussian_bump(0.5, Vector::Zero(n), 0.5, mid);
  const GridSpec g = GridSpec::uniform({std::max(w.lo, mid - 2.0), std::min(w.hi, mid + 2.0)}, 0.05,
                                       box_of(c, n, -4.0, 4.0), n == 1 ? 0.05 : 0.2);
  for (double p : c.p) o.add(conjugation_convergence(*u, p, wf, g, c.tol > 0 ? c.tol : 1e-3, 1.9));
  return o;
}

GeneralCoefficients select_coefficients(const Config& c, double p, ojson& note) {
  if (c.coefficients == "heat") return GeneralCoefficients::heat(c.dim, 1.0);
  if (c.coefficients == "heat0") return GeneralCoefficients::heat(c.dim, 0.0);
  if (c.coefficients == "ou") {
    const FieldContext ctx = make_context(select_field(c), window_of(c), c.samples);
    const WeightFunction wf(ctx.family);
    const int n = ctx.fs->dim();
    const auto k = fit_transform_constants(wf, p, GridSpec::uniform(window_of(c), 0.5, Box::cube(n, -6, 6), 0.1));
    note = k.to_json();
    return GeneralCoefficients::from_ou(wf, k);
  }
  for (const auto& e : spec_entries(c, "coefficients"))
    if (e.value("name", std::string()) == c.coefficients) return GeneralCoefficients::from_json(e);
  throw InputError("unknown coefficients \"" + c.coefficients + "\" (heat, heat0, ou or a spec name)");
}

Outcome cmd_estimates(const Config& c) {
  static const std::vector<std::string> kAll{"interp", "wgrad", "apriori", "dissip", "l1"};
  std::vector<std::string> ids = c.only.empty() ? kAll : c.only;
  for (const auto& id : ids)
    if (id != "sup" && std::find(kAll.begin(), kAll.end(), id) == kAll.end())
      throw ArgumentError("--only: unknown inequality \"" + id + "\"");

  Outcome o;
  std::ofstream csv;
  if (!c.csv.empty()) csv = open_csv(c), csv << "inequality,p,id,value\n";
  ojson fitted = ojson::array();
  for (double p : c.p) {
    ojson note;
    const GeneralCoefficients gc = select_coefficients(c, p, note);
    if (!note.is_null()) fitted.push_back(note);
    EstimateOptions opt = default_estimate_options(gc.n);
    if (c.h > 0 || c.tau > 0 || !c.box.empty())
      opt.grid = GridSpec::uniform(window_of(c), c.tau > 0 ? c.tau : opt.grid.tau(), box_of(c, gc.n, -6.0, 6.0),
                                   c.h > 0 ? c.h : opt.grid.h(0));
    const Corpus corpus = bump_corpus(gc.n, c.count > 0 ? c.count : 20, c.seed);
    for (const auto& id : ids) {
      std::optional<InequalityReport> rep;
      try {
        if (id == "interp") rep = verify_interpolation(corpus, p, opt);
        if (id == "wgrad") rep = verify_weighted_gradient(corpus, gc.W, p, {1.0, 0.5, 0.25}, opt);
        if (id == "apriori") rep = verify_apriori(corpus, gc, p, opt);
        if (id == "dissip") rep = verify_dissipativity(corpus, gc, p, opt);
        if (id == "l1" || id == "sup") {
          rep = verify_L1_and_sup(corpus, gc, opt);
          rep->id = id;
        }
      } catch (const PreconditionError& e) {
        o.add(id, false, {{"p", p}, {"coefficients", gc.name}, {"error", e.what()}});
        continue;
      }
      ojson j = rep->to_json();
      j["p"] = p;
      j["coefficients"] = gc.name;
      o.add(id, rep->pass, std::move(j));
      if (csv.is_open())
        for (const auto& row : rep->rows) csv << id << ',' << p << ',' << row.id << ',' << row.value << '\n';
    }
  }
  if (!fitted.empty()) o.body["fitted_constants"] = fitted;
  return o;
}

Outcome cmd_cover(const Config& c) {
  Outcome o;
  const TimeWindow w = window_of(c);
  const CoverRegion region{w, box_of(c, c.dim, 0.0, 10.0)};
  const RadiusFunction rho = RadiusFunction::from_expression(c.rho, c.dim, c.kappa, c.delta);
  const LipschitzEstimate lip = lipschitz_estimate(rho, region, 400, verification::derive_seed(c.seed, 3));
  o.body["lipschitz"] = lip.to_json();
  const Covering cov = greedy_cover(rho, region, c.lambda);
  o.add(verify_cover(cov, c.probes, verification::derive_seed(c.seed, 4)));
  try {
    const Covering colored = partition_disjoint(cov, c.lambda);
    o.add(verify_coloring(colored, c.lambda));
    o.add(verify_step2(colored));
    o.body["covering"] = colored.to_json();
    if (!c.csv.empty()) {
      auto out = open_csv(c);
      colored.write_csv(out);
    }
  } catch (const TheoremViolationError& e) {
    o.add("coloring", false, {{"error", e.what()}});
  }
  return o;
}

// ---------------------------------------------------------------------------

int run(const Config& c, double seconds_start) {
  Outcome o;
  ojson header = {{"tool", "oulab"}, {"timestamp", timestamp()}};
  ojson report;
  if (c.command == "all-checks") {
    const auto results = verification::run_criteria(c.criteria, c.seed);
    for (const auto& r : results) std::cerr << verification::summary_line(r) << "\n";
    report = verification::criteria_report(results, c.seed);
    header = {{"tool", "oulab"}, {"timestamp", timestamp()}, {"run", verification::run_header(results)}};
    o.pass = report["pass"].get<bool>();
  } else {
    static const std::map<std::string, Outcome (*)(const Config&)> table{
        {"hypotheses", cmd_hypotheses}, {"covariance", cmd_covariance}, {"evolve", cmd_evolve},
        {"invariance", cmd_invariance}, {"semigroup", cmd_semigroup},   {"transform", cmd_transform},
        {"estimates", cmd_estimates},   {"cover", cmd_cover}};
    o = table.at(c.command)(c);
    report = {{"config", config_json(c)}};
    for (auto& [k, v] : o.body.items()) report[k] = v;
    report["checks"] = o.checks;
    report["pass"] = o.pass;
  }
  header["wall_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count() - seconds_start;
  ojson out = {{"header", header}};
  for (auto& [k, v] : report.items()) out[k] = v;
  emit(c, out);
  return o.pass ? 0 : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  const double t0 = std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
  Config c;
  CLI::App app{"Nonautonomous Ornstein-Uhlenbeck lab"};
  app.set_config("--config", "", "flat key = value config file");
  app.require_subcommand(1);
  app.fallthrough();

  app.add_option("--spec", c.spec_path, "JSON spec document (fields and coefficients)")->check(CLI::ExistingFile);
  app.add_option("--field", c.field, "field name: benchmark, iso2, noncommuting, nonnormal or a spec name");
  app.add_option("--coefficients", c.coefficients, "estimates: heat, heat0, ou or a spec name");
  app.add_option("--window", c.window, "time window a,b")->delimiter(',')->expected(2);
  app.add_option("--box", c.box, "spatial cube lo,hi")->delimiter(',')->expected(2);
  app.add_option("--p", c.p, "exponents")->delimiter(',')->check(CLI::Range(1.0, 1e6));
  app.add_option("--tau", c.tau, "time step")->check(CLI::NonNegativeNumber);
  app.add_option("--step", c.h, "space step h")->check(CLI::NonNegativeNumber);
  app.add_option("--r", c.r, "evolve: initial time");
  app.add_option("--s-end", c.s_end, "evolve: final time");
  app.add_option("--t", c.t, "semigroup: shift");
  app.add_option("--tol", c.tol, "tolerance override")->check(CLI::NonNegativeNumber);
  app.add_option("--samples", c.samples, "hypothesis time samples")->check(CLI::PositiveNumber);
  app.add_option("--count", c.count, "corpus size / number of times")->check(CLI::NonNegativeNumber);
  app.add_option("--pairs", c.pairs, "random (r,s) pairs")->check(CLI::PositiveNumber);
  app.add_option("--dim", c.dim, "space dimension for cover and heat coefficients")->check(CLI::Range(1, 3));
  app.add_option("--rho", c.rho, "cover: radius expression in s, x1..xN");
  app.add_option("--kappa", c.kappa, "cover: declared Lipschitz constant")->check(CLI::NonNegativeNumber);
  app.add_option("--delta", c.delta, "cover: declared upper bound of rho")->check(CLI::PositiveNumber);
  app.add_option("--lambda", c.lambda, "cover: dilation factor")->check(CLI::Range(1.0, 1e6));
  app.add_option("--probes", c.probes, "cover: coverage probes")->check(CLI::PositiveNumber);
  app.add_option("--seed", c.seed, "base seed (OULAB_SEED overrides the config file)");
  app.add_option("--output", c.output, "JSON report file (default stdout)");
  app.add_option("--csv", c.csv, "CSV table file");
  app.add_option("--grid-out", c.grid_out, "evolve: binary grid function of the first member");
  app.add_option("--only", c.only, "estimates: interp, wgrad, apriori, dissip, l1, sup")->delimiter(',');
  app.add_option("--criteria", c.criteria, "all-checks: criteria to run")->delimiter(',');

  for (const char* name : {"hypotheses", "covariance", "evolve", "invariance", "semigroup", "transform", "estimates",
                           "cover", "all-checks"})
    app.add_subcommand(name)->callback([&c, name] { c.command = name; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }
  // precedence: flag, then environment, then config file
  bool seed_flag = false;
  for (int i = 1; i < argc; ++i) seed_flag = seed_flag || std::string_view(argv[i]).rfind("--seed", 0) == 0;

  try {
    if (!seed_flag) c.seed = seed_from_env(c.seed);
    return run(c, t0);
  } catch (const Error& e) {
    const std::string kind = e.kind();
    const bool invalid = kind == "input" || kind == "validation" || kind == "parse" || kind == "argument" ||
                         kind == "declaration" || kind == "parameter" || kind == "range";
    std::cerr << "oulab: " << kind << " error: " << e.what() << "\n";
    if (!invalid) {
      ojson out = {{"header", {{"tool", "oulab"}, {"timestamp", timestamp()}}},
                   {"config", config_json(c)},
                   {"error", {{"kind", kind}, {"message", e.what()}}},
                   {"pass", false}};
      try {
        emit(c, out);
      } catch (const Error&) {
      }
    }
    return invalid ? kExitInvalid : kExitFail;
  } catch (const std::exception& e) {
    std::cerr << "oulab: " << e.what() << "\n";
    return kExitInvalid;
  }
}
