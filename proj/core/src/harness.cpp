#include "ictx/harness.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ictx/causal.hpp"
#include "ictx/fixtures.hpp"
#include "ictx/measure_io.hpp"
#include "ictx/reference.hpp"
#include "ictx/stack_io.hpp"
#include "ictx/universality.hpp"

namespace ictx {

Mode mode_from_string(const std::string& name) {
  if (name == "verify") return Mode::verify;
  if (name == "fit") return Mode::fit;
  if (name == "realize") return Mode::realize;
  if (name == "ot") return Mode::ot;
  if (name == "probe") return Mode::probe;
  if (name == "eval") return Mode::eval;
  throw UsageError("unknown mode '" + name + "'");
}

std::string mode_to_string(Mode mode) {
  switch (mode) {
    case Mode::verify: return "verify";
    case Mode::fit: return "fit";
    case Mode::realize: return "realize";
    case Mode::ot: return "ot";
    case Mode::probe: return "probe";
    case Mode::eval: return "eval";
  }
  return "?";
}

bool ExperimentConfig::has(const std::string& key) const {
  return values.count(key) > 0;
}

std::string ExperimentConfig::get_string(const std::string& key,
                                         const std::string& fallback) const {
  const auto it = values.find(key);
  return it == values.end() ? fallback : it->second;
}

double ExperimentConfig::get_real(const std::string& key, double fallback) const {
  const auto it = values.find(key);
  if (it == values.end()) return fallback;
  try {
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw UsageError("config field '" + key + "' is not a number: " + it->second);
  }
}

long ExperimentConfig::get_int(const std::string& key, long fallback) const {
  const auto it = values.find(key);
  if (it == values.end()) return fallback;
  try {
    std::size_t pos = 0;
    const long v = std::stol(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw UsageError("config field '" + key + "' is not an integer: " + it->second);
  }
}

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : text) {
    if (ch == ',') {
      if (!cur.empty()) parts.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(ch))) {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) parts.push_back(cur);
  return parts;
}

}  // namespace

std::vector<double> ExperimentConfig::get_reals(
    const std::string& key, const std::vector<double>& fallback) const {
  const auto it = values.find(key);
  if (it == values.end()) return fallback;
  std::vector<double> out;
  for (const std::string& part : split_list(it->second)) {
    try {
      out.push_back(std::stod(part));
    } catch (const std::exception&) {
      throw UsageError("config field '" + key + "' has a bad entry: " + part);
    }
  }
  if (out.empty()) throw UsageError("config field '" + key + "' is empty");
  return out;
}

std::vector<long> ExperimentConfig::get_ints(
    const std::string& key, const std::vector<long>& fallback) const {
  const auto it = values.find(key);
  if (it == values.end()) return fallback;
  std::vector<long> out;
  for (const std::string& part : split_list(it->second)) {
    try {
      out.push_back(std::stol(part));
    } catch (const std::exception&) {
      throw UsageError("config field '" + key + "' has a bad entry: " + part);
    }
  }
  if (out.empty()) throw UsageError("config field '" + key + "' is empty");
  return out;
}

void ExperimentConfig::validate() const {
  const bool randomized = mode == Mode::verify || mode == Mode::fit ||
                          mode == Mode::realize || mode == Mode::probe;
  if (randomized && !has_seed)
    throw UsageError("seed is mandatory for mode '" + mode_to_string(mode) + "'");
  for (const char* key : {"tol.default", "fit.ridge", "fit.tol"})
    if (has(key) && !(get_real(key, 1.0) > 0.0))
      throw UsageError(std::string("config field '") + key + "' must be > 0");
  if (mode == Mode::ot) {
    if (!has("ot.mu") || !has("ot.nu"))
      throw UsageError("ot mode needs 'ot.mu' and 'ot.nu' measure paths");
  }
  if (mode == Mode::eval) {
    if (!has("eval.stack") || !has("eval.measure") || !has("eval.query"))
      throw UsageError("eval mode needs 'eval.stack', 'eval.measure', 'eval.query'");
  }
  if (mode == Mode::realize && !has("realize.algebra"))
    throw UsageError("realize mode needs 'realize.algebra' (path to an algebra file)");
}

void load_config_file(const std::string& path, ExperimentConfig& config) {
  std::ifstream is(path);
  if (!is) throw UsageError("cannot open config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw UsageError("config line " + std::to_string(lineno) +
                         " is not 'key = value'");
      continue;
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw UsageError("config line " + std::to_string(lineno) +
                                      " has an empty key");
    if (key == "mode") {
      config.mode = mode_from_string(value);
    } else if (key == "seed") {
      config.seed = std::stoull(value);
      config.has_seed = true;
    } else if (key == "out") {
      config.out_dir = value;
    } else {
      config.values[key] = value;
    }
  }
}

bool Report::all_pass() const {
  for (const CheckResult& c : checks)
    if (!c.pass) return false;
  return true;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

std::string json_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", ch);
          out += buf;
        } else {
          out += ch;
        }
    }
  }
  return out;
}

std::string digest_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

FitConfig fit_config_from(const ExperimentConfig& config) {
  FitConfig fc;
  fc.terms = static_cast<int>(config.get_int("fit.terms", fc.terms));
  fc.factors = static_cast<int>(config.get_int("fit.factors", fc.factors));
  fc.pool_size = static_cast<int>(config.get_int("fit.pool", fc.pool_size));
  fc.a_norms = config.get_reals("fit.a_norms", fc.a_norms);
  fc.b_grid = config.get_reals("fit.b_grid", fc.b_grid);
  fc.c_grid = config.get_reals("fit.c_grid", fc.c_grid);
  fc.v_grid = config.get_reals("fit.v_grid", fc.v_grid);
  fc.ridge = config.get_real("fit.ridge", fc.ridge);
  return fc;
}

InContextTarget named_target(const std::string& name) {
  if (name == "identity")
    return [](const ParticleMeasure&, const Vec& x) { return x; };
  if (name == "mean_shift")
    return [](const ParticleMeasure& mu, const Vec& x) {
      Vec m = Vec::Zero(x.size());
      for (std::size_t i = 0; i < mu.size(); ++i) m += mu.weight(i) * mu.point(i);
      return Vec(x + m);
    };
  if (name == "softmax_mean")
    return [](const ParticleMeasure& mu, const Vec& x) {
      Vec out(x.size());
      for (Eigen::Index h = 0; h < x.size(); ++h) {
        double m = -1e300;
        for (std::size_t i = 0; i < mu.size(); ++i)
          m = std::max(m, 2.0 * x(h) * mu.point(i)(h));
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < mu.size(); ++i) {
          const double e = mu.weight(i) * std::exp(2.0 * x(h) * mu.point(i)(h) - m);
          num += e * mu.point(i)(h);
          den += e;
        }
        out(h) = num / den;
      }
      return out;
    };
  throw UsageError("unknown fit target '" + name +
                   "' (use identity, mean_shift, softmax_mean, causal_mean)");
}

void run_verify_mode(const ExperimentConfig& config, Report& report) {
  report.checks = run_verify_suite(config.seed);
  // pin the Lipschitz fixture family identity in the report
  std::ostringstream blob;
  for (const CausalFixture& f :
       lip_causal_fixtures(config.seed + 3 + 1, 24, 3))
    write_measure(blob, f.mu);
  report.fixture_digests.emplace_back("lip_family", digest_hex(fnv1a(blob.str())));

  // optionally verify a serialized stack on fresh fixtures
  if (config.has("verify.stack")) {
    const LayerStack stack = load_stack(config.get_string("verify.stack", ""));
    const int d = stack.input_dim();
    if (stack.masked()) {
      const InContextMapHandle handle = handle_from_stack(stack, "verify.stack");
      const CausalityReport causal =
          check_causal(handle, lip_causal_fixtures(config.seed + 90, 16, d));
      const CausalityReport ident =
          check_identifiable(handle, lip_ident_fixtures(config.seed + 91, 12, d));
      report.checks.push_back(make_check("stack_causality",
                                         causal.causality_residual, 1e-10,
                                         causal.worst_causality_fixture));
      report.checks.push_back(make_check("stack_identifiability",
                                         ident.identifiability_residual, 1e-10,
                                         ident.worst_identifiability_fixture));
      CausalityReport merged = causal;
      merged.identifiability_residual = ident.identifiability_residual;
      merged.worst_identifiability_fixture = ident.worst_identifiability_fixture;
      report.artifacts.emplace_back("causality_report.json",
                                    causality_report_json(merged) + "\n");
    } else {
      std::mt19937_64 rng(config.seed + 92);
      double worst = 0.0;
      for (int i = 0; i < 16; ++i) {
        const ParticleMeasure mu = random_particle_measure(rng, 12, d, 1.0);
        Mat X(d, static_cast<Eigen::Index>(mu.size()));
        for (std::size_t c = 0; c < mu.size(); ++c)
          X.col(static_cast<Eigen::Index>(c)) = mu.point(c);
        const Mat oracle = token_stack_eval(stack, X, false);
        const UnmaskedBatch batch = compose_unmasked_batch(stack, mu);
        for (std::size_t c = 0; c < mu.size(); ++c)
          worst = std::max(
              worst, (batch.outputs[c] - oracle.col(static_cast<Eigen::Index>(c)))
                         .lpNorm<Eigen::Infinity>());
      }
      report.checks.push_back(
          make_check("stack_discrete_equivalence", worst, 1e-10));
    }
  }
}

void run_fit_mode(const ExperimentConfig& config, Report& report,
                  std::vector<std::pair<std::string, std::string>>& csv_tables) {
  const std::string target_name = config.get_string("fit.target", "mean_shift");
  const int d = static_cast<int>(config.get_int("fit.d", 2));
  const double tol =
      config.get_real("fit.tol", config.get_real("tol.default", 1e-2));
  FitConfig fc = fit_config_from(config);
  const std::vector<long> sweep = config.get_ints("fit.n_sweep", {1, 2, 4, 8});

  std::ostringstream csv;
  csv << "N,train_max_error,holdout_max_error\n";
  std::vector<double> errors;
  AlgebraElement last;

  if (target_name == "causal_mean") {
    InContextMapHandle target;
    target.d = d;
    target.dprime = d;
    target.name = "causal-running-mean";
    target.eval = [](const SpaceTimeMeasure& mu, const Vec& x, double t) {
      const ParticleMeasure window = mask(mu, t).space_marginal();
      Vec m = Vec::Zero(x.size());
      for (std::size_t i = 0; i < window.size(); ++i)
        m += window.weight(i) * window.point(i);
      return Vec(x + m);
    };
    const auto train = lip_causal_fixtures(config.seed + 11, 120, d);
    const auto holdout = lip_causal_fixtures(config.seed + 12, 40, d);
    const auto ident = lip_ident_fixtures(config.seed + 13, 12, d);
    MaskedFitConfig mcfg;
    mcfg.fit = fc;
    mcfg.phi_eps = config.get_real("fit.phi_eps", mcfg.phi_eps);
    for (long n : sweep) {
      mcfg.fit.terms = static_cast<int>(n);
      const MaskedFitResult res =
          fit_masked(target, mcfg, train, holdout, ident, config.seed);
      csv << n << ',' << format_double(res.train_max_error) << ','
          << format_double(res.holdout_max_error) << "\n";
      errors.push_back(res.holdout_max_error);
      last = res.transformer.algebra;
    }
  } else {
    const InContextTarget target = named_target(target_name);
    std::mt19937_64 rng(config.seed);
    const auto train = random_pairs(
        rng, static_cast<int>(config.get_int("fit.train", 160)),
        static_cast<int>(config.get_int("fit.n_tokens", 12)), d, 1.0);
    const auto holdout =
        random_pairs(rng, static_cast<int>(config.get_int("fit.holdout", 40)),
                     static_cast<int>(config.get_int("fit.n_tokens", 12)), d, 1.0);
    for (long n : sweep) {
      fc.terms = static_cast<int>(n);
      const FitResult res = fit(target, d, d, fc, train, holdout, config.seed);
      csv << n << ',' << format_double(res.train_max_error) << ','
          << format_double(res.holdout_max_error) << "\n";
      errors.push_back(res.holdout_max_error);
      last = res.algebra;
    }
  }

  report.checks.push_back(
      make_check("fit_" + target_name + "_final_error", errors.back(), tol));
  double increase = 0.0;
  for (std::size_t i = 0; i + 1 < errors.size(); ++i)
    increase = std::max(increase, errors[i + 1] - errors[i]);
  report.checks.push_back(make_check("fit_" + target_name + "_monotone",
                                     std::max(0.0, increase), 1e-8));
  csv_tables.emplace_back("fit_errors.csv", csv.str());

  std::ostringstream algebra_text;
  write_algebra(algebra_text, last);
  report.artifacts.emplace_back("algebra.txt", algebra_text.str());
  report.lines.push_back("fitted " + target_name + ", held-out sup error " +
                         format_double(errors.back()));
}

void run_realize_mode(const ExperimentConfig& config, Report& report) {
  const AlgebraElement A = load_algebra(config.get_string("realize.algebra", ""));
  const double c_omega = config.get_real("realize.c_omega", 2.0);
  const double radius =
      config.get_real("realize.radius", phi_radius_for(A, c_omega));
  const double eps = config.get_real("realize.eps", 1e-3);
  const bool masked = config.get_int("realize.masked", 0) == 1;
  const ProductMlp phi = build_product_mlp(A.dprime, radius, eps);
  const RealizedTransformer rt = realize(A, phi, masked, c_omega);

  report.checks.push_back(make_check("product_mlp_certificate", phi.certified_max,
                                     phi.eps, "radius " + format_double(radius)));
  int violations = 0;
  try {
    check_size_contract(rt);
  } catch (const std::exception&) {
    ++violations;
  }
  report.checks.push_back(
      make_check("realized_size_contract", violations, 0.0,
                 "attention layers: " + std::to_string(rt.stack.attention_count())));

  std::mt19937_64 rng(config.seed);
  const auto fixtures = random_pairs(rng, 25, 10, A.d, 1.0);
  double exact_gap = 0.0, phi_gap = 0.0;
  for (const auto& [mu, x] : fixtures) {
    const Vec ref = eval_algebra(A, mu, x);
    if (!masked) {
      exact_gap = std::max(exact_gap,
                           (realized_eval_exact(rt, mu, x).value - ref).norm());
      phi_gap = std::max(phi_gap, (realized_eval(rt, mu, x) - ref).norm());
    }
  }
  if (!masked) {
    report.checks.push_back(
        make_check("realize_exact_mode_matches_algebra", exact_gap, 1e-10));
    report.checks.push_back(make_check("realize_phi_gap_within_bound", phi_gap,
                                       rt.phi_eps * rt.propagation_factor));
  }

  std::ostringstream stack_text;
  write_stack(stack_text, rt.stack);
  report.artifacts.emplace_back("stack.txt", stack_text.str());
  report.lines.push_back("realized stack with " +
                         std::to_string(rt.stack.attention_count()) +
                         " attention layers");
}

void run_ot_mode(const ExperimentConfig& config, Report& report) {
  const AnyMeasure mu_any = load_measure(config.get_string("ot.mu", ""));
  const AnyMeasure nu_any = load_measure(config.get_string("ot.nu", ""));
  auto as_particles = [](const AnyMeasure& m) {
    if (std::holds_alternative<ParticleMeasure>(m))
      return std::get<ParticleMeasure>(m);
    return std::get<SpaceTimeMeasure>(m).as_particles();
  };
  const ParticleMeasure mu = as_particles(mu_any);
  const ParticleMeasure nu = as_particles(nu_any);
  const WassersteinResult w1 = wasserstein(mu, nu, 1);
  const WassersteinResult w2 = wasserstein(mu, nu, 2);
  report.lines.push_back("W1 = " + format_double(w1.value));
  report.lines.push_back("W2 = " + format_double(w2.value));
  report.lines.push_back("plan: " + std::to_string(w2.plan.flows.size()) +
                         " flows, squared-cost objective " +
                         format_double(w2.plan.cost));
  const double feas = std::max(plan_feasibility_error(w1.plan, mu, nu),
                               plan_feasibility_error(w2.plan, mu, nu));
  report.checks.push_back(make_check("transport_plan_feasibility", feas,
                                     config.get_real("tol.default", 1e-9)));
}

void run_probe_mode(const ExperimentConfig& config, Report& report) {
  auto add = [&report](const std::vector<CheckResult>& batch) {
    report.checks.insert(report.checks.end(), batch.begin(), batch.end());
  };
  add(checks::masked_continuity(config.seed));
  add(checks::masked_convergence(config.seed));
  add(checks::causality_identifiability(config.seed + 3));

  std::mt19937_64 rng(config.seed);
  const int d = static_cast<int>(config.get_int("probe.d", 3));
  const LayerStack deep = random_stack(rng, 3, d, 3, true, 0.5);
  const InContextMapHandle handle = handle_from_stack(deep, "probe-stack");
  CausalityReport merged =
      check_causal(handle, lip_causal_fixtures(config.seed + 1, 24, d));
  const CausalityReport ident =
      check_identifiable(handle, lip_ident_fixtures(config.seed + 2, 16, d));
  merged.identifiability_residual = ident.identifiability_residual;
  merged.worst_identifiability_fixture = ident.worst_identifiability_fixture;
  report.artifacts.emplace_back("causality_report.json",
                                causality_report_json(merged) + "\n");

  const SpaceTimeMeasure mu = geometric_time_fixture(
      static_cast<int>(config.get_int("probe.levels", 12)),
      config.get_real("probe.sigma", 0.3));
  std::vector<double> ts;
  for (int k = 1; k <= static_cast<int>(config.get_int("probe.levels", 12)); ++k)
    ts.push_back(std::pow(2.0, -k));
  const std::vector<double> gaps = masked_limit_probe(mu, ts);
  for (std::size_t i = 0; i < gaps.size(); ++i)
    report.lines.push_back("masked limit gap at t=2^-" + std::to_string(i + 1) +
                           ": " + format_double(gaps[i]));
}

void run_eval_mode(const ExperimentConfig& config, Report& report) {
  const LayerStack stack = load_stack(config.get_string("eval.stack", ""));
  const AnyMeasure mu_any = load_measure(config.get_string("eval.measure", ""));
  const std::vector<double> q = config.get_reals("eval.query", {});
  Vec x(static_cast<Eigen::Index>(q.size()));
  for (std::size_t i = 0; i < q.size(); ++i) x(static_cast<Eigen::Index>(i)) = q[i];

  Vec out;
  if (stack.masked()) {
    if (!std::holds_alternative<SpaceTimeMeasure>(mu_any))
      throw UsageError("masked stack needs a space-time measure (spacetime=1)");
    const double t = config.get_real("eval.time", 1.0);
    out = compose_masked(stack, std::get<SpaceTimeMeasure>(mu_any), x, t);
  } else {
    if (!std::holds_alternative<ParticleMeasure>(mu_any))
      throw UsageError("unmasked stack needs a plain measure (spacetime=0)");
    out = compose_unmasked(stack, std::get<ParticleMeasure>(mu_any), x);
  }
  std::string line = "output:";
  for (Eigen::Index i = 0; i < out.size(); ++i)
    line += " " + format_double(out(i));
  report.lines.push_back(line);
}

}  // namespace

std::string report_to_json(const Report& report) {
  std::ostringstream os;
  os << "{\n";
  os << "  \"library_version\": \"" << json_escape(report.library_version)
     << "\",\n";
  os << "  \"config\": {";
  for (std::size_t i = 0; i < report.config_echo.size(); ++i) {
    if (i) os << ", ";
    os << "\"" << json_escape(report.config_echo[i].first) << "\": \""
       << json_escape(report.config_echo[i].second) << "\"";
  }
  os << "},\n";
  os << "  \"checks\": [\n";
  for (std::size_t i = 0; i < report.checks.size(); ++i) {
    const CheckResult& c = report.checks[i];
    os << "    {\"name\": \"" << json_escape(c.name) << "\", \"residual\": "
       << format_double(c.residual) << ", \"threshold\": "
       << format_double(c.threshold) << ", \"pass\": "
       << (c.pass ? "true" : "false");
    if (!c.note.empty()) os << ", \"note\": \"" << json_escape(c.note) << "\"";
    os << "}" << (i + 1 < report.checks.size() ? "," : "") << "\n";
  }
  os << "  ],\n";
  std::size_t passed = 0;
  for (const CheckResult& c : report.checks) passed += c.pass ? 1 : 0;
  os << "  \"summary\": {\"total\": " << report.checks.size()
     << ", \"passed\": " << passed << "},\n";
  os << "  \"fixture_digests\": {";
  for (std::size_t i = 0; i < report.fixture_digests.size(); ++i) {
    if (i) os << ", ";
    os << "\"" << json_escape(report.fixture_digests[i].first) << "\": \""
       << json_escape(report.fixture_digests[i].second) << "\"";
  }
  os << "},\n";
  os << "  \"artifacts\": [";
  for (std::size_t i = 0; i < report.artifacts.size(); ++i) {
    if (i) os << ", ";
    os << "\"" << json_escape(report.artifacts[i].first) << "\"";
  }
  os << "],\n";
  os << "  \"lines\": [";
  for (std::size_t i = 0; i < report.lines.size(); ++i) {
    if (i) os << ", ";
    os << "\"" << json_escape(report.lines[i]) << "\"";
  }
  os << "],\n";
  os << "  \"timing_ms\": " << format_double(report.timing_ms) << "\n";
  os << "}\n";
  return os.str();
}

Report run(const ExperimentConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();

  Report report;
  report.config_echo.emplace_back("mode", mode_to_string(config.mode));
  if (config.has_seed)
    report.config_echo.emplace_back("seed", std::to_string(config.seed));
  for (const auto& [k, v] : config.values) report.config_echo.emplace_back(k, v);

  std::vector<std::pair<std::string, std::string>> csv_tables;
  switch (config.mode) {
    case Mode::verify: run_verify_mode(config, report); break;
    case Mode::fit: run_fit_mode(config, report, csv_tables); break;
    case Mode::realize: run_realize_mode(config, report); break;
    case Mode::ot: run_ot_mode(config, report); break;
    case Mode::probe: run_probe_mode(config, report); break;
    case Mode::eval: run_eval_mode(config, report); break;
  }
  for (auto& [name, text] : csv_tables) report.artifacts.emplace_back(name, text);

  const auto end = std::chrono::steady_clock::now();
  report.timing_ms =
      std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(end -
                                                                            start)
          .count();
  write_report_files(config, report);
  return report;
}

void write_report_files(const ExperimentConfig& config, const Report& report) {
  if (config.out_dir.empty()) return;
  std::filesystem::create_directories(config.out_dir);
  {
    std::ofstream os(std::filesystem::path(config.out_dir) / "report.json");
    os << report_to_json(report);
  }
  for (const auto& [name, text] : report.artifacts) {
    std::ofstream os(std::filesystem::path(config.out_dir) / name);
    os << text;
  }
}

}  // namespace ictx
