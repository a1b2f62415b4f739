#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/core.h>
#include <yaml-cpp/yaml.h>

#include "bpcalc/calculus.hpp"
#include "bpcalc/csv.hpp"
#include "bpcalc/errors.hpp"
#include "bpcalc/measures.hpp"
#include "bpcalc/rng.hpp"
#include "bpcalc/spec_io.hpp"
#include "bpcalc/verify.hpp"

namespace fs = std::filesystem;

namespace bpcalc::cli {

namespace {

const char* const kChecks[] = {"generator", "holomorphy", "moment", "corollary10", "corollary11", "semigroup"};

struct Options {
  std::string command;
  std::string check;
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<int> samples;
  std::string family;
  std::optional<double> alpha;
  int dimension = 1;
  double rate = 1.0;
  double jump = 1.0;
  std::string route = "levy";
  std::vector<double> t;
  std::vector<std::string> s;
  bool quiet = false;
};

struct NamedSpec {
  std::string name;
  BernsteinSpec spec;
};

struct Context {
  Options opt;
  YAML::Node root;
  fs::path config_dir = ".";
  std::uint64_t seed = 0;
  QuadratureScheme quad;
  fs::path out_dir;
  std::ostringstream summary;

  YAML::Node section(const char* key) const {
    static const YAML::Node empty(YAML::NodeType::Map);
    const YAML::Node& base = root.IsMap() ? root : empty;
    return base[key];
  }

  int samples(const YAML::Node& node, int fallback) const {
    if (opt.samples) return *opt.samples;
    if (node && node["samples"]) return read_int(node["samples"], "samples");
    if (YAML::Node top = section("samples")) return read_int(top, "samples");
    return fallback;
  }

  /// Stream seed for a named part of the run, derived from the run seed.
  std::uint64_t derived_seed(const std::string& part) const {
    return fnv1a(part, seed ^ 0x9e3779b97f4a7c15ULL);
  }
};

// --- config helpers --------------------------------------------------------

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("config", 0, fmt::format("cannot read '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::complex<double> read_complex(const YAML::Node& node, const std::string& key) {
  if (node.IsSequence()) {
    if (node.size() != 2) throw ParseError(key, line_of(node), "complex entries are [re, im]");
    return {read_double(node[0], key), read_double(node[1], key)};
  }
  return {read_double(node, key), 0.0};
}

CVector read_cvector(const YAML::Node& node, const std::string& key) {
  if (!node || !node.IsSequence()) throw ParseError(key, line_of(node), "expected a list of entries");
  CVector v(static_cast<Eigen::Index>(node.size()));
  for (std::size_t i = 0; i < node.size(); ++i) v[static_cast<Eigen::Index>(i)] = read_complex(node[i], key);
  return v;
}

CMatrix read_cmatrix(const YAML::Node& node, const std::string& key) {
  if (!node || !node.IsSequence() || node.size() == 0) throw ParseError(key, line_of(node), "expected a list of rows");
  CMatrix a;
  for (std::size_t i = 0; i < node.size(); ++i) {
    const CVector row = read_cvector(node[i], key);
    if (i == 0) a.resize(static_cast<Eigen::Index>(node.size()), row.size());
    if (row.size() != a.cols()) throw ParseError(key, line_of(node[i]), "rows of different length");
    a.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return a;
}

std::vector<double> read_doubles(const YAML::Node& node, const std::string& key) {
  const Vector v = read_vector(node, key);
  return {v.data(), v.data() + v.size()};
}

Vector parse_point(const std::string& text) {
  Vector v;
  std::vector<double> values;
  std::stringstream ss(text);
  std::string field;
  while (std::getline(ss, field, ',')) {
    char* end = nullptr;
    const double d = std::strtod(field.c_str(), &end);
    if (field.empty() || *end != '\0') throw ParseError("--s", 0, fmt::format("'{}' is not a number", field));
    values.push_back(d);
  }
  if (values.empty()) throw ParseError("--s", 0, "empty point");
  return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

// --- functions, generators, vectors -----------------------------------------

std::vector<NamedSpec> functions(const Context& ctx) {
  const Options& o = ctx.opt;
  if (!o.family.empty()) {
    Family f = Family::Linear;
    try {
      f = family_from_tag(o.family);
    } catch (const Error& e) {
      throw ParseError("--family", 0, e.what());
    }
    int n = o.dimension;
    if (!o.s.empty()) n = static_cast<int>(parse_point(o.s.front()).size());
    switch (f) {
      case Family::FractionalPower: {
        const double a = o.alpha.value_or(0.5);
        return {{fmt::format("frac{}", a), BernsteinSpec::fractional_power(a, n)}};
      }
      case Family::Log:
        return {{"log", BernsteinSpec::log(n)}};
      case Family::CompoundPoisson:
        if (n != 1) throw ParseError("--family", 0, "cpoisson from flags is one-dimensional");
        return {{"cpoisson", BernsteinSpec::compound_poisson(o.rate, o.jump)}};
      case Family::Linear:
        return {{"linear", BernsteinSpec::linear(0.0, Vector::Ones(n))}};
      default:
        throw ParseError("--family", 0, fmt::format("family '{}' needs a config document", o.family));
    }
  }
  const YAML::Node list = ctx.section("functions");
  if (!list) throw ParseError("functions", 0, "no functions: give --family or a 'functions' list in the config");
  if (!list.IsSequence()) throw ParseError("functions", line_of(list), "expected a list");
  std::vector<NamedSpec> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const YAML::Node item = list[i];
    std::string name = fmt::format("f{}", i + 1);
    if (item.IsMap() && item["name"]) name = item["name"].as<std::string>();
    out.push_back({name, spec_from_node(item)});
  }
  return out;
}

CommutingGeneratorSet generators(const Context& ctx) {
  const YAML::Node g = ctx.section("generators");
  const YAML::Node rg = ctx.section("random_generators");
  if (g) {
    if (!g.IsMap()) throw ParseError("generators", line_of(g), "expected a mapping");
    const double ctol = g["commutator_tol"] ? read_double(g["commutator_tol"], "commutator_tol") : 1e-10;
    std::vector<CMatrix> mats;
    if (const YAML::Node m = g["matrices"]) {
      if (!m.IsSequence()) throw ParseError("matrices", line_of(m), "expected a list of matrices");
      for (const YAML::Node& a : m) mats.push_back(read_cmatrix(a, "matrices"));
    }
    if (const YAML::Node files = g["files"]) {
      if (!files.IsSequence()) throw ParseError("files", line_of(files), "expected a list of paths");
      for (const YAML::Node& f : files) {
        std::ifstream in(ctx.config_dir / f.as<std::string>());
        if (!in) throw ParseError("files", line_of(f), fmt::format("cannot read '{}'", f.as<std::string>()));
        mats.push_back(read_matrix_csv(in));
      }
    }
    if (mats.empty()) throw ParseError("generators", line_of(g), "no matrices given");
    return make_commuting_set(std::move(mats), ctol);
  }
  if (rg) {
    if (!rg.IsMap()) throw ParseError("random_generators", line_of(rg), "expected a mapping");
    const int n = rg["n"] ? read_int(rg["n"], "n") : 1;
    const int d = rg["d"] ? read_int(rg["d"], "d") : 4;
    const double lo = rg["lo"] ? read_double(rg["lo"], "lo") : 0.05;
    const double hi = rg["hi"] ? read_double(rg["hi"], "hi") : 20.0;
    if (n < 1 || d < 1 || !(lo > 0.0) || !(hi > lo)) {
      throw ParseError("random_generators", line_of(rg), "need n, d >= 1 and 0 < lo < hi");
    }
    Rng rng(ctx.derived_seed("generators"));
    return random_commuting_set(rng, n, d, lo, hi);
  }
  throw ParseError("generators", 0, "no generators: add 'generators' or 'random_generators' to the config");
}

std::vector<CVector> vectors(const Context& ctx, int d) {
  std::vector<CVector> out;
  if (const YAML::Node x = ctx.section("x")) {
    if (!x.IsSequence()) throw ParseError("x", line_of(x), "expected a list of vectors");
    for (const YAML::Node& v : x) {
      CVector c = read_cvector(v, "x");
      if (c.size() != d) throw ParseError("x", line_of(v), fmt::format("vector of length {} for dimension {}", c.size(), d));
      out.push_back(std::move(c));
    }
  }
  if (out.empty()) out.push_back(CVector::Ones(d));
  return out;
}

std::vector<double> times(const Context& ctx) {
  if (!ctx.opt.t.empty()) return ctx.opt.t;
  if (const YAML::Node t = ctx.section("t")) {
    if (t.IsScalar()) return {read_double(t, "t")};
    return read_doubles(t, "t");
  }
  return {1.0};
}

void write_file(const Context& ctx, const std::string& name, const std::string& content) {
  fs::create_directories(ctx.out_dir);
  std::ofstream out(ctx.out_dir / name, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write '{}'", (ctx.out_dir / name).string()));
  out << content;
}

// --- commands --------------------------------------------------------------

int cmd_eval(Context& ctx, std::ostream& stdout_) {
  const std::vector<NamedSpec> fns = functions(ctx);
  int width = 0;
  for (const auto& f : fns) width = std::max(width, f.spec.dimension());
  std::ostringstream csv;
  csv << "function";
  for (int j = 1; j <= width; ++j) csv << ",s_" << j;
  csv << ",psi\n";
  for (const auto& f : fns) {
    std::vector<Vector> points;
    const int n = f.spec.dimension();
    if (!ctx.opt.s.empty()) {
      for (const auto& text : ctx.opt.s) points.push_back(parse_point(text));
    } else if (const YAML::Node s = ctx.section("s")) {
      if (!s.IsSequence()) throw ParseError("s", line_of(s), "expected a list of points");
      for (const YAML::Node& p : s) points.push_back(p.IsScalar() ? Vector::Constant(1, read_double(p, "s")) : read_vector(p, "s"));
    } else {
      points = log_grid(n, 1e-2, 1e2, 5);
    }
    for (const Vector& s : points) {
      if (s.size() != n) {
        throw ParseError("s", 0, fmt::format("point of dimension {} for function '{}' of {} variables", s.size(), f.name, n));
      }
      const double v = eval_psi_closure(f.spec, s, ctx.quad);
      csv << csv_field(f.name);
      for (int j = 0; j < width; ++j) csv << ',' << (j < n ? csv_number(s[j]) : "");
      csv << ',' << csv_number(v) << '\n';
    }
  }
  write_file(ctx, "eval.csv", csv.str());
  if (!ctx.opt.quiet) stdout_ << csv.str();
  return kOk;
}

int cmd_apply(Context& ctx) {
  const std::vector<NamedSpec> fns = functions(ctx);
  const CommutingGeneratorSet set = generators(ctx);
  const std::vector<CVector> xs = vectors(ctx, set.d());
  std::vector<std::string> routes;
  {
    std::stringstream ss(ctx.opt.route);
    std::string r;
    while (std::getline(ss, r, ',')) routes.push_back(r);
  }
  for (const auto& r : routes) {
    if (r != "levy" && r != "subordination" && r != "difference" && r != "spectral") {
      throw ParseError("--route", 0, fmt::format("unknown route '{}' (levy|subordination|difference|spectral)", r));
    }
  }
  const std::vector<double> ts = times(ctx);
  std::ostringstream csv;
  csv << "route,family,t,x_index,component,re,im,err_bound\n";
  ctx.summary << "apply: routes " << ctx.opt.route << ", n=" << set.n() << ", d=" << set.d() << '\n';
  for (const auto& f : fns) {
    if (f.spec.dimension() != set.n()) {
      throw ShapeError(fmt::format("function '{}' has {} variables, the generators {}", f.name, f.spec.dimension(), set.n()));
    }
    std::vector<std::vector<CVector>> results;
    for (const auto& route : routes) {
      std::vector<CVector> per_x;
      const std::vector<double> route_times = route == "subordination" ? ts : std::vector<double>{0.0};
      for (double t : route_times) {
        for (std::size_t i = 0; i < xs.size(); ++i) {
          CVector value;
          double err = 0.0;
          if (route == "levy") {
            Application a = apply_psi_levy(f.spec, set, xs[i], ctx.quad);
            value = std::move(a.value);
            err = a.error_bound;
          } else if (route == "subordination") {
            Application a = apply_g_t(f.spec, set, t, xs[i], ctx.quad);
            value = std::move(a.value);
            err = a.error_bound;
          } else if (route == "difference") {
            DifferenceResult r = generator_via_difference(f.spec, set, xs[i], default_difference_schedule(), ctx.quad);
            value = std::move(r.value);
            err = r.residual;
            if (!r.warning.empty()) ctx.summary << "warning: " << f.name << " x" << i << ": " << r.warning << '\n';
          } else {
            value = apply_psi_spectral(f.spec, set, xs[i], ctx.quad);
          }
          for (Eigen::Index k = 0; k < value.size(); ++k) {
            csv << route << ',' << csv_field(f.name) << ',' << (route == "subordination" ? csv_number(t) : "") << ','
                << i << ',' << k << ',' << csv_number(value[k].real()) << ',' << csv_number(value[k].imag()) << ','
                << csv_number(err) << '\n';
          }
          if (route != "subordination") per_x.push_back(std::move(value));
        }
      }
      results.push_back(std::move(per_x));
    }
    // agreement of the psi routes with the first one
    for (std::size_t r = 1; r < routes.size(); ++r) {
      if (routes[r] == "subordination" || routes[0] == "subordination") continue;
      double worst = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        worst = std::max(worst, (results[r][i] - results[0][i]).cwiseAbs().maxCoeff());
      }
      ctx.summary << fmt::format("{}: max component difference {} vs {}: {}\n", f.name, routes[r], routes[0],
                                 csv_number(worst));
    }
  }
  write_file(ctx, "apply.csv", csv.str());
  return kOk;
}

int cmd_subordinate(Context& ctx) {
  const std::vector<NamedSpec> fns = functions(ctx);
  const std::vector<double> ts = times(ctx);
  for (const auto& f : fns) {
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const SubMeasure m = subordination_measure(f.spec, ts[i], ctx.quad);
      const double residual = laplace_residual(m, f.spec, ctx.quad.probe, ctx.quad);
      std::ostringstream csv;
      write_csv(csv, m, ctx.quad.max_points);
      const std::string name = fmt::format("subordinate_{}_{}.csv", f.name, i);
      write_file(ctx, name, csv.str());
      ctx.summary << fmt::format("{}: t={} mass={} laplace residual={} certified={} -> {}\n", f.name,
                                 csv_number(ts[i]), csv_number(m.total_mass()), csv_number(residual),
                                 csv_number(m.residual()), name);
    }
  }
  return kOk;
}

int cmd_membership(Context& ctx) {
  const std::vector<NamedSpec> fns = functions(ctx);
  const YAML::Node cfg = ctx.section("membership");
  const double lo = cfg && cfg["lo"] ? read_double(cfg["lo"], "lo") : 0.1;
  const double hi = cfg && cfg["hi"] ? read_double(cfg["hi"], "hi") : 10.0;
  const int per = cfg && cfg["per_coordinate"] ? read_int(cfg["per_coordinate"], "per_coordinate") : 5;
  const int order = cfg && cfg["max_order"] ? read_int(cfg["max_order"], "max_order") : 3;
  std::ostringstream csv;
  csv << "function,multi_index,min_estimate,worst_margin,status\n";
  bool pass = true;
  for (const auto& f : fns) {
    const MembershipReport rep =
        check_membership(f.spec, log_grid(f.spec.dimension(), lo, hi, per), order, ctx.quad);
    for (const auto& e : rep.entries) {
      std::string idx;
      for (std::size_t j = 0; j < e.multi_index.size(); ++j) idx += (j ? ";" : "") + std::to_string(e.multi_index[j]);
      csv << csv_field(f.name) << ',' << idx << ',' << csv_number(e.min_estimate) << ','
          << csv_number(e.worst_margin) << ',' << (e.ok ? "pass" : "fail") << '\n';
    }
    pass = pass && rep.pass;
    ctx.summary << fmt::format("{}: {} (max psi {}, first failing order {})\n", f.name, rep.pass ? "PASS" : "FAIL",
                               csv_number(rep.max_psi), rep.first_failing_order);
  }
  write_file(ctx, "membership.csv", csv.str());
  return pass ? kOk : kFail;
}

bool run_check(Context& ctx, const std::string& check) {
  std::vector<VerificationReport> reports;
  const YAML::Node cfg = ctx.section(check.c_str());
  const std::uint64_t seed = ctx.derived_seed(check);
  auto label = [](VerificationReport r, const std::string& name) {
    VerificationReport out(r.check() + "/" + name, r.seed());
    for (const auto& rec : r.records()) {
      if (rec.skipped) {
        out.skip(rec.section, rec.digest, rec.note);
      } else {
        out.add_margin(rec.section, rec.digest, rec.lhs, rec.rhs, rec.margin, rec.note);
      }
    }
    for (const auto& [k, v] : r.params()) out.param(k, v);
    for (const auto& n : r.notes()) out.note(n);
    return out;
  };

  if (check == "corollary10") {
    const BernsteinSpec bounded = cfg && cfg["bounded"] ? spec_from_node(cfg["bounded"])
                                                        : BernsteinSpec::compound_poisson(2.0, 1.0);
    const BernsteinSpec unbounded = cfg && cfg["unbounded"] ? spec_from_node(cfg["unbounded"])
                                                            : BernsteinSpec::fractional_power(0.5);
    const std::vector<double> grid =
        cfg && cfg["s_grid"] ? read_doubles(cfg["s_grid"], "s_grid") : std::vector<double>{-1.0, -4.0, -1e2, -1e4};
    const int d = cfg && cfg["d"] ? read_int(cfg["d"], "d") : 4;
    reports.push_back(verify_corollary_10(bounded, unbounded, grid, ctx.samples(cfg, 20), seed, d, ctx.quad));
  } else {
    const CommutingGeneratorSet set = generators(ctx);
    if (check == "corollary11") {
      const int n_max = cfg && cfg["n_max"] ? read_int(cfg["n_max"], "n_max") : 100;
      if (set.n() == 1) {
        reports.push_back(verify_corollary_11(set, ctx.samples(cfg, 20), n_max, seed, ctx.quad));
      } else {
        const CommutingGeneratorSet first = make_commuting_set({set.matrix(0)}, set.commutator_tol());
        VerificationReport r = verify_corollary_11(first, ctx.samples(cfg, 20), n_max, seed, ctx.quad);
        r.note("checked on the first generator");
        reports.push_back(std::move(r));
      }
    } else {
      for (const auto& f : functions(ctx)) {
        if (f.spec.dimension() != set.n()) {
          ctx.summary << fmt::format("{}/{}: skipped ({} variables, {} generators)\n", check, f.name,
                                     f.spec.dimension(), set.n());
          continue;
        }
        const std::uint64_t fseed = fnv1a(f.name, seed);
        if (check == "generator") {
          const double budget = cfg && cfg["budget"] ? read_double(cfg["budget"], "budget") : 1e-5;
          reports.push_back(label(verify_generator_identity(f.spec, set, ctx.samples(cfg, 10), fseed, budget, ctx.quad), f.name));
        } else if (check == "moment") {
          if (set.n() != 1) {
            ctx.summary << fmt::format("moment/{}: skipped (needs one generator)\n", f.name);
            continue;
          }
          reports.push_back(label(verify_moment_inequality(f.spec, set, ctx.samples(cfg, 1000), fseed, ctx.quad), f.name));
        } else if (check == "holomorphy") {
          HolomorphyOptions h;
          h.seed = fseed;
          h.samples = ctx.samples(cfg, 1000);
          if (cfg && cfg["times"]) h.times = read_doubles(cfg["times"], "times");
          if (cfg && cfg["delta"]) h.delta = read_double(cfg["delta"], "delta");
          if (cfg && cfg["t_grid"]) h.t_grid = read_doubles(cfg["t_grid"], "t_grid");
          reports.push_back(label(verify_holomorphy_hypothesis(set, f.spec, h, ctx.quad), f.name));
        } else if (check == "semigroup") {
          const double tol = cfg && cfg["tol"] ? read_double(cfg["tol"], "tol") : 2e-7;
          reports.push_back(label(verify_semigroup_law(f.spec, set, ctx.samples(cfg, 50), fseed, tol, ctx.quad), f.name));
          const std::vector<double> ts =
              cfg && cfg["times"] ? read_doubles(cfg["times"], "times") : std::vector<double>{0.01, 0.1, 1.0, 10.0};
          reports.push_back(label(verify_uniform_bound(f.spec, set, ts, 1e-6, ctx.quad), f.name));
        }
      }
    }
  }

  std::ostringstream csv;
  bool header = true;
  bool pass = true;
  for (const auto& r : reports) {
    r.write_csv(csv, header);
    header = false;
    r.write_summary(ctx.summary);
    ctx.summary << '\n';
    pass = pass && r.pass();
  }
  if (header) csv << "check,section,index,digest,lhs,rhs,margin,status,note\n";
  write_file(ctx, fmt::format("verify_{}.csv", check), csv.str());
  return pass;
}

int cmd_verify(Context& ctx) {
  std::vector<std::string> checks;
  if (ctx.opt.check == "all") {
    checks.assign(std::begin(kChecks), std::end(kChecks));
  } else if (std::find(std::begin(kChecks), std::end(kChecks), ctx.opt.check) != std::end(kChecks)) {
    checks.push_back(ctx.opt.check);
  } else {
    throw ParseError("verify", 0, fmt::format("unknown check '{}' (generator|holomorphy|moment|corollary10|"
                                              "corollary11|semigroup|all)", ctx.opt.check));
  }
  bool pass = true;
  for (const auto& c : checks) pass = run_check(ctx, c) && pass;
  ctx.summary << "overall: " << (pass ? "PASS" : "FAIL") << '\n';
  return pass ? kOk : kFail;
}

}  // namespace

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Bochner-Phillips functional calculus for commuting matrix generators", "bpcalc"};
  app.require_subcommand(1);
  auto add_common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config, "structured config document (YAML or JSON)");
    sub->add_option("--out", o.out, "output directory (default: $BPCALC_OUT, then bpcalc-out)");
    sub->add_option("--seed", o.seed, "seed of the run's random generator");
    sub->add_option("--tol", o.tol, "quadrature tolerance per unit ||x||");
    sub->add_option("--samples", o.samples, "number of random samples");
    sub->add_option("--family", o.family, "frac|log|cpoisson|linear (overrides the config functions)");
    sub->add_option("--alpha", o.alpha, "exponent of frac");
    sub->add_option("--dimension", o.dimension, "number of variables of a flag-built function");
    sub->add_option("--rate", o.rate, "rate of cpoisson");
    sub->add_option("--jump", o.jump, "jump of cpoisson");
    sub->add_option("--route", o.route, "levy|subordination|difference|spectral, comma separated");
    sub->add_option("--t", o.t, "subordination times");
    sub->add_option("--s", o.s, "evaluation point, comma separated components")->allow_extra_args(false);
    sub->add_flag("-q,--quiet", o.quiet, "no summary on stdout");
  };
  std::vector<CLI::App*> subs = {
      app.add_subcommand("eval", "tabulate psi(s)"),
      app.add_subcommand("apply", "apply psi(A) or g_t(A) to vectors"),
      app.add_subcommand("subordinate", "export the subordination measure nu_t"),
      app.add_subcommand("verify", "run verification checks"),
      app.add_subcommand("membership", "forward-difference test of the defining sign conditions"),
  };
  for (CLI::App* sub : subs) add_common(sub);
  subs[3]->add_option("check", o.check, "generator|holomorphy|moment|corollary10|corollary11|semigroup|all")->required();

  std::vector<std::string> args(argv.begin() + (argv.empty() ? 0 : 1), argv.end());
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "bpcalc: " << e.what() << '\n'
        << "commands: eval, apply, subordinate, verify, membership (see bpcalc --help)\n";
    return kUsage;
  }
  for (CLI::App* sub : subs) {
    if (sub->parsed()) o.command = sub->get_name();
  }

  Context ctx;
  ctx.opt = o;
  try {
    std::string text;
    if (!o.config.empty()) {
      text = read_file(o.config);
      ctx.config_dir = fs::path(o.config).parent_path();
      if (ctx.config_dir.empty()) ctx.config_dir = ".";
      try {
        ctx.root = YAML::Load(text);
      } catch (const YAML::ParserException& e) {
        throw ParseError("config", e.mark.line + 1, e.msg);
      }
      if (ctx.root && !ctx.root.IsNull() && !ctx.root.IsMap()) throw ParseError("config", 1, "expected a mapping");
    }
    if (o.seed) {
      ctx.seed = *o.seed;
    } else if (const YAML::Node s = ctx.section("seed")) {
      try {
        ctx.seed = s.as<std::uint64_t>();
      } catch (const YAML::Exception&) {
        throw ParseError("seed", line_of(s), "expected a nonnegative integer");
      }
    } else {
      ctx.seed = fnv1a(text);
    }
    if (o.tol) {
      ctx.quad.tol = *o.tol;
    } else if (const YAML::Node t = ctx.section("tol")) {
      ctx.quad.tol = read_double(t, "tol");
    }
    if (!(ctx.quad.tol > 0.0)) throw ParseError("tol", 0, "tolerance must be positive");
    if (o.samples && *o.samples < 1) throw ParseError("--samples", 0, "must be at least 1");
    if (!o.out.empty()) {
      ctx.out_dir = o.out;
    } else if (const char* env = std::getenv("BPCALC_OUT"); env && *env) {
      ctx.out_dir = env;
    } else {
      ctx.out_dir = "bpcalc-out";
    }
    ctx.summary << "command: " << o.command << (o.command == "verify" ? " " + o.check : "") << '\n';
    ctx.summary << "seed: " << ctx.seed << '\n';
    ctx.summary << "rng: " << Rng::kAlgorithm << '\n';
    ctx.summary << "tol: " << csv_number(ctx.quad.tol) << "\n\n";

    int code = kOk;
    if (o.command == "eval") code = cmd_eval(ctx, out);
    if (o.command == "apply") code = cmd_apply(ctx);
    if (o.command == "subordinate") code = cmd_subordinate(ctx);
    if (o.command == "verify") code = cmd_verify(ctx);
    if (o.command == "membership") code = cmd_membership(ctx);
    write_file(ctx, "summary.txt", ctx.summary.str());
    if (!o.quiet && o.command != "eval") out << ctx.summary.str();
    return code;
  } catch (const AccuracyError& e) {
    err << "bpcalc: accuracy error: " << e.what() << '\n';
    return kAccuracy;
  } catch (const ParseError& e) {
    err << "bpcalc: config error: " << e.what() << '\n';
    return kUsage;
  } catch (const YAML::Exception& e) {
    err << "bpcalc: config error: line " << e.mark.line + 1 << ": " << e.msg << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "bpcalc: error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "bpcalc: error: " << e.what() << '\n';
    return kUsage;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace bpcalc::cli
