// Command-line front end: canonicalize, rate, bounds, sweep, verify.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hbrd/api.hpp"
#include "hbrd/enhancement.hpp"
#include "hbrd/instance_io.hpp"
#include "hbrd/verify.hpp"

namespace {

using hbrd::Error;
using hbrd::ErrorCode;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitNonConvergence = 3;
constexpr int kExitVerifyFailed = 4;

struct Options {
  std::uint64_t seed = 1;
  int restarts = 64;
  int search_restarts = 8;
  double tol = 1e-7;
  bool bits = false;
  bool swapped = false;
  std::string format;  // empty: per-command default
  std::string path;
  std::string family;
  std::string axis = "d1";
  double from = 0.0;
  double to = 0.0;
  int steps = 11;
  std::string suite = "all";
  int trials = 0;
  std::vector<std::string> argv;
};

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

const char* unit(const Options& o) { return o.bits ? "bits" : "nats"; }

double in_unit(double nats, const Options& o) {
  return o.bits ? nats / std::numbers::ln2 : nats;
}

std::string fmt17(double x) {
  if (!std::isfinite(x)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json vec(const hbrd::VectorXd& v) {
  json out = json::array();
  for (hbrd::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json mat(const hbrd::MatrixXd& m) {
  json rows = json::array();
  for (hbrd::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (hbrd::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

hbrd::SolverConfig solver_config(const Options& o) {
  hbrd::SolverConfig cfg;
  cfg.seed = o.seed;
  cfg.restarts = o.restarts;
  cfg.tol = o.tol;
  return cfg;
}

json header(const Options& o) {
  json rec;
  rec["tool"] = "hbrd";
  rec["version"] = hbrd::kToolVersion;
  rec["command"] = o.argv;
  rec["seed"] = o.seed;
  rec["unit"] = unit(o);
  return rec;
}

json rate_block(const hbrd::RateReport& r, bool bits) {
  const auto f = [bits](double x) { return bits ? x / std::numbers::ln2 : x; };
  json b;
  b["R"] = f(r.r);
  b["R1"] = f(r.r1);
  b["R2"] = f(r.r2);
  json comps = json::array();
  for (const auto& c : r.components) comps.push_back({{"label", c.label}, {"value", f(c.nats)}});
  b["components"] = comps;
  return b;
}

void add_rates(json& rec, const hbrd::RateReport& r, const Options& o) {
  rec["R"] = in_unit(r.r, o);
  rec["R1"] = in_unit(r.r1, o);
  rec["R2"] = in_unit(r.r2, o);
  rec["rates"] = {{"nats", rate_block(r, false)}, {"bits", rate_block(r, true)}};
  if (!r.diagnostics.empty()) rec["diagnostics"] = r.diagnostics;
}

json canonical_summary(const hbrd::CanonicalForm& c) {
  return {{"l1", c.split.l1},
          {"l2", c.split.l2},
          {"A", vec(c.a.entries())},
          {"B", vec(c.b.entries())}};
}

json trace_vars(const hbrd::TraceVars& v) {
  return {{"w", vec(v.w)}, {"u", vec(v.u)}, {"v", vec(v.v)}};
}

std::string degraded_notice(const hbrd::ProblemInstance& inst) {
  const auto order = hbrd::detect_degraded(inst);
  if (!order) return "";
  std::ostringstream os;
  os << "degraded side information: decoder " << (*order)[0]
     << " is stronger in every direction (X - Y" << (*order)[0] << " - Y"
     << (*order)[1] << ")";
  return os.str();
}

void emit_record(const json& rec, const Options& o) {
  if (o.format == "csv") {
    std::cout << "key,value\n";
    for (const auto& [k, v] : rec.items()) {
      if (v.is_number_float()) {
        std::cout << k << ',' << fmt17(v.get<double>()) << '\n';
      } else if (v.is_string()) {
        std::cout << k << ',' << v.get<std::string>() << '\n';
      } else if (v.is_primitive()) {
        std::cout << k << ',' << v.dump() << '\n';
      }
    }
    return;
  }
  std::cout << rec.dump(2) << '\n';
}

void require_family(const hbrd::DistortionSpec& spec, const std::string& flag) {
  const hbrd::Family want = flag == "mse" ? hbrd::Family::Mse
                            : flag == "sc" ? hbrd::Family::ScaledIdentity
                                           : hbrd::Family::Trace;
  const hbrd::Family have = hbrd::family_of(spec);
  if (want != have) {
    throw Error(ErrorCode::FamilyMismatch,
                "requested family '" + flag + "' but the instance has distortion type '" +
                    std::string(hbrd::distortion_type_name(have)) + "'");
  }
}

int cmd_canonicalize(const Options& o) {
  const auto file = hbrd::load_instance(o.path);
  const auto canon = hbrd::canonicalize(file.instance, file.spec);
  json rec = header(o);
  rec["canonical"] = canonical_summary(canon);
  rec["canonical"]["Q"] = mat(canon.q);
  rec["canonical"]["K_X_given_Y1"] = mat(canon.k_x_given_y1.matrix());
  rec["canonical"]["K_X_given_Y2"] = mat(canon.k_x_given_y2.matrix());
  const std::string notice = degraded_notice(file.instance);
  rec["degraded"] = !notice.empty();
  if (!notice.empty()) rec["notice"] = notice;
  emit_record(rec, o);
  return kExitOk;
}

int cmd_rate(const Options& o) {
  const auto file = hbrd::load_instance(o.path);
  require_family(file.spec, o.family);
  if (o.swapped && o.family != "tr") throw UsageError("--swapped only applies to tr");
  const auto out = hbrd::compute_rate(file.instance, file.spec, solver_config(o), o.swapped);
  json rec = header(o);
  rec["family"] = o.family;
  rec["method"] = o.family != "tr" ? "closed form"
                  : o.swapped      ? "swapped maximin"
                                   : "minimax";
  rec["canonical"] = canonical_summary(out.canon);
  add_rates(rec, out.report, o);
  if (out.argmin) rec[o.swapped ? "argmin_R1" : "argmin"] = trace_vars(*out.argmin);
  if (out.argmin2) rec["argmin_R2"] = trace_vars(*out.argmin2);
  emit_record(rec, o);
  return kExitOk;
}

json bound_entry(const std::string& name, double nats, const std::string& label,
                 const Options& o) {
  return {{"name", name}, {"value", in_unit(nats, o)}, {"unit", unit(o)}, {"label", label}};
}

int cmd_bounds(const Options& o) {
  const auto file = hbrd::load_instance(o.path);
  const auto canon = hbrd::canonicalize(file.instance, file.spec);
  const auto y = hbrd::build_enhanced(canon).k_x_given_y;
  json rec = header(o);
  rec["canonical"] = canonical_summary(canon);
  const std::string notice = degraded_notice(file.instance);
  if (!notice.empty()) rec["notice"] = notice;

  json bounds = json::array();
  hbrd::SearchConfig search{o.seed, o.search_restarts, 300, {}};
  const auto estimate = [&](hbrd::BoundTag tag) {
    try {
      const double v = hbrd::bound_estimate(canon, y, file.spec, tag, search);
      bounds.push_back(bound_entry(std::string(hbrd::to_string(tag)), v, "heuristic", o));
    } catch (const Error& e) {
      json entry = {{"name", std::string(hbrd::to_string(tag))},
                    {"label", "heuristic"},
                    {"unavailable", std::string(hbrd::to_string(e.code()))}};
      bounds.push_back(entry);
    }
  };

  const hbrd::Family family = hbrd::family_of(file.spec);
  if (family == hbrd::Family::Trace) {
    const auto& spec = std::get<hbrd::Trace>(file.spec);
    const auto cfg = solver_config(o);
    const auto minimax = hbrd::solve_minimax(canon, spec, cfg);
    const auto maximin = hbrd::solve_maximin_swapped(canon, spec, cfg);
    bounds.push_back(bound_entry("minimax", minimax.report.r, "achievable (solver)", o));
    bounds.push_back(bound_entry("swapped maximin", maximin.report.r, "solver", o));
    estimate(hbrd::BoundTag::MlbTrace);
    const double gap = minimax.report.r - maximin.report.r;
    rec["gap"] = in_unit(gap, o);
    rec["gap_positive"] = gap > 0.0;
    rec["spread"] = in_unit(minimax.spread, o);
  } else {
    const auto closed = hbrd::compute_rate(file.instance, file.spec, {}, false).report;
    const auto converse = hbrd::analytic_converse(canon, file.spec);
    const auto scheme = family == hbrd::Family::Mse
                            ? hbrd::construct_scheme_mse(canon, std::get<hbrd::MseDiag>(file.spec))
                            : hbrd::construct_scheme_sc(
                                  canon, std::get<hbrd::ScaledIdentity>(file.spec));
    const auto achievable = hbrd::rate_ach_general(canon, scheme);
    search.warm_starts.push_back(hbrd::aux_from_scheme(canon, scheme));
    bounds.push_back(bound_entry("closed form", closed.r, "certified", o));
    bounds.push_back(bound_entry("achievable", achievable.r, "certified", o));
    bounds.push_back(bound_entry("converse", converse.r, "certified", o));
    estimate(hbrd::BoundTag::Elb);
    estimate(hbrd::BoundTag::E2lb);
    estimate(hbrd::BoundTag::Mlb);
    rec["tight"] = std::abs(converse.r - achievable.r) <= 1e-9 * std::max(1.0, achievable.r);
  }
  rec["bounds"] = bounds;
  emit_record(rec, o);
  return kExitOk;
}

hbrd::SweepAxis parse_axis(const std::string& s) {
  if (s == "d1") return hbrd::SweepAxis::D1;
  if (s == "d2") return hbrd::SweepAxis::D2;
  return hbrd::SweepAxis::Both;
}

// Branches closer than `tol` count as both active.
std::string active_branch(const hbrd::RateReport& r, double tol) {
  const double eps = tol * std::max(1.0, std::abs(r.r));
  if (std::abs(r.r1 - r.r2) <= eps) return "both";
  return r.r1 > r.r2 ? "1" : "2";
}

int cmd_sweep(const Options& o) {
  const auto file = hbrd::load_instance(o.path);
  const auto cfg = solver_config(o);
  const auto rows = hbrd::sweep(file.instance, file.spec, parse_axis(o.axis), o.from, o.to,
                                o.steps, cfg, o.swapped);
  const bool trace = hbrd::family_of(file.spec) == hbrd::Family::Trace;
  const double violation = hbrd::sweep_monotonicity_violation(rows);
  const double allowed = trace ? 2.0 * o.tol : 1e-10;
  const bool monotone = violation <= allowed;
  const double tie = trace ? 10.0 * o.tol : 1e-9;
  const std::string column =
      hbrd::family_of(file.spec) == hbrd::Family::Mse ? "scale" : (o.axis == "both" ? "d" : o.axis);

  if (o.format == "json") {
    json rec = header(o);
    rec["axis"] = o.axis;
    json out = json::array();
    for (const auto& row : rows) {
      json r = {{column, row.value}, {"feasible", row.feasible}};
      if (row.feasible) {
        r["R"] = in_unit(row.report.r, o);
        r["R1"] = in_unit(row.report.r1, o);
        r["R2"] = in_unit(row.report.r2, o);
        r["active"] = active_branch(row.report, tie);
      } else {
        r["note"] = row.note;
      }
      out.push_back(r);
    }
    rec["rows"] = out;
    rec["monotone"] = monotone;
    rec["max_increase"] = in_unit(violation, o);
    std::cout << rec.dump(2) << '\n';
  } else {
    std::cout << column << ",feasible,R,R1,R2,active,unit,note\n";
    for (const auto& row : rows) {
      std::cout << fmt17(row.value) << ',' << (row.feasible ? "yes" : "no") << ',';
      if (row.feasible) {
        std::cout << fmt17(in_unit(row.report.r, o)) << ',' << fmt17(in_unit(row.report.r1, o))
                  << ',' << fmt17(in_unit(row.report.r2, o)) << ','
                  << active_branch(row.report, tie);
      } else {
        std::cout << ",,,";
      }
      std::cout << ',' << unit(o) << ',' << row.note << '\n';
    }
  }
  if (!monotone) {
    std::cerr << "hbrd: sweep: R increases by " << fmt17(violation) << " nats\n";
    return kExitVerifyFailed;
  }
  return kExitOk;
}

int cmd_verify(const Options& o) {
  std::vector<hbrd::PropertyResult> results;
  try {
    results = hbrd::run_suite(o.suite, o.seed, o.trials);
  } catch (const std::invalid_argument&) {
    std::string names = "all";
    for (const auto& n : hbrd::suite_names()) names += ", " + n;
    throw UsageError("unknown suite '" + o.suite + "'; available suites: " + names);
  }
  bool ok = true;
  if (o.format == "csv") {
    std::cout << "name,trials,failures,worst_violation,tolerance,seed,passed\n";
    for (const auto& r : results) {
      std::cout << r.name << ',' << r.trials << ',' << r.failures << ','
                << fmt17(r.worst_violation) << ',' << fmt17(r.tolerance) << ',' << r.seed
                << ',' << (r.passed() ? "yes" : "no") << '\n';
      ok = ok && r.passed();
    }
  } else {
    json rec = header(o);
    rec.erase("unit");
    rec["suite"] = o.suite;
    json out = json::array();
    for (const auto& r : results) {
      json item = {{"name", r.name},
                   {"trials", r.trials},
                   {"failures", r.failures},
                   {"worst_violation", r.worst_violation},
                   {"tolerance", r.tolerance},
                   {"seed", r.seed},
                   {"passed", r.passed()}};
      if (!r.first_error.empty()) item["first_error"] = r.first_error;
      out.push_back(item);
      ok = ok && r.passed();
    }
    rec["results"] = out;
    rec["passed"] = ok;
    std::cout << rec.dump(2) << '\n';
  }
  return ok ? kExitOk : kExitVerifyFailed;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonConvergence:
    case ErrorCode::NoFeasiblePointFound:
    case ErrorCode::NumericalFailure:
      return kExitNonConvergence;
    default:
      return kExitInvalid;
  }
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  o.argv.assign(argv + 1, argv + argc);
  if (const char* env = std::getenv("HBRD_SEED")) {
    try {
      o.seed = std::stoull(env);
    } catch (const std::exception&) {
      std::cerr << "hbrd: error: HBRD_SEED is not an unsigned integer\n";
      return kExitInvalid;
    }
  }

  CLI::App app{"Two-decoder vector Gaussian rate-distortion with decoder side information"};
  app.set_version_flag("--version", hbrd::kToolVersion);
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--seed", o.seed, "RNG seed (default 1, or $HBRD_SEED)");
  app.add_option("--restarts", o.restarts, "Trace solver restarts")->check(CLI::PositiveNumber);
  app.add_option("--search-restarts", o.search_restarts, "Random restarts per bound search")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--tol", o.tol, "Trace solver tolerance")->check(CLI::PositiveNumber);
  app.add_flag("--bits", o.bits, "Report rates in bits instead of nats");
  app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "csv"}));

  auto* canon = app.add_subcommand("canonicalize", "Print the canonical decomposition");
  canon->add_option("instance", o.path, "Instance file")->required();

  auto* rate = app.add_subcommand("rate", "Optimal rate for one constraint family");
  rate->add_option("instance", o.path, "Instance file")->required();
  rate->add_option("family", o.family, "mse | sc | tr")
      ->required()
      ->check(CLI::IsMember({"mse", "sc", "tr"}));
  rate->add_flag("--swapped", o.swapped, "tr only: swapped maximin program");

  auto* bounds = app.add_subcommand("bounds", "Converse, achievable value and bound estimates");
  bounds->add_option("instance", o.path, "Instance file")->required();

  auto* sweep = app.add_subcommand("sweep", "Rate along a distortion sweep (CSV)");
  sweep->add_option("instance", o.path, "Instance file")->required();
  sweep->add_option("--axis", o.axis, "d1 | d2 | both")
      ->check(CLI::IsMember({"d1", "d2", "both"}));
  sweep->add_option("--from", o.from, "First value")->required();
  sweep->add_option("--to", o.to, "Last value")->required();
  sweep->add_option("--steps", o.steps, "Number of values")->check(CLI::PositiveNumber);
  sweep->add_flag("--swapped", o.swapped, "tr only: swapped maximin program");

  auto* verify = app.add_subcommand("verify", "Run property suites");
  verify->add_option("suite", o.suite, "Suite name or 'all'");
  verify->add_option("--trials", o.trials, "Trials per check (0: suite default)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    if (*canon) return cmd_canonicalize(o);
    if (*rate) return cmd_rate(o);
    if (*bounds) return cmd_bounds(o);
    if (*sweep) return cmd_sweep(o);
    if (*verify) return cmd_verify(o);
  } catch (const UsageError& e) {
    std::cerr << "hbrd: usage error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const Error& e) {
    std::cerr << "hbrd: error: " << hbrd::to_string(e.code()) << ": " << e.what() << '\n';
    return exit_code_for(e.code());
  }
  return kExitInvalid;
}
