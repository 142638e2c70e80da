// Acceptance run: one PASS/FAIL line per criterion, details indented below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <json.hpp>

#include "hbrd/verify.hpp"

using namespace hbrd;

namespace {

constexpr std::uint64_t kSeed = 7;

struct CliRun {
  int status = -1;
  nlohmann::json out;
  double seconds = 0.0;
};

CliRun cli(const std::string& args) {
  const std::string cmd = "'" HBRD_CLI_PATH "' " + args + " 2>&1";
  const auto t0 = std::chrono::steady_clock::now();
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string text;
  char buf[4096];
  std::size_t n;
  while (pipe && (n = std::fread(buf, 1, sizeof buf, pipe)) > 0) text.append(buf, n);
  const int raw = pipe ? pclose(pipe) : -1;
  CliRun r;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = nlohmann::json::parse(text, nullptr, false);
  if (r.out.is_discarded()) {
    std::cout << "    cli output: " << text << '\n';
    r.status = r.status == 0 ? -1 : r.status;
  }
  return r;
}

bool report(const std::vector<PropertyResult>& results) {
  bool ok = true;
  for (const auto& r : results) {
    std::printf("    %-32s trials=%-6d failures=%-4d worst=%.3e tol=%.1e\n", r.name.c_str(),
                r.trials, r.failures, r.worst_violation, r.tolerance);
    if (!r.first_error.empty()) std::printf("      %s\n", r.first_error.c_str());
    ok = ok && r.passed();
  }
  return ok;
}

bool suites(std::initializer_list<const char*> names) {
  std::vector<PropertyResult> all;
  for (const char* n : names) {
    for (auto& r : run_suite(n, kSeed)) all.push_back(std::move(r));
  }
  return report(all);
}

const std::string kTraceFile = "'" HBRD_DATA_DIR "/two_dim_trace.json'";


bool criterion_1() {
  const auto r = cli("rate " + kTraceFile + " tr");
  if (r.status != 0) return false;
  const double minimax_value = r.out["R"].get<double>();
  std::printf("    R = %.9f nats (target 1.7808784), %.2f s\n", minimax_value, r.seconds);
  return std::abs(minimax_value - 1.7808784) <= 1e-3 && r.seconds <= 60.0;
}

bool criterion_2() {
  const auto r = cli("rate " + kTraceFile + " tr --swapped");
  if (r.status != 0) return false;
  const double v = r.out["R"].get<double>();
  const auto b = cli("bounds " + kTraceFile);
  if (b.status != 0) return false;
  const double gap = b.out["gap"].get<double>();
  const double spread = b.out["spread"].get<double>();
  std::printf("    R = %.9f nats (target 1.7802127), gap = %.4e, restart spread = %.1e\n", v, gap,
              spread);
  return std::abs(v - 1.7802127) <= 1e-3 && gap > 0.0 && gap > spread;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<bool()>>> criteria = {
      {"two-dimensional trace example, minimax value", criterion_1},
      {"two-dimensional trace example, swapped maximin value and positive gap", criterion_2},
      {"MSE tightness: closed form = scheme rate = converse", [] { return report({check_tightness_mse(100, kSeed)}); }},
      {"scaled-identity tightness on rotated conditionals", [] { return report({check_tightness_sc(100, kSeed)}); }},
      {"minimality of the optimum against random feasible schemes", [] { return suites({"minimality"}); }},
      {"trace solver against the grid oracle", [] { return suites({"trace-oracle"}); }},
      {"lemma suites", [] { return suites({"diag-inverse", "variance-drop", "corollary"}); }},
      {"structural suites", [] { return suites({"enhanced-identity", "inclusions", "bound-ordering", "diagonal-iff"}); }},
      {"degraded reductions", [] { return suites({"degraded"}); }},
      {"convexity and monotone sweeps", [] { return suites({"convexity", "monotone"}); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    try {
      ok = criteria[i].second();
    } catch (const std::exception& e) {
      std::printf("    exception: %s\n", e.what());
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("AC%zu %s: %s (%.1f s)\n", i + 1, ok ? "PASS" : "FAIL", criteria[i].first.c_str(), s);
    std::fflush(stdout);
    if (!ok) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
