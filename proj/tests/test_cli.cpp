#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

using nlohmann::json;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

// Runs the CLI through the shell; stderr is folded into `out` when asked.
Run run(const std::string& args, bool merge_stderr = false, const std::string& env = "") {
  std::string cmd = env + " '" HBRD_CLI_PATH "' " + args;
  cmd += merge_stderr ? " 2>&1" : " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string data(const std::string& name) { return std::string("'" HBRD_DATA_DIR "/") + name + "'"; }

json run_json(const std::string& args) {
  const auto r = run(args);
  REQUIRE(r.status == 0);
  return json::parse(r.out);
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("canonicalize") {
  const auto j = run_json("canonicalize " + data("two_dim_trace.json"));
  CHECK(j["canonical"]["l1"] == 1);
  CHECK(j["canonical"]["l2"] == 1);
  CHECK(j["canonical"]["A"][0].get<double>() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(j["canonical"]["B"][0].get<double>() == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(j["degraded"] == false);
  CHECK(j["canonical"]["Q"].size() == 2);

  const auto id = run_json("canonicalize " + data("identity_conditionals.json"));
  CHECK(id["canonical"]["l2"] == 0);
  CHECK(id["canonical"]["A"][0].get<double>() == doctest::Approx(0.0));
  CHECK(id["degraded"] == true);
  CHECK(id["notice"].get<std::string>().find("degraded") != std::string::npos);
}

TEST_CASE("malformed file") {
  const auto r = run("canonicalize " + data("malformed_row.json"), true);
  CHECK(r.status == 2);
  CHECK(r.out.find("K_X_given_Y2") != std::string::npos);
  CHECK(r.out.find("row 1") != std::string::npos);
  CHECK(run("canonicalize /nonexistent.json").status == 2);
}

TEST_CASE("rate") {
  const auto tr = run_json("rate " + data("two_dim_trace.json") + " tr");
  CHECK(std::abs(tr["R"].get<double>() - 1.7808784) < 1e-3);
  CHECK(tr["unit"] == "nats");
  CHECK(tr.contains("argmin"));
  CHECK(tr.contains("diagnostics"));

  const auto sw = run_json("rate " + data("two_dim_trace.json") + " tr --swapped");
  CHECK(std::abs(sw["R"].get<double>() - 1.7802127) < 1e-3);
  CHECK(sw.contains("argmin_R2"));

  const auto mse = run_json("rate " + data("crossed_mse.json") + " mse");
  CHECK(mse["R"].get<double>() == doctest::Approx(0.5 * std::log(10.0)).epsilon(1e-12));
  CHECK(mse["rates"]["bits"]["R"].get<double>() ==
        doctest::Approx(0.5 * std::log2(10.0)).epsilon(1e-12));

  const auto bits = run_json("--bits rate " + data("crossed_mse.json") + " mse");
  CHECK(bits["unit"] == "bits");
  CHECK(bits["R"].get<double>() == doctest::Approx(0.5 * std::log2(10.0)).epsilon(1e-12));
}

TEST_CASE("rate errors") {
  const auto wrong = run("rate " + data("crossed_mse.json") + " tr", true);
  CHECK(wrong.status == 2);
  CHECK(wrong.out.find("FamilyMismatch") != std::string::npos);
  CHECK(run("rate " + data("crossed_mse.json") + " mse --swapped").status == 2);
  CHECK(run("rate " + data("crossed_mse.json") + " bogus").status == 2);
  CHECK(run("frobnicate").status == 2);
}

TEST_CASE("csv and json agree to the last digit") {
  const auto j = run_json("rate " + data("crossed_mse.json") + " mse");
  const auto c = run("--format csv rate " + data("crossed_mse.json") + " mse");
  REQUIRE(c.status == 0);
  double from_csv = 0.0;
  for (const auto& row : csv_rows(c.out)) {
    if (row.size() == 2 && row[0] == "R") from_csv = std::stod(row[1]);
  }
  CHECK(from_csv == j["R"].get<double>());
  CHECK(json::parse(j.dump()) == j);
}

TEST_CASE("output is byte-stable") {
  const auto a = run("rate " + data("two_dim_trace.json") + " tr");
  const auto b = run("rate " + data("two_dim_trace.json") + " tr");
  CHECK(a.out == b.out);
  CHECK(a.out.find("version") != std::string::npos);
}

TEST_CASE("seed from the environment") {
  const auto r = run("verify diag-inverse --trials 3", false, "HBRD_SEED=42");
  CHECK(json::parse(r.out)["seed"] == 42);
  const auto o = run("--seed 5 verify diag-inverse --trials 3", false, "HBRD_SEED=42");
  CHECK(json::parse(o.out)["seed"] == 5);
  CHECK(run("verify diag-inverse --trials 3", false, "HBRD_SEED=abc").status == 2);
}

TEST_CASE("bounds") {
  const auto m = run_json("bounds " + data("crossed_mse.json"));
  double ach = 0, conv = 0;
  for (const auto& b : m["bounds"]) {
    if (b["name"] == "achievable") ach = b["value"];
    if (b["name"] == "converse") {
      conv = b["value"];
      CHECK(b["label"] == "certified");
    }
    if (b["name"] == "MLB") CHECK(b["label"] == "heuristic");
  }
  CHECK(ach == doctest::Approx(conv).epsilon(1e-10));
  CHECK(m["tight"] == true);

  const auto t = run_json("bounds " + data("two_dim_trace.json"));
  CHECK(t["gap"].get<double>() > 0.0);
  CHECK(std::abs(t["gap"].get<double>() - 6.657e-4) < 1e-4);

  const auto d = run_json("bounds " + data("identity_conditionals.json"));
  CHECK(d.contains("notice"));
  const double first = d["bounds"][0]["value"];
  for (const auto& b : d["bounds"]) CHECK(std::abs(b["value"].get<double>() - first) < 1e-3);
}

TEST_CASE("sweep") {
  const auto r = run("sweep " + data("two_dim_trace.json") + " --axis both --from 0.05 --to 0.15 --steps 11");
  REQUIRE(r.status == 0);
  const auto rows = csv_rows(r.out);
  REQUIRE(rows.size() == 12);
  CHECK(rows[0][0] == "d");
  double prev = 1e300;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i][1] == "yes");
    const double v = std::stod(rows[i][2]);
    CHECK(v <= prev + 2e-7);
    prev = v;
  }

  const auto one = run("sweep " + data("two_dim_trace.json") + " --axis d1 --from 0.15 --to 0.15 --steps 1");
  const auto rate = run_json("rate " + data("two_dim_trace.json") + " tr");
  CHECK(std::stod(csv_rows(one.out)[1][2]) == doctest::Approx(rate["R"].get<double>()).epsilon(1e-12));

  const auto cross = run("sweep " + data("two_dim_trace.json") + " --axis d2 --from 0.2 --to 0.3 --steps 3");
  REQUIRE(cross.status == 0);
  const auto crows = csv_rows(cross.out);
  REQUIRE(crows.size() == 4);
  CHECK(crows[1][1] == "yes");
  CHECK(crows[2][1] == "no");
  CHECK(crows[3][1] == "no");
  CHECK(crows[3].back() == "DistortionInfeasible");

  const auto js = run_json("--format json sweep " + data("crossed_mse.json") + " --from 0.5 --to 1 --steps 3");
  CHECK(js["rows"].size() == 3);
  CHECK(js["monotone"] == true);
}

TEST_CASE("verify") {
  const auto j = run_json("verify diag-inverse --trials 10");
  REQUIRE(j["results"].size() == 1);
  CHECK(j["results"][0]["trials"] == 10);
  CHECK(j["results"][0]["failures"] == 0);
  CHECK(j["passed"] == true);

  const auto bad = run("verify no-such-suite", true);
  CHECK(bad.status == 2);
  CHECK(bad.out.find("diag-inverse") != std::string::npos);
  CHECK(bad.out.find("trace-oracle") != std::string::npos);
}
