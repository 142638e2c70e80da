#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "hbrd/instance_io.hpp"

using namespace hbrd;

namespace {

std::string parse_error(const std::string& text) {
  try {
    parse_instance(text, "t.json");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Parse);
    return e.what();
  }
  FAIL("expected a parse error");
  return "";
}

bool contains(const std::string& s, const std::string& part) {
  return s.find(part) != std::string::npos;
}

const char* kGood = R"({
  "schema_version": 1, "k": 2,
  "K_X_given_Y1": [[1.0, 0.1], [0.1, 0.5]],
  "K_X_given_Y2": [[0.3, 0.0], [0.0, 0.9]],
  "distortion": {"type": "scaled_identity", "d1": 0.1, "d2": 0.2}
})";

}  // namespace

TEST_CASE("shipped files") {
  const auto t = load_instance(HBRD_DATA_DIR "/two_dim_trace.json");
  CHECK(t.instance.k == 2);
  CHECK(t.instance.k_x_given_y1(0, 0) == doctest::Approx(4.0 / 9).epsilon(1e-15));
  CHECK(std::get<Trace>(t.spec).d2 == 0.15);

  const auto m = load_instance(HBRD_DATA_DIR "/crossed_mse.json");
  CHECK(std::get<MseDiag>(m.spec).d1[1] == 0.2);

  const auto i = load_instance(HBRD_DATA_DIR "/identity_conditionals.json");
  CHECK(i.instance.k_x);

  const std::string err = [] {
    try {
      load_instance(HBRD_DATA_DIR "/malformed_row.json");
    } catch (const Error& e) {
      return std::string(e.what());
    }
    return std::string();
  }();
  CHECK(contains(err, "K_X_given_Y2"));
  CHECK(contains(err, "row 1"));
}

TEST_CASE("round trip is exact") {
  const auto a = parse_instance(kGood);
  const auto text = instance_to_json(a);
  const auto b = parse_instance(text);
  CHECK(a.instance.k_x_given_y1.matrix() == b.instance.k_x_given_y1.matrix());
  CHECK(a.instance.k_x_given_y2.matrix() == b.instance.k_x_given_y2.matrix());
  CHECK(std::get<ScaledIdentity>(b.spec).d2 == 0.2);

  InstanceFile odd = a;
  odd.instance.k_x_given_y1 = odd.instance.k_x_given_y1 * (1.0 / 3.0);
  odd.spec = MseDiag{DiagMatrix(VectorXd{{0.1 / 3, 2.0 / 7}}), DiagMatrix(VectorXd{{1e-17, 0.3}})};
  const auto c = parse_instance(instance_to_json(odd, -1));
  CHECK(c.instance.k_x_given_y1.matrix() == odd.instance.k_x_given_y1.matrix());
  CHECK(std::get<MseDiag>(c.spec).d1.entries() == std::get<MseDiag>(odd.spec).d1.entries());
  CHECK(std::get<MseDiag>(c.spec).d2.entries() == std::get<MseDiag>(odd.spec).d2.entries());
}

TEST_CASE("parse errors name the field") {
  CHECK(contains(parse_error("{\"schema_version\": 1,\n \"k\": 2,,}"), "line 2"));
  CHECK(contains(parse_error("[]"), "<root>"));
  CHECK(contains(parse_error(R"({"k": 2})"), "schema_version"));
  CHECK(contains(parse_error(R"({"schema_version": 2, "k": 2})"), "unsupported"));
  CHECK(contains(parse_error(R"({"schema_version": 1, "k": 0})"), "'k'"));

  std::string missing = kGood;
  missing.replace(missing.find("K_X_given_Y2"), 12, "K_X_given_YY");
  CHECK(contains(parse_error(missing), "K_X_given_Y2"));

  std::string rows = kGood;
  rows.replace(rows.find("[[0.3, 0.0], [0.0, 0.9]]"), 24, "[[0.3, 0.0]]");
  CHECK(contains(parse_error(rows), "has 1 rows"));

  std::string entry = kGood;
  entry.replace(entry.find("0.9"), 3, "\"x\"");
  CHECK(contains(parse_error(entry), "K_X_given_Y2[1][1]"));

  std::string asym = kGood;
  asym.replace(asym.find("[0.1, 0.5]"), 10, "[0.2, 0.5]");
  CHECK(contains(parse_error(asym), "not symmetric"));

  std::string type = kGood;
  type.replace(type.find("scaled_identity"), 15, "spectral");
  CHECK(contains(parse_error(type), "distortion.type"));

  std::string d = kGood;
  d.replace(d.find("\"d2\": 0.2"), 9, "\"d3\": 0.2");
  CHECK(contains(parse_error(d), "distortion.d2"));

  CHECK(contains(parse_error(R"({"schema_version": 1, "k": 1, "K_X_given_Y1": [[1]],
    "K_X_given_Y2": [[1]], "distortion": {"type": "mse", "D1": [0.1, 0.2], "D2": [0.1]}})"),
                 "distortion.D1"));
}

TEST_CASE("missing file") {
  try {
    load_instance("/nonexistent/instance.json");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Parse);
  }
}

TEST_CASE("type names") {
  CHECK(distortion_type_name(Family::Mse) == "mse");
  CHECK(distortion_type_name(Family::ScaledIdentity) == "scaled_identity");
  CHECK(distortion_type_name(Family::Trace) == "trace");
}
