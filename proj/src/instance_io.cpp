#include "hbrd/instance_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace hbrd {

namespace {

using nlohmann::json;

class Parser {
 public:
  explicit Parser(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& field, const std::string& what) const {
    throw Error(ErrorCode::Parse, source_ + ": field '" + field + "': " + what);
  }

  const json& require(const json& obj, const std::string& key,
                      const std::string& path) const {
    const auto it = obj.find(key);
    if (it == obj.end()) fail(path + key, "missing");
    return *it;
  }

  double number(const json& v, const std::string& field) const {
    if (!v.is_number()) fail(field, "expected a number, got " + std::string(v.type_name()));
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(field, "not finite");
    return x;
  }

  VectorXd vector(const json& v, const std::string& field, Index k) const {
    if (!v.is_array()) fail(field, "expected an array of " + std::to_string(k) + " numbers");
    if (static_cast<Index>(v.size()) != k) {
      fail(field, "has " + std::to_string(v.size()) + " entries, expected " +
                      std::to_string(k));
    }
    VectorXd out(k);
    for (Index i = 0; i < k; ++i) {
      out(i) = number(v[i], field + "[" + std::to_string(i) + "]");
    }
    return out;
  }

  SymMatrix matrix(const json& v, const std::string& field, Index k) const {
    if (!v.is_array()) fail(field, "expected a " + std::to_string(k) + "x" +
                                       std::to_string(k) + " nested array");
    if (static_cast<Index>(v.size()) != k) {
      fail(field, "has " + std::to_string(v.size()) + " rows, expected " +
                      std::to_string(k));
    }
    MatrixXd m(k, k);
    for (Index r = 0; r < k; ++r) {
      const json& row = v[r];
      const std::string where = field + " row " + std::to_string(r);
      if (!row.is_array()) fail(where, "expected an array");
      if (static_cast<Index>(row.size()) != k) {
        throw Error(ErrorCode::Parse,
                    source_ + ": field '" + field + "' row " + std::to_string(r) +
                        ": has " + std::to_string(row.size()) +
                        " entries, expected " + std::to_string(k));
      }
      for (Index c = 0; c < k; ++c) {
        m(r, c) = number(row[c], field + "[" + std::to_string(r) + "][" +
                                     std::to_string(c) + "]");
      }
    }
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    for (Index r = 0; r < k; ++r) {
      for (Index c = r + 1; c < k; ++c) {
        if (std::abs(m(r, c) - m(c, r)) > 1e-12 * scale) {
          fail(field, "not symmetric at row " + std::to_string(r) + ", column " +
                          std::to_string(c));
        }
      }
    }
    return SymMatrix(m);
  }

 private:
  std::string source_;
};

json matrix_json(const SymMatrix& m) {
  json rows = json::array();
  for (Index r = 0; r < m.dim(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.dim(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

json vector_json(const VectorXd& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

// 1-based line and column of a byte offset.
std::string location(const std::string& text, std::size_t offset) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

std::string_view distortion_type_name(Family family) {
  switch (family) {
    case Family::Mse: return "mse";
    case Family::ScaledIdentity: return "scaled_identity";
    case Family::Trace: return "trace";
  }
  return "unknown";
}

InstanceFile parse_instance(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Parse, source + ": invalid JSON at " +
                                      location(text, e.byte == 0 ? 0 : e.byte - 1));
  }
  const Parser p(source);
  if (!doc.is_object()) p.fail("<root>", "expected an object");

  InstanceFile out;
  const json& version = p.require(doc, "schema_version", "");
  if (!version.is_number_integer()) p.fail("schema_version", "expected an integer");
  out.schema_version = version.get<int>();
  if (out.schema_version != kSchemaVersion) {
    p.fail("schema_version", "unsupported version " + std::to_string(out.schema_version));
  }
  const json& kj = p.require(doc, "k", "");
  if (!kj.is_number_integer() || kj.get<long long>() < 1) {
    p.fail("k", "expected a positive integer");
  }
  const Index k = kj.get<Index>();
  out.instance.k = k;
  if (doc.contains("K_X") && !doc["K_X"].is_null()) {
    out.instance.k_x = p.matrix(doc["K_X"], "K_X", k);
  }
  out.instance.k_x_given_y1 = p.matrix(p.require(doc, "K_X_given_Y1", ""), "K_X_given_Y1", k);
  out.instance.k_x_given_y2 = p.matrix(p.require(doc, "K_X_given_Y2", ""), "K_X_given_Y2", k);

  const json& dist = p.require(doc, "distortion", "");
  if (!dist.is_object()) p.fail("distortion", "expected an object");
  const json& type = p.require(dist, "type", "distortion.");
  if (!type.is_string()) p.fail("distortion.type", "expected a string");
  const std::string t = type.get<std::string>();
  if (t == "mse") {
    out.spec = MseDiag{
        DiagMatrix(p.vector(p.require(dist, "D1", "distortion."), "distortion.D1", k)),
        DiagMatrix(p.vector(p.require(dist, "D2", "distortion."), "distortion.D2", k))};
  } else if (t == "scaled_identity" || t == "trace") {
    const double d1 = p.number(p.require(dist, "d1", "distortion."), "distortion.d1");
    const double d2 = p.number(p.require(dist, "d2", "distortion."), "distortion.d2");
    if (t == "trace") {
      out.spec = Trace{d1, d2};
    } else {
      out.spec = ScaledIdentity{d1, d2};
    }
  } else {
    p.fail("distortion.type",
           "unknown type '" + t + "' (expected mse, scaled_identity or trace)");
  }
  return out;
}

InstanceFile load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Parse, path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str(), path);
}

std::string instance_to_json(const InstanceFile& file, int indent) {
  json doc;
  doc["schema_version"] = file.schema_version;
  doc["k"] = file.instance.k;
  if (file.instance.k_x) doc["K_X"] = matrix_json(*file.instance.k_x);
  doc["K_X_given_Y1"] = matrix_json(file.instance.k_x_given_y1);
  doc["K_X_given_Y2"] = matrix_json(file.instance.k_x_given_y2);
  json dist;
  dist["type"] = std::string(distortion_type_name(family_of(file.spec)));
  std::visit(
      [&](const auto& s) {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, MseDiag>) {
          dist["D1"] = vector_json(s.d1.entries());
          dist["D2"] = vector_json(s.d2.entries());
        } else {
          dist["d1"] = s.d1;
          dist["d2"] = s.d2;
        }
      },
      file.spec);
  doc["distortion"] = dist;
  return doc.dump(indent);
}

}  // namespace hbrd
