#pragma once

// JSON instance files. Layout (matrices are row-major nested arrays):
//
//   {
//     "schema_version": 1,
//     "k": 2,
//     "K_X": [[...], [...]],            optional
//     "K_X_given_Y1": [[...], [...]],
//     "K_X_given_Y2": [[...], [...]],
//     "distortion": {"type": "mse", "D1": [...], "D2": [...]}
//                 | {"type": "scaled_identity" | "trace", "d1": x, "d2": y}
//   }
//
// Every parse failure is an Error with code Parse whose message names the
// source, the field and (for matrices) the row.

#include <string>

#include "hbrd/model.hpp"

namespace hbrd {

inline constexpr int kSchemaVersion = 1;

struct InstanceFile {
  int schema_version = kSchemaVersion;
  ProblemInstance instance;
  DistortionSpec spec;
};

/// `source` only labels error messages.
InstanceFile parse_instance(const std::string& text,
                            const std::string& source = "<input>");
InstanceFile load_instance(const std::string& path);

/// Serializes with enough digits to reproduce every double exactly.
std::string instance_to_json(const InstanceFile& file, int indent = 2);

std::string_view distortion_type_name(Family family);

}  // namespace hbrd
