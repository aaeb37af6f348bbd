#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lsa/bounds.hpp"
#include "lsa/problem.hpp"

namespace lsa {

using Json = nlohmann::json;

// Instance files: {d, S, A, b, noise: {variant, ...}, Abar?, bbar?}.
// Structural problems throw ErrorKind::Parse; unknown keys are rejected.
ObservationModel model_from_json(const Json& j);
Json model_to_json(const ObservationModel& m);
ObservationModel load_model(const std::filesystem::path& path);

Json matrix_to_json(const Matrix& m);
Json vector_to_json(const Vector& v);
Matrix matrix_from_json(const Json& j, const std::string& what);
Vector vector_from_json(const Json& j, const std::string& what);

Json report_to_json(const BoundReport& r);

// Shortest decimal text that round-trips; 17 significant digits.
std::string format_double(double x);

}  // namespace lsa
