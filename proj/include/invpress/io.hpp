#pragma once

#include "invpress/errors.hpp"
#include "invpress/polytope.hpp"
#include "invpress/system.hpp"

#include <json.hpp>

#include <string>

namespace invpress {

using Json = nlohmann::json;

/// {"dim": n, "vertices": [[...], ...]} or {"type": "box", "lower": [...], "upper": [...]} (n <= 20).
ConvexPolytope polytope_from_json(const Json& j, const std::string& pointer = "");
Json polytope_to_json(const ConvexPolytope& p);

/// {"A": [[...]], "B": [[...]], "U": <polytope>}; rows are matrix rows.
LinearSystem system_from_json(const Json& j);

Matrix matrix_from_json(const Json& j, const std::string& pointer);
Vector vector_from_json(const Json& j, const std::string& pointer);
Json to_json(const Matrix& m);
Json to_json(const Vector& v);

/// Inline JSON when the text starts with '{', otherwise a file path.
Json load_json_argument(const std::string& path_or_inline);

}  // namespace invpress
