#include "invpress/io.hpp"

#include <fstream>
#include <sstream>

namespace invpress {

namespace {

double number_at(const Json& j, const std::string& pointer) {
    if (!j.is_number()) throw SpecError("expected a number", pointer);
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw SpecError("number must be finite", pointer);
    return v;
}

const Json& field(const Json& j, const char* name, const std::string& pointer) {
    if (!j.is_object()) throw SpecError("expected an object", pointer);
    const auto it = j.find(name);
    if (it == j.end()) throw SpecError(std::string("missing field '") + name + "'", pointer + "/" + name);
    return *it;
}

}  // namespace

Vector vector_from_json(const Json& j, const std::string& pointer) {
    if (!j.is_array() || j.empty()) throw SpecError("expected a nonempty array of numbers", pointer);
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number_at(j[i], pointer + "/" + std::to_string(i));
    return v;
}

Matrix matrix_from_json(const Json& j, const std::string& pointer) {
    if (!j.is_array() || j.empty()) throw SpecError("expected a nonempty array of rows", pointer);
    const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
    Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < j.size(); ++r) {
        const std::string row_ptr = pointer + "/" + std::to_string(r);
        if (!j[r].is_array() || j[r].size() != cols || cols == 0) throw SpecError("rows must have equal nonzero length", row_ptr);
        for (std::size_t c = 0; c < cols; ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = number_at(j[r][c], row_ptr + "/" + std::to_string(c));
        }
    }
    return m;
}

Json to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

Json to_json(const Vector& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

ConvexPolytope polytope_from_json(const Json& j, const std::string& pointer) {
    if (!j.is_object()) throw SpecError("polytope must be an object", pointer);
    if (j.contains("type")) {
        if (j["type"] != "box") throw SpecError("unknown polytope type", pointer + "/type");
        const Vector lo = vector_from_json(field(j, "lower", pointer), pointer + "/lower");
        const Vector hi = vector_from_json(field(j, "upper", pointer), pointer + "/upper");
        if (lo.size() != hi.size()) throw SpecError("lower and upper differ in length", pointer + "/upper");
        if (lo.size() > 20) throw SpecError("box dimension above 20", pointer + "/lower");
        if ((hi.array() < lo.array()).any()) throw SpecError("upper below lower", pointer + "/upper");
        return ConvexPolytope::box(lo, hi);
    }
    const Json& verts = field(j, "vertices", pointer);
    const Matrix rows = matrix_from_json(verts, pointer + "/vertices");
    if (j.contains("dim")) {
        if (!j["dim"].is_number_integer() || j["dim"].get<long long>() != rows.cols()) {
            throw SpecError("dim does not match the vertex length", pointer + "/dim");
        }
    }
    return ConvexPolytope::from_points(Matrix(rows.transpose()));
}

Json polytope_to_json(const ConvexPolytope& p) {
    return Json{{"dim", p.dim()}, {"vertices", to_json(Matrix(p.vertices().transpose()))}};
}

LinearSystem system_from_json(const Json& j) {
    if (!j.is_object()) throw SpecError("system must be an object", "");
    const Matrix a = matrix_from_json(field(j, "A", ""), "/A");
    if (a.rows() != a.cols()) throw SpecError("A must be square", "/A");
    const Matrix b = matrix_from_json(field(j, "B", ""), "/B");
    if (b.rows() != a.rows()) throw SpecError("B must have as many rows as A", "/B");
    ConvexPolytope u = polytope_from_json(field(j, "U", ""), "/U");
    if (u.dim() != b.cols()) throw SpecError("U must have dimension equal to the number of columns of B", "/U");
    if (std::abs(a.determinant()) <= 1e-12) throw SpecError("A is singular (|det A| <= 1e-12)", "/A");
    try {
        return LinearSystem(a, b, std::move(u));
    } catch (const InvalidSystem& e) {
        throw SpecError(e.what(), "/U");
    }
}

Json load_json_argument(const std::string& path_or_inline) {
    const auto first = path_or_inline.find_first_not_of(" \t\r\n");
    try {
        if (first != std::string::npos && path_or_inline[first] == '{') return Json::parse(path_or_inline);
        std::ifstream in(path_or_inline);
        if (!in) throw SpecError("cannot open " + path_or_inline, "");
        std::stringstream buf;
        buf << in.rdbuf();
        return Json::parse(buf.str());
    } catch (const Json::parse_error& e) {
        throw SpecError(std::string("invalid JSON: ") + e.what(), "");
    }
}

}  // namespace invpress
