#include "mapkit/model_io.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace mapkit {

namespace {

using nlohmann::json;

Matrix parse_matrix(const json& j, const char* name) {
  if (!j.is_array() || j.empty())
    throw validation_error(std::string("model json: \"") + name +
                           "\" must be a non-empty array of rows");
  const size_t rows = j.size();
  size_t cols = 0;
  Matrix M;
  for (size_t i = 0; i < rows; ++i) {
    const json& row = j[i];
    if (!row.is_array())
      throw validation_error(std::string("model json: \"") + name + "\" row " +
                             std::to_string(i) + " is not an array");
    if (i == 0) {
      cols = row.size();
      M.resize(Eigen::Index(rows), Eigen::Index(cols));
    } else if (row.size() != cols) {
      throw validation_error(std::string("model json: \"") + name + "\" row " +
                             std::to_string(i) + " has " +
                             std::to_string(row.size()) + " entries, expected " +
                             std::to_string(cols));
    }
    for (size_t k = 0; k < cols; ++k) {
      if (!row[k].is_number())
        throw validation_error(std::string("model json: \"") + name +
                               "\" entry (" + std::to_string(i) + "," +
                               std::to_string(k) + ") is not a number");
      M(Eigen::Index(i), Eigen::Index(k)) = row[k].get<double>();
    }
  }
  return M;
}

json matrix_to_json(const Matrix& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

MapModel parse_model_json(const std::string& text, const Tolerances& tol) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw validation_error(std::string("model json: parse failed: ") +
                           e.what());
  }
  if (!j.is_object() || !j.contains("C") || !j.contains("D"))
    throw validation_error(
        "model json: expected an object with \"C\" and \"D\" matrices");
  const Matrix C = parse_matrix(j["C"], "C");
  const Matrix D = parse_matrix(j["D"], "D");
  return validate_model(C, D, tol);
}

MapModel load_model_file(const std::string& path, const Tolerances& tol) {
  std::ifstream in(path);
  if (!in)
    throw validation_error("cannot open model file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model_json(buf.str(), tol);
}

std::string model_to_json(const MapModel& m) {
  json j;
  j["C"] = matrix_to_json(m.C());
  j["D"] = matrix_to_json(m.D());
  return j.dump(2);
}

}  // namespace mapkit
