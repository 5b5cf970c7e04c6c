#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "omprip/linalg.hpp"
#include "omprip/objective.hpp"

namespace omprip {

// Dense matrices travel as CSV: a `rows,cols` header line followed by one
// comma-separated line per row.  Values are written with enough digits to
// round-trip doubles exactly.  Vectors are stored as d x 1 matrices.
std::string matrix_to_csv(const DenseMatrix& A);
DenseMatrix matrix_from_csv(const std::string& text);  // throws ParseError
std::string vector_to_csv(const DenseVector& v);
DenseVector vector_from_csv(const std::string& text);  // throws ParseError

std::string read_text_file(const std::filesystem::path& path);  // throws ParseError
void write_text_file(const std::filesystem::path& path, const std::string& content);

// A problem document is JSON of the form
//   {"kind": "quadratic", "matrix_csv": "A.csv", "observation_csv": "y.csv"}
// with kind "quadratic" (least squares on the matrix and observation) or
// "logistic" (features and +/-1 labels).  Relative CSV paths resolve against
// the directory containing the JSON document itself.
struct LoadedProblem {
  std::string kind;
  std::unique_ptr<ObjectiveHandle> objective;
};

LoadedProblem load_problem(const std::filesystem::path& json_path);  // throws ParseError

}  // namespace omprip
