#include "omprip/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "omprip/errors.hpp"

namespace omprip {

namespace {

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Parses one CSV line into exactly `expected` doubles (any count if 0).
std::vector<double> parse_row(const std::string& line, std::size_t lineno,
                              std::size_t expected) {
  std::vector<double> out;
  const char* p = line.c_str();
  while (true) {
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(p, &end);
    if (end == p || errno == ERANGE || !std::isfinite(v))
      throw ParseError("csv: bad numeric field on line " + std::to_string(lineno));
    out.push_back(v);
    p = end;
    while (*p == ' ' || *p == '\t') ++p;
    if (*p == ',') {
      ++p;
      continue;
    }
    if (*p == '\0') break;
    throw ParseError("csv: unexpected character on line " + std::to_string(lineno));
  }
  if (expected != 0 && out.size() != expected)
    throw ParseError("csv: expected " + std::to_string(expected) + " fields on line " +
                     std::to_string(lineno) + ", found " + std::to_string(out.size()));
  return out;
}

std::size_t parse_dim(const std::string& field, const char* what) {
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(field.c_str(), &end, 10);
  if (end == field.c_str() || *end != '\0' || errno == ERANGE || v == 0)
    throw ParseError(std::string("csv: malformed header ") + what);
  return static_cast<std::size_t>(v);
}

}  // namespace

std::string matrix_to_csv(const DenseMatrix& A) {
  std::string out = std::to_string(A.rows()) + "," + std::to_string(A.cols()) + "\n";
  for (std::size_t i = 0; i < A.rows(); ++i) {
    for (std::size_t j = 0; j < A.cols(); ++j) {
      if (j != 0) out += ",";
      out += format_value(A(i, j));
    }
    out += "\n";
  }
  return out;
}

DenseMatrix matrix_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("csv: empty document");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto comma = line.find(',');
  if (comma == std::string::npos) throw ParseError("csv: header must be rows,cols");
  const std::size_t rows = parse_dim(line.substr(0, comma), "row count");
  const std::size_t cols = parse_dim(line.substr(comma + 1), "column count");

  DenseMatrix A(rows, cols);
  std::size_t i = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (i >= rows) throw ParseError("csv: more data rows than the header declares");
    const std::vector<double> row = parse_row(line, lineno, cols);
    for (std::size_t j = 0; j < cols; ++j) A(i, j) = row[j];
    ++i;
  }
  if (i != rows)
    throw ParseError("csv: header declares " + std::to_string(rows) + " rows, found " +
                     std::to_string(i));
  return A;
}

std::string vector_to_csv(const DenseVector& v) {
  std::string out = std::to_string(v.size()) + ",1\n";
  for (double x : v) out += format_value(x) + "\n";
  return out;
}

DenseVector vector_from_csv(const std::string& text) {
  const DenseMatrix M = matrix_from_csv(text);
  if (M.cols() != 1) throw ParseError("csv: expected a single-column vector");
  DenseVector v(M.rows());
  for (std::size_t i = 0; i < M.rows(); ++i) v[i] = M(i, 0);
  return v;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw ParseError("cannot read file: " + path.string());
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot open file for writing: " + path.string());
  out << content;
  out.flush();
  if (!out) throw ParseError("cannot write file: " + path.string());
}

LoadedProblem load_problem(const std::filesystem::path& json_path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(json_path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("problem document: " + std::string(e.what()));
  }
  if (!doc.is_object()) throw ParseError("problem document: expected a JSON object");
  for (const char* key : {"kind", "matrix_csv", "observation_csv"}) {
    if (!doc.contains(key) || !doc[key].is_string())
      throw ParseError(std::string("problem document: missing string field \"") + key +
                       "\"");
  }

  const auto base = json_path.has_parent_path() ? json_path.parent_path()
                                                : std::filesystem::path(".");
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path rel(p);
    return rel.is_absolute() ? rel : base / rel;
  };

  const DenseMatrix A =
      matrix_from_csv(read_text_file(resolve(doc["matrix_csv"].get<std::string>())));
  const DenseVector y =
      vector_from_csv(read_text_file(resolve(doc["observation_csv"].get<std::string>())));

  LoadedProblem out;
  out.kind = doc["kind"].get<std::string>();
  try {
    if (out.kind == "quadratic") {
      out.objective = quadratic_objective(SensingProblem(A, y));
    } else if (out.kind == "logistic") {
      out.objective = logistic_objective(A, y);
    } else {
      throw ParseError("problem document: unknown kind \"" + out.kind + "\"");
    }
  } catch (const std::invalid_argument& e) {
    // Shape or label validation failures on loaded data are input errors.
    throw ParseError("problem document: " + std::string(e.what()));
  }
  return out;
}

}  // namespace omprip
