#include "npasa/quadratic.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace npasa {

namespace {

bool symmetric_within(const Matrix& M, double tol) {
  return (M - M.transpose()).lpNorm<Eigen::Infinity>() <= tol * (1.0 + M.lpNorm<Eigen::Infinity>());
}

std::string format_double(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

class LineReader {
 public:
  explicit LineReader(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines_.push_back(line);
  }

  // Next non-empty, non-comment line split into tokens.
  std::vector<std::string> next(const std::string& expect_context) {
    while (pos_ < lines_.size()) {
      const std::string& raw = lines_[pos_++];
      std::string line = raw;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      std::istringstream ls(line);
      std::vector<std::string> tokens;
      std::string tok;
      while (ls >> tok) tokens.push_back(tok);
      if (!tokens.empty()) return tokens;
    }
    throw ParseError("problem file: unexpected end of file while reading " + expect_context);
  }

  bool at_end() {
    while (pos_ < lines_.size()) {
      std::string line = lines_[pos_];
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      std::istringstream ls(line);
      std::string tok;
      if (ls >> tok) return false;
      ++pos_;
    }
    return true;
  }

  int line_number() const { return static_cast<int>(pos_); }

 private:
  std::vector<std::string> lines_;
  size_t pos_ = 0;
};

double parse_number(const std::string& tok, int line, bool allow_inf) {
  std::string t = tok;
  if (t == "inf" || t == "+inf") {
    if (!allow_inf) throw ParseError("problem file line " + std::to_string(line) + ": 'inf' not allowed here");
    return kInf;
  }
  if (t == "-inf") {
    if (!allow_inf) throw ParseError("problem file line " + std::to_string(line) + ": '-inf' not allowed here");
    return -kInf;
  }
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end == t.c_str() || *end != '\0' || std::isnan(v)) {
    throw ParseError("problem file line " + std::to_string(line) + ": bad number '" + tok + "'");
  }
  return v;
}

void expect_keyword(LineReader& reader, const std::string& keyword) {
  const auto tokens = reader.next("keyword '" + keyword + "'");
  if (tokens[0] != keyword) {
    throw ParseError("problem file line " + std::to_string(reader.line_number()) + ": expected '" + keyword +
                     "', found '" + tokens[0] + "'");
  }
}

int read_int_field(LineReader& reader, const std::string& keyword) {
  const auto tokens = reader.next("field '" + keyword + "'");
  if (tokens.size() != 2 || tokens[0] != keyword) {
    throw ParseError("problem file line " + std::to_string(reader.line_number()) + ": expected '" + keyword +
                     " <int>'");
  }
  try {
    return std::stoi(tokens[1]);
  } catch (const std::exception&) {
    throw ParseError("problem file line " + std::to_string(reader.line_number()) + ": bad integer '" + tokens[1] +
                     "'");
  }
}

Vector read_vector(LineReader& reader, const std::string& keyword, int len, bool allow_inf) {
  expect_keyword(reader, keyword);
  Vector v(len);
  if (len == 0) return v;
  const auto tokens = reader.next("values of '" + keyword + "'");
  if (static_cast<int>(tokens.size()) != len) {
    throw ParseError("problem file line " + std::to_string(reader.line_number()) + ": '" + keyword + "' expects " +
                     std::to_string(len) + " values");
  }
  for (int i = 0; i < len; ++i) v[i] = parse_number(tokens[static_cast<size_t>(i)], reader.line_number(), allow_inf);
  return v;
}

Matrix read_matrix(LineReader& reader, const std::string& keyword, int rows, int cols) {
  expect_keyword(reader, keyword);
  Matrix M(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const auto tokens = reader.next("row " + std::to_string(r) + " of '" + keyword + "'");
    if (static_cast<int>(tokens.size()) != cols) {
      throw ParseError("problem file line " + std::to_string(reader.line_number()) + ": row of '" + keyword +
                       "' expects " + std::to_string(cols) + " values");
    }
    for (int c = 0; c < cols; ++c) M(r, c) = parse_number(tokens[static_cast<size_t>(c)], reader.line_number(), false);
  }
  return M;
}

void write_vector(std::ostringstream& out, const std::string& keyword, const Vector& v) {
  out << keyword << "\n";
  if (v.size() == 0) return;
  for (int i = 0; i < v.size(); ++i) out << (i ? " " : "") << format_double(v[i]);
  out << "\n";
}

void write_matrix(std::ostringstream& out, const std::string& keyword, const Matrix& M) {
  out << keyword << "\n";
  for (int r = 0; r < M.rows(); ++r) {
    for (int c = 0; c < M.cols(); ++c) out << (c ? " " : "") << format_double(M(r, c));
    out << "\n";
  }
}

}  // namespace

void QuadraticNlpSpec::validate() const {
  if (n <= 0) throw std::invalid_argument("quadratic spec: n must be positive");
  if (ell < 0) throw std::invalid_argument("quadratic spec: ell must be nonnegative");
  if (Q.rows() != n || Q.cols() != n) throw DimensionError("quadratic spec: Q must be n x n");
  if (c.size() != n) throw DimensionError("quadratic spec: c must have length n");
  if (static_cast<int>(constraints.size()) != ell) throw DimensionError("quadratic spec: constraint count != ell");
  if (!symmetric_within(Q, 1e-12)) throw std::invalid_argument("quadratic spec: Q is not symmetric");
  for (size_t j = 0; j < constraints.size(); ++j) {
    const auto& con = constraints[j];
    if (con.P.rows() != n || con.P.cols() != n || con.a.size() != n)
      throw DimensionError("quadratic spec: constraint " + std::to_string(j) + " has wrong shape");
    if (!symmetric_within(con.P, 1e-12))
      throw std::invalid_argument("quadratic spec: P of constraint " + std::to_string(j) + " is not symmetric");
  }
  if (poly.n() != n) throw DimensionError("quadratic spec: polyhedron dimension mismatch");
  poly.validate();
}

NlpProblem QuadraticNlpSpec::to_problem() const {
  validate();
  NlpProblem p;
  p.n = n;
  p.ell = ell;
  p.omega = poly;
  const Matrix Q_ = Q;
  const Vector c_ = c;
  const auto cons = constraints;
  p.f = [Q_, c_](const Vector& x) { return 0.5 * x.dot(Q_ * x) + c_.dot(x); };
  p.grad_f = [Q_, c_](const Vector& x) { return Vector(Q_ * x + c_); };
  p.hess_f = [Q_](const Vector&) { return Q_; };
  p.h = [cons](const Vector& x) {
    Vector v(static_cast<Eigen::Index>(cons.size()));
    for (size_t j = 0; j < cons.size(); ++j) {
      v[static_cast<Eigen::Index>(j)] = 0.5 * x.dot(cons[j].P * x) + cons[j].a.dot(x) + cons[j].b;
    }
    return v;
  };
  p.jac_h = [cons, n = n](const Vector& x) {
    Matrix J(static_cast<Eigen::Index>(cons.size()), n);
    for (size_t j = 0; j < cons.size(); ++j) {
      J.row(static_cast<Eigen::Index>(j)) = (cons[j].P * x + cons[j].a).transpose();
    }
    return J;
  };
  p.hess_h_weighted = [cons, n = n](const Vector&, const Vector& w) {
    Matrix H = Matrix::Zero(n, n);
    for (size_t j = 0; j < cons.size(); ++j) H += w[static_cast<Eigen::Index>(j)] * cons[j].P;
    return H;
  };
  return p;
}

QuadraticNlpSpec parse_quadratic_spec(const std::string& text) {
  LineReader reader(text);
  QuadraticNlpSpec spec;

  const auto name_tokens = reader.next("field 'name'");
  if (name_tokens.size() != 2 || name_tokens[0] != "name")
    throw ParseError("problem file line " + std::to_string(reader.line_number()) + ": expected 'name <string>'");
  spec.name = name_tokens[1];
  spec.n = read_int_field(reader, "n");
  spec.ell = read_int_field(reader, "ell");
  const int rows = read_int_field(reader, "rows");
  if (spec.n <= 0) throw ParseError("problem file: n must be positive");
  if (spec.ell < 0 || rows < 0) throw ParseError("problem file: ell and rows must be nonnegative");

  spec.Q = read_matrix(reader, "Q", spec.n, spec.n);
  spec.c = read_vector(reader, "c", spec.n, false);
  for (int j = 0; j < spec.ell; ++j) {
    const auto tokens = reader.next("constraint header");
    if (tokens.size() != 2 || tokens[0] != "constraint" || tokens[1] != std::to_string(j)) {
      throw ParseError("problem file line " + std::to_string(reader.line_number()) + ": expected 'constraint " +
                       std::to_string(j) + "'");
    }
    QuadraticConstraint con;
    con.P = read_matrix(reader, "P", spec.n, spec.n);
    con.a = read_vector(reader, "a", spec.n, false);
    const auto b_tokens = reader.next("field 'b'");
    if (b_tokens.size() != 2 || b_tokens[0] != "b")
      throw ParseError("problem file line " + std::to_string(reader.line_number()) + ": expected 'b <number>'");
    con.b = parse_number(b_tokens[1], reader.line_number(), false);
    spec.constraints.push_back(std::move(con));
  }
  spec.poly.A = read_matrix(reader, "A", rows, spec.n);
  spec.poly.row_lo = read_vector(reader, "row_lo", rows, true);
  spec.poly.row_hi = read_vector(reader, "row_hi", rows, true);
  spec.poly.box_lo = read_vector(reader, "box_lo", spec.n, true);
  spec.poly.box_hi = read_vector(reader, "box_hi", spec.n, true);
  if (!reader.at_end()) {
    throw ParseError("problem file line " + std::to_string(reader.line_number() + 1) + ": trailing content");
  }
  try {
    spec.validate();
  } catch (const std::exception& e) {
    throw ParseError(std::string("problem file: ") + e.what());
  }
  return spec;
}

std::string serialize_quadratic_spec(const QuadraticNlpSpec& spec) {
  spec.validate();
  std::ostringstream out;
  out << "name " << spec.name << "\n";
  out << "n " << spec.n << "\n";
  out << "ell " << spec.ell << "\n";
  out << "rows " << spec.poly.rows() << "\n";
  write_matrix(out, "Q", spec.Q);
  write_vector(out, "c", spec.c);
  for (int j = 0; j < spec.ell; ++j) {
    out << "constraint " << j << "\n";
    write_matrix(out, "P", spec.constraints[static_cast<size_t>(j)].P);
    write_vector(out, "a", spec.constraints[static_cast<size_t>(j)].a);
    out << "b " << format_double(spec.constraints[static_cast<size_t>(j)].b) << "\n";
  }
  write_matrix(out, "A", spec.poly.A);
  write_vector(out, "row_lo", spec.poly.row_lo);
  write_vector(out, "row_hi", spec.poly.row_hi);
  write_vector(out, "box_lo", spec.poly.box_lo);
  write_vector(out, "box_hi", spec.poly.box_hi);
  return out.str();
}

QuadraticNlpSpec load_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open problem file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_quadratic_spec(buf.str());
}

void save_spec_file(const QuadraticNlpSpec& spec, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write problem file '" + path + "'");
  out << serialize_quadratic_spec(spec);
}

NlpProblem load_problem(const std::string& text) { return parse_quadratic_spec(text).to_problem(); }

}  // namespace npasa
