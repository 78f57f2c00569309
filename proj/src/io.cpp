#include "fpot/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "fpot/measure.hpp"

namespace fpot {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& why) {
  throw std::invalid_argument("field " + field + ": " + why);
}

json parse_file(const std::string& path) {
  json root;
  try {
    root = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw std::invalid_argument("problem file must be a JSON object");
  return root;
}

// `label` is the dotted path used in diagnostics; the lookup key is its last piece.
const json& require(const json& obj, const std::string& label) {
  const std::size_t dot = label.rfind('.');
  const std::string key = dot == std::string::npos ? label : label.substr(dot + 1);
  if (!obj.is_object() || !obj.contains(key)) fail(label, "missing");
  return obj.at(key);
}

double as_number(const json& v, const std::string& field) {
  if (!v.is_number()) fail(field, "must be a number");
  return v.get<double>();
}

double as_positive(const json& v, const std::string& field) {
  double x = as_number(v, field);
  if (!(x > 0.0)) fail(field, "must be positive");
  return x;
}

Vector as_vector(const json& v, const std::string& field) {
  if (!v.is_array() || v.empty()) fail(field, "must be a nonempty array of numbers");
  Vector out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!v[k].is_number()) fail(field, "must be a nonempty array of numbers");
    out(static_cast<Eigen::Index>(k)) = v[k].get<double>();
  }
  return out;
}

Matrix as_matrix(const json& v, const std::string& field) {
  if (!v.is_array() || v.empty() || !v[0].is_array()) {
    fail(field, "must be a nonempty array of equal-length rows");
  }
  const std::size_t cols = v[0].size();
  if (cols == 0) fail(field, "rows must be nonempty");
  Matrix out(v.size(), cols);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_array() || v[i].size() != cols) {
      fail(field, "must be a nonempty array of equal-length rows");
    }
    for (std::size_t j = 0; j < cols; ++j) {
      if (!v[i][j].is_number()) fail(field, "entries must be numbers");
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v[i][j].get<double>();
    }
  }
  return out;
}

// Point lists accept either K rows of coordinates or a flat list, read as K x 1.
Matrix as_points(const json& v, const std::string& field) {
  if (v.is_array() && !v.empty() && v[0].is_number()) {
    Vector flat = as_vector(v, field);
    Matrix out(flat.size(), 1);
    out.col(0) = flat;
    return out;
  }
  return as_matrix(v, field);
}

DiscreteMeasure as_measure(const json& obj, const std::string& field) {
  if (!obj.is_object()) fail(field, "must be an object with points and weights");
  Matrix points = as_points(require(obj, field + ".points"), field + ".points");
  Vector weights = as_vector(require(obj, field + ".weights"), field + ".weights");
  try {
    return DiscreteMeasure(std::move(points), std::move(weights));
  } catch (const std::invalid_argument& e) {
    fail(field, e.what());
  }
}

FileKind kind_from_tag(const json& root) {
  const json& tag = require(root, "type");
  if (!tag.is_string()) fail("type", "must be a string");
  const std::string name = tag.get<std::string>();
  if (name == "discrete") return FileKind::kDiscrete;
  if (name == "gaussian") return FileKind::kGaussian;
  if (name == "markov") return FileKind::kMarkov;
  fail("type", "must be one of discrete, gaussian, markov");
}

void require_kind(const json& root, FileKind kind) {
  if (kind_from_tag(root) != kind) fail("type", "wrong problem type for this loader");
}

}  // namespace

FileKind peek_file_kind(const std::string& path) { return kind_from_tag(parse_file(path)); }

DiscreteFile load_discrete_file(const std::string& path) {
  json root = parse_file(path);
  require_kind(root, FileKind::kDiscrete);
  const double epsilon = as_positive(require(root, "epsilon"), "epsilon");
  double kappa = 1.0;
  bool has_kappa = false;
  if (root.contains("kappa")) {
    kappa = as_positive(root.at("kappa"), "kappa");
    has_kappa = true;
  }

  DiscreteMeasure mu1 = as_measure(require(root, "mu1"), "mu1");
  DiscreteMeasure mu2 = as_measure(require(root, "mu2"), "mu2");
  CostMatrix cost = cost_matrix(half_squared_euclidean, mu1, mu2);
  Vector targets = as_vector(require(root, "targets"), "targets");

  const json& feats = require(root, "features");
  if (!feats.is_object()) fail("features", "must be an object with a kind");
  const json& kind = require(feats, "features.kind");
  if (!kind.is_string()) fail("features.kind", "must be a string");
  const std::string name = kind.get<std::string>();

  if (name == "linear") {
    if (targets.size() != mu2.dim()) fail("targets", "length must equal the point dimension");
    return DiscreteFile{Problem(std::move(mu1), std::move(mu2), std::move(cost),
                                linear_features(targets.size(), targets)),
                        epsilon, kappa, has_kappa};
  }
  if (name == "quadratic") {
    const Eigen::Index n = mu2.dim();
    if (targets.size() != n + n * (n + 1) / 2) {
      fail("targets", "length must be dim + dim*(dim+1)/2");
    }
    return DiscreteFile{Problem(std::move(mu1), std::move(mu2), std::move(cost),
                                quadratic_monomial_features(n, targets)),
                        epsilon, kappa, has_kappa};
  }
  if (name == "tabulated") {
    Matrix values = as_matrix(require(feats, "features.values"), "features.values");
    if (values.cols() != mu2.size()) {
      fail("features.values", "need one column per target support point");
    }
    if (values.rows() != targets.size()) {
      fail("targets", "length must match the feature row count");
    }
    return DiscreteFile{Problem(std::move(mu1), std::move(mu2), std::move(cost),
                                std::move(values), std::move(targets)),
                        epsilon, kappa, has_kappa};
  }
  fail("features.kind", "must be one of linear, quadratic, tabulated");
}

GaussianFile load_gaussian_file(const std::string& path) {
  json root = parse_file(path);
  require_kind(root, FileKind::kGaussian);
  const double epsilon = as_positive(require(root, "epsilon"), "epsilon");
  Vector m_y = as_vector(require(root, "m_y"), "m_y");
  Matrix m2_y = as_matrix(require(root, "m2_y"), "m2_y");
  if (m2_y.rows() != m2_y.cols() || m2_y.rows() != m_y.size()) {
    fail("m2_y", "must be square with the same dimension as m_y");
  }
  return GaussianFile{GaussianTarget{std::move(m_y), std::move(m2_y)}, epsilon};
}

MarkovFile load_markov_file(const std::string& path) {
  json root = parse_file(path);
  require_kind(root, FileKind::kMarkov);
  MarkovProblem pr;
  pr.epsilon = as_positive(require(root, "epsilon"), "epsilon");
  pr.states = as_points(require(root, "states"), "states");
  pr.nu0 = as_vector(require(root, "nu0"), "nu0");
  pr.u = as_vector(require(root, "u"), "u");
  pr.r = as_vector(require(root, "r"), "r");

  const json& trans = require(root, "P");
  if (!trans.is_array() || trans.empty()) fail("P", "must be a matrix or an array of matrices");
  const Eigen::Index steps = pr.r.size();
  const json& first = trans.at(0);
  if (first.is_array() && !first.empty() && first.at(0).is_array()) {
    if (static_cast<Eigen::Index>(trans.size()) != steps) {
      fail("P", "need one transition matrix per target");
    }
    for (std::size_t k = 0; k < trans.size(); ++k) {
      pr.P.push_back(as_matrix(trans[k], "P[" + std::to_string(k) + "]"));
    }
  } else {
    // A single matrix means a homogeneous chain over all steps.
    Matrix shared = as_matrix(trans, "P");
    pr.P.assign(static_cast<std::size_t>(steps), shared);
  }

  pr.validate();
  return MarkovFile{std::move(pr)};
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << content;
  if (!out) throw std::runtime_error("cannot write file: " + path);
}

std::string format_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& raw) {
  if (raw.find_first_of(",\"\n") == std::string::npos) return raw;
  std::string out;
  out.reserve(raw.size() + 2);
  out += '"';
  for (char c : raw) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Matrix& rows) {
  if (header.empty()) throw std::invalid_argument("csv header must be nonempty");
  if (rows.size() > 0 && rows.cols() != static_cast<Eigen::Index>(header.size())) {
    throw std::invalid_argument("csv rows must match the header width");
  }
  std::ostringstream out;
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (k > 0) out << ',';
    out << csv_field(header[k]);
  }
  out << '\n';
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(rows(i, j));
    }
    out << '\n';
  }
  write_text_file(path, out.str());
}

}  // namespace fpot
