#pragma once

#include <string>
#include <vector>

#include "fpot/dual.hpp"
#include "fpot/gaussian.hpp"
#include "fpot/markov.hpp"

namespace fpot {

enum class FileKind { kDiscrete, kGaussian, kMarkov };

// Discrete transport instance plus the file-level solver parameters.
struct DiscreteFile {
  Problem problem;
  double epsilon = 1.0;
  double kappa = 1.0;
  bool has_kappa = false;
};

struct GaussianFile {
  GaussianTarget target;
  double epsilon = 1.0;
};

struct MarkovFile {
  MarkovProblem problem;
};

// Reads only the type tag, so callers can dispatch before a full parse.
FileKind peek_file_kind(const std::string& path);

DiscreteFile load_discrete_file(const std::string& path);
GaussianFile load_gaussian_file(const std::string& path);
MarkovFile load_markov_file(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Shortest exact decimal form of the value; parsing it back recovers the bits.
std::string format_double(double value);

// Quotes a field when it holds a comma, quote, or newline; doubles quotes.
std::string csv_field(const std::string& raw);

// One header row, then the matrix rows cell by cell.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Matrix& rows);

}  // namespace fpot
