// SPDX-License-Identifier: Apache-2.0

#include "plhr/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace plhr {

namespace {

constexpr double kHermTol = 1e-10;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

struct Header {
  bool coordinate = true;
  bool complex_field = false;
  std::string symmetry;
};

Header parse_header(const std::string& line, const std::string& path) {
  std::istringstream ss(line);
  std::string banner, object, format, field, symmetry;
  ss >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket" || lower(object) != "matrix") {
    throw Error(path + ": not a Matrix Market matrix file");
  }
  Header h;
  format = lower(format);
  field = lower(field);
  h.symmetry = lower(symmetry);
  if (format == "coordinate") {
    h.coordinate = true;
  } else if (format == "array") {
    h.coordinate = false;
  } else {
    throw Error(path + ": unsupported format '" + format + "'");
  }
  if (field == "real" || field == "integer") {
    h.complex_field = false;
  } else if (field == "complex") {
    h.complex_field = true;
  } else {
    throw Error(path + ": unsupported field '" + field + "'");
  }
  if (h.symmetry != "symmetric" && h.symmetry != "hermitian" &&
      h.symmetry != "general") {
    throw Error(path + ": unsupported symmetry '" + h.symmetry +
                "'; expected symmetric, hermitian, or general");
  }
  return h;
}

bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    std::size_t pos = line.find_first_not_of(" \t\r\n");
    if (pos == std::string::npos || line[pos] == '%') {
      continue;
    }
    return true;
  }
  return false;
}

template <typename Scalar>
void check_hermitian_general(const std::vector<Eigen::Triplet<Scalar>>& trips,
                             Index n, const std::string& path) {
  Eigen::SparseMatrix<Scalar> A(n, n);
  A.setFromTriplets(trips.begin(), trips.end());
  Eigen::SparseMatrix<Scalar> D =
      Eigen::SparseMatrix<Scalar>(A.adjoint()) - A;
  double defect = 0.0, scale = 0.0;
  for (int k = 0; k < D.outerSize(); ++k) {
    for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(D, k); it;
         ++it) {
      defect = std::max(defect, std::abs(it.value()));
    }
  }
  for (int k = 0; k < A.outerSize(); ++k) {
    for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(A, k); it;
         ++it) {
      scale = std::max(scale, std::abs(it.value()));
    }
  }
  if (defect > kHermTol * std::max(scale, 1e-300)) {
    throw Error(path + ": general matrix is not Hermitian (relative defect " +
                std::to_string(defect / std::max(scale, 1e-300)) + ")");
  }
}

template <typename Scalar>
Eigen::SparseMatrix<Scalar> assemble(
    std::vector<Eigen::Triplet<Scalar>>& trips, Index n, bool expand,
    const std::string& path) {
  if (expand) {
    std::size_t base = trips.size();
    for (std::size_t t = 0; t < base; ++t) {
      const auto& e = trips[t];
      if (e.row() != e.col()) {
        Scalar v = e.value();
        if constexpr (std::is_same_v<Scalar, Complex>) {
          v = std::conj(v);
        }
        trips.emplace_back(e.col(), e.row(), v);
      }
    }
  } else {
    check_hermitian_general(trips, n, path);
  }
  Eigen::SparseMatrix<Scalar> A(n, n);
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();
  return A;
}

template <typename Scalar>
Eigen::SparseMatrix<Scalar> read_body(std::istream& in, const Header& h,
                                      const std::string& path) {
  std::string line;
  if (!next_data_line(in, line)) {
    throw Error(path + ": missing size line");
  }
  std::istringstream ss(line);
  Index rows = 0, cols = 0;
  long long declared = 0;
  ss >> rows >> cols;
  if (h.coordinate) {
    ss >> declared;
  }
  if (ss.fail() || rows <= 0 || cols <= 0) {
    throw Error(path + ": malformed size line");
  }
  if (rows != cols) {
    throw Error(path + ": matrix must be square");
  }
  const bool lower_only = h.symmetry != "general";
  const bool hermitian_field = h.symmetry == "hermitian";
  std::vector<Eigen::Triplet<Scalar>> trips;
  auto push = [&](Index i, Index j, double re, double im) {
    if (i < 0 || i >= rows || j < 0 || j >= cols) {
      throw Error(path + ": entry index out of range");
    }
    if (lower_only && i < j) {
      throw Error(path +
                  ": entry above the diagonal in symmetric/hermitian storage");
    }
    if (hermitian_field && i == j && std::abs(im) > kHermTol * (1.0 + std::abs(re))) {
      throw Error(path + ": hermitian matrix has non-real diagonal entry");
    }
    if constexpr (std::is_same_v<Scalar, Complex>) {
      trips.emplace_back(i, j, Complex(re, im));
    } else {
      trips.emplace_back(i, j, re);
    }
  };
  if (h.coordinate) {
    trips.reserve(static_cast<std::size_t>(declared) * (lower_only ? 2 : 1));
    for (long long e = 0; e < declared; ++e) {
      if (!next_data_line(in, line)) {
        throw Error(path + ": fewer entries than declared");
      }
      std::istringstream es(line);
      Index i = 0, j = 0;
      double re = 0, im = 0;
      es >> i >> j >> re;
      if (h.complex_field) {
        es >> im;
      }
      if (es.fail()) {
        throw Error(path + ": malformed entry line '" + line + "'");
      }
      push(i - 1, j - 1, re, im);
    }
    if (next_data_line(in, line)) {
      throw Error(path + ": more entries than declared");
    }
  } else {
    for (Index j = 0; j < cols; ++j) {
      for (Index i = lower_only ? j : 0; i < rows; ++i) {
        if (!next_data_line(in, line)) {
          throw Error(path + ": array data ended early");
        }
        std::istringstream es(line);
        double re = 0, im = 0;
        es >> re;
        if (h.complex_field) {
          es >> im;
        }
        if (es.fail()) {
          throw Error(path + ": malformed array value '" + line + "'");
        }
        push(i, j, re, im);
      }
    }
    if (next_data_line(in, line)) {
      throw Error(path + ": more array values than expected");
    }
  }
  return assemble<Scalar>(trips, rows, lower_only, path);
}

std::string format_value(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

template <typename Scalar>
void check_hermitian_for_write(const Eigen::SparseMatrix<Scalar>& A,
                               const std::string& path) {
  Eigen::SparseMatrix<Scalar> D = Eigen::SparseMatrix<Scalar>(A.adjoint()) - A;
  double defect = 0.0;
  for (int k = 0; k < D.outerSize(); ++k) {
    for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(D, k); it;
         ++it) {
      defect = std::max(defect, std::abs(it.value()));
    }
  }
  double scale = 0.0;
  for (int k = 0; k < A.outerSize(); ++k) {
    for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(A, k); it;
         ++it) {
      scale = std::max(scale, std::abs(it.value()));
    }
  }
  if (defect > kHermTol * std::max(scale, 1e-300)) {
    throw Error(path + ": refusing to write non-Hermitian matrix");
  }
}

}  // namespace

MatrixMarketData read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(path + ": cannot open file");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(path + ": empty file");
  }
  Header h = parse_header(line, path);
  MatrixMarketData out;
  out.complex_field = h.complex_field;
  if (h.complex_field) {
    out.cplx = read_body<Complex>(in, h, path);
    out.n = out.cplx.rows();
  } else {
    out.real = read_body<double>(in, h, path);
    out.n = out.real.rows();
  }
  return out;
}

void write_matrix_market(const std::string& path,
                         const Eigen::SparseMatrix<double>& A) {
  if (A.rows() != A.cols()) {
    throw Error(path + ": matrix must be square");
  }
  check_hermitian_for_write(A, path);
  std::ofstream out(path);
  if (!out) {
    throw Error(path + ": cannot open file for writing");
  }
  std::vector<std::string> lines;
  for (int k = 0; k < A.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
      if (it.row() < it.col() || it.value() == 0.0) {
        continue;
      }
      lines.push_back(std::to_string(it.row() + 1) + " " +
                      std::to_string(it.col() + 1) + " " +
                      format_value(it.value()));
    }
  }
  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  out << A.rows() << " " << A.cols() << " " << lines.size() << "\n";
  for (const auto& l : lines) {
    out << l << "\n";
  }
}

void write_matrix_market(const std::string& path,
                         const Eigen::SparseMatrix<Complex>& A) {
  if (A.rows() != A.cols()) {
    throw Error(path + ": matrix must be square");
  }
  check_hermitian_for_write(A, path);
  std::ofstream out(path);
  if (!out) {
    throw Error(path + ": cannot open file for writing");
  }
  std::vector<std::string> lines;
  for (int k = 0; k < A.outerSize(); ++k) {
    for (Eigen::SparseMatrix<Complex>::InnerIterator it(A, k); it; ++it) {
      if (it.row() < it.col() || it.value() == Complex(0, 0)) {
        continue;
      }
      lines.push_back(std::to_string(it.row() + 1) + " " +
                      std::to_string(it.col() + 1) + " " +
                      format_value(it.value().real()) + " " +
                      format_value(it.value().imag()));
    }
  }
  out << "%%MatrixMarket matrix coordinate complex hermitian\n";
  out << A.rows() << " " << A.cols() << " " << lines.size() << "\n";
  for (const auto& l : lines) {
    out << l << "\n";
  }
}

}  // namespace plhr
