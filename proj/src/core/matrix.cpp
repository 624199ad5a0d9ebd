// Copyright 2026 The id-kit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "idkit/core/matrix.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

#include "idkit/core/error.hpp"
#include "idkit/kernels/kernels.hpp"

namespace idkit {

Matrix::Matrix(int r, int c, double fill) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {
  if (r < 0 || c < 0) throw ShapeError("negative matrix dimension");
}

Matrix::Matrix(int r, int c, std::initializer_list<double> values) : rows(r), cols(c), data(values) {
  if (data.size() != static_cast<std::size_t>(r) * c) {
    throw ShapeError("initializer has " + std::to_string(data.size()) + " values for a " + std::to_string(r) + "x" +
                     std::to_string(c) + " matrix");
  }
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool Matrix::all_finite() const {
  for (double v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

std::string Matrix::shape_str() const {
  std::ostringstream os;
  os << "[" << rows << " x " << cols << "]";
  return os.str();
}

Matrix Matrix::transposed() const {
  Matrix t(cols, rows);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) t(j, i) = (*this)(i, j);
  return t;
}

static void require_same(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.same_shape(b)) throw ShapeError(std::string(op) + ": " + a.shape_str() + " vs " + b.shape_str());
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  require_same(a, b, "add");
  Matrix out = a;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
  return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  require_same(a, b, "subtract");
  Matrix out = a;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= b.data[i];
  return out;
}

Matrix operator*(double s, const Matrix& a) {
  Matrix out = a;
  for (double& v : out.data) v *= s;
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) throw ShapeError("matmul: " + a.shape_str() + " x " + b.shape_str());
  Matrix c(a.rows, b.cols);
  kernels::gemm_nn(a.rows, b.cols, a.cols, a.data, b.data, c.data);
  return c;
}

bool bitwise_equal(const Matrix& a, const Matrix& b) {
  return a.same_shape(b) && std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(double)) == 0;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  require_same(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data) s += v * v;
  return std::sqrt(s);
}

void round_to_float(Matrix& m) {
  for (double& v : m.data) v = static_cast<double>(static_cast<float>(v));
}

bool float_representable(const Matrix& m) {
  for (double v : m.data)
    if (static_cast<double>(static_cast<float>(v)) != v) return false;
  return true;
}

}  // namespace idkit
