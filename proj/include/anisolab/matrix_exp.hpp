/* Copyright 2026 The anisolab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ANISOLAB_MATRIX_EXP_HPP_
#define ANISOLAB_MATRIX_EXP_HPP_

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <optional>

#include "anisolab/error.hpp"

namespace anisolab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Degree-13 Pade approximant with scaling and squaring.
inline Matrix expm_pade(const Matrix& a) {
  if (a.rows() != a.cols()) throw ShapeMismatch("expm_pade: matrix must be square");
  const Eigen::Index n = a.rows();
  if (n == 0) return a;
  static constexpr double b[14] = {
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
      1187353796428800.0,  129060195264000.0,   10559470521600.0,
      670442572800.0,      33522128640.0,       1323241920.0,
      40840800.0,          960960.0,            16380.0,
      182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;

  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  if (!std::isfinite(norm1)) throw InvalidArgument("expm_pade: non-finite entries");
  int s = 0;
  if (norm1 > theta13) s = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
  const Matrix x = a / std::ldexp(1.0, s);

  const Matrix id = Matrix::Identity(n, n);
  const Matrix x2 = x * x;
  const Matrix x4 = x2 * x2;
  const Matrix x6 = x4 * x2;
  const Matrix u = x * (x6 * (b[13] * x6 + b[11] * x4 + b[9] * x2) + b[7] * x6 +
                        b[5] * x4 + b[3] * x2 + b[1] * id);
  const Matrix v = x6 * (b[12] * x6 + b[10] * x4 + b[8] * x2) + b[6] * x6 + b[4] * x4 +
                   b[2] * x2 + b[0] * id;
  Matrix r = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < s; ++i) r = r * r;
  return r;
}

// Eigendecomposition of a real matrix, kept when it is well conditioned.
struct EigenData {
  Eigen::MatrixXcd vectors;
  Eigen::MatrixXcd inverse;
  Eigen::VectorXcd values;
  double condition = 0.0;
};

inline std::optional<EigenData> diagonalize(const Matrix& a, double max_condition = 1e8) {
  Eigen::EigenSolver<Matrix> es(a, true);
  if (es.info() != Eigen::Success) return std::nullopt;
  EigenData d;
  d.vectors = es.eigenvectors();
  d.values = es.eigenvalues();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(d.vectors);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  if (!(smin > 0.0)) return std::nullopt;
  d.condition = sv(0) / smin;
  if (d.condition > max_condition) return std::nullopt;
  d.inverse = d.vectors.inverse();
  return d;
}

// exp(a) through the eigenbasis. Fails for defective or badly conditioned a.
inline std::optional<Matrix> expm_eigen(const Matrix& a, double max_condition = 1e8) {
  auto d = diagonalize(a, max_condition);
  if (!d) return std::nullopt;
  const Eigen::VectorXcd e = d->values.array().exp();
  Eigen::MatrixXcd r = d->vectors * e.asDiagonal() * d->inverse;
  return Matrix(r.real());
}

inline Matrix expm(const Matrix& a) { return expm_pade(a); }

}  // namespace anisolab

#endif  // ANISOLAB_MATRIX_EXP_HPP_
