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

#ifndef ANISOLAB_ANISOTROPY_HPP_
#define ANISOLAB_ANISOTROPY_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "anisolab/error.hpp"
#include "anisolab/matrix_exp.hpp"

namespace anisolab {

struct AnisotropyTolerances {
  double spectral = 1e-10;
  double bisection = 1e-10;
  int max_iterations = 200;
};

// Expansive real matrix A with the dilation group A_t = exp(A ln t) and the
// quasi-norm rho_A(x) = min{lambda > 0 : |A_{1/lambda} x| <= 1}.
class Anisotropy {
 public:
  explicit Anisotropy(const Matrix& m, AnisotropyTolerances tol = {}) : tol_(tol) {
    if (m.rows() != m.cols() || m.rows() == 0)
      throw ShapeMismatch("anisotropy: matrix must be square and nonempty");
    if (!m.allFinite()) throw InvalidArgument("anisotropy: non-finite entries");
    data_ = std::make_shared<Data>();
    data_->matrix = m;
    const Eigen::Index n = m.rows();
    bool diag = true;
    for (Eigen::Index i = 0; i < n && diag; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (i != j && m(i, j) != 0.0) {
          diag = false;
          break;
        }
    if (diag) {
      std::vector<double> d(static_cast<std::size_t>(n));
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!(m(i, i) > tol_.spectral))
          throw NotExpansive("anisotropy: eigenvalue with real part <= 0");
        d[static_cast<std::size_t>(i)] = m(i, i);
      }
      data_->diagonal = d;
      data_->lambda_min = *std::min_element(d.begin(), d.end());
      data_->lambda_max = *std::max_element(d.begin(), d.end());
    } else {
      Eigen::EigenSolver<Matrix> es(m, false);
      if (es.info() != Eigen::Success) throw NotConverged("anisotropy: eigen-solver failed");
      const Eigen::VectorXd re = es.eigenvalues().real();
      if (re.minCoeff() <= tol_.spectral)
        throw NotExpansive("anisotropy: eigenvalue with real part <= 0");
      data_->lambda_min = re.minCoeff();
      data_->lambda_max = re.maxCoeff();
      const Matrix sym = m + m.transpose();
      Eigen::SelfAdjointEigenSolver<Matrix> ses(sym, Eigen::EigenvaluesOnly);
      if (ses.eigenvalues().minCoeff() <= tol_.spectral)
        throw NonMonotoneAnisotropy(
            "anisotropy: A + A^T must be positive definite for non-diagonal A");
      data_->eigen = diagonalize(m);
    }
    data_->trace = m.trace();
  }

  static Anisotropy diagonal(const std::vector<double>& a, AnisotropyTolerances tol = {}) {
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(a.size()),
                            static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = a[i];
    return Anisotropy(m, tol);
  }
  static Anisotropy scalar(double a, std::size_t dim, AnisotropyTolerances tol = {}) {
    return diagonal(std::vector<double>(dim, a), tol);
  }

  std::size_t dim() const { return static_cast<std::size_t>(data_->matrix.rows()); }
  const Matrix& matrix() const { return data_->matrix; }
  double trace() const { return data_->trace; }
  double lambda_min() const { return data_->lambda_min; }
  double lambda_max() const { return data_->lambda_max; }
  const std::optional<std::vector<double>>& diagonal() const { return data_->diagonal; }
  const AnisotropyTolerances& tolerances() const { return tol_; }

  bool is_scalar() const {
    const auto& d = data_->diagonal;
    return d && std::all_of(d->begin(), d->end(), [&](double v) { return v == d->front(); });
  }

  Anisotropy scaled(double lambda) const {
    if (!(lambda > 0.0)) throw InvalidArgument("anisotropy: scale must be positive");
    return Anisotropy(lambda * data_->matrix, tol_);
  }

  // exp(A ln t).
  Matrix power(double t) const {
    if (!(t > 0.0)) throw InvalidArgument("dilate: t must be positive");
    const double lt = std::log(t);
    const Eigen::Index n = data_->matrix.rows();
    if (data_->diagonal) {
      Matrix r = Matrix::Zero(n, n);
      for (Eigen::Index i = 0; i < n; ++i)
        r(i, i) = std::exp((*data_->diagonal)[static_cast<std::size_t>(i)] * lt);
      return r;
    }
    if (data_->eigen) {
      const auto& e = *data_->eigen;
      const Eigen::VectorXcd ev = (e.values * lt).array().exp();
      return (e.vectors * ev.asDiagonal() * e.inverse).real();
    }
    return expm_pade(data_->matrix * lt);
  }

  Vector dilate(double t, const Vector& x) const {
    check_dim(x);
    if (!(t > 0.0)) throw InvalidArgument("dilate: t must be positive");
    if (data_->diagonal) {
      Vector y(x.size());
      for (Eigen::Index i = 0; i < x.size(); ++i)
        y(i) = x(i) * std::pow(t, (*data_->diagonal)[static_cast<std::size_t>(i)]);
      return y;
    }
    return power(t) * x;
  }

  double quasi_norm(const Vector& x) const { return quasi_norm(x, tol_.bisection); }

  double quasi_norm(const Vector& x, double tol) const {
    check_dim(x);
    if (!(tol > 0.0)) throw InvalidArgument("quasi_norm: tol must be positive");
    const double nx = x.norm();
    if (nx == 0.0) return 0.0;
    if (data_->diagonal) return diagonal_quasi_norm(x);
    return general_quasi_norm(x, nx, tol);
  }

  // Closed form for diagonal blocks of size one, used on hot paths.
  double quasi_norm_1d(double x) const {
    const double a = data_->matrix(0, 0);
    return x == 0.0 ? 0.0 : std::pow(std::abs(x), 1.0 / a);
  }

  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    if (data_->diagonal) {
      os << "diag(";
      for (std::size_t i = 0; i < data_->diagonal->size(); ++i)
        os << (i ? "," : "") << (*data_->diagonal)[i];
      os << ")";
    } else {
      os << "[";
      for (Eigen::Index i = 0; i < data_->matrix.rows(); ++i) {
        os << (i ? ";" : "");
        for (Eigen::Index j = 0; j < data_->matrix.cols(); ++j)
          os << (j ? "," : "") << data_->matrix(i, j);
      }
      os << "]";
    }
    return os.str();
  }

  bool operator==(const Anisotropy& o) const {
    return data_->matrix.rows() == o.data_->matrix.rows() && data_->matrix == o.data_->matrix;
  }

 private:
  struct Data {
    Matrix matrix;
    double trace = 0.0;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    std::optional<std::vector<double>> diagonal;
    std::optional<EigenData> eigen;
  };

  void check_dim(const Vector& x) const {
    if (static_cast<std::size_t>(x.size()) != dim())
      throw ShapeMismatch("anisotropy: point dimension mismatch");
  }

  // sum_i x_i^2 lambda^{-2 a_i} = 1, solved by Newton in u = ln lambda. The
  // left-hand side is convex and decreasing in u, so Newton started left of
  // the root increases monotonically to it.
  double diagonal_quasi_norm(const Vector& x) const {
    const auto& a = *data_->diagonal;
    double u = std::numeric_limits<double>::infinity();
    std::size_t nonzero = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x(i) == 0.0) continue;
      ++nonzero;
      u = std::min(u, std::log(std::abs(x(i))) / a[static_cast<std::size_t>(i)]);
    }
    if (nonzero == 1 || is_scalar()) {
      if (is_scalar()) return std::pow(x.norm(), 1.0 / a.front());
      return std::exp(u);
    }
    for (int it = 0; it < 100; ++it) {
      double s = 0.0, ds = 0.0;
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (x(i) == 0.0) continue;
        const double ai = a[static_cast<std::size_t>(i)];
        const double term = std::exp(2.0 * (std::log(std::abs(x(i))) - ai * u));
        s += term;
        ds -= 2.0 * ai * term;
      }
      const double h = std::log(s);
      const double step = -h / (ds / s);
      u += step;
      if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(u))) break;
    }
    return std::exp(u);
  }

  double shrunk_norm(const Vector& x, const Eigen::VectorXcd& y, double u) const {
    // |exp(-A u) x|
    if (data_->eigen) {
      const auto& e = *data_->eigen;
      const Eigen::VectorXcd ev = (-u * e.values).array().exp();
      return (e.vectors * (ev.cwiseProduct(y))).real().norm();
    }
    return (expm_pade(-u * data_->matrix) * x).norm();
  }

  double general_quasi_norm(const Vector& x, double nx, double tol) const {
    Eigen::VectorXcd y;
    if (data_->eigen) y = data_->eigen->inverse * x.cast<std::complex<double>>();
    const double lmin = data_->lambda_min;
    const double lmax = data_->lambda_max;
    const double e_hi = 1.0 / (lmax + 0.1);
    const double e_lo = 1.0 / (lmin - std::min(0.1, lmin / 2.0));
    const double lx = std::log(nx);
    // Bracket in u = ln lambda; g(u) = |A_{e^{-u}} x| decreases in u.
    double ua = std::min(e_hi * lx, e_lo * lx);
    double ub = std::max(e_hi * lx, e_lo * lx);
    int iter = 0;
    double width = std::max(1.0, ub - ua);
    while (shrunk_norm(x, y, ua) < 1.0) {
      ua -= width;
      width *= 2.0;
      if (++iter > tol_.max_iterations) throw NotConverged("quasi_norm: bracket not found");
    }
    width = std::max(1.0, ub - ua);
    while (shrunk_norm(x, y, ub) > 1.0) {
      ub += width;
      width *= 2.0;
      if (++iter > tol_.max_iterations) throw NotConverged("quasi_norm: bracket not found");
    }
    while (ub - ua > tol) {
      const double um = 0.5 * (ua + ub);
      if (shrunk_norm(x, y, um) > 1.0)
        ua = um;
      else
        ub = um;
      if (++iter > tol_.max_iterations) throw NotConverged("quasi_norm: bisection cap reached");
    }
    return std::exp(0.5 * (ua + ub));
  }

  AnisotropyTolerances tol_;
  std::shared_ptr<Data> data_;
};

// Tuple of anisotropies acting on consecutive coordinate blocks.
class DecomposedAnisotropy {
 public:
  explicit DecomposedAnisotropy(std::vector<Anisotropy> blocks,
                                std::size_t triangle_samples = 4000,
                                std::uint64_t triangle_seed = 0x5eed)
      : blocks_(std::move(blocks)) {
    if (blocks_.empty()) throw InvalidArgument("decomposed anisotropy: no blocks");
    offsets_.push_back(0);
    for (const auto& b : blocks_) {
      decomposition_.push_back(b.dim());
      offsets_.push_back(offsets_.back() + b.dim());
    }
    // The direct sum must itself be an anisotropy; construction validates it.
    direct_sum();
    c_A_ = triangle_samples > 0 ? estimate_triangle_constant(triangle_samples, triangle_seed)
                                : 0.0;
  }

  explicit DecomposedAnisotropy(const Anisotropy& single, std::size_t triangle_samples = 4000)
      : DecomposedAnisotropy(std::vector<Anisotropy>{single}, triangle_samples) {}

  std::size_t blocks() const { return blocks_.size(); }
  std::size_t dim() const { return offsets_.back(); }
  const Anisotropy& block(std::size_t j) const { return blocks_.at(j); }
  const std::vector<Anisotropy>& block_list() const { return blocks_; }
  const std::vector<std::size_t>& decomposition() const { return decomposition_; }
  std::size_t offset(std::size_t j) const { return offsets_.at(j); }
  double quasi_triangle_constant() const { return c_A_; }

  double trace() const {
    double t = 0.0;
    for (const auto& b : blocks_) t += b.trace();
    return t;
  }

  bool is_diagonal() const {
    return std::all_of(blocks_.begin(), blocks_.end(),
                       [](const Anisotropy& b) { return b.diagonal().has_value(); });
  }

  // Diagonal entries of the direct sum, if every block is diagonal.
  std::optional<std::vector<double>> diagonal() const {
    if (!is_diagonal()) return std::nullopt;
    std::vector<double> d;
    for (const auto& b : blocks_) d.insert(d.end(), b.diagonal()->begin(), b.diagonal()->end());
    return d;
  }

  Anisotropy direct_sum() const {
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(dim()), static_cast<Eigen::Index>(dim()));
    for (std::size_t j = 0; j < blocks_.size(); ++j) {
      const auto o = static_cast<Eigen::Index>(offsets_[j]);
      const auto d = static_cast<Eigen::Index>(decomposition_[j]);
      m.block(o, o, d, d) = blocks_[j].matrix();
    }
    return Anisotropy(m, blocks_.front().tolerances());
  }

  DecomposedAnisotropy scaled(double lambda) const {
    std::vector<Anisotropy> b;
    for (const auto& a : blocks_) b.push_back(a.scaled(lambda));
    return DecomposedAnisotropy(std::move(b));
  }

  Vector block_of(std::size_t j, const Vector& x) const {
    return x.segment(static_cast<Eigen::Index>(offsets_[j]),
                     static_cast<Eigen::Index>(decomposition_[j]));
  }

  std::vector<double> block_quasi_norms(const Vector& x) const {
    check_dim(x);
    std::vector<double> r(blocks_.size());
    for (std::size_t j = 0; j < blocks_.size(); ++j)
      r[j] = blocks_[j].quasi_norm(block_of(j, x));
    return r;
  }

  double vector_quasi_norm(const Vector& x) const {
    const auto r = block_quasi_norms(x);
    return *std::max_element(r.begin(), r.end());
  }

  Vector dilate(double t, const Vector& x) const {
    check_dim(x);
    Vector y(x.size());
    for (std::size_t j = 0; j < blocks_.size(); ++j)
      y.segment(static_cast<Eigen::Index>(offsets_[j]),
                static_cast<Eigen::Index>(decomposition_[j])) =
          blocks_[j].dilate(t, block_of(j, x));
    return y;
  }

  // Closed ball test; a scalar radius is the same as equal per-block radii.
  bool ball_contains(const Vector& center, double radius, const Vector& x) const {
    return ball_contains(center, std::vector<double>(blocks_.size(), radius), x);
  }
  bool ball_contains(const Vector& center, const std::vector<double>& radii,
                     const Vector& x) const {
    check_dim(center);
    check_dim(x);
    if (radii.size() != blocks_.size()) throw ShapeMismatch("ball_contains: radii count");
    for (double r : radii)
      if (!(r > 0.0)) throw InvalidArgument("ball_contains: radii must be positive");
    const Vector d = x - center;
    for (std::size_t j = 0; j < blocks_.size(); ++j)
      if (blocks_[j].quasi_norm(block_of(j, d)) > radii[j]) return false;
    return true;
  }

  // Largest sampled value of rho(x+y) / (rho(x) + rho(y)). An estimate only.
  double estimate_triangle_constant(std::size_t samples, std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit;
    const auto n = static_cast<Eigen::Index>(dim());
    const auto random_point = [&] {
      Vector u(n);
      for (Eigen::Index i = 0; i < n; ++i) u(i) = normal(rng);
      u /= u.norm();
      const double t = std::exp2(-8.0 + 16.0 * unit(rng));
      return dilate(t, u);
    };
    double best = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
      const Vector x = random_point();
      Vector y;
      switch (k % 4) {
        case 0:
          y = x * std::exp2(-4.0 + 8.0 * unit(rng));
          break;
        case 1:
          y = dilate(std::exp2(-4.0 + 8.0 * unit(rng)), x);
          break;
        default:
          y = random_point();
      }
      const double den = vector_quasi_norm(x) + vector_quasi_norm(y);
      if (den > 0.0) best = std::max(best, vector_quasi_norm(x + y) / den);
    }
    return best;
  }

  std::string describe() const {
    std::string s;
    for (std::size_t j = 0; j < blocks_.size(); ++j) s += (j ? " + " : "") + blocks_[j].describe();
    return s;
  }

  bool operator==(const DecomposedAnisotropy& o) const {
    if (blocks_.size() != o.blocks_.size()) return false;
    for (std::size_t j = 0; j < blocks_.size(); ++j)
      if (!(blocks_[j] == o.blocks_[j])) return false;
    return true;
  }

 private:
  void check_dim(const Vector& x) const {
    if (static_cast<std::size_t>(x.size()) != dim())
      throw ShapeMismatch("decomposed anisotropy: point dimension mismatch");
  }

  std::vector<Anisotropy> blocks_;
  std::vector<std::size_t> decomposition_;
  std::vector<std::size_t> offsets_;
  double c_A_ = 0.0;
};

// Lower and upper envelope constants: for |x| = 1 and t >= 1,
// lower * t^{lmin - eps} <= |A_t x| <= upper * t^{lmax + eps}, sampled over
// t in [1, t_max].
struct EnvelopeConstants {
  double lower = 0.0;
  double upper = 0.0;
};

inline EnvelopeConstants spectral_envelope(const Anisotropy& a, double eps, std::size_t samples,
                                           std::uint64_t seed, double t_max = 1e6) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  EnvelopeConstants c{std::numeric_limits<double>::infinity(), 0.0};
  const auto n = static_cast<Eigen::Index>(a.dim());
  for (std::size_t k = 0; k < samples; ++k) {
    Vector u(n);
    for (Eigen::Index i = 0; i < n; ++i) u(i) = normal(rng);
    u /= u.norm();
    const double t = std::exp(std::log(t_max) * unit(rng));
    const double v = a.dilate(t, u).norm();
    c.lower = std::min(c.lower, v / std::pow(t, a.lambda_min() - eps));
    c.upper = std::max(c.upper, v / std::pow(t, a.lambda_max() + eps));
  }
  return c;
}

}  // namespace anisolab

#endif  // ANISOLAB_ANISOTROPY_HPP_
