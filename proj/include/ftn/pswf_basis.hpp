#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <tuple>
#include <vector>

#include "ftn/error.hpp"
#include "ftn/numeric.hpp"

namespace ftn {

// Slepian eigenpairs on [-omega/2, omega/2] with band W = 1/2.
struct PswfBasis {
  double omega = 0.0;
  std::vector<double> eigenvalues;                 // descending, clipped to [1e-300, 1]
  std::vector<double> quad_nodes;
  std::vector<double> quad_weights;
  std::vector<std::vector<double>> eigenfunctions; // [mode][node], orthonormal under the weights

  std::size_t modes() const { return eigenvalues.size(); }

  // Nystrom extension of mode n to an arbitrary t.
  double eigenfunction(std::size_t n, double t) const {
    require(n < eigenfunctions.size(), ErrorCode::invalid_argument, "eigenfunction not sampled");
    double s = 0.0;
    for (std::size_t j = 0; j < quad_nodes.size(); ++j)
      s += quad_weights[j] * sinc(t - quad_nodes[j]) * eigenfunctions[n][j];
    return s / eigenvalues[n];
  }
};

inline std::size_t default_pswf_modes(double omega) {
  return static_cast<std::size_t>(std::ceil(omega)) + 20;
}

inline std::size_t default_quad_points(double omega, std::size_t num_modes) {
  return std::max<std::size_t>(static_cast<std::size_t>(std::ceil(4.0 * omega)), 2 * num_modes + 32);
}

inline PswfBasis solve_basis(double omega, std::size_t num_modes, std::size_t quad_points,
                             bool with_eigenfunctions = false) {
  require(omega > 0.0, ErrorCode::invalid_argument, "omega must be positive");
  require(num_modes >= 1, ErrorCode::invalid_argument, "num_modes must be >= 1");
  require(static_cast<double>(quad_points) >= 4.0 * omega && quad_points >= 2 * num_modes + 32,
          ErrorCode::insufficient_quadrature, "quad_points below max(4*omega, 2*modes+32)");
  num_modes = std::min(num_modes, quad_points);

  const GaussLegendre gl = gauss_legendre(quad_points, -0.5 * omega, 0.5 * omega);
  const auto q = static_cast<Eigen::Index>(quad_points);
  Eigen::VectorXd sw(q);
  for (Eigen::Index i = 0; i < q; ++i) sw(i) = std::sqrt(gl.weights[i]);
  Eigen::MatrixXd a(q, q);
  for (Eigen::Index j = 0; j < q; ++j)
    for (Eigen::Index i = j; i < q; ++i)
      a(i, j) = a(j, i) = sw(i) * sinc(gl.nodes[i] - gl.nodes[j]) * sw(j);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      a, with_eigenfunctions ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  require(es.info() == Eigen::Success, ErrorCode::insufficient_quadrature, "eigen-solve failed");
  const Eigen::VectorXd& ev = es.eigenvalues();  // ascending

  const double trace = ev.sum();
  require(std::abs(trace - omega) <= 1e-4 * omega, ErrorCode::insufficient_quadrature,
          "trace identity violated");

  PswfBasis b;
  b.omega = omega;
  b.quad_nodes = gl.nodes;
  b.quad_weights = gl.weights;
  b.eigenvalues.resize(num_modes);
  for (std::size_t n = 0; n < num_modes; ++n)
    b.eigenvalues[n] = std::clamp(ev(q - 1 - static_cast<Eigen::Index>(n)), 1e-300, 1.0);

  if (with_eigenfunctions) {
    b.eigenfunctions.assign(num_modes, std::vector<double>(quad_points));
    for (std::size_t n = 0; n < num_modes; ++n) {
      const auto col = q - 1 - static_cast<Eigen::Index>(n);
      // Fix the sign so each mode is positive at the right end of the interval.
      const double sign = es.eigenvectors()(q - 1, col) < 0.0 ? -1.0 : 1.0;
      for (Eigen::Index j = 0; j < q; ++j)
        b.eigenfunctions[n][j] = sign * es.eigenvectors()(j, col) / sw(j);
    }
  }
  return b;
}

// Process-wide cache of solves keyed by (omega, modes, quad_points, eigenfunctions).
inline std::shared_ptr<const PswfBasis> cached_basis(double omega, std::size_t num_modes,
                                                     std::size_t quad_points,
                                                     bool with_eigenfunctions = false) {
  using Key = std::tuple<double, std::size_t, std::size_t, bool>;
  static std::shared_mutex mutex;
  static std::map<Key, std::shared_ptr<const PswfBasis>> cache;
  const Key key{omega, num_modes, quad_points, with_eigenfunctions};
  {
    std::shared_lock lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto basis = std::make_shared<const PswfBasis>(
      solve_basis(omega, num_modes, quad_points, with_eigenfunctions));
  std::unique_lock lock(mutex);
  return cache.emplace(key, std::move(basis)).first->second;
}

inline std::shared_ptr<const PswfBasis> cached_basis(double omega) {
  const std::size_t modes = default_pswf_modes(omega);
  return cached_basis(omega, modes, default_quad_points(omega, modes));
}

}  // namespace ftn
