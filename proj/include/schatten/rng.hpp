#pragma once

#include <cstdint>
#include <random>

#include "schatten/matrix_core.hpp"

namespace schatten {

// Deterministic random source. Draws come from raw mt19937_64 output with
// hand-rolled transforms (std::normal_distribution is implementation
// defined), so a seed reproduces the same stream on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double normal();
  Complex normal_complex() { return {normal(), normal()}; }
  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// GUE-style Hermitian matrix, entries O(1).
HermitianMatrix random_hermitian(Eigen::Index n, Rng& rng);

// Positive semidefinite C* C with C square Gaussian, rescaled to O(1) norm.
HermitianMatrix random_psd(Eigen::Index n, Rng& rng);

Matrix random_complex(Eigen::Index n, Rng& rng);

// Real diagonal matrix with entries drawn uniformly from [-2, 2].
HermitianMatrix random_diagonal(Eigen::Index n, Rng& rng);

}  // namespace schatten
