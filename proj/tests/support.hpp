#pragma once

#include <random>
#include <string>
#include <vector>

#include "metaflip/model_framework.hpp"

namespace testsupport {

inline std::vector<std::string> labels(const std::string& prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

inline std::vector<double> random_distribution(std::mt19937_64& rng, std::size_t n) {
  std::exponential_distribution<double> draw(1.0);
  std::vector<double> w(n);
  double sum = 0.0;
  for (auto& x : w) sum += (x = draw(rng));
  for (auto& x : w) x /= sum;
  // exact unit sum up to one rounding in the last entry
  double head = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) head += w[i];
  w.back() = std::max(0.0, 1.0 - head);
  return w;
}

inline metaflip::RelFreqTable random_table(std::mt19937_64& rng, std::size_t na, std::size_t nb, std::size_t nc) {
  metaflip::RelFreqTable nu(metaflip::KnobSpace(labels("a", na), labels("b", nb), labels("c", nc)));
  for (std::size_t a = 0; a < na; ++a)
    for (std::size_t b = 0; b < nb; ++b) nu.set_row(a, b, random_distribution(rng, nc));
  return nu;
}

inline metaflip::ComplexMatrix random_unitary(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> g;
  metaflip::ComplexMatrix z(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) z(i, j) = {g(rng), g(rng)};
  Eigen::HouseholderQR<metaflip::ComplexMatrix> qr(z);
  return qr.householderQ() * metaflip::ComplexMatrix::Identity(n, n);
}

inline metaflip::HermitianOperator random_density(std::mt19937_64& rng, Eigen::Index n) {
  const auto w = random_distribution(rng, static_cast<std::size_t>(n));
  const auto u = random_unitary(rng, n);
  metaflip::ComplexMatrix d = metaflip::ComplexMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) d(i, i) = w[static_cast<std::size_t>(i)];
  metaflip::ComplexMatrix rho = u * d * u.adjoint();
  return metaflip::HermitianOperator(0.5 * (rho + rho.adjoint()));
}

/// Projective resolution with `outcomes` blocks from a random orthonormal
/// basis; basis vectors are dealt to outcomes round robin.
inline std::vector<metaflip::HermitianOperator> random_resolution(std::mt19937_64& rng, Eigen::Index dim,
                                                                  std::size_t outcomes) {
  const auto u = random_unitary(rng, dim);
  std::vector<metaflip::ComplexMatrix> blocks(outcomes, metaflip::ComplexMatrix::Zero(dim, dim));
  for (Eigen::Index k = 0; k < dim; ++k) {
    const metaflip::ComplexVector v = u.col(k);
    blocks[static_cast<std::size_t>(k) % outcomes] += v * v.adjoint();
  }
  std::vector<metaflip::HermitianOperator> out;
  for (auto& m : blocks) out.emplace_back(0.5 * (m + m.adjoint()));
  return out;
}

/// Hand-built model: random mixed preparations and random projective detections.
inline metaflip::KnobModel random_model(std::mt19937_64& rng, std::size_t na, std::size_t nb, std::size_t nc,
                                        Eigen::Index dim) {
  std::vector<metaflip::HermitianOperator> rho;
  for (std::size_t a = 0; a < na; ++a) rho.push_back(random_density(rng, dim));
  std::vector<std::vector<metaflip::HermitianOperator>> res;
  for (std::size_t b = 0; b < nb; ++b) res.push_back(random_resolution(rng, dim, nc));
  return metaflip::KnobModel(metaflip::KnobSpace(labels("a", na), labels("b", nb), labels("c", nc)), rho, res);
}

}  // namespace testsupport
