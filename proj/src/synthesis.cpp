#include "metaflip/synthesis.hpp"

#include <cmath>
#include <random>

namespace metaflip {

namespace {

constexpr double kWeightSumTolerance = 1e-12;
constexpr double kIdentityGuard = 1e-14;

std::vector<double> uniform_weights(std::size_t n) { return std::vector<double>(n, 1.0 / static_cast<double>(n)); }

// Per-block outcome bases, cols = |c(a,b)> inside block a.
std::vector<std::vector<Eigen::MatrixXd>> block_bases(const RelFreqTable& nu) {
  const auto& space = nu.space();
  const auto uniform = uniform_weights(space.outcome_count());
  std::vector<std::vector<Eigen::MatrixXd>> bases(space.a_count());
  for (std::size_t a = 0; a < space.a_count(); ++a)
    for (std::size_t b = 0; b < space.b_count(); ++b)
      bases[a].push_back(nu.is_defined(a, b) ? householder_basis(nu.row(a, b))
                                             : householder_basis(uniform));
  return bases;
}

// Haar-random unitary from the QR of a complex Gaussian matrix.
ComplexMatrix random_unitary(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  ComplexMatrix z(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) z(i, j) = Complex(gauss(rng), gauss(rng));
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(n, n);
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j) {
    const double mag = std::abs(r(j, j));
    if (mag > 0) q.col(j) *= r(j, j) / mag;
  }
  return q;
}

}  // namespace

Eigen::MatrixXd householder_basis(std::span<const double> weights) {
  const auto n = static_cast<Eigen::Index>(weights.size());
  if (n == 0) throw ContractViolation("householder_basis: empty weight list");
  double sum = 0.0;
  Eigen::VectorXd target(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = weights[i];
    if (!(w >= 0.0)) throw ContractViolation("householder_basis: negative weight");
    sum += w;
    target(i) = std::sqrt(w);
  }
  if (std::abs(sum - 1.0) > kWeightSumTolerance)
    throw ContractViolation("householder_basis: weights sum to " + std::to_string(sum));

  Eigen::VectorXd v = -target;
  v(0) += 1.0;  // v = e_1 - w
  const double norm = v.norm();
  if (norm < kIdentityGuard) return Eigen::MatrixXd::Identity(n, n);
  v /= norm;
  // H = I - 2 v v^T maps e_1 to w, so row 0 of H (= column 0) is w
  return Eigen::MatrixXd::Identity(n, n) - 2.0 * v * v.transpose();
}

SynthesizedModel synthesize_model(const RelFreqTable& nu) {
  const auto& space = nu.space();
  const auto block = static_cast<Eigen::Index>(space.outcome_count());
  const Eigen::Index dim = block * static_cast<Eigen::Index>(space.a_count());
  const auto bases = block_bases(nu);

  std::vector<ComplexVector> a_vectors;
  std::vector<HermitianOperator> rho;
  for (std::size_t a = 0; a < space.a_count(); ++a) {
    ComplexVector v = ComplexVector::Zero(dim);
    v(static_cast<Eigen::Index>(a) * block) = 1.0;
    rho.push_back(HermitianOperator::projector(v));
    a_vectors.push_back(std::move(v));
  }

  std::vector<std::vector<HermitianOperator>> resolution;
  for (std::size_t b = 0; b < space.b_count(); ++b) {
    std::vector<HermitianOperator> effects;
    for (Eigen::Index c = 0; c < block; ++c) {
      ComplexMatrix e = ComplexMatrix::Zero(dim, dim);
      for (std::size_t a = 0; a < space.a_count(); ++a) {
        const Eigen::VectorXd f = bases[a][b].col(c);
        e.block(static_cast<Eigen::Index>(a) * block, static_cast<Eigen::Index>(a) * block, block, block) =
            (f * f.transpose()).cast<Complex>();
      }
      effects.emplace_back(std::move(e));
    }
    resolution.push_back(std::move(effects));
  }

  return {KnobModel(space, std::move(rho), std::move(resolution)),
          std::vector<Eigen::Index>(space.a_count(), block), std::move(a_vectors)};
}

InequivalentModel generate_inequivalent_model(const RelFreqTable& nu, std::uint64_t seed) {
  const auto& space = nu.space();
  if (space.b_count() < 2)
    throw ContractViolation("generate_inequivalent_model: needs at least two B settings");
  if (space.outcome_count() < 2)
    throw ContractViolation("generate_inequivalent_model: needs at least two outcomes");

  std::mt19937_64 rng(seed);
  const auto block = static_cast<Eigen::Index>(space.outcome_count());
  const Eigen::Index base_dim = block * static_cast<Eigen::Index>(space.a_count());
  const Eigen::Index dim = base_dim + 1;  // H_perp is the last basis vector
  const auto bases = block_bases(nu);

  // unitaries fixing |a> = e_1 of each block; outcome probabilities only see
  // |<c(a,b)|a>|, which such a unitary preserves
  std::vector<ComplexMatrix> twists;
  for (std::size_t a = 0; a < space.a_count(); ++a) {
    ComplexMatrix u = ComplexMatrix::Identity(block, block);
    u.bottomRightCorner(block - 1, block - 1) = random_unitary(block - 1, rng);
    twists.push_back(std::move(u));
  }

  std::uniform_int_distribution<std::size_t> pick_outcome(0, space.outcome_count() - 1);
  const std::size_t witness = pick_outcome(rng);
  const std::size_t other = (witness + 1 + pick_outcome(rng) % (space.outcome_count() - 1)) % space.outcome_count();
  const std::size_t b1 = 0, b2 = 1;

  std::vector<HermitianOperator> rho;
  for (std::size_t a = 0; a < space.a_count(); ++a) {
    ComplexVector v = ComplexVector::Zero(dim);
    v(static_cast<Eigen::Index>(a) * block) = 1.0;
    rho.push_back(HermitianOperator::projector(v));
  }

  std::vector<std::vector<HermitianOperator>> resolution;
  for (std::size_t b = 0; b < space.b_count(); ++b) {
    // E(b2)(witness) owns H_perp; every other b assigns it away from the witness
    const std::size_t perp_owner = (b == b2) ? witness : other;
    std::vector<HermitianOperator> effects;
    for (Eigen::Index c = 0; c < block; ++c) {
      ComplexMatrix e = ComplexMatrix::Zero(dim, dim);
      for (std::size_t a = 0; a < space.a_count(); ++a) {
        const ComplexVector f = twists[a] * bases[a][b].col(c).cast<Complex>();
        ComplexMatrix p = f * f.adjoint();
        p = 0.5 * (p + p.adjoint()).eval();
        e.block(static_cast<Eigen::Index>(a) * block, static_cast<Eigen::Index>(a) * block, block, block) = p;
      }
      if (static_cast<std::size_t>(c) == perp_owner) e(base_dim, base_dim) = 1.0;
      effects.emplace_back(std::move(e));
    }
    resolution.push_back(std::move(effects));
  }

  KnobModel model(space, std::move(rho), std::move(resolution));
  const double gap = operator_norm(model.effect(b1, witness) - model.effect(b2, witness));
  return {std::move(model), b1, b2, witness, gap};
}

}  // namespace metaflip
