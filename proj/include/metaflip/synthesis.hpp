#pragma once

// Constructive model synthesis: any relative-frequency table is reproduced
// exactly by a model whose preparations are pairwise-orthogonal pure states.

#include <cstdint>
#include <span>
#include <vector>

#include "metaflip/model_framework.hpp"

namespace metaflip {

/// Orthonormal f_1..f_n (columns) with |<f_c|e_1>|^2 = weights[c].
/// Built from the real reflection mapping e_1 onto the vector of
/// sqrt(weights). Throws ContractViolation when weights are negative or do
/// not sum to 1 within 1e-12.
Eigen::MatrixXd householder_basis(std::span<const double> weights);

struct SynthesizedModel {
  KnobModel model;
  /// dimension of each preparation block H_a (always |C|)
  std::vector<Eigen::Index> block_dims;
  /// |a> embedded in the full space
  std::vector<ComplexVector> a_vectors;
};

/// Direct sum of one |C|-dimensional block per A setting; rho(a) = |a><a|
/// with |a> the first basis vector of block a, and E(b)(c) the sum over
/// blocks of |c(a,b)><c(a,b)| with |<c(a,b)|a>|^2 = nu(a,b)(c). Pairs
/// undefined in the table use uniform weights.
SynthesizedModel synthesize_model(const RelFreqTable& nu);

struct InequivalentModel {
  KnobModel model;
  std::size_t b1 = 0, b2 = 0, outcome = 0;  // witness of the norm gap
  double norm_gap = 0.0;                    // ||E(b1)(c) - E(b2)(c)||
};

/// A model that factors nu exactly like synthesize_model but carries one
/// extra dimension orthogonal to every preparation block, on which
/// E(b1)(c) is 0 and E(b2)(c) is the identity, so their norm gap is 1.
/// The seed picks the witness outcome and a unitary on each block that
/// fixes |a>. Throws ContractViolation with fewer than two B settings or
/// fewer than two outcomes.
InequivalentModel generate_inequivalent_model(const RelFreqTable& nu, std::uint64_t seed);

}  // namespace metaflip
