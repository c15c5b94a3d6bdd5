#pragma once

// Dense complex linear algebra with the Hermitian / density-operator
// contracts used by the model framework.

#include <complex>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "metaflip/errors.hpp"

namespace metaflip {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

struct Tolerances {
  double hermiticity = 1e-12;  // elementwise |A_ij - conj(A_ji)|
  double trace = 1e-10;
  double negativity = 1e-10;   // eigenvalues >= -negativity count as PSD
  double resolution = 1e-10;   // idempotence, orthogonality, completeness
  double imaginary = 1e-10;    // allowed imaginary part of real-valued traces
};

inline constexpr Tolerances kDefaultTolerances{};

/// Square complex matrix known to be Hermitian within `Tolerances::hermiticity`.
/// Construction checks finiteness and Hermiticity and throws ContractViolation.
class HermitianOperator {
 public:
  explicit HermitianOperator(ComplexMatrix m, const Tolerances& tol = kDefaultTolerances);

  static HermitianOperator identity(Eigen::Index dim);
  static HermitianOperator zero(Eigen::Index dim);
  static HermitianOperator diagonal(std::span<const double> entries);
  static HermitianOperator diagonal(std::initializer_list<double> entries) {
    return diagonal(std::span<const double>(entries.begin(), entries.size()));
  }
  /// |v><v| (v is not normalized here).
  static HermitianOperator projector(const ComplexVector& v);

  Eigen::Index dim() const noexcept { return matrix_.rows(); }
  const ComplexMatrix& matrix() const noexcept { return matrix_; }

  HermitianOperator operator+(const HermitianOperator& other) const;
  HermitianOperator operator-(const HermitianOperator& other) const;
  HermitianOperator operator*(double scale) const;

 private:
  struct Unchecked {};
  HermitianOperator(ComplexMatrix m, Unchecked) : matrix_(std::move(m)) {}

  ComplexMatrix matrix_;
};

struct Eigendecomposition {
  Eigen::VectorXd eigenvalues;  // descending
  ComplexMatrix eigenvectors;   // orthonormal columns, matching order
};

Eigendecomposition hermitian_eigendecomposition(const HermitianOperator& op);

/// Principal square root of a PSD operator. Eigenvalues in [-negativity, 0)
/// are clamped to zero; anything more negative throws NotPositiveSemidefinite.
HermitianOperator hermitian_sqrt(const HermitianOperator& op,
                                 const Tolerances& tol = kDefaultTolerances);

/// Re Tr(a b). Throws DimensionMismatch, or ContractViolation when the
/// imaginary part exceeds `tol.imaginary`.
double trace_product(const HermitianOperator& a, const HermitianOperator& b,
                     const Tolerances& tol = kDefaultTolerances);

/// max |eigenvalue|
double operator_norm(const HermitianOperator& a);

enum class Violation {
  NotSquare,
  NonFinite,
  NotHermitian,
  TraceNotOne,
  NegativeEigenvalue,
  NotIdempotent,
  NotOrthogonal,
  NotComplete,
  DimensionMismatch,
};

std::string to_string(Violation v);

struct ValidationIssue {
  Violation kind;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const noexcept { return issues.empty(); }
  bool has(Violation v) const noexcept;
  std::string summary() const;
};

/// Density-operator diagnostics: Hermiticity, unit trace, non-negative spectrum.
ValidationReport validate_density(const ComplexMatrix& op,
                                  const Tolerances& tol = kDefaultTolerances);

/// Projective-resolution diagnostics over blocks indexed by outcome:
/// each block Hermitian and idempotent, distinct blocks mutually
/// orthogonal, blocks summing to the identity.
ValidationReport validate_resolution(std::span<const ComplexMatrix> blocks,
                                     const Tolerances& tol = kDefaultTolerances);
ValidationReport validate_resolution(std::span<const HermitianOperator> blocks,
                                     const Tolerances& tol = kDefaultTolerances);

}  // namespace metaflip
