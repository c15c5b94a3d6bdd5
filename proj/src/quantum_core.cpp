#include "metaflip/quantum_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace metaflip {

namespace {

bool all_finite(const ComplexMatrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
  return true;
}

double hermiticity_defect(const ComplexMatrix& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

}  // namespace

HermitianOperator::HermitianOperator(ComplexMatrix m, const Tolerances& tol) : matrix_(std::move(m)) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() == 0)
    throw ContractViolation("HermitianOperator: matrix must be square and non-empty");
  if (!all_finite(matrix_)) throw ContractViolation("HermitianOperator: non-finite entry");
  const double defect = hermiticity_defect(matrix_);
  if (defect > tol.hermiticity)
    throw ContractViolation("HermitianOperator: not Hermitian (max |A - A^dagger| = " + fmt(defect) + ")");
}

HermitianOperator HermitianOperator::identity(Eigen::Index dim) {
  return HermitianOperator(ComplexMatrix::Identity(dim, dim), Unchecked{});
}

HermitianOperator HermitianOperator::zero(Eigen::Index dim) {
  return HermitianOperator(ComplexMatrix::Zero(dim, dim), Unchecked{});
}

HermitianOperator HermitianOperator::diagonal(std::span<const double> entries) {
  ComplexMatrix m = ComplexMatrix::Zero(static_cast<Eigen::Index>(entries.size()),
                                        static_cast<Eigen::Index>(entries.size()));
  for (std::size_t i = 0; i < entries.size(); ++i) m(i, i) = entries[i];
  return HermitianOperator(std::move(m));
}

HermitianOperator HermitianOperator::projector(const ComplexVector& v) {
  ComplexMatrix m = v * v.adjoint();
  // exact Hermitian symmetrization; the outer product is Hermitian up to roundoff
  m = 0.5 * (m + m.adjoint()).eval();
  return HermitianOperator(std::move(m));
}

HermitianOperator HermitianOperator::operator+(const HermitianOperator& other) const {
  if (dim() != other.dim()) throw DimensionMismatch("operator+: dimension mismatch");
  return HermitianOperator(matrix_ + other.matrix_, Unchecked{});
}

HermitianOperator HermitianOperator::operator-(const HermitianOperator& other) const {
  if (dim() != other.dim()) throw DimensionMismatch("operator-: dimension mismatch");
  return HermitianOperator(matrix_ - other.matrix_, Unchecked{});
}

HermitianOperator HermitianOperator::operator*(double scale) const {
  return HermitianOperator(matrix_ * scale, Unchecked{});
}

Eigendecomposition hermitian_eigendecomposition(const HermitianOperator& op) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(op.matrix());
  if (solver.info() != Eigen::Success)
    throw NumericalDomainError("hermitian_eigendecomposition: solver did not converge");
  // Eigen returns ascending order
  const Eigen::Index n = op.dim();
  Eigendecomposition out{Eigen::VectorXd(n), ComplexMatrix(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.eigenvalues(i) = solver.eigenvalues()(n - 1 - i);
    out.eigenvectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  }
  return out;
}

HermitianOperator hermitian_sqrt(const HermitianOperator& op, const Tolerances& tol) {
  auto eig = hermitian_eigendecomposition(op);
  Eigen::VectorXd roots(eig.eigenvalues.size());
  // eigenvalues at the solver's roundoff level are zero; their square roots would not be
  const double scale = eig.eigenvalues.size() ? eig.eigenvalues.cwiseAbs().maxCoeff() : 0.0;
  const double floor = 16.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(roots.size()) * scale;
  for (Eigen::Index i = 0; i < roots.size(); ++i) {
    const double lambda = eig.eigenvalues(i);
    if (lambda < -tol.negativity)
      throw NotPositiveSemidefinite("hermitian_sqrt: eigenvalue " + fmt(lambda) + " below -" +
                                    fmt(tol.negativity));
    roots(i) = lambda > floor ? std::sqrt(lambda) : 0.0;
  }
  ComplexMatrix root = eig.eigenvectors * roots.asDiagonal() * eig.eigenvectors.adjoint();
  root = 0.5 * (root + root.adjoint()).eval();
  return HermitianOperator(std::move(root), tol);
}

double trace_product(const HermitianOperator& a, const HermitianOperator& b, const Tolerances& tol) {
  if (a.dim() != b.dim())
    throw DimensionMismatch("trace_product: dimensions " + std::to_string(a.dim()) + " and " +
                            std::to_string(b.dim()));
  // Tr(AB) = sum_ij A_ij B_ji
  const Complex tr = (a.matrix().array() * b.matrix().transpose().array()).sum();
  if (std::abs(tr.imag()) > tol.imaginary)
    throw ContractViolation("trace_product: imaginary part " + fmt(tr.imag()));
  return tr.real();
}

double operator_norm(const HermitianOperator& a) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(a.matrix(), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

std::string to_string(Violation v) {
  switch (v) {
    case Violation::NotSquare: return "not-square";
    case Violation::NonFinite: return "non-finite";
    case Violation::NotHermitian: return "not-hermitian";
    case Violation::TraceNotOne: return "trace-not-one";
    case Violation::NegativeEigenvalue: return "negative-eigenvalue";
    case Violation::NotIdempotent: return "not-idempotent";
    case Violation::NotOrthogonal: return "not-orthogonal";
    case Violation::NotComplete: return "sum-not-identity";
    case Violation::DimensionMismatch: return "dimension-mismatch";
  }
  return "unknown";
}

bool ValidationReport::has(Violation v) const noexcept {
  return std::any_of(issues.begin(), issues.end(), [v](const auto& i) { return i.kind == v; });
}

std::string ValidationReport::summary() const {
  if (issues.empty()) return "valid";
  std::string out;
  for (const auto& issue : issues) {
    if (!out.empty()) out += "; ";
    out += to_string(issue.kind) + ": " + issue.detail;
  }
  return out;
}

ValidationReport validate_density(const ComplexMatrix& op, const Tolerances& tol) {
  ValidationReport report;
  if (op.rows() != op.cols() || op.rows() == 0) {
    report.issues.push_back({Violation::NotSquare, "shape " + std::to_string(op.rows()) + "x" +
                                                       std::to_string(op.cols())});
    return report;
  }
  if (!all_finite(op)) {
    report.issues.push_back({Violation::NonFinite, "non-finite entry"});
    return report;
  }
  const double defect = hermiticity_defect(op);
  if (defect > tol.hermiticity)
    report.issues.push_back({Violation::NotHermitian, "max |A - A^dagger| = " + fmt(defect)});
  const double trace = op.trace().real();
  if (std::abs(trace - 1.0) > tol.trace)
    report.issues.push_back({Violation::TraceNotOne, "trace = " + fmt(trace)});
  // spectrum of the Hermitian part, so a small Hermiticity defect does not mask negativity
  const ComplexMatrix herm = 0.5 * (op + op.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(herm, Eigen::EigenvaluesOnly);
  const double lowest = solver.eigenvalues().minCoeff();
  if (lowest < -tol.negativity)
    report.issues.push_back({Violation::NegativeEigenvalue, "min eigenvalue = " + fmt(lowest)});
  return report;
}

ValidationReport validate_resolution(std::span<const ComplexMatrix> blocks, const Tolerances& tol) {
  ValidationReport report;
  if (blocks.empty()) {
    report.issues.push_back({Violation::NotComplete, "no outcome blocks"});
    return report;
  }
  const Eigen::Index n = blocks.front().rows();
  for (std::size_t c = 0; c < blocks.size(); ++c) {
    const auto& e = blocks[c];
    if (e.rows() != n || e.cols() != n) {
      report.issues.push_back({Violation::DimensionMismatch, "block " + std::to_string(c)});
      return report;
    }
    if (!all_finite(e)) {
      report.issues.push_back({Violation::NonFinite, "block " + std::to_string(c)});
      return report;
    }
  }
  ComplexMatrix sum = ComplexMatrix::Zero(n, n);
  for (std::size_t c = 0; c < blocks.size(); ++c) {
    const auto& e = blocks[c];
    const std::string tag = "block " + std::to_string(c);
    const double herm = hermiticity_defect(e);
    if (herm > tol.resolution)
      report.issues.push_back({Violation::NotHermitian, tag + ": " + fmt(herm)});
    const double idem = (e * e - e).cwiseAbs().maxCoeff();
    if (idem > tol.resolution)
      report.issues.push_back({Violation::NotIdempotent, tag + ": max |E^2 - E| = " + fmt(idem)});
    for (std::size_t d = c + 1; d < blocks.size(); ++d) {
      const double cross = (e * blocks[d]).cwiseAbs().maxCoeff();
      if (cross > tol.resolution)
        report.issues.push_back({Violation::NotOrthogonal, "blocks " + std::to_string(c) + "," +
                                                               std::to_string(d) + ": " + fmt(cross)});
    }
    sum += e;
  }
  const double completeness = (sum - ComplexMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
  if (completeness > tol.resolution)
    report.issues.push_back({Violation::NotComplete, "max |sum - I| = " + fmt(completeness)});
  return report;
}

ValidationReport validate_resolution(std::span<const HermitianOperator> blocks, const Tolerances& tol) {
  std::vector<ComplexMatrix> raw;
  raw.reserve(blocks.size());
  for (const auto& b : blocks) raw.push_back(b.matrix());
  return validate_resolution(std::span<const ComplexMatrix>(raw), tol);
}

}  // namespace metaflip
