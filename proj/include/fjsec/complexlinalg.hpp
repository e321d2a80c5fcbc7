#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace fjsec {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;
using cdouble = std::complex<double>;

// Thrown when a decomposition cannot deliver the promised accuracy.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

void require_finite(const CMat& a, const char* what);
void require_finite(const RMat& a, const char* what);

// Full SVD a = u * diag(sigma) * v^H with square unitary u (m x m) and
// v (n x n); sigma holds the min(m, n) singular values, descending.
struct SvdResult {
  CMat u;
  RVec sigma;
  CMat v;
};

SvdResult svd(const CMat& a);

// Orthonormal basis z of the (right) nullspace of a: a * z ~ 0, z^H z = I.
// Rank is counted with the relative threshold sigma_i > tol * sigma_max.
// Full-rank square/wide-rank inputs give a 0-column result.
CMat nullspace_basis(const CMat& a, double tol = 1e-10);

// log(det(a)) for Hermitian positive definite a, via Cholesky on the
// symmetrized matrix. Throws std::domain_error when a is not HPD.
double logdet_hpd(const CMat& a);

// Real embedding [[Re, -Im], [Im, Re]]; a ring homomorphism:
// realify(A B) = realify(A) realify(B), realify(A^H) = realify(A)^T.
RMat realify(const CMat& a);
RVec realify_vec(const CVec& x);   // [Re; Im]
CVec unrealify_vec(const RVec& x);

// Batched counterparts for network IO: complex samples as columns of a
// (dim x batch) matrix map to real rows [Re; Im] of a (batch x 2 dim) one,
// so row_i(realify_rows(A X)) = row_i(realify_rows(X)) * realify(A)^T.
RMat realify_rows(const CMat& cols);
CMat unrealify_rows(const RMat& rows);

double nats_to_bits(double nats);  // display helper; internal rates are nats

}  // namespace fjsec
