#include "fjsec/complexlinalg.hpp"

#include <cmath>
#include <numbers>

namespace fjsec {

void require_finite(const CMat& a, const char* what) {
  if (!a.allFinite())
    throw std::invalid_argument(std::string(what) + ": non-finite entries");
}

void require_finite(const RMat& a, const char* what) {
  if (!a.allFinite())
    throw std::invalid_argument(std::string(what) + ": non-finite entries");
}

SvdResult svd(const CMat& a) {
  if (a.size() == 0) throw std::invalid_argument("svd: empty matrix");
  require_finite(a, "svd");
  Eigen::JacobiSVD<CMat> dec(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (dec.info() != Eigen::Success)
    throw NumericalError("svd: decomposition did not converge");
  return {dec.matrixU(), dec.singularValues(), dec.matrixV()};
}

CMat nullspace_basis(const CMat& a, double tol) {
  if (a.size() == 0) throw std::invalid_argument("nullspace_basis: empty matrix");
  if (!(tol > 0.0)) throw std::invalid_argument("nullspace_basis: tol must be > 0");
  const SvdResult d = svd(a);
  const double smax = d.sigma.size() ? d.sigma(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < d.sigma.size(); ++i)
    if (d.sigma(i) > tol * smax) ++rank;
  return d.v.rightCols(a.cols() - rank);
}

double logdet_hpd(const CMat& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("logdet_hpd: not square");
  if (a.rows() == 0) return 0.0;
  require_finite(a, "logdet_hpd");
  const CMat sym = 0.5 * (a + a.adjoint());
  Eigen::LLT<CMat> llt(sym);
  if (llt.info() != Eigen::Success)
    throw std::domain_error("logdet_hpd: matrix is not positive definite");
  double acc = 0.0;
  const auto& l = llt.matrixLLT();
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    const double d = l(i, i).real();
    if (!(d > 0.0) || !std::isfinite(d))
      throw std::domain_error("logdet_hpd: matrix is not positive definite");
    acc += std::log(d);
  }
  return 2.0 * acc;
}

RMat realify(const CMat& a) {
  require_finite(a, "realify");
  const Eigen::Index m = a.rows(), n = a.cols();
  RMat out(2 * m, 2 * n);
  out.topLeftCorner(m, n) = a.real();
  out.topRightCorner(m, n) = -a.imag();
  out.bottomLeftCorner(m, n) = a.imag();
  out.bottomRightCorner(m, n) = a.real();
  return out;
}

RVec realify_vec(const CVec& x) {
  RVec out(2 * x.size());
  out.head(x.size()) = x.real();
  out.tail(x.size()) = x.imag();
  return out;
}

CVec unrealify_vec(const RVec& x) {
  if (x.size() % 2 != 0)
    throw std::invalid_argument("unrealify_vec: odd length");
  const Eigen::Index n = x.size() / 2;
  CVec out(n);
  out.real() = x.head(n);
  out.imag() = x.tail(n);
  return out;
}

RMat realify_rows(const CMat& cols) {
  const Eigen::Index d = cols.rows(), b = cols.cols();
  RMat out(b, 2 * d);
  out.leftCols(d) = cols.real().transpose();
  out.rightCols(d) = cols.imag().transpose();
  return out;
}

CMat unrealify_rows(const RMat& rows) {
  if (rows.cols() % 2 != 0)
    throw std::invalid_argument("unrealify_rows: odd width");
  const Eigen::Index d = rows.cols() / 2, b = rows.rows();
  CMat out(d, b);
  out.real() = rows.leftCols(d).transpose();
  out.imag() = rows.rightCols(d).transpose();
  return out;
}

double nats_to_bits(double nats) { return nats / std::numbers::ln2; }

}  // namespace fjsec
