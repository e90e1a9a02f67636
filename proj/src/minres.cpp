#include <cmath>

#include "cmfd/errors.hpp"
#include "cmfd/solver.hpp"

namespace cmfd {

// Paige-Saunders recurrence; the residual estimate is in the preconditioner norm.
MinresResult minres(const SparseMatrix& A, const Eigen::VectorXd& b,
                    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply_inverse, double tol,
                    int max_iterations) {
  const Index n = b.size();
  MinresResult out;
  out.x = Eigen::VectorXd::Zero(n);

  Eigen::VectorXd r1 = b;
  Eigen::VectorXd y = apply_inverse(r1);
  double beta1 = r1.dot(y);
  if (beta1 < 0.0) throw Error("minres: preconditioner is not positive definite");
  if (beta1 == 0.0) {
    out.converged = true;
    return out;
  }
  beta1 = std::sqrt(beta1);

  Eigen::VectorXd r2 = r1;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n), w1 = w, w2 = w;
  double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1;
  double cs = -1.0, sn = 0.0;

  for (int it = 1; it <= max_iterations; ++it) {
    const double s = 1.0 / beta;
    const Eigen::VectorXd v = s * y;
    y = A * v;
    if (it >= 2) y -= (beta / oldb) * r1;
    const double alpha = v.dot(y);
    y -= (alpha / beta) * r2;
    r1 = r2;
    r2 = y;
    y = apply_inverse(r2);
    oldb = beta;
    const double b2 = r2.dot(y);
    if (b2 < 0.0) throw Error("minres: preconditioner is not positive definite");
    beta = std::sqrt(b2);

    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alpha;
    const double gbar = sn * dbar - cs * alpha;
    epsln = sn * beta;
    dbar = -cs * beta;

    double gamma = std::hypot(gbar, beta);
    if (gamma == 0.0) gamma = 1e-300;
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;

    w1 = w2;
    w2 = w;
    w = (v - oldeps * w1 - delta * w2) / gamma;
    out.x += phi * w;

    const double rel = std::abs(phibar) / beta1;
    out.history.push_back(rel);
    out.iterations = it;
    if (rel <= tol) {
      out.converged = true;
      break;
    }
    if (beta == 0.0) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace cmfd
