#pragma once

// Forward dynamics qdd = M^-1 (tau - b) and its first and second derivatives,
// obtained from the inverse-dynamics derivatives.

#include <stdexcept>

#include "rbdd/deriv_second.hpp"

namespace rbdd {

// Cholesky factor of the mass matrix with a conditioning check.
struct MassFactor {
  MatX M;
  Eigen::LLT<MatX> llt;

  explicit MassFactor(MatX mass) : M(std::move(mass)), llt(M)
  {
    if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-12))
      throw std::domain_error("singular mass matrix");
  }
  MatX solve(const MatX& rhs) const { return llt.solve(rhs); }
  VecX solve(const VecX& rhs) const { return llt.solve(rhs); }
  Tensor3 solve(const Tensor3& rhs) const
  {
    Tensor3 out(rhs.dim(0), rhs.dim(1), rhs.dim(2));
    for (Eigen::Index k = 0; k < rhs.dim(2); ++k) out.page(k) = llt.solve(MatX(rhs.page(k)));
    return out;
  }
};

// Z(:, j, k) = (dM/dq_k) X(:, j), one first-order sweep per column of X.
inline Tensor3 dM_times_columns(const KinematicTree& t, const VecX& q, const MatX& X)
{
  const int nv = t.nv();
  Tensor3 Z(nv, X.cols(), nv);
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const MatX D = dMdq_times(t, q, X.col(j));
    for (int k = 0; k < nv; ++k)
      for (int r = 0; r < nv; ++r) Z(r, j, k) = D(r, k);
  }
  return Z;
}

inline VecX forward_dynamics(const KinematicTree& t, const VecX& q, const VecX& qd, const VecX& tau,
                             const std::vector<Force>* fext = nullptr)
{
  if (tau.size() != t.nv()) throw std::invalid_argument("forward_dynamics: tau size does not match model");
  const VecX z = VecX::Zero(t.nv());
  const VecX b = rnea(t, q, qd, z, t.gravity, fext).tau;
  const MassFactor mf(crba(t, q));
  return mf.solve(VecX(tau - b));
}

struct FdFirstOrder {
  VecX qdd;
  MatX dqdd_dq, dqdd_dqd, dqdd_dtau;

  // [d/dq | d/dqd | d/dtau], nv x 3nv.
  MatX assembled() const
  {
    MatX out(dqdd_dq.rows(), 3 * dqdd_dq.cols());
    out << dqdd_dq, dqdd_dqd, dqdd_dtau;
    return out;
  }
};

struct FdSecondOrder {
  Tensor3 qq;     // (qdd, q, q)
  Tensor3 qdqd;   // (qdd, qd, qd)
  Tensor3 qd_q;   // (qdd, qd, q)
  Tensor3 tau_q;  // (qdd, tau, q)
  // The remaining orders follow by swapping the derivative axes; the
  // (tau, tau) and (tau, qd) blocks vanish.
  Tensor3 q_qd() const { return rot23(qd_q); }
  Tensor3 q_tau() const { return rot23(tau_q); }
};

inline FdFirstOrder fd_fo(const KinematicTree& t, const VecX& q, const VecX& qd, const VecX& tau)
{
  const MassFactor mf(crba(t, q));
  const VecX z = VecX::Zero(t.nv());
  FdFirstOrder out;
  out.qdd = mf.solve(VecX(tau - rnea(t, q, qd, z, t.gravity).tau));
  const FirstOrderDerivs d = id_fo(t, q, qd, out.qdd, t.gravity);
  out.dqdd_dq = -mf.solve(d.dtau_dq);
  out.dqdd_dqd = -mf.solve(d.dtau_dqd);
  out.dqdd_dtau = mf.solve(MatX(MatX::Identity(t.nv(), t.nv())));
  return out;
}

inline FdSecondOrder fd_so(const KinematicTree& t, const VecX& q, const VecX& qd, const VecX& tau)
{
  const MassFactor mf(crba(t, q));
  const FdFirstOrder fo = fd_fo(t, q, qd, tau);
  const SecondOrderDerivs so = id_so(t, q, qd, fo.qdd, t.gravity);

  FdSecondOrder out;
  const Tensor3 Zq = dM_times_columns(t, q, fo.dqdd_dq);
  out.qq = -mf.solve(Tensor3(so.d2tau_dq2 + Zq + rot23(Zq)));
  out.qdqd = -mf.solve(so.d2tau_dqd2);
  out.qd_q = -mf.solve(Tensor3(so.d2tau_cross + dM_times_columns(t, q, fo.dqdd_dqd)));
  out.tau_q = -mf.solve(dM_times_columns(t, q, fo.dqdd_dtau));
  return out;
}

} // namespace rbdd
