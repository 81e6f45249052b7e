#pragma once

// Contact-constrained forward dynamics and impact maps through the saddle
// point system K = [[M, Jᵀ], [J, 0]], with first and second derivatives.
// Unknowns are stacked as [qdd; -lambda] (or [qd_plus; -lambda_hat]).

#include <stdexcept>

#include "rbdd/deriv_forward.hpp"

namespace rbdd {

// Schur-complement factorization of K: Cholesky of M, then the contact-space
// matrix A = J M^-1 Jᵀ with a rank check.
class KktFactor {
public:
  KktFactor(const MatX& M, const MatX& J) : mass_(M), J_(J)
  {
    if (J.cols() != M.rows()) throw std::invalid_argument("contact Jacobian width does not match mass matrix");
    MinvJt_ = mass_.solve(MatX(J.transpose()));
    if (J.rows() > 0) {
      const MatX A = J * MinvJt_;
      const Eigen::SelfAdjointEigenSolver<MatX> es(A, Eigen::EigenvaluesOnly);
      if (!(es.eigenvalues().minCoeff() >= 1e-10)) throw std::domain_error("rank-deficient contact Jacobian");
      schur_.compute(A);
    }
  }

  int nv() const { return static_cast<int>(J_.cols()); }
  int nc() const { return static_cast<int>(J_.rows()); }
  const MatX& M() const { return mass_.M; }
  const MatX& J() const { return J_; }

  MatX K() const
  {
    MatX K = MatX::Zero(nv() + nc(), nv() + nc());
    K.topLeftCorner(nv(), nv()) = M();
    K.topRightCorner(nv(), nc()) = J_.transpose();
    K.bottomLeftCorner(nc(), nv()) = J_;
    return K;
  }

  // Solves K [x; y] = [a; b] column-wise.
  void solve(const MatX& a, const MatX& b, MatX& x, MatX& y) const
  {
    const MatX Minv_a = mass_.solve(a);
    if (nc() == 0) {
      x = Minv_a;
      y.resize(0, a.cols());
      return;
    }
    y = schur_.solve(MatX(J_ * Minv_a - b));
    x = Minv_a - MinvJt_ * y;
  }

  void solve(const Tensor3& a, const Tensor3& b, Tensor3& x, Tensor3& y) const
  {
    x = Tensor3(nv(), a.dim(1), a.dim(2));
    y = Tensor3(nc(), a.dim(1), a.dim(2));
    MatX xp, yp;
    for (Eigen::Index k = 0; k < a.dim(2); ++k) {
      solve(MatX(a.page(k)), MatX(b.page(k)), xp, yp);
      x.page(k) = xp;
      if (nc() > 0) y.page(k) = yp;
    }
  }

private:
  MassFactor mass_;
  MatX J_;
  MatX MinvJt_;
  Eigen::LDLT<MatX> schur_;
};

// out(x, j, k) = sum_c dJ(c, x, k) Y(c, j): (dJᵀ/dq_k) Y.
inline Tensor3 dJt_times(const Tensor3& dJ, const MatX& Y) { return tmprod(rot12(dJ), Y); }

// out(c, j, k) = sum_x dJ(c, x, k) X(x, j): (dJ/dq_k) X.
inline Tensor3 dJ_times(const Tensor3& dJ, const MatX& X) { return tmprod(dJ, X); }

namespace detail {
inline MatX actuation(const VecX& selector, int nv)
{
  if (selector.size() == 0) return MatX::Identity(nv, nv);
  if (selector.size() != nv) throw std::invalid_argument("selector size does not match model");
  return selector.asDiagonal();
}
} // namespace detail

// ---- KKT dynamics -----------------------------------------------------------

struct KktSolution {
  VecX qdd, lambda;
};

struct KktFirstOrder {
  VecX qdd, lambda;
  MatX dqdd_dq, dqdd_dqd, dqdd_dtau;
  MatX dlam_dq, dlam_dqd, dlam_dtau;
};

// Second derivatives of qdd and lambda. Axis 2 is the first derivative
// variable, axis 3 the second; (q, qd) and (q, tau) come from rot23.
struct KktSecondOrder {
  Tensor3 qdd_qq, qdd_qdqd, qdd_qd_q, qdd_tau_q;
  Tensor3 lam_qq, lam_qdqd, lam_qd_q, lam_tau_q;
};

// selector: diagonal of the actuation map; empty means fully actuated.
inline KktSolution kkt_solve(const KinematicTree& t, const VecX& q, const VecX& qd, const VecX& tau,
                             const ContactSpec& spec, const VecX& selector = VecX())
{
  const int nv = t.nv();
  if (tau.size() != nv) throw std::invalid_argument("kkt_solve: tau size does not match model");
  const VecX z = VecX::Zero(nv);
  const PointKinematics pk = point_kinematics(t, q, qd, z, spec, 0);
  const KktFactor K(crba(t, q), pk.J);
  const VecX b = rnea(t, q, qd, z, t.gravity).tau;
  MatX x, y;
  K.solve(MatX(detail::actuation(selector, nv) * tau - b), MatX(-pk.acc), x, y);
  return {x.col(0), y.rows() ? VecX(-y.col(0)) : VecX()};
}

inline KktFirstOrder kkt_fo(const KinematicTree& t, const VecX& q, const VecX& qd, const VecX& tau,
                            const ContactSpec& spec, const VecX& selector = VecX())
{
  const int nv = t.nv(), nc = contact_rows(spec);
  const KktSolution sol = kkt_solve(t, q, qd, tau, spec, selector);
  const PointKinematics pk = point_kinematics(t, q, qd, sol.qdd, spec, 1);
  const KktFactor K(crba(t, q), pk.J);
  const FirstOrderDerivs d = id_fo_constrained(t, q, qd, sol.qdd, t.gravity, spec, sol.lambda);

  KktFirstOrder out;
  out.qdd = sol.qdd;
  out.lambda = sol.lambda;
  MatX x, y;
  K.solve(-d.dtau_dq, -pk.dacc_dq, x, y);
  out.dqdd_dq = x;
  out.dlam_dq = -y;
  K.solve(-d.dtau_dqd, -pk.dacc_dqd, x, y);
  out.dqdd_dqd = x;
  out.dlam_dqd = -y;
  K.solve(detail::actuation(selector, nv), MatX::Zero(nc, nv), x, y);
  out.dqdd_dtau = x;
  out.dlam_dtau = -y;
  return out;
}

inline KktSecondOrder kkt_so(const KinematicTree& t, const VecX& q, const VecX& qd, const VecX& tau,
                             const ContactSpec& spec, const VecX& selector = VecX())
{
  const KktFirstOrder fo = kkt_fo(t, q, qd, tau, spec, selector);
  const PointKinematics pk = point_kinematics(t, q, qd, fo.qdd, spec, 2);
  const KktFactor K(crba(t, q), pk.J);
  const SecondOrderDerivs so = id_so_constrained(t, q, qd, fo.qdd, t.gravity, spec, fo.lambda);

  KktSecondOrder out;
  Tensor3 x, y;
  auto store = [&](Tensor3& qdd, Tensor3& lam) {
    qdd = x;
    lam = -y;
  };

  // (q, q)
  {
    const Tensor3 Zm = dM_times_columns(t, q, fo.dqdd_dq);
    const Tensor3 Zj = dJt_times(pk.dJ, fo.dlam_dq);
    const Tensor3 W = dJ_times(pk.dJ, fo.dqdd_dq);
    K.solve(-(so.d2tau_dq2 + Zm + rot23(Zm) - Zj - rot23(Zj)), -(pk.d2acc_dq2 + W + rot23(W)), x, y);
    store(out.qdd_qq, out.lam_qq);
  }
  // (qd, qd)
  K.solve(-so.d2tau_dqd2, -pk.d2acc_dqd2, x, y);
  store(out.qdd_qdqd, out.lam_qdqd);
  // (qd, q)
  {
    const Tensor3 Zm = dM_times_columns(t, q, fo.dqdd_dqd);
    const Tensor3 Zj = dJt_times(pk.dJ, fo.dlam_dqd);
    K.solve(-(so.d2tau_cross + Zm - Zj), -(pk.d2acc_dqd_dq + dJ_times(pk.dJ, fo.dqdd_dqd)), x, y);
    store(out.qdd_qd_q, out.lam_qd_q);
  }
  // (tau, q)
  {
    const Tensor3 Zm = dM_times_columns(t, q, fo.dqdd_dtau);
    const Tensor3 Zj = dJt_times(pk.dJ, fo.dlam_dtau);
    K.solve(-(Zm - Zj), -dJ_times(pk.dJ, fo.dqdd_dtau), x, y);
    store(out.qdd_tau_q, out.lam_tau_q);
  }
  return out;
}

// ---- impact (restitution 0) -------------------------------------------------

struct ImpactResult {
  VecX qd_plus, lambda_hat;
};

struct ImpactFirstOrder {
  VecX qd_plus, lambda_hat;
  MatX dqdp_dq, dqdp_dqdm;
  MatX dlam_dq, dlam_dqdm;
};

// Axis 2 is the first derivative variable. (q, qd_minus) is rot23 of
// qdm_q; the (qd_minus, qd_minus) blocks vanish.
struct ImpactSecondOrder {
  Tensor3 qdp_qq, qdp_qdm_q;
  Tensor3 lam_qq, lam_qdm_q;
};

inline ImpactResult impact_solve(const KinematicTree& t, const VecX& q, const VecX& qd_minus, const ContactSpec& spec)
{
  const int nv = t.nv();
  if (qd_minus.size() != nv) throw std::invalid_argument("impact_solve: velocity size does not match model");
  const VecX z = VecX::Zero(nv);
  const PointKinematics pk = point_kinematics(t, q, z, z, spec, 0);
  const KktFactor K(crba(t, q), pk.J);
  MatX x, y;
  K.solve(MatX(K.M() * qd_minus), MatX::Zero(pk.rows, 1), x, y);
  return {x.col(0), y.rows() ? VecX(-y.col(0)) : VecX()};
}

inline ImpactFirstOrder impact_fo(const KinematicTree& t, const VecX& q, const VecX& qd_minus, const ContactSpec& spec)
{
  const int nv = t.nv();
  const ImpactResult r = impact_solve(t, q, qd_minus, spec);
  const VecX z = VecX::Zero(nv);
  const PointKinematics pk = point_kinematics(t, q, r.qd_plus, z, spec, 1);
  const KktFactor K(crba(t, q), pk.J);

  ImpactFirstOrder out;
  out.qd_plus = r.qd_plus;
  out.lambda_hat = r.lambda_hat;
  const MatX dJt_lam = squeeze(dJt_times(pk.dJ, r.lambda_hat));
  MatX x, y;
  K.solve(-(dMdq_times(t, q, r.qd_plus - qd_minus) - dJt_lam), -pk.dvel_dq, x, y);
  out.dqdp_dq = x;
  out.dlam_dq = -y;
  K.solve(K.M(), MatX::Zero(pk.rows, nv), x, y);
  out.dqdp_dqdm = x;
  out.dlam_dqdm = -y;
  return out;
}

inline ImpactSecondOrder impact_so(const KinematicTree& t, const VecX& q, const VecX& qd_minus,
                                   const ContactSpec& spec)
{
  const int nv = t.nv();
  const ImpactFirstOrder fo = impact_fo(t, q, qd_minus, spec);
  const VecX z = VecX::Zero(nv);
  const PointKinematics pk = point_kinematics(t, q, fo.qd_plus, z, spec, 2);
  const KktFactor K(crba(t, q), pk.J);

  ImpactSecondOrder out;
  Tensor3 x, y;
  {
    const Tensor3 D2 = idsoza_c(t, q, fo.qd_plus - qd_minus, spec, fo.lambda_hat);
    const Tensor3 Zm = dM_times_columns(t, q, fo.dqdp_dq);
    const Tensor3 Zj = dJt_times(pk.dJ, fo.dlam_dq);
    const Tensor3 W = dJ_times(pk.dJ, fo.dqdp_dq);
    K.solve(-(D2 + Zm + rot23(Zm) - Zj - rot23(Zj)), -(pk.d2vel_dq2 + W + rot23(W)), x, y);
    out.qdp_qq = x;
    out.lam_qq = -y;
  }
  {
    const MatX IminusD = MatX::Identity(nv, nv) - fo.dqdp_dqdm;
    const Tensor3 top = dM_times_columns(t, q, IminusD) + dJt_times(pk.dJ, fo.dlam_dqdm);
    K.solve(top, -dJ_times(pk.dJ, fo.dqdp_dqdm), x, y);
    out.qdp_qdm_q = x;
    out.lam_qdm_q = -y;
  }
  return out;
}

} // namespace rbdd
