#pragma once

// First-order partial derivatives of inverse dynamics with respect to q and
// qd, optionally with point-contact forces held fixed in the world frame.
// Rows index the torque, columns the perturbed dof.

#include <vector>

#include "rbdd/contact.hpp"
#include "rbdd/dynamics.hpp"

namespace rbdd {

struct FirstOrderDerivs {
  MatX dtau_dq;
  MatX dtau_dqd;
};

// Inner-loop visit counters. pairs counts (i, j) joint pairs in the
// first-order sweep, triples counts (i, j, k) joint triples in the
// second-order sweep.
struct VisitCounter {
  long long pairs = 0;
  long long triples = 0;
};

// World-frame contact Jacobian rows (3 per contact) from a kinematics cache.
inline MatX contact_jacobian(const KinematicTree& t, const KinematicsCache& k, const ContactSpec& spec)
{
  check_contacts(t, spec);
  MatX J = MatX::Zero(contact_rows(spec), t.nv());
  for (size_t c = 0; c < spec.size(); ++c) {
    const Vec3 p = k.world_point(spec[c].body, spec[c].point);
    for (int j : t.ancestors(spec[c].body))
      for (int a = 0; a < t.dofs(j); ++a) {
        const Motion s = k.S[j].col(a);
        J.block<3, 1>(3 * c, t.dof_offset(j) + a) = lin(s) + ang(s).cross(p);
      }
  }
  return J;
}

// Derivatives of the cumulative external force fextC_i with respect to every
// dof: column y of blocks[i] is d fextC_i / d q_y. Only the moment part is
// nonzero, and only for contacts in the subtree of i.
struct FextDerivs {
  std::vector<ForceMat> blocks;
  ForceMat block(const KinematicTree& t, int i, int j) const
  {
    return blocks[i].middleCols(t.dof_offset(j), t.dofs(j));
  }
};

namespace detail {

// Per-contact moment-rate columns u_y × λ (3 x nv).
inline std::vector<MatX> contact_moment_columns(const MatX& J, const VecX& lambda)
{
  std::vector<MatX> g(J.rows() / 3);
  for (size_t c = 0; c < g.size(); ++c) {
    g[c].resize(3, J.cols());
    const Vec3 l = lambda.segment<3>(3 * c);
    for (Eigen::Index y = 0; y < J.cols(); ++y) g[c].col(y) = Vec3(J.block<3, 1>(3 * c, y)).cross(l);
  }
  return g;
}

inline std::vector<ForceMat> cumulate_fext_fo(const KinematicTree& t, const ContactSpec& spec,
                                              const std::vector<MatX>& g)
{
  std::vector<ForceMat> out(t.N(), ForceMat::Zero(6, t.nv()));
  for (size_t c = 0; c < spec.size(); ++c)
    for (int x : t.ancestors(spec[c].body)) out[x].topRows<3>() += g[c];
  return out;
}

inline FirstOrderDerivs id_fo_impl(const KinematicTree& t, const DynamicsCache& d, const ContactSpec* spec,
                                   const std::vector<ForceMat>* dfe, VisitCounter* counter)
{
  const int nv = t.nv();
  const KinematicsCache& k = d.kin;
  FirstOrderDerivs out{MatX::Zero(nv, nv), MatX::Zero(nv, nv)};
  const bool ext = spec && !spec->empty();

  for (int i = 0; i < t.N(); ++i) {
    const int oi = t.dof_offset(i), ni = t.dofs(i);
    const MotionMat& Si = k.S[i];
    const Mat6 BC2 = 2.0 * d.BC[i];
    const ForceMat up_q = BC2 * k.Psid[i] + d.IC[i] * k.Psidd[i] + crf_bar(d.fC[i]) * Si;
    const ForceMat up_qd = BC2 * Si + d.IC[i] * (k.Psid[i] + k.Phid[i]);
    const MatX SiT_BC2 = Si.transpose() * BC2;
    const MatX SiT_IC = Si.transpose() * d.IC[i];

    for (int j : t.ancestors(i)) {
      if (counter) ++counter->pairs;
      const int oj = t.dof_offset(j), nj = t.dofs(j);
      const MotionMat& Sj = k.S[j];
      out.dtau_dq.block(oi, oj, ni, nj) = SiT_BC2 * k.Psid[j] + SiT_IC * k.Psidd[j];
      out.dtau_dqd.block(oi, oj, ni, nj) = SiT_BC2 * Sj + SiT_IC * (k.Psid[j] + k.Phid[j]);
      if (j != i) {
        out.dtau_dq.block(oj, oi, nj, ni) = Sj.transpose() * up_q;
        out.dtau_dqd.block(oj, oi, nj, ni) = Sj.transpose() * up_qd;
      }
      if (ext) {
        // Contact forces are held fixed in the world, but their moments move
        // with the contact points and S_i rotates under them.
        out.dtau_dq.block(oi, oj, ni, nj) +=
          Si.transpose() * (crf_bar(d.fextC[i]) * Sj - (*dfe)[i].middleCols(oj, nj));
        if (j != i) out.dtau_dq.block(oj, oi, nj, ni) -= Sj.transpose() * (*dfe)[j].middleCols(oi, ni);
      }
    }
  }
  return out;
}

} // namespace detail

inline FextDerivs fext_cumulative_fo(const KinematicTree& t, const VecX& q, const ContactSpec& spec,
                                     const VecX& lambda)
{
  check_contacts(t, spec);
  if (lambda.size() != contact_rows(spec)) throw std::invalid_argument("lambda size does not match contacts");
  const VecX z = VecX::Zero(t.nv());
  const KinematicsCache k = forward_pass(t, q, z, z, Vec3::Zero());
  const MatX J = contact_jacobian(t, k, spec);
  return {detail::cumulate_fext_fo(t, spec, detail::contact_moment_columns(J, lambda))};
}

inline FirstOrderDerivs id_fo(const KinematicTree& t, const VecX& q, const VecX& qd, const VecX& qdd,
                              const Vec3& gravity, VisitCounter* counter = nullptr)
{
  return detail::id_fo_impl(t, rnea(t, q, qd, qdd, gravity), nullptr, nullptr, counter);
}

inline FirstOrderDerivs id_fo(const KinematicTree& t, const RobotState& s, VisitCounter* counter = nullptr)
{
  return id_fo(t, s.q, s.qd, s.qdd, t.gravity, counter);
}

// Derivatives of ID(q, qd, qdd) - J_c(q)^T λ at fixed world-frame λ.
inline FirstOrderDerivs id_fo_constrained(const KinematicTree& t, const VecX& q, const VecX& qd, const VecX& qdd,
                                          const Vec3& gravity, const ContactSpec& spec, const VecX& lambda,
                                          VisitCounter* counter = nullptr)
{
  check_contacts(t, spec);
  if (lambda.size() != contact_rows(spec)) throw std::invalid_argument("lambda size does not match contacts");
  const KinematicsCache k0 = forward_pass(t, q, qd, qdd, gravity);
  const std::vector<Force> fext = contact_forces(t, k0, spec, lambda);
  const DynamicsCache d = rnea(t, q, qd, qdd, gravity, &fext);
  const MatX J = contact_jacobian(t, d.kin, spec);
  const std::vector<ForceMat> dfe = detail::cumulate_fext_fo(t, spec, detail::contact_moment_columns(J, lambda));
  return detail::id_fo_impl(t, d, &spec, &dfe, counter);
}

inline FirstOrderDerivs id_fo_constrained(const KinematicTree& t, const RobotState& s, const ContactSpec& spec,
                                          const VecX& lambda, VisitCounter* counter = nullptr)
{
  return id_fo_constrained(t, s.q, s.qd, s.qdd, t.gravity, spec, lambda, counter);
}

// ID(q, qd, qdd) - J_c^T λ, the map differentiated by id_fo_constrained.
inline VecX rnea_constrained(const KinematicTree& t, const VecX& q, const VecX& qd, const VecX& qdd,
                             const Vec3& gravity, const ContactSpec& spec, const VecX& lambda)
{
  const KinematicsCache k0 = forward_pass(t, q, qd, qdd, gravity);
  const std::vector<Force> fext = contact_forces(t, k0, spec, lambda);
  return rnea(t, q, qd, qdd, gravity, &fext).tau;
}

// d(M(q) m)/dq via the first-order sweep at zero velocity and gravity.
inline MatX dMdq_times(const KinematicTree& t, const VecX& q, const VecX& m)
{
  const VecX z = VecX::Zero(t.nv());
  return id_fo(t, q, z, m, Vec3::Zero()).dtau_dq;
}

} // namespace rbdd
