#pragma once

// Point-contact kinematics: contact Jacobian rows, their configuration
// derivatives, and first/second derivatives of the contact-point velocity
// J w and acceleration J qdd + Jdot qd. Rows are stacked three per contact.
//
// All q-derivatives are right-tangent directional derivatives. Second
// derivatives are ordered: T(:, l, n) = d/dq_n (d/dq_l ...).

#include <stdexcept>
#include <vector>

#include "rbdd/dynamics.hpp"
#include "rbdd/tensor.hpp"

namespace rbdd {

inline void check_contacts(const KinematicTree& t, const ContactSpec& spec)
{
  for (const Contact& c : spec)
    if (c.body < 0 || c.body >= t.N())
      throw std::invalid_argument("contact references nonexistent body " + std::to_string(c.body + 1));
}

inline int contact_rows(const ContactSpec& spec) { return 3 * static_cast<int>(spec.size()); }

// World-frame spatial forces [p × λ; λ] on each body.
inline std::vector<Force> contact_forces(const KinematicTree& t, const KinematicsCache& kin,
                                         const ContactSpec& spec, const VecX& lambda)
{
  check_contacts(t, spec);
  if (lambda.size() != contact_rows(spec)) throw std::invalid_argument("lambda size does not match contacts");
  std::vector<Force> f(t.N(), Force::Zero());
  for (size_t c = 0; c < spec.size(); ++c) {
    const Vec3 p = kin.world_point(spec[c].body, spec[c].point);
    const Vec3 l = lambda.segment<3>(3 * c);
    f[spec[c].body] += spatial(p.cross(l), l);
  }
  return f;
}

struct PointKinematics {
  int rows = 0;
  std::vector<Vec3> p;  // world contact points
  MatX J;               // rows x nv
  Tensor3 dJ;           // (row, column l, derivative n)
  // Velocity J qd.
  VecX vel;
  MatX dvel_dq;
  Tensor3 d2vel_dq2;
  // Acceleration J qdd + Jdot qd (gravity excluded).
  VecX acc;
  MatX dacc_dq, dacc_dqd;
  Tensor3 d2acc_dq2, d2acc_dqd2, d2acc_dqd_dq;  // cross: (row, qd index, q index)
};

// order 0: J, vel and acc with their first derivatives; order 1 adds dJ;
// order 2 adds the second-derivative tensors.
inline PointKinematics point_kinematics(const KinematicTree& t, const VecX& q, const VecX& qd, const VecX& qdd,
                                        const ContactSpec& spec, int order = 2)
{
  check_contacts(t, spec);
  const int nv = t.nv(), rows = contact_rows(spec);
  const KinematicsCache k = forward_pass(t, q, qd, qdd, Vec3::Zero());

  PointKinematics out;
  out.rows = rows;
  out.J = MatX::Zero(rows, nv);
  out.dJ = Tensor3(rows, nv, nv);
  out.vel = VecX::Zero(rows);
  out.acc = VecX::Zero(rows);
  out.dvel_dq = MatX::Zero(rows, nv);
  out.dacc_dq = MatX::Zero(rows, nv);
  out.dacc_dqd = MatX::Zero(rows, nv);
  if (order >= 2) {
    out.d2vel_dq2 = Tensor3(rows, nv, nv);
    out.d2acc_dq2 = Tensor3(rows, nv, nv);
    out.d2acc_dqd2 = Tensor3(rows, nv, nv);
    out.d2acc_dqd_dq = Tensor3(rows, nv, nv);
  }

  for (size_t c = 0; c < spec.size(); ++c) {
    const int m = spec[c].body, r0 = 3 * static_cast<int>(c);
    const Vec3 p = k.world_point(m, spec[c].point);
    out.p.push_back(p);
    auto lin_p = [&p](const Motion& s) -> Vec3 { return lin(s) + ang(s).cross(p); };

    const Motion& vm = k.v[m];
    const Motion& am = k.a[m];
    const Vec3 wm = ang(vm);
    const Vec3 P = lin_p(vm);

    // Chain dofs, root first.
    struct Dof {
      int joint, col;
      Motion s, psid, psidd, phid, dv, da, ea;
      Vec3 u, dP;
    };
    std::vector<Dof> ch;
    for (int j : t.ancestors(m))
      for (int a = 0; a < t.dofs(j); ++a) {
        Dof d;
        d.joint = j;
        d.col = t.dof_offset(j) + a;
        d.s = k.S[j].col(a);
        d.psid = k.Psid[j].col(a);
        d.psidd = k.Psidd[j].col(a);
        d.phid = k.Phid[j].col(a);
        d.u = lin_p(d.s);
        d.dv = cross_m(Motion(k.v_parent(t, j) - vm), d.s);
        d.da = d.psidd - cross_m(vm, d.psid) - cross_m(am, d.s);
        d.ea = d.psid + d.phid - cross_m(vm, d.s);
        d.dP = lin_p(d.dv) + wm.cross(d.u);
        ch.push_back(d);
      }

    out.vel.segment<3>(r0) = P;
    out.acc.segment<3>(r0) = lin_p(am) + wm.cross(P);
    for (const Dof& l : ch) {
      out.J.block<3, 1>(r0, l.col) = l.u;
      out.dvel_dq.block<3, 1>(r0, l.col) = l.dP;
      out.dacc_dq.block<3, 1>(r0, l.col) = lin_p(l.da) + ang(am).cross(l.u) + ang(l.dv).cross(P) + wm.cross(l.dP);
      out.dacc_dqd.block<3, 1>(r0, l.col) = lin_p(l.ea) + ang(l.s).cross(P) + wm.cross(l.u);
    }

    if (order < 1) continue;
    for (const Dof& l : ch) {
      const Motion& vlamL = k.v_parent(t, l.joint);
      const Motion& vL = k.v[l.joint];
      for (const Dof& n : ch) {
        const bool n_le_l = t.is_ancestor(n.joint, l.joint);
        const bool n_lt_l = n_le_l && n.joint != l.joint;
        const Motion ds = n_le_l ? cross_m(n.s, l.s) : Motion::Zero();
        const Vec3 du = lin_p(ds) + ang(l.s).cross(n.u);
        for (int r = 0; r < 3; ++r) out.dJ(r0 + r, l.col, n.col) = du[r];
        if (order < 2) continue;

        const Motion& vlamN = k.v_parent(t, n.joint);
        const Motion dvlam = n_lt_l ? cross_m(Motion(vlamN - vlamL), n.s) : Motion::Zero();
        const Motion ddv = cross_m(Motion(dvlam - n.dv), l.s) + cross_m(Motion(vlamL - vm), ds);
        const Vec3 d2P = lin_p(ddv) + ang(l.dv).cross(n.u) + ang(n.dv).cross(l.u) + wm.cross(du);

        const Motion dpsid = n_le_l ? Motion(cross_m(n.psid, l.s) + cross_m(n.s, l.psid)) : Motion::Zero();
        const Motion dpsidd =
          n_le_l ? Motion(cross_m(n.psidd, l.s) + 2.0 * cross_m(n.psid, l.psid) + cross_m(n.s, l.psidd))
                 : Motion::Zero();
        const Motion dda = dpsidd - cross_m(n.dv, l.psid) - cross_m(vm, dpsid) - cross_m(n.da, l.s) - cross_m(am, ds);
        const Vec3 d2a = lin_p(dda) + ang(l.da).cross(n.u) + ang(n.da).cross(l.u) + ang(am).cross(du) +
                         ang(ddv).cross(P) + ang(l.dv).cross(n.dP) + ang(n.dv).cross(l.dP) + wm.cross(d2P);

        const Motion sxs = cross_m(n.s, l.s);
        const Motion dea_qd = (n_lt_l ? sxs : Motion::Zero()) + (n_le_l ? sxs : Motion::Zero()) - sxs;
        const Vec3 d2a_qd = lin_p(dea_qd) + ang(l.s).cross(n.u) + ang(n.s).cross(l.u);

        const Motion dvL = n_le_l ? cross_m(Motion(vlamN - vL), n.s) : Motion::Zero();
        const Motion dphid = cross_m(dvL, l.s) + cross_m(vL, ds);
        const Motion dea = dpsid + dphid - cross_m(n.dv, l.s) - cross_m(vm, ds);
        const Vec3 d2a_x = lin_p(dea) + ang(l.ea).cross(n.u) + ang(ds).cross(P) + ang(l.s).cross(n.dP) +
                           ang(n.dv).cross(l.u) + wm.cross(du);

        for (int r = 0; r < 3; ++r) {
          out.d2vel_dq2(r0 + r, l.col, n.col) = d2P[r];
          out.d2acc_dq2(r0 + r, l.col, n.col) = d2a[r];
          out.d2acc_dqd2(r0 + r, l.col, n.col) = d2a_qd[r];
          out.d2acc_dqd_dq(r0 + r, l.col, n.col) = d2a_x[r];
        }
      }
    }
  }
  return out;
}

} // namespace rbdd
