#pragma once

// Forward kinematic pass. Every per-body quantity is expressed in the ground
// frame; the base acceleration is set to minus gravity.

#include <stdexcept>
#include <vector>

#include "rbdd/model.hpp"

namespace rbdd {

struct KinematicsCache {
  std::vector<Transform> X0;   // world coordinates -> body i coordinates
  std::vector<MotionMat> S;    // motion subspace
  std::vector<Motion> v, a;
  std::vector<MotionMat> Phid;   // v_i × S_i
  std::vector<MotionMat> Psid;   // v_λ(i) × S_i
  std::vector<MotionMat> Psidd;  // a_λ(i) × S_i + v_λ(i) × Psid_i
  Motion a0 = Motion::Zero();

  const Motion& v_parent(const KinematicTree& t, int i) const { return t.parent(i) < 0 ? zero_ : v[t.parent(i)]; }
  const Motion& a_parent(const KinematicTree& t, int i) const { return t.parent(i) < 0 ? a0 : a[t.parent(i)]; }

  // World position of a body-fixed point.
  Vec3 world_point(int i, const Vec3& p_body) const { return X0[i].r + X0[i].E.transpose() * p_body; }

private:
  Motion zero_ = Motion::Zero();
};

inline KinematicsCache forward_pass(const KinematicTree& t, const VecX& q, const VecX& qd, const VecX& qdd,
                                    const Vec3& gravity)
{
  if (q.size() != t.nq() || qd.size() != t.nv() || qdd.size() != t.nv())
    throw std::invalid_argument("forward_pass: state size does not match model");
  if (!q.allFinite() || !qd.allFinite() || !qdd.allFinite() || !gravity.allFinite())
    throw std::domain_error("forward_pass: non-finite input");

  const int N = t.N();
  KinematicsCache c;
  c.X0.resize(N);
  c.S.resize(N);
  c.v.resize(N);
  c.a.resize(N);
  c.Phid.resize(N);
  c.Psid.resize(N);
  c.Psidd.resize(N);
  c.a0 = spatial(Vec3::Zero(), -gravity);

  for (int i = 0; i < N; ++i) {
    const int p = t.parent(i), vo = t.dof_offset(i), n = t.dofs(i);
    const JointKinematics jk = joint_kinematics(t.joint(i), q.data() + t.q_offset(i));
    const Transform Xup = jk.XJ * t.placement(i);
    c.X0[i] = p < 0 ? Xup : Xup * c.X0[p];
    c.S[i] = c.X0[i].inv_apply_motion(jk.S);

    const Motion vp = p < 0 ? Motion::Zero() : c.v[p];
    const Motion ap = p < 0 ? c.a0 : c.a[p];
    const Motion vJ = c.S[i] * qd.segment(vo, n);
    c.v[i] = vp + vJ;
    c.a[i] = ap + c.S[i] * qdd.segment(vo, n) + cross_m(c.v[i], vJ);
    c.Phid[i] = cross_m(c.v[i], c.S[i]);
    c.Psid[i] = cross_m(vp, c.S[i]);
    c.Psidd[i] = cross_m(ap, c.S[i]) + cross_m(vp, c.Psid[i]);
  }
  return c;
}

inline KinematicsCache forward_pass(const KinematicTree& t, const RobotState& s)
{
  return forward_pass(t, s.q, s.qd, s.qdd, t.gravity);
}

} // namespace rbdd
