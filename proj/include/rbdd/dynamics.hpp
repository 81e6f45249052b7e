#pragma once

// Inverse dynamics (RNEA), the joint-space mass matrix (CRBA) and the subtree
// composites consumed by the derivative algorithms. Ground-frame throughout.

#include <optional>
#include <vector>

#include "rbdd/kinematics.hpp"

namespace rbdd {

struct DynamicsCache {
  KinematicsCache kin;
  std::vector<Inertia> I, IC;
  std::vector<Mat6> B, BC;
  std::vector<Force> f, fC, fext, fextC;
  VecX tau;
};

// Fills IC, BC, fC and fextC from I, B, f and fext by one leaf-to-root sweep.
inline void accumulate_composites(const KinematicTree& t, DynamicsCache& d)
{
  const int N = t.N();
  d.IC = d.I;
  d.BC = d.B;
  d.fC = d.f;
  d.fextC = d.fext;
  for (int i = N - 1; i >= 0; --i) {
    const int p = t.parent(i);
    if (p < 0) continue;
    d.IC[p] += d.IC[i];
    d.BC[p] += d.BC[i];
    d.fC[p] += d.fC[i];
    d.fextC[p] += d.fextC[i];
  }
}

// fext: one world-frame spatial force per body, acting on the body.
inline DynamicsCache rnea(const KinematicTree& t, const VecX& q, const VecX& qd, const VecX& qdd,
                          const Vec3& gravity, const std::vector<Force>* fext = nullptr)
{
  const int N = t.N();
  if (fext && static_cast<int>(fext->size()) != N)
    throw std::invalid_argument("rnea: fext needs one entry per body");
  DynamicsCache d;
  d.kin = forward_pass(t, q, qd, qdd, gravity);
  d.I.resize(N);
  d.B.resize(N);
  d.f.resize(N);
  d.fext.assign(N, Force::Zero());
  for (int i = 0; i < N; ++i) {
    d.I[i] = xform_inertia(d.kin.X0[i].inverse(), t.inertia(i));
    d.B[i] = coriolis_matrix(d.I[i], d.kin.v[i]);
    d.f[i] = body_wrench(d.I[i], d.kin.v[i], d.kin.a[i]);
    if (fext) d.fext[i] = (*fext)[i];
  }
  accumulate_composites(t, d);
  d.tau.resize(t.nv());
  for (int i = 0; i < N; ++i)
    d.tau.segment(t.dof_offset(i), t.dofs(i)) = d.kin.S[i].transpose() * (d.fC[i] - d.fextC[i]);
  if (!d.tau.allFinite()) throw std::domain_error("rnea: non-finite torque");
  return d;
}

inline DynamicsCache rnea(const KinematicTree& t, const RobotState& s, const std::vector<Force>* fext = nullptr)
{
  return rnea(t, s.q, s.qd, s.qdd, t.gravity, fext);
}

// M_ji = S_j^T IC_i S_i for j ⪯ i, mirrored.
inline MatX crba(const KinematicTree& t, const DynamicsCache& d)
{
  MatX M = MatX::Zero(t.nv(), t.nv());
  for (int i = 0; i < t.N(); ++i) {
    const MotionMat F = d.IC[i] * d.kin.S[i];
    const int oi = t.dof_offset(i), ni = t.dofs(i);
    for (int j : t.ancestors(i)) {
      const MatX blk = d.kin.S[j].transpose() * F;
      M.block(t.dof_offset(j), oi, t.dofs(j), ni) = blk;
      if (j != i) M.block(oi, t.dof_offset(j), ni, t.dofs(j)) = blk.transpose();
    }
  }
  return M;
}

inline MatX crba(const KinematicTree& t, const VecX& q)
{
  const VecX z = VecX::Zero(t.nv());
  return crba(t, rnea(t, q, z, z, Vec3::Zero()));
}

} // namespace rbdd
