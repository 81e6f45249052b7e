#pragma once

// 6D spatial vectors, cross-product operators, Plücker transforms and inertias.
// Component order is angular first, linear second, for motion and force alike.

#include <Eigen/Dense>

namespace rbdd {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

// Motion and force vectors share storage; the alias records intent.
using Motion = Vec6;
using Force = Vec6;
using MotionMat = Eigen::Matrix<double, 6, Eigen::Dynamic>;
using ForceMat = Eigen::Matrix<double, 6, Eigen::Dynamic>;
using Inertia = Mat6;

inline Mat3 skew(const Vec3& w)
{
  Mat3 m;
  m << 0, -w.z(), w.y(),
       w.z(), 0, -w.x(),
       -w.y(), w.x(), 0;
  return m;
}

inline Vec3 ang(const Vec6& v) { return v.head<3>(); }
inline Vec3 lin(const Vec6& v) { return v.tail<3>(); }

inline Vec6 spatial(const Vec3& angular, const Vec3& linear)
{
  Vec6 out;
  out << angular, linear;
  return out;
}

// Motion-motion cross product operator: [[w×, 0], [v×, w×]].
inline Mat6 crm(const Motion& v)
{
  Mat6 m = Mat6::Zero();
  const Mat3 wx = skew(ang(v));
  m.topLeftCorner<3, 3>() = wx;
  m.bottomRightCorner<3, 3>() = wx;
  m.bottomLeftCorner<3, 3>() = skew(lin(v));
  return m;
}

// Motion-force cross product operator: [[w×, v×], [0, w×]].
inline Mat6 crf(const Motion& v)
{
  Mat6 m = Mat6::Zero();
  const Mat3 wx = skew(ang(v));
  m.topLeftCorner<3, 3>() = wx;
  m.bottomRightCorner<3, 3>() = wx;
  m.topRightCorner<3, 3>() = skew(lin(v));
  return m;
}

// Swapped operator: crf_bar(f) * v == crf(v) * f.
inline Mat6 crf_bar(const Force& f)
{
  Mat6 m = Mat6::Zero();
  const Mat3 fx = skew(lin(f));
  m.topLeftCorner<3, 3>() = -skew(ang(f));
  m.topRightCorner<3, 3>() = -fx;
  m.bottomLeftCorner<3, 3>() = -fx;
  return m;
}

// Cheap vector forms of the operators above.
inline Motion cross_m(const Motion& v, const Motion& u)
{
  const Vec3 w = ang(v), vl = lin(v);
  return spatial(w.cross(ang(u)), w.cross(lin(u)) + vl.cross(ang(u)));
}

inline Force cross_f(const Motion& v, const Force& f)
{
  const Vec3 w = ang(v), vl = lin(v);
  return spatial(w.cross(ang(f)) + vl.cross(lin(f)), w.cross(lin(f)));
}

inline MotionMat cross_m(const Motion& v, const MotionMat& U)
{
  MotionMat out(6, U.cols());
  for (Eigen::Index c = 0; c < U.cols(); ++c) out.col(c) = cross_m(v, Motion(U.col(c)));
  return out;
}

// Plücker transform from frame A to frame B, stored as (E, r): E rotates
// A-coordinates into B-coordinates and r is the origin of B expressed in A.
struct Transform {
  Mat3 E = Mat3::Identity();
  Vec3 r = Vec3::Zero();

  static Transform identity() { return {}; }
  static Transform rotation(const Mat3& E) { return {E, Vec3::Zero()}; }
  static Transform translation(const Vec3& r) { return {Mat3::Identity(), r}; }

  Motion apply_motion(const Motion& m) const
  {
    const Vec3 w = ang(m);
    return spatial(E * w, E * (lin(m) - r.cross(w)));
  }

  Force apply_force(const Force& f) const
  {
    const Vec3 fl = lin(f);
    return spatial(E * (ang(f) - r.cross(fl)), E * fl);
  }

  // Maps B-coordinates back to A-coordinates.
  Motion inv_apply_motion(const Motion& m) const
  {
    const Vec3 w = E.transpose() * ang(m);
    return spatial(w, E.transpose() * lin(m) + r.cross(w));
  }

  Force inv_apply_force(const Force& f) const
  {
    const Vec3 fl = E.transpose() * lin(f);
    return spatial(E.transpose() * ang(f) + r.cross(fl), fl);
  }

  MotionMat inv_apply_motion(const MotionMat& M) const
  {
    MotionMat out(6, M.cols());
    for (Eigen::Index c = 0; c < M.cols(); ++c) out.col(c) = inv_apply_motion(Motion(M.col(c)));
    return out;
  }

  Transform inverse() const { return {E.transpose(), -(E * r)}; }

  // Dense motion transform [[E, 0], [-E r×, E]].
  Mat6 motion_matrix() const
  {
    Mat6 X = Mat6::Zero();
    X.topLeftCorner<3, 3>() = E;
    X.bottomRightCorner<3, 3>() = E;
    X.bottomLeftCorner<3, 3>() = -E * skew(r);
    return X;
  }

  Mat6 force_matrix() const
  {
    Mat6 X = Mat6::Zero();
    X.topLeftCorner<3, 3>() = E;
    X.bottomRightCorner<3, 3>() = E;
    X.topRightCorner<3, 3>() = -E * skew(r);
    return X;
  }
};

// compose(bXc, aXb) = aXc: apply aXb first, then bXc.
inline Transform compose(const Transform& second, const Transform& first)
{
  return {second.E * first.E, first.r + first.E.transpose() * second.r};
}

inline Transform operator*(const Transform& second, const Transform& first)
{
  return compose(second, first);
}

// Inertia given in A-coordinates, returned in B-coordinates.
inline Inertia xform_inertia(const Transform& X, const Inertia& I)
{
  const Mat6 Xi = X.inverse().motion_matrix();
  Inertia out = Xi.transpose() * I * Xi;
  return 0.5 * (out + out.transpose());
}

// Spatial inertia of a body with mass m, centre of mass c and rotational
// inertia Ic about the centre of mass, all in the body frame.
inline Inertia make_inertia(double mass, const Vec3& com, const Mat3& Ic)
{
  const Mat3 cx = skew(com);
  Inertia I;
  I.topLeftCorner<3, 3>() = Ic + mass * cx * cx.transpose();
  I.topRightCorner<3, 3>() = mass * cx;
  I.bottomLeftCorner<3, 3>() = mass * cx.transpose();
  I.bottomRightCorner<3, 3>() = mass * Mat3::Identity();
  return I;
}

inline Force body_wrench(const Inertia& I, const Motion& v, const Motion& a)
{
  return I * a + cross_f(v, Force(I * v));
}

// Coriolis matrix B[I, m] = 1/2 (crf(m) I - I crm(m) + crf_bar(I m)).
inline Mat6 coriolis_matrix(const Inertia& I, const Motion& m)
{
  return 0.5 * (crf(m) * I - I * crm(m) + crf_bar(Force(I * m)));
}

} // namespace rbdd
