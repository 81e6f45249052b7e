#pragma once

// Kinematic trees, joint models, configuration retraction and random models.

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "rbdd/spatial.hpp"

namespace rbdd {

enum class JointType { Revolute, Prismatic, Spherical, Free };

inline const char* joint_type_name(JointType t)
{
  switch (t) {
    case JointType::Revolute: return "revolute";
    case JointType::Prismatic: return "prismatic";
    case JointType::Spherical: return "spherical";
    case JointType::Free: return "free";
  }
  return "?";
}

// Velocity dimension / configuration dimension. Spherical joints store a unit
// quaternion (w, x, y, z); free joints store the quaternion followed by the
// child origin expressed in the parent frame.
inline int joint_nv(JointType t)
{
  switch (t) {
    case JointType::Revolute:
    case JointType::Prismatic: return 1;
    case JointType::Spherical: return 3;
    case JointType::Free: return 6;
  }
  return 0;
}

inline int joint_nq(JointType t)
{
  switch (t) {
    case JointType::Revolute:
    case JointType::Prismatic: return 1;
    case JointType::Spherical: return 4;
    case JointType::Free: return 7;
  }
  return 0;
}

struct JointModel {
  JointType type = JointType::Revolute;
  Vec3 axis = Vec3::UnitZ();
  int nv() const { return joint_nv(type); }
  int nq() const { return joint_nq(type); }
};

// Body parameters as written in a model file; kept so models round-trip.
struct BodyParams {
  double mass = 1.0;
  Vec3 com = Vec3::Zero();
  // Ixx, Iyy, Izz, Ixy, Ixz, Iyz about the centre of mass.
  Eigen::Matrix<double, 6, 1> I6 = Eigen::Matrix<double, 6, 1>::Zero();

  Mat3 rot_inertia() const
  {
    Mat3 Ic;
    Ic << I6[0], I6[3], I6[4],
          I6[3], I6[1], I6[5],
          I6[4], I6[5], I6[2];
    return Ic;
  }
};

struct Contact {
  int body = 0;  // 0-based joint/body index
  Vec3 point = Vec3::Zero();  // body frame
};

using ContactSpec = std::vector<Contact>;

// Intrinsic X-Y-Z rotation.
inline Mat3 rpy_matrix(const Vec3& rpy)
{
  using Eigen::AngleAxisd;
  return (AngleAxisd(rpy.x(), Vec3::UnitX()) * AngleAxisd(rpy.y(), Vec3::UnitY()) *
          AngleAxisd(rpy.z(), Vec3::UnitZ())).toRotationMatrix();
}

class KinematicTree {
public:
  std::string name = "model";
  Vec3 gravity = Vec3(0, 0, -9.81);
  ContactSpec contacts;

  // Appends a joint; indices are 0-based and parent == -1 is the fixed base.
  int add_joint(int parent, const JointModel& joint, const Vec3& xyz, const Vec3& rpy,
                const BodyParams& body)
  {
    const int i = static_cast<int>(parent_.size());
    if (parent < -1 || parent >= i) throw std::invalid_argument("parent must precede child");
    parent_.push_back(parent);
    joint_.push_back(joint);
    xyz_.push_back(xyz);
    rpy_.push_back(rpy);
    placement_.push_back(Transform{rpy_matrix(rpy).transpose(), xyz});
    body_.push_back(body);
    inertia_.push_back(make_inertia(body.mass, body.com, body.rot_inertia()));
    v_off_.push_back(nv_);
    q_off_.push_back(nq_);
    nv_ += joint.nv();
    nq_ += joint.nq();
    depth_.push_back(parent < 0 ? 1 : depth_[parent] + 1);
    anc_.push_back(parent < 0 ? std::vector<int>{} : anc_[parent]);
    anc_.back().push_back(i);
    sub_.emplace_back();
    for (int a : anc_.back()) sub_[a].push_back(i);
    return i;
  }

  int N() const { return static_cast<int>(parent_.size()); }
  int nv() const { return nv_; }
  int nq() const { return nq_; }
  int parent(int i) const { return parent_[i]; }
  const JointModel& joint(int i) const { return joint_[i]; }
  const Transform& placement(int i) const { return placement_[i]; }
  const Vec3& placement_xyz(int i) const { return xyz_[i]; }
  const Vec3& placement_rpy(int i) const { return rpy_[i]; }
  const Inertia& inertia(int i) const { return inertia_[i]; }
  const BodyParams& body(int i) const { return body_[i]; }
  int dof_offset(int i) const { return v_off_[i]; }
  int q_offset(int i) const { return q_off_[i]; }
  int dofs(int i) const { return joint_[i].nv(); }
  int depth() const { return N() == 0 ? 0 : *std::max_element(depth_.begin(), depth_.end()); }

  // Joints j with j ⪯ i, root first.
  const std::vector<int>& ancestors(int i) const { return anc_[i]; }
  // Joints j with j ⪰ i, ascending.
  const std::vector<int>& subtree(int i) const { return sub_[i]; }

  // j ⪯ i
  bool is_ancestor(int j, int i) const
  {
    if (j > i) return false;
    while (i > j) i = parent_[i];
    return i == j;
  }

  // Joint owning velocity coordinate d.
  int joint_of_dof(int d) const
  {
    auto it = std::upper_bound(v_off_.begin(), v_off_.end(), d);
    return static_cast<int>(it - v_off_.begin()) - 1;
  }

private:
  std::vector<int> parent_;
  std::vector<JointModel> joint_;
  std::vector<Vec3> xyz_, rpy_;
  std::vector<Transform> placement_;
  std::vector<BodyParams> body_;
  std::vector<Inertia> inertia_;
  std::vector<int> v_off_, q_off_, depth_;
  std::vector<std::vector<int>> anc_, sub_;
  int nv_ = 0, nq_ = 0;
};

struct RobotState {
  VecX q, qd, qdd;
};

// ---- SO(3) / SE(3) exponentials -------------------------------------------

inline Mat3 so3_exp(const Vec3& w)
{
  const double th = w.norm();
  if (th < 1e-12) return Mat3::Identity() + skew(w);
  return Eigen::AngleAxisd(th, w / th).toRotationMatrix();
}

// Left Jacobian of SO(3); maps a body twist's linear part to the translation of exp.
inline Mat3 so3_left_jacobian(const Vec3& w)
{
  const double th2 = w.squaredNorm();
  const Mat3 W = skew(w);
  double a, b;
  if (th2 < 1e-8) {
    a = 0.5 - th2 / 24.0;
    b = 1.0 / 6.0 - th2 / 120.0;
  } else {
    const double th = std::sqrt(th2);
    a = (1.0 - std::cos(th)) / th2;
    b = (th - std::sin(th)) / (th2 * th);
  }
  return Mat3::Identity() + a * W + b * W * W;
}

inline Eigen::Quaterniond quat_from(const VecX& q, int off)
{
  return Eigen::Quaterniond(q[off], q[off + 1], q[off + 2], q[off + 3]).normalized();
}

inline void quat_store(VecX& q, int off, const Eigen::Quaterniond& e)
{
  q[off] = e.w(); q[off + 1] = e.x(); q[off + 2] = e.y(); q[off + 3] = e.z();
}

struct JointKinematics {
  Transform XJ;  // parent-side joint frame -> child frame
  MotionMat S;   // child frame
};

inline JointKinematics joint_kinematics(const JointModel& j, const double* qj)
{
  JointKinematics out;
  switch (j.type) {
    case JointType::Revolute:
      out.XJ = Transform::rotation(Eigen::AngleAxisd(qj[0], j.axis).toRotationMatrix().transpose());
      out.S = spatial(j.axis, Vec3::Zero());
      break;
    case JointType::Prismatic:
      out.XJ = Transform::translation(j.axis * qj[0]);
      out.S = spatial(Vec3::Zero(), j.axis);
      break;
    case JointType::Spherical: {
      const Eigen::Quaterniond e = Eigen::Quaterniond(qj[0], qj[1], qj[2], qj[3]).normalized();
      out.XJ = Transform::rotation(e.toRotationMatrix().transpose());
      out.S = MotionMat::Zero(6, 3);
      out.S.topRows<3>().setIdentity();
      break;
    }
    case JointType::Free: {
      const Eigen::Quaterniond e = Eigen::Quaterniond(qj[0], qj[1], qj[2], qj[3]).normalized();
      out.XJ = Transform{e.toRotationMatrix().transpose(), Vec3(qj[4], qj[5], qj[6])};
      out.S = MotionMat::Identity(6, 6);
      break;
    }
  }
  return out;
}

inline VecX neutral_configuration(const KinematicTree& t)
{
  VecX q = VecX::Zero(t.nq());
  for (int i = 0; i < t.N(); ++i) {
    const auto type = t.joint(i).type;
    if (type == JointType::Spherical || type == JointType::Free) q[t.q_offset(i)] = 1.0;
  }
  return q;
}

// Right-tangent retraction q ⊕ dv. Spherical: R exp(w). Free: T Exp(w, v).
inline VecX integrate(const KinematicTree& t, const VecX& q, const VecX& dv)
{
  VecX out = q;
  for (int i = 0; i < t.N(); ++i) {
    const int qo = t.q_offset(i), vo = t.dof_offset(i);
    switch (t.joint(i).type) {
      case JointType::Revolute:
      case JointType::Prismatic: out[qo] += dv[vo]; break;
      case JointType::Spherical: {
        const Eigen::Quaterniond e = quat_from(q, qo);
        const Eigen::Quaterniond d(so3_exp(dv.segment<3>(vo)));
        quat_store(out, qo, (e * d).normalized());
        break;
      }
      case JointType::Free: {
        const Eigen::Quaterniond e = quat_from(q, qo);
        const Vec3 w = dv.segment<3>(vo), v = dv.segment<3>(vo + 3);
        const Vec3 p = q.segment<3>(qo + 4);
        quat_store(out, qo, (e * Eigen::Quaterniond(so3_exp(w))).normalized());
        out.segment<3>(qo + 4) = p + e.toRotationMatrix() * (so3_left_jacobian(w) * v);
        break;
      }
    }
  }
  return out;
}

// Single coordinate perturbation q ⊕ h e_d.
inline VecX perturb(const KinematicTree& t, const VecX& q, int d, double h)
{
  VecX dv = VecX::Zero(t.nv());
  dv[d] = h;
  return integrate(t, q, dv);
}

// ---- random models ---------------------------------------------------------

struct RandomModelOptions {
  int N = 5;
  unsigned long long seed = 1;
  double branching = 0.0;
  // Subset of "RPSF" (revolute, prismatic, spherical, free).
  std::string kinds = "RPSF";
};

inline Vec3 random_unit(std::mt19937_64& rng)
{
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 v;
  do { v = Vec3(n(rng), n(rng), n(rng)); } while (v.norm() < 1e-3);
  return v.normalized();
}

inline KinematicTree random_model(const RandomModelOptions& o)
{
  if (o.N < 1) throw std::invalid_argument("random_model: N must be >= 1");
  if (!(o.branching >= 0.0 && o.branching <= 1.0))
    throw std::invalid_argument("random_model: branching must lie in [0, 1]");
  if (o.kinds.empty() || o.kinds.find_first_not_of("RPSF") != std::string::npos)
    throw std::invalid_argument("random_model: kinds must be a non-empty subset of RPSF");

  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto uni = [&](double lo, double hi) { return lo + (hi - lo) * u01(rng); };

  KinematicTree t;
  t.name = "random_N" + std::to_string(o.N) + "_s" + std::to_string(o.seed);
  for (int i = 0; i < o.N; ++i) {
    int parent = i - 1;
    if (i > 0 && u01(rng) < o.branching)
      parent = static_cast<int>(std::floor(u01(rng) * (i + 1))) - 1;
    parent = std::min(parent, i - 1);

    JointModel j;
    const char kind = o.kinds[static_cast<size_t>(std::floor(u01(rng) * o.kinds.size())) % o.kinds.size()];
    j.type = kind == 'R' ? JointType::Revolute
           : kind == 'P' ? JointType::Prismatic
           : kind == 'S' ? JointType::Spherical
                         : JointType::Free;
    j.axis = random_unit(rng);

    const Vec3 xyz(uni(-0.5, 0.5), uni(-0.5, 0.5), uni(-0.5, 0.5));
    const Vec3 rpy(uni(-M_PI, M_PI), uni(-M_PI / 2, M_PI / 2), uni(-M_PI, M_PI));

    BodyParams b;
    b.mass = uni(0.1, 2.0);
    b.com = Vec3(uni(-0.3, 0.3), uni(-0.3, 0.3), uni(-0.3, 0.3));
    // Principal moments from a random point-mass cloud satisfy the triangle inequality.
    const Vec3 spread(uni(0.05, 0.4), uni(0.05, 0.4), uni(0.05, 0.4));
    const Vec3 pm(b.mass * (spread.y() * spread.y() + spread.z() * spread.z()),
                  b.mass * (spread.x() * spread.x() + spread.z() * spread.z()),
                  b.mass * (spread.x() * spread.x() + spread.y() * spread.y()));
    const Mat3 R = rpy_matrix(Vec3(uni(-M_PI, M_PI), uni(-M_PI, M_PI), uni(-M_PI, M_PI)));
    const Mat3 Ic = R * pm.asDiagonal() * R.transpose();
    b.I6 << Ic(0, 0), Ic(1, 1), Ic(2, 2), Ic(0, 1), Ic(0, 2), Ic(1, 2);

    t.add_joint(parent, j, xyz, rpy, b);
  }
  return t;
}

inline RobotState random_state(const KinematicTree& t, unsigned long long seed)
{
  std::mt19937_64 rng(seed * 7919ULL + 17ULL);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RobotState s;
  s.q = neutral_configuration(t);
  for (int i = 0; i < t.N(); ++i) {
    const int qo = t.q_offset(i);
    switch (t.joint(i).type) {
      case JointType::Revolute: s.q[qo] = M_PI * u(rng); break;
      case JointType::Prismatic: s.q[qo] = 0.5 * u(rng); break;
      case JointType::Spherical:
      case JointType::Free: {
        Eigen::Quaterniond e(u(rng), u(rng), u(rng), u(rng));
        if (e.norm() < 1e-3) e = Eigen::Quaterniond::Identity();
        quat_store(s.q, qo, e.normalized());
        if (t.joint(i).type == JointType::Free)
          s.q.segment<3>(qo + 4) = 0.5 * Vec3(u(rng), u(rng), u(rng));
        break;
      }
    }
  }
  s.qd = VecX::NullaryExpr(t.nv(), [&]() { return u(rng); });
  s.qdd = VecX::NullaryExpr(t.nv(), [&]() { return u(rng); });
  return s;
}

} // namespace rbdd
