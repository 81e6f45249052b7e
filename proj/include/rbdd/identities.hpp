#pragma once

// Named identity checks shared by the test suite and the CLI:
//  - P1..P10: spatial vector cross-product properties,
//  - M1..M27: spatial-matrix / tensor operator properties,
//  - J1..J9, K1..K16: kinematic and dynamic directional-derivative
//    identities, checked against central differences on a tree.

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "rbdd/dynamics.hpp"
#include "rbdd/oracle.hpp"

namespace rbdd {

struct CheckResult {
  std::string name;
  double max_abs_err = 0.0;
  double max_rel_err = 0.0;
  bool pass = true;
  double tol = 0.0;
};

namespace detail {

struct Rand {
  std::mt19937_64 rng;
  std::uniform_real_distribution<double> u{-1.0, 1.0};
  explicit Rand(unsigned long long seed) : rng(seed) {}
  double operator()() { return u(rng); }
  Vec6 v6() { return Vec6::NullaryExpr([&]() { return u(rng); }); }
  MatX mat(int r, int c) { return MatX::NullaryExpr(r, c, [&]() { return u(rng); }); }
  Mat6 psd()
  {
    const Mat6 L = Mat6::NullaryExpr([&]() { return u(rng); });
    return L * L.transpose();
  }
  int pick(std::initializer_list<int> xs)
  {
    std::uniform_int_distribution<size_t> d(0, xs.size() - 1);
    return *(xs.begin() + d(rng));
  }
};

inline double resid(const MatX& a, const MatX& b)
{
  if (a.rows() != b.rows() || a.cols() != b.cols()) return std::numeric_limits<double>::infinity();
  return a.size() ? (a - b).cwiseAbs().maxCoeff() : 0.0;
}

inline double resid(const Tensor3& a, const Tensor3& b)
{
  if (!a.same_shape(b)) return std::numeric_limits<double>::infinity();
  return a.size() ? (a.flat() - b.flat()).cwiseAbs().maxCoeff() : 0.0;
}

inline void record(std::vector<CheckResult>& out, const std::string& name, double r, double tol)
{
  for (CheckResult& c : out)
    if (c.name == name) {
      c.max_abs_err = std::max(c.max_abs_err, r);
      c.pass = c.pass && r <= tol;
      return;
    }
  out.push_back({name, r, 0.0, r <= tol, tol});
}

} // namespace detail

// P1..P10 on `instances` random unit-scale draws; residual is max abs.
inline std::vector<CheckResult> vector_property_suite(int instances, unsigned long long seed, double tol = 1e-11)
{
  using detail::resid;
  detail::Rand R(seed);
  std::vector<CheckResult> out;
  auto rec = [&](const char* n, double r) { detail::record(out, n, r, tol); };
  for (int it = 0; it < instances; ++it) {
    const Motion u = R.v6(), v = R.v6(), m = R.v6();
    const Force f = R.v6();
    rec("P1", resid(cross_m(u, v), -cross_m(v, u)));
    rec("P2", resid(crm(cross_m(v, m)), crm(v) * crm(m) - crm(m) * crm(v)));
    rec("P3", resid(crf(cross_m(v, m)), crf(v) * crf(m) - crf(m) * crf(v)));
    rec("P4", resid(crf_bar(cross_f(v, f)), crf(v) * crf_bar(f) - crf_bar(f) * crm(v)));
    rec("P5", std::abs(cross_m(u, v).dot(f) + v.dot(cross_f(u, f))));
    rec("P6", std::abs(cross_f(u, f).dot(v) + f.dot(cross_m(u, v))));
    rec("P7", std::abs(u.dot(crf(v) * f) - f.dot(cross_m(u, v))));
    rec("P8", resid(cross_m(u, v).transpose(), -v.transpose() * crf(u)));
    rec("P9", resid(cross_f(u, f).transpose(), -f.transpose() * crm(u)));
    rec("P10", resid(crm(u) * crm(v) * m, cross_m(u, cross_m(v, m))));
  }
  return out;
}

// M1..M27 with random column counts in {1, 2, 3, 6} and PSD inertias.
inline std::vector<CheckResult> matrix_property_suite(int instances, unsigned long long seed, double tol = 1e-11)
{
  using detail::resid;
  detail::Rand R(seed);
  std::vector<CheckResult> out;
  auto rec = [&](const char* n, double r) { detail::record(out, n, r, tol); };
  for (int it = 0; it < instances; ++it) {
    const int n = R.pick({1, 2, 3, 6}), m = R.pick({1, 2, 3, 6}), l = R.pick({1, 2, 3, 6}),
              p = R.pick({1, 2, 3, 6}), n1 = R.pick({1, 2, 3}), n3 = R.pick({1, 2, 3}), n4 = R.pick({1, 2, 3});
    const MotionMat U = R.mat(6, n), V = R.mat(6, l), W = R.mat(6, p);
    const ForceMat F = R.mat(6, m);
    const Motion v = R.v6(), w = R.v6(), u = R.v6();
    const Force f = R.v6();
    const Mat6 I = R.psd();
    const double lam = R();

    const Tensor3 Ux = crossM_op(U), Uxs = crossF_op(U), Vx = crossM_op(V), Vxs = crossF_op(V);
    const Tensor3 Fxb = crossFbar_op(F);
    const Tensor3 UxV = tmprod(Ux, V), VxU = tmprod(Vx, U);
    const Tensor3 UxsF = tmprod(Uxs, F);

    rec("M1", resid(Uxs, -rot12(Ux)));
    rec("M2", resid(Tensor3(-mtprod(V.transpose(), Uxs)), rot12(UxV)));
    rec("M3", resid(Tensor3(-tmprod(mtprod(V.transpose(), Uxs), F)), tmprod(rot12(UxV), F)));
    rec("M4", resid(rot23(tmprod(Ux, v)), as_tensor(-crm(v) * U)));
    rec("M5", resid(UxsF, rot23(tmprod(Fxb, U))));
    rec("M6", resid(tmprod(Fxb, U), rot23(UxsF)));
    rec("M7", resid(crossM_op(lam * U), lam * Ux));
    rec("M8", resid(UxV, -rot23(VxU)));
    rec("M9", resid(crossM_op(crm(v) * U), mtprod(crm(v), Ux) - tmprod(Ux, crm(v))));
    rec("M10", resid(crossF_op(crm(v) * U), mtprod(crf(v), Uxs) - tmprod(Uxs, crf(v))));
    rec("M11", resid(crossFbar_op(squeeze(tmprod(Uxs, f))), tmprod(Uxs, crf_bar(f)) - mtprod(crf_bar(f), Ux)));
    rec("M12", resid(rot12(UxsF), Tensor3(-mtprod(F.transpose(), Ux))));
    {
      const Tensor3 lhs = mtprod(V.transpose(), UxsF);
      rec("M13", std::max(resid(lhs, tmprod(rot231(VxU), F)), resid(lhs, rot12(mtprod(F.transpose(), rot23(VxU))))));
    }
    rec("M14", resid(as_tensor(crf(v) * F), rot23(tmprod(Fxb, v))));
    rec("M15", resid(as_tensor(crf_bar(f) * U), rot23(tmprod(Uxs, f))));
    rec("M16", resid(mtprod(V.transpose(), rot23(UxsF)), rot23(tmprod(rot231(VxU), F))));
    rec("M17", resid(mtprod(V.transpose(), rot23(UxsF)),
                     Tensor3(-rot12(mtprod(U.transpose(), rot23(tmprod(Vxs, F)))))));
    rec("M18", resid(mtprod(I, rot23(UxsF)), rot23(mtprod(I, UxsF))));
    rec("M19", resid(mtprod(I, rot23(UxV)), rot23(mtprod(I, UxV))));
    {
      const MatX A = R.mat(n1, n3);
      Tensor3 Y(n3, n4, R.pick({1, 2, 3}));
      Y.flat() = VecX::NullaryExpr(Y.size(), [&]() { return R(); });
      rec("M20", resid(rot12(mtprod(A, Y)), tmprod(rot12(Y), A.transpose())));
    }
    rec("M21", resid(mtprod(F.transpose(), UxV), Tensor3(-rot12(mtprod(V.transpose(), rot23(tmprod(Fxb, U)))))));
    rec("M22", resid(coriolis_matrix(I, v).transpose() * w, -coriolis_matrix(I, w).transpose() * v));
    rec("M23", resid(coriolis_matrix(I, v) * w, coriolis_matrix(I, w) * v - I * cross_m(v, w)));
    rec("M24", std::abs(u.dot(coriolis_matrix(I, v) * w) + v.dot(coriolis_matrix(I, u) * w)));
    {
      const Tensor3 BV = coriolis_tensor(I, V), BW = coriolis_tensor(I, W), BU = coriolis_tensor(I, U);
      rec("M25", resid(tmprod(rot12(BV), W), Tensor3(-rot23(tmprod(rot12(BW), V)))));
      rec("M26", resid(tmprod(BV, W), rot23(tmprod(BW, V)) - tmprod(mtprod(I, Vx), W)));
      rec("M27", resid(mtprod(U.transpose(), rot23(tmprod(BV, W))),
                       Tensor3(-rot12(mtprod(V.transpose(), rot23(tmprod(BU, W)))))));
    }
  }
  return out;
}

// ---- derivative identities on a tree ---------------------------------------

namespace detail {

inline VecX flat(const MatX& m) { return Eigen::Map<const VecX>(m.data(), m.size()); }

inline MatX flat_pages(const Tensor3& T)
{
  MatX out(T.dim(0) * T.dim(1), T.dim(2));
  for (Eigen::Index k = 0; k < T.dim(2); ++k) out.col(k) = flat(MatX(T.page(k)));
  return out;
}

inline Tensor3 cross_tensor(const MotionMat& Sj, const MotionMat& X) { return tmprod(crossM_op(Sj), X); }

// Per-body quantity and its analytic derivative w.r.t. joint j (one column per
// dof of j, each column the flattened derivative of the quantity).
using BodyQuantity = std::function<MatX(const DynamicsCache&, int i)>;
using BodyDerivative = std::function<MatX(const DynamicsCache&, int i, int j)>;

inline CheckResult check_body_identity(const std::string& name, const KinematicTree& t, const RobotState& s,
                                       const BodyQuantity& Q, const BodyDerivative& D, bool wrt_qd, double h,
                                       double tol)
{
  const DynamicsCache d0 = rnea(t, s);
  std::vector<Eigen::Index> off(t.N() + 1, 0);
  for (int i = 0; i < t.N(); ++i) off[i + 1] = off[i] + Q(d0, i).size();

  MatX A = MatX::Zero(off.back(), t.nv());
  for (int i = 0; i < t.N(); ++i)
    for (int j = 0; j < t.N(); ++j) {
      const MatX blk = D(d0, i, j);
      if (blk.size()) A.block(off[i], t.dof_offset(j), blk.rows(), blk.cols()) = blk;
    }

  auto eval = [&](const VecX& dv) {
    const DynamicsCache d = wrt_qd ? rnea(t, s.q, VecX(s.qd + dv), s.qdd, t.gravity)
                                   : rnea(t, integrate(t, s.q, dv), s.qd, s.qdd, t.gravity);
    VecX y(off.back());
    for (int i = 0; i < t.N(); ++i) y.segment(off[i], off[i + 1] - off[i]) = flat(Q(d, i));
    return y;
  };
  const MatX fd = fd_jacobian(eval, t.nv(), h);
  const CompareReport r = compare_scaled(A, fd, tol);
  return {name, r.max_abs_err, r.max_rel_err, r.pass, tol};
}

} // namespace detail

// J1..J9 and K1..K16 against central differences at step h, tolerance tol
// relative (with a floor scaled by the reference magnitude).
inline std::vector<CheckResult> kinematic_identity_suite(const KinematicTree& t, const RobotState& s,
                                                         double h = 4e-6, double tol = 1e-6,
                                                         unsigned long long seed = 1)
{
  using detail::cross_tensor;
  using detail::flat;
  using detail::flat_pages;
  detail::Rand R(seed);
  const Force fr = R.v6();
  const Motion ar = R.v6();
  std::vector<CheckResult> out;

  auto anc = [&t](int j, int i) { return t.is_ancestor(j, i); };
  auto vpar = [&t](const DynamicsCache& d, int j) -> Motion { return d.kin.v_parent(t, j); };
  // gamma_i = sum over ancestors of S_l qdd_l; xi_i = a_i - gamma_i - a0.
  auto gamma = [&t, &s](const DynamicsCache& d, int i) -> Motion {
    if (i < 0) return Motion::Zero();
    Motion g = Motion::Zero();
    for (int l : t.ancestors(i)) g += d.kin.S[l] * s.qdd.segment(t.dof_offset(l), t.dofs(l));
    return g;
  };
  auto xi = [&](const DynamicsCache& d, int i) -> Motion {
    if (i < 0) return Motion::Zero();
    return d.kin.a[i] - gamma(d, i) - d.kin.a0;
  };
  // Column-wise helper: per dof of j, a motion/force vector.
  auto per_dof = [&t](int j, const std::function<Vec6(int col)>& fn) {
    MatX m(6, t.dofs(j));
    for (int c = 0; c < t.dofs(j); ++c) m.col(c) = fn(c);
    return m;
  };
  auto add = [&](const std::string& name, const detail::BodyQuantity& Q, const detail::BodyDerivative& D,
                 bool wrt_qd = false) { out.push_back(detail::check_body_identity(name, t, s, Q, D, wrt_qd, h, tol)); };
  const MatX none;

  add("J1", [](const DynamicsCache& d, int i) { return MatX(d.kin.S[i]); },
      [&](const DynamicsCache& d, int i, int j) -> MatX {
        if (!anc(j, i)) return none;
        MatX m(6 * t.dofs(i), t.dofs(j));
        for (int p = 0; p < t.dofs(j); ++p) m.col(p) = flat(cross_m(Motion(d.kin.S[j].col(p)), d.kin.S[i]));
        return m;
      });
  add("J2", [&](const DynamicsCache& d, int i) { return MatX(cross_f(d.kin.v[i], fr)); },
      [&](const DynamicsCache& d, int i, int j) -> MatX {
        if (!anc(j, i)) return none;
        return per_dof(j, [&](int p) {
          return Vec6(crf_bar(fr) * cross_m(Motion(vpar(d, j) - d.kin.v[i]), Motion(d.kin.S[j].col(p))));
        });
      });
  add("J3", [&](const DynamicsCache& d, int i) { return MatX(d.kin.S[i].transpose() * fr); },
      [&](const DynamicsCache& d, int i, int j) -> MatX {
        if (!anc(j, i)) return none;
        return -d.kin.S[i].transpose() * crf_bar(fr) * d.kin.S[j];
      });
  add("J4", [&](const DynamicsCache& d, int i) { return MatX(d.I[i] * ar); },
      [&](const DynamicsCache& d, int i, int j) -> MatX {
        if (!anc(j, i)) return none;
        return crf_bar(Force(d.I[i] * ar)) * d.kin.S[j] + d.I[i] * cross_m(ar, d.kin.S[j]);
      });
  add("J5", [&](const DynamicsCache& d, int i) { return MatX(d.I[i] * d.kin.v[i]); },
      [&](const DynamicsCache& d, int i, int j) -> MatX {
        if (!anc(j, i)) return none;
        return crf_bar(Force(d.I[i] * d.kin.v[i])) * d.kin.S[j] + d.I[i] * d.kin.Psid[j];
      });
  add("J6", [&](const DynamicsCache& d, int i) { return MatX(xi(d, i)); },
      [&](const DynamicsCache& d, int i, int j) -> MatX {
        if (!anc(j, i)) return none;
        const Motion dv = vpar(d, j) - d.kin.v[i];
        const Motion dxi = xi(d, t.parent(j)) - xi(d, i);
        return cross_m(dv, d.kin.Psid[j]) + cross_m(dxi, d.kin.S[j]);
      });
  add("J7", [&](const DynamicsCache& d, int i) { return MatX(gamma(d, i)); },
      [&](const DynamicsCache& d, int i, int j) -> MatX {
        if (!anc(j, i)) return none;
        return cross_m(Motion(gamma(d, t.parent(j)) - gamma(d, i)), d.kin.S[j]);
      });
  add("J8", [](const DynamicsCache& d, int i) { return MatX(d.kin.v[i]); },
      [&](const DynamicsCache& d, int i, int j) -> MatX { return anc(j, i) ? MatX(d.kin.S[j]) : none; }, true);
  add("J9", [&](const DynamicsCache& d, int i) { return MatX(xi(d, i)); },
      [&](const DynamicsCache& d, int i, int j) -> MatX {
        if (!anc(j, i)) return none;
        return d.kin.Psid[j] + d.kin.Phid[j] - cross_m(d.kin.v[i], d.kin.S[j]);
      }, true);

  add("K1", [](const DynamicsCache& d, int i) { return MatX(d.kin.S[i]); },
      [&](const DynamicsCache& d, int i, int j) -> MatX {
        return anc(j, i) ? flat_pages(cross_tensor(d.kin.S[j], d.kin.S[i])) : none;
      });
  add("K2", [](const DynamicsCache& d, int i) { return MatX(d.kin.Phid[i]); },
      [&](const DynamicsCache& d, int i, int j) -> MatX {
        if (!anc(j, i)) return none;
        return flat_pages(cross_tensor(d.kin.Psid[j], d.kin.S[i]) + cross_tensor(d.kin.S[j], d.kin.Phid[i]));
      });
  auto vJxS = [&t, &s](const DynamicsCache& d, int i) {
    const Motion vJ = d.kin.S[i] * s.qd.segment(t.dof_offset(i), t.dofs(i));
    return MotionMat(cross_m(vJ, d.kin.S[i]));
  };
  add("K3", [&](const DynamicsCache& d, int i) { return MatX(vJxS(d, i)); },
      [&](const DynamicsCache& d, int i, int j) -> MatX {
        return anc(j, i) ? flat_pages(cross_tensor(d.kin.S[j], vJxS(d, i))) : none;
      });
  add("K4", [](const DynamicsCache& d, int i) { return MatX(d.kin.Psid[i]); },
      [&](const DynamicsCache& d, int i, int j) -> MatX {
        if (!anc(j, i)) return none;
        return flat_pages(cross_tensor(d.kin.Psid[j], d.kin.S[i]) + cross_tensor(d.kin.S[j], d.kin.Psid[i]));
      });
  auto dinertia = [](const MotionMat& Sj, const Mat6& X) {
    return flat_pages(tmprod(crossF_op(Sj), X) - mtprod(X, crossM_op(Sj)));
  };
  add("K5", [](const DynamicsCache& d, int i) { return MatX(d.I[i]); },
      [&](const DynamicsCache& d, int i, int j) -> MatX { return anc(j, i) ? dinertia(d.kin.S[j], d.I[i]) : none; });
  add("K6", [](const DynamicsCache& d, int i) { return MatX(d.IC[i]); },
      [&](const DynamicsCache& d, int i, int j) -> MatX {
        if (anc(j, i)) return dinertia(d.kin.S[j], d.IC[i]);
        if (anc(i, j)) return dinertia(d.kin.S[j], d.IC[j]);
        return none;
      });
  add("K7", [](const DynamicsCache& d, int i) { return MatX(d.kin.a[i]); },
      [&](const DynamicsCache& d, int i, int j) -> MatX {
        if (!anc(j, i)) return none;
        return d.kin.Psidd[j] - cross_m(d.kin.v[i], d.kin.Psid[j]) - cross_m(d.kin.a[i], d.kin.S[j]);
      });
  add("K8", [](const DynamicsCache& d, int i) { return MatX(d.I[i] * d.kin.a[i]); },
      [&](const DynamicsCache& d, int i, int j) -> MatX {
        if (!anc(j, i)) return none;
        return crf_bar(Force(d.I[i] * d.kin.a[i])) * d.kin.S[j] + d.I[i] * d.kin.Psidd[j] -
               d.I[i] * cross_m(d.kin.v[i], d.kin.Psid[j]);
      });
  add("K9", [](const DynamicsCache& d, int i) { return MatX(d.kin.Psidd[i]); },
      [&](const DynamicsCache& d, int i, int j) -> MatX {
        if (!anc(j, i)) return none;
        return flat_pages(cross_tensor(d.kin.Psidd[j], d.kin.S[i]) + 2.0 * cross_tensor(d.kin.Psid[j], d.kin.Psid[i]) +
                          cross_tensor(d.kin.S[j], d.kin.Psidd[i]));
      });
  auto dBC = [](const DynamicsCache& d, int x, int j) {
    return flat_pages(coriolis_tensor(d.IC[x], d.kin.Psid[j]) + tmprod(crossF_op(d.kin.S[j]), d.BC[x]) -
                      mtprod(d.BC[x], crossM_op(d.kin.S[j])));
  };
  add("K10", [](const DynamicsCache& d, int i) { return MatX(d.BC[i]); },
      [&](const DynamicsCache& d, int i, int j) -> MatX {
        if (anc(j, i)) return dBC(d, i, j);
        if (anc(i, j)) return dBC(d, j, j);
        return none;
      });
  add("K11", [](const DynamicsCache& d, int i) { return MatX(d.f[i]); },
      [&](const DynamicsCache& d, int i, int j) -> MatX {
        if (!anc(j, i)) return none;
        return d.I[i] * d.kin.Psidd[j] + crf_bar(d.f[i]) * d.kin.S[j] + 2.0 * d.B[i] * d.kin.Psid[j];
      });
  auto dfC = [](const DynamicsCache& d, int x, int j) -> MatX {
    return d.IC[x] * d.kin.Psidd[j] + crf_bar(d.fC[x]) * d.kin.S[j] + 2.0 * d.BC[x] * d.kin.Psid[j];
  };
  add("K12", [](const DynamicsCache& d, int i) { return MatX(d.fC[i]); },
      [&](const DynamicsCache& d, int i, int j) -> MatX {
        if (anc(j, i)) return dfC(d, i, j);
        if (anc(i, j)) return dfC(d, j, j);
        return none;
      });
  add("K13", [](const DynamicsCache& d, int i) { return MatX(d.kin.S[i].transpose()); },
      [&](const DynamicsCache& d, int i, int j) -> MatX {
        if (!anc(j, i)) return none;
        return flat_pages(Tensor3(-mtprod(d.kin.S[i].transpose(), crossF_op(d.kin.S[j]))));
      });
  add("K14", [](const DynamicsCache& d, int i) { return MatX(d.kin.Phid[i]); },
      [&](const DynamicsCache& d, int i, int j) -> MatX {
        return anc(j, i) ? flat_pages(cross_tensor(d.kin.S[j], d.kin.S[i])) : none;
      }, true);
  add("K15", [](const DynamicsCache& d, int i) { return MatX(d.kin.Psid[i]); },
      [&](const DynamicsCache& d, int i, int j) -> MatX {
        return anc(j, i) && j != i ? flat_pages(cross_tensor(d.kin.S[j], d.kin.S[i])) : none;
      }, true);
  add("K16", [](const DynamicsCache& d, int i) { return MatX(d.BC[i]); },
      [&](const DynamicsCache& d, int i, int j) -> MatX {
        if (anc(j, i)) return flat_pages(coriolis_tensor(d.IC[i], d.kin.S[j]));
        if (anc(i, j)) return flat_pages(coriolis_tensor(d.IC[j], d.kin.S[j]));
        return none;
      }, true);
  return out;
}

} // namespace rbdd
