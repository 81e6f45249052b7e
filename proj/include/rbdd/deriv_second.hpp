#pragma once

// Second-order partial derivatives of inverse dynamics and the configuration
// derivative of the mass matrix, by one sweep over ancestor triples
// k ⪯ j ⪯ i using per-dof scalar forms.
//
// Tensor axes: (output, first derivative variable, second derivative
// variable). Entries hold ordered derivatives, T(:, a, b) = d/dq_b (dtau/dq_a).
// For two dofs of the same multi-dof joint the right-tangent derivatives do
// not commute, so those entries are computed directly; entries between
// distinct joints are filled by copying their mirrored counterpart.

#include <vector>

#include "rbdd/deriv_first.hpp"
#include "rbdd/tensor.hpp"

namespace rbdd {

struct SecondOrderDerivs {
  Tensor3 d2tau_dq2;
  Tensor3 d2tau_dqd2;
  Tensor3 d2tau_cross;  // (tau, qd, q); rot23 gives the (tau, q, qd) order
  Tensor3 dM_dq;        // (row, col, q)
};

namespace detail {

struct DofData {
  Motion s, psid, psidd, phid;
};

// Contact-force derivative sources, gated per contact on the subtree test.
struct FextSO {
  const KinematicTree* t = nullptr;
  const ContactSpec* spec = nullptr;
  std::vector<MatX> g;      // per contact: u_y × λ, 3 x nv
  std::vector<Tensor3> G;   // per contact: dJ(:, y, z) × λ, 3 x nv x nv
  std::vector<ForceMat> fe_fo;  // cumulated first-order columns

  bool empty() const { return g.empty(); }

  Force d2fe(int x, int y, int z) const
  {
    Force f = Force::Zero();
    for (size_t c = 0; c < g.size(); ++c)
      if (t->is_ancestor(x, (*spec)[c].body))
        for (int r = 0; r < 3; ++r) f[r] += G[c](r, y, z);
    return f;
  }

  Force dfe(int x, int y) const { return fe_fo[x].col(y); }
};

inline SecondOrderDerivs id_so_impl(const KinematicTree& t, const DynamicsCache& d, const FextSO* fx,
                                    VisitCounter* counter)
{
  const int N = t.N(), nv = t.nv();
  const KinematicsCache& k = d.kin;
  SecondOrderDerivs out{Tensor3(nv, nv, nv), Tensor3(nv, nv, nv), Tensor3(nv, nv, nv), Tensor3(nv, nv, nv)};
  Tensor3& Tqq = out.d2tau_dq2;
  Tensor3& Tvv = out.d2tau_dqd2;
  Tensor3& Tx = out.d2tau_cross;
  Tensor3& dM = out.dM_dq;
  const bool ext = fx && !fx->empty();

  std::vector<DofData> dof(nv);
  for (int i = 0; i < N; ++i)
    for (int a = 0; a < t.dofs(i); ++a) {
      DofData& x = dof[t.dof_offset(i) + a];
      x.s = k.S[i].col(a);
      x.psid = k.Psid[i].col(a);
      x.psidd = k.Psidd[i].col(a);
      x.phid = k.Phid[i].col(a);
    }

  for (int i = 0; i < N; ++i) {
    const Inertia& IC = d.IC[i];
    const Mat6& BC = d.BC[i];
    const std::vector<int>& anc_i = t.ancestors(i);

    for (int p = 0; p < t.dofs(i); ++p) {
      const int ip = t.dof_offset(i) + p;
      const DofData& P = dof[ip];
      const Force Is = IC * P.s;
      const Force BtS = BC.transpose() * P.s;
      const Mat6 Bis = coriolis_matrix(IC, P.s);
      const Mat6 crfS = crf(P.s), crmS = crm(P.s);
      const Mat6 Xs = crfS * IC - IC * crmS;
      const Mat6 Ys = 2.0 * (coriolis_matrix(IC, P.psid) + crfS * BC - BC * crmS);
      const Force Z = 2.0 * BC * P.psid + IC * P.psidd + cross_f(P.s, d.fC[i]);
      const Force Wp = 2.0 * BC * P.s + IC * (P.psid + P.phid);

      for (int j : anc_i) {
        const bool j_lt_i = j != i;
        for (int tt = 0; tt < t.dofs(j); ++tt) {
          const int jt = t.dof_offset(j) + tt;
          const DofData& J = dof[jt];

          const Force e = 2.0 * Bis.transpose() * J.s;       // 2 Bisᵀ s_jt
          const Force a1 = -2.0 * Bis.transpose() * J.psid + 2.0 * cross_f(J.s, BtS);
          const Force a2 = cross_f(J.s, Is);                  // crf(s_jt) Is
          const Force b = Ys * J.psid + Xs * J.psidd + cross_f(J.s, Z);
          const Force c1 = Ys.transpose() * J.s;
          const Force c2 = Xs * J.s;
          const Force g = 2.0 * Bis * J.s;
          const Force x1 = -2.0 * Bis * J.psid + 2.0 * cross_f(J.psid, Is) + 2.0 * cross_f(J.s, BtS);
          const Force y = 2.0 * Bis * J.psid + cross_f(J.s, Wp);
          const Force w = Ys * J.s + Xs * (J.psid + J.phid);
          const Force h = cross_f(P.s, Force(IC * J.s)) + cross_f(J.s, Is);  // used when j == i

          Force dfe_i_jt = Force::Zero(), dfe_j_ip = Force::Zero();
          if (ext) {
            dfe_i_jt = fx->dfe(i, jt);
            dfe_j_ip = fx->dfe(j, ip);
          }

          for (int kk : t.ancestors(j)) {
            if (counter && p == 0 && tt == 0) ++counter->triples;
            const bool k_lt_j = kk != j;
            for (int r = 0; r < t.dofs(kk); ++r) {
              const int kr = t.dof_offset(kk) + r;
              const DofData& K = dof[kr];
              const Motion pk = K.psid + K.phid;

              // ---- d2tau/dq2 ----
              {
                double v = a1.dot(K.psid) + a2.dot(K.psidd);
                if (ext) {
                  const Force p3 = cross_f(J.s, Force(cross_f(K.s, d.fextC[i]))) - cross_f(J.s, fx->dfe(i, kr)) -
                                   cross_f(K.s, dfe_i_jt) + fx->d2fe(i, jt, kr);
                  v -= P.s.dot(p3);
                }
                Tqq(ip, jt, kr) = v;
                if (k_lt_j) Tqq(ip, kr, jt) = v;
              }
              if (k_lt_j) {
                double v = K.s.dot(b);
                if (ext) v -= K.s.dot(fx->d2fe(kk, ip, jt));
                Tqq(kr, ip, jt) = v;
                if (j_lt_i) Tqq(kr, jt, ip) = v;
              }
              if (j_lt_i) {
                double v = c1.dot(K.psid) + c2.dot(K.psidd);
                if (ext) v -= J.s.dot(Force(-cross_f(K.s, dfe_j_ip) + fx->d2fe(j, kr, ip)));
                Tqq(jt, kr, ip) = v;
                Tqq(jt, ip, kr) = v;
              }

              // ---- d2tau/dqd2 ----
              if (k_lt_j) {
                const double v = -e.dot(K.s);
                Tvv(ip, jt, kr) = v;
                Tvv(ip, kr, jt) = v;
              } else {
                Tvv(ip, jt, kr) = -c2.dot(K.s);
              }
              if (k_lt_j && j_lt_i) {
                const double v = K.s.dot(g);
                Tvv(kr, ip, jt) = v;
                Tvv(kr, jt, ip) = v;
              }
              if (k_lt_j && !j_lt_i) Tvv(kr, ip, jt) = K.s.dot(h);
              if (j_lt_i) {
                const double v = e.dot(K.s);
                Tvv(jt, kr, ip) = v;
                Tvv(jt, ip, kr) = v;
              }

              // ---- d2tau/dqd dq ----
              Tx(ip, jt, kr) = -e.dot(K.psid);
              if (j_lt_i) {
                Tx(jt, ip, kr) = e.dot(K.psid);
                Tx(jt, kr, ip) = c1.dot(K.s) + c2.dot(pk);
              }
              if (k_lt_j) {
                Tx(ip, kr, jt) = K.s.dot(x1) + pk.dot(a2);
                Tx(kr, ip, jt) = K.s.dot(y);
                if (j_lt_i) Tx(kr, jt, ip) = K.s.dot(w);
              }

              // ---- dM/dq ----
              if (k_lt_j) {
                const double v = K.s.dot(a2);
                dM(kr, ip, jt) = v;
                dM(ip, kr, jt) = v;
              }
              if (j_lt_i) {
                const double v = K.s.dot(c2);
                dM(kr, jt, ip) = v;
                dM(jt, kr, ip) = v;
              }
            }
          }
        }
      }
    }
  }
  return out;
}

inline FextSO make_fext_so(const KinematicTree& t, const VecX& q, const ContactSpec& spec, const VecX& lambda)
{
  FextSO fx;
  fx.t = &t;
  fx.spec = &spec;
  if (spec.empty()) return fx;
  const VecX z = VecX::Zero(t.nv());
  const PointKinematics pk = point_kinematics(t, q, z, z, spec, 1);
  fx.g = contact_moment_columns(pk.J, lambda);
  fx.fe_fo = cumulate_fext_fo(t, spec, fx.g);
  const int nv = t.nv();
  for (size_t c = 0; c < spec.size(); ++c) {
    const Vec3 l = lambda.segment<3>(3 * c);
    Tensor3 G(3, nv, nv);
    for (int z2 = 0; z2 < nv; ++z2)
      for (int y = 0; y < nv; ++y) {
        const Vec3 du(pk.dJ(3 * c, y, z2), pk.dJ(3 * c + 1, y, z2), pk.dJ(3 * c + 2, y, z2));
        const Vec3 m = du.cross(l);
        for (int r = 0; r < 3; ++r) G(r, y, z2) = m[r];
      }
    fx.G.push_back(std::move(G));
  }
  return fx;
}

} // namespace detail

inline SecondOrderDerivs id_so(const KinematicTree& t, const VecX& q, const VecX& qd, const VecX& qdd,
                               const Vec3& gravity, VisitCounter* counter = nullptr)
{
  return detail::id_so_impl(t, rnea(t, q, qd, qdd, gravity), nullptr, counter);
}

inline SecondOrderDerivs id_so(const KinematicTree& t, const RobotState& s, VisitCounter* counter = nullptr)
{
  return id_so(t, s.q, s.qd, s.qdd, t.gravity, counter);
}

// Second derivatives of ID(q, qd, qdd) - J_c(q)^T λ at fixed λ. Only
// d2tau_dq2 depends on λ.
inline SecondOrderDerivs id_so_constrained(const KinematicTree& t, const VecX& q, const VecX& qd, const VecX& qdd,
                                           const Vec3& gravity, const ContactSpec& spec, const VecX& lambda,
                                           VisitCounter* counter = nullptr)
{
  check_contacts(t, spec);
  if (lambda.size() != contact_rows(spec)) throw std::invalid_argument("lambda size does not match contacts");
  const KinematicsCache k0 = forward_pass(t, q, qd, qdd, gravity);
  const std::vector<Force> fext = contact_forces(t, k0, spec, lambda);
  const DynamicsCache d = rnea(t, q, qd, qdd, gravity, &fext);
  const detail::FextSO fx = detail::make_fext_so(t, q, spec, lambda);
  return detail::id_so_impl(t, d, &fx, counter);
}

inline SecondOrderDerivs id_so_constrained(const KinematicTree& t, const RobotState& s, const ContactSpec& spec,
                                           const VecX& lambda, VisitCounter* counter = nullptr)
{
  return id_so_constrained(t, s.q, s.qd, s.qdd, t.gravity, spec, lambda, counter);
}

// d2(M(q) m - J_c(q)^T λ)/dq2 via the second-order sweep at zero velocity
// and gravity.
inline Tensor3 idsoza_c(const KinematicTree& t, const VecX& q, const VecX& m, const ContactSpec& spec,
                        const VecX& lambda)
{
  const VecX z = VecX::Zero(t.nv());
  return id_so_constrained(t, q, z, m, Vec3::Zero(), spec, lambda).d2tau_dq2;
}

} // namespace rbdd
