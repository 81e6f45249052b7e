#pragma once

// End-to-end validation of one (model, state, contacts) case: identity
// suites plus every analytic derivative against its finite-difference oracle.
// Shared by the CLI and the acceptance runner.

#include <algorithm>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "rbdd/identities.hpp"
#include "rbdd/kkt.hpp"

namespace rbdd {

struct ValidationOptions {
  double tol_fo = 1e-6;
  double tol_so = 1e-7;
  double tol_double_fd = 5e-4;
  FdConfig fd;
  int identity_instances = 200;
  unsigned long long seed = 1;
  // FD directions are sampled (seeded) when nv exceeds this; 0 means never.
  int max_directions = 0;
  // Double differencing is O(nv^2) function calls; skipped above this size.
  int double_fd_max_nv = 24;
  bool identities = true;
  // Test hook: corrupt the analytic side of the named check.
  std::string perturb;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  std::vector<std::string> skipped;
  std::vector<int> directions;
  double mass_condition = 1.0;
  double h_solve = 0.0;  // FD step used for checks that solve with M

  bool pass() const
  {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
  }
  void add(const std::vector<CheckResult>& cs) { checks.insert(checks.end(), cs.begin(), cs.end()); }
};

inline std::vector<int> sample_directions(int nv, int max_directions, unsigned long long seed)
{
  std::vector<int> d = all_directions(nv);
  if (max_directions <= 0 || nv <= max_directions) return d;
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::shuffle(d.begin(), d.end(), rng);
  d.resize(max_directions);
  std::sort(d.begin(), d.end());
  return d;
}

namespace detail {

class Checker {
public:
  Checker(ValidationReport& r, const std::string& perturb) : r_(r), perturb_(perturb) {}

  void fd(const std::string& name, MatX analytic, const MatX& ref, double tol)
  {
    if (hit(name) && analytic.size()) analytic(0, 0) += bump(ref.size() ? ref.cwiseAbs().maxCoeff() : 0.0);
    push(name, compare_scaled(analytic, ref, tol), tol);
  }

  void fd(const std::string& name, Tensor3 analytic, const Tensor3& ref, double tol)
  {
    if (hit(name) && analytic.size()) analytic(0, 0, 0) += bump(ref.max_abs());
    push(name, compare_scaled(analytic, ref, tol), tol);
  }

  // Residual that must vanish: |value| <= tol * max(1, scale).
  void zero(const std::string& name, double value, double scale, double tol)
  {
    if (hit(name)) value += bump(scale);
    const double allowed = tol * std::max(1.0, scale);
    r_.checks.push_back({name, std::abs(value), std::abs(value) / std::max(1.0, scale), std::abs(value) <= allowed, tol});
  }

  // Exact zero (no tolerance).
  void exact_zero(const std::string& name, double value)
  {
    if (hit(name)) value += 1.0;
    r_.checks.push_back({name, std::abs(value), 0.0, value == 0.0, 0.0});
  }

private:
  bool hit(const std::string& name) const
  {
    if (perturb_.empty()) return false;
    return name == perturb_ ||
           (name.size() > perturb_.size() && name.compare(name.size() - perturb_.size(), perturb_.size(), perturb_) == 0 &&
            name[name.size() - perturb_.size() - 1] == '.');
  }
  static double bump(double scale) { return 1e-3 * std::max(1.0, scale); }
  void push(const std::string& name, const CompareReport& c, double tol)
  {
    r_.checks.push_back({name, c.max_abs_err, c.max_rel_err, c.pass, tol});
  }

  ValidationReport& r_;
  std::string perturb_;
};

inline double max_abs(const MatX& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

inline bool contacts_full_rank(const KinematicTree& t, const VecX& q, const ContactSpec& spec)
{
  try {
    const VecX z = VecX::Zero(t.nv());
    KktFactor(crba(t, q), point_kinematics(t, q, z, z, spec, 0).J);
    return true;
  } catch (const std::domain_error&) {
    return false;
  }
}

} // namespace detail

inline ValidationReport run_validation(const KinematicTree& t, const RobotState& s, const ContactSpec& spec,
                                       const ValidationOptions& o)
{
  ValidationReport rep;
  detail::Checker ck(rep, o.perturb);
  const int nv = t.nv();
  const double h = o.fd.h_fo;
  const VecX& q = s.q;
  const VecX& qd = s.qd;
  const VecX& qdd = s.qdd;
  const Vec3& g = t.gravity;
  const std::vector<int> dirs = sample_directions(nv, o.max_directions, o.seed);
  rep.directions = dirs;

  // Checks that go through M^-1 lose about cond(M) * eps to roundoff in each
  // function value; scale their central-difference step by the cube root of
  // the excess conditioning.
  {
    const Eigen::SelfAdjointEigenSolver<MatX> es(crba(t, q), Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    rep.mass_condition = lo > 0 ? hi / lo : std::numeric_limits<double>::infinity();
  }
  const double hs = h * std::max(1.0, std::cbrt(rep.mass_condition / 100.0));
  rep.h_solve = hs;

  auto along_q = [&](auto fn) { return [&, fn](const VecX& dv) { return fn(integrate(t, q, dv)); }; };
  auto along_qd = [&](auto fn) { return [&, fn](const VecX& dv) { return fn(VecX(qd + dv)); }; };

  if (o.identities) {
    rep.add(vector_property_suite(o.identity_instances, o.seed));
    rep.add(matrix_property_suite(o.identity_instances, o.seed));
    rep.add(kinematic_identity_suite(t, s, h, o.tol_fo, o.seed));
  }

  // ---- inverse dynamics, first order ----
  const FirstOrderDerivs fo = id_fo(t, s);
  ck.fd("fo.dtau_dq", select_cols(fo.dtau_dq, dirs),
        fd_jacobian(along_q([&](const VecX& qq) { return rnea(t, qq, qd, qdd, g).tau; }), nv, dirs, h), o.tol_fo);
  ck.fd("fo.dtau_dqd", select_cols(fo.dtau_dqd, dirs),
        fd_jacobian(along_qd([&](const VecX& v) { return rnea(t, q, v, qdd, g).tau; }), nv, dirs, h), o.tol_fo);

  // ---- inverse dynamics, second order ----
  {
    const SecondOrderDerivs so = id_so(t, s);
    ck.fd("so.d2tau_dq2", select_pages(so.d2tau_dq2, dirs),
          fd_tensor(along_q([&](const VecX& qq) { return id_fo(t, qq, qd, qdd, g).dtau_dq; }), nv, dirs, h), o.tol_so);
    ck.fd("so.d2tau_dqd2", select_pages(so.d2tau_dqd2, dirs),
          fd_tensor(along_qd([&](const VecX& v) { return id_fo(t, q, v, qdd, g).dtau_dqd; }), nv, dirs, h), o.tol_so);
    ck.fd("so.d2tau_cross", select_pages(so.d2tau_cross, dirs),
          fd_tensor(along_q([&](const VecX& qq) { return id_fo(t, qq, qd, qdd, g).dtau_dqd; }), nv, dirs, h), o.tol_so);
    ck.fd("so.dM_dq", select_pages(so.dM_dq, dirs),
          fd_tensor(along_q([&](const VecX& qq) { return crba(t, qq); }), nv, dirs, h), o.tol_so);

    const VecX qd2 = VecX::Constant(nv, 0.5) - 2.0 * qd;
    const Tensor3 vv2 = id_so(t, q, qd2, qdd, g).d2tau_dqd2;
    ck.zero("so.d2tau_dqd2_velocity_independence", (vv2.flat() - so.d2tau_dqd2.flat()).cwiseAbs().maxCoeff(), 1.0,
            1e-14);

    if (nv <= o.double_fd_max_nv) {
      auto f = [&](const VecX& dx) {
        return rnea(t, integrate(t, q, dx.head(nv)), VecX(qd + dx.tail(nv)), qdd, g).tau;
      };
      const Tensor3 H = fd_hessian(f, 2 * nv, o.fd.h_so);
      Tensor3 Hqq(nv, nv, nv), Hvv(nv, nv, nv), Hvq(nv, nv, nv);
      for (int i = 0; i < nv; ++i)
        for (int a = 0; a < nv; ++a)
          for (int b = 0; b < nv; ++b) {
            Hqq(i, a, b) = H(i, a, b);
            Hvv(i, a, b) = H(i, nv + a, nv + b);
            Hvq(i, a, b) = H(i, nv + a, b);
          }
      const Tensor3 sym = 0.5 * (so.d2tau_dq2 + rot23(so.d2tau_dq2));
      ck.fd("so.double_fd.d2tau_dq2", sym, Hqq, o.tol_double_fd);
      ck.fd("so.double_fd.d2tau_dqd2", so.d2tau_dqd2, Hvv, o.tol_double_fd);
      ck.fd("so.double_fd.d2tau_cross", so.d2tau_cross, Hvq, o.tol_double_fd);
    } else {
      rep.skipped.push_back("so.double_fd (nv above " + std::to_string(o.double_fd_max_nv) + ")");
    }
  }

  // ---- forward dynamics ----
  {
    const VecX tau = rnea(t, s).tau;
    const VecX qdd_fd = forward_dynamics(t, q, qd, tau);
    ck.zero("fd.round_trip", detail::max_abs(rnea(t, q, qd, qdd_fd, g).tau - tau), detail::max_abs(tau), 1e-10);

    const FdFirstOrder ffo = fd_fo(t, q, qd, tau);
    ck.fd("fd.fo.dqdd_dq", select_cols(ffo.dqdd_dq, dirs),
          fd_jacobian(along_q([&](const VecX& qq) { return forward_dynamics(t, qq, qd, tau); }), nv, dirs, hs), o.tol_fo);
    ck.fd("fd.fo.dqdd_dqd", select_cols(ffo.dqdd_dqd, dirs),
          fd_jacobian(along_qd([&](const VecX& v) { return forward_dynamics(t, q, v, tau); }), nv, dirs, hs), o.tol_fo);
    ck.fd("fd.fo.dqdd_dtau", select_cols(ffo.dqdd_dtau, dirs),
          fd_jacobian([&](const VecX& dv) { return forward_dynamics(t, q, qd, VecX(tau + dv)); }, nv, dirs, hs), o.tol_fo);

    const FdSecondOrder fso = fd_so(t, q, qd, tau);
    ck.fd("fd.so.qq", select_pages(fso.qq, dirs),
          fd_tensor(along_q([&](const VecX& qq) { return fd_fo(t, qq, qd, tau).dqdd_dq; }), nv, dirs, hs), o.tol_fo);
    ck.fd("fd.so.qdqd", select_pages(fso.qdqd, dirs),
          fd_tensor(along_qd([&](const VecX& v) { return fd_fo(t, q, v, tau).dqdd_dqd; }), nv, dirs, hs), o.tol_fo);
    ck.fd("fd.so.qd_q", select_pages(fso.qd_q, dirs),
          fd_tensor(along_q([&](const VecX& qq) { return fd_fo(t, qq, qd, tau).dqdd_dqd; }), nv, dirs, hs), o.tol_fo);
    ck.fd("fd.so.tau_q", select_pages(fso.tau_q, dirs),
          fd_tensor(along_q([&](const VecX& qq) { return fd_fo(t, qq, qd, tau).dqdd_dtau; }), nv, dirs, hs), o.tol_fo);

    // Second-order ID/FD relation assembled from independent pieces: ID
    // tensors at qdd = FD(tau), dense dM/dq, and the FD tensors above.
    const SecondOrderDerivs so = id_so(t, q, qd, qdd_fd, g);
    const MatX M = crba(t, q);
    auto resid = [&](const char* name, const Tensor3& R, std::initializer_list<double> scales) {
      ck.zero(name, R.max_abs(), std::max(scales), 1e-8);
    };
    {
      const Tensor3 dMq = tmprod(so.dM_dq, ffo.dqdd_dq);
      const Tensor3 MT = mtprod(M, fso.qq);
      resid("fd.so.relation_qq", so.d2tau_dq2 + dMq + rot23(dMq) + MT,
            {so.d2tau_dq2.max_abs(), dMq.max_abs(), MT.max_abs()});
    }
    {
      const Tensor3 MT = mtprod(M, fso.qdqd);
      resid("fd.so.relation_qdqd", so.d2tau_dqd2 + MT, {so.d2tau_dqd2.max_abs(), MT.max_abs()});
    }
    {
      const Tensor3 dMv = tmprod(so.dM_dq, ffo.dqdd_dqd);
      const Tensor3 MT = mtprod(M, fso.qd_q);
      resid("fd.so.relation_qd_q", so.d2tau_cross + dMv + MT,
            {so.d2tau_cross.max_abs(), dMv.max_abs(), MT.max_abs()});
    }
    {
      const Tensor3 dMt = tmprod(so.dM_dq, ffo.dqdd_dtau);
      const Tensor3 MT = mtprod(M, fso.tau_q);
      resid("fd.so.relation_tau_q", dMt + MT, {dMt.max_abs(), MT.max_abs()});
    }
  }

  if (spec.empty()) {
    rep.skipped.push_back("contact checks (no contacts)");
    return rep;
  }
  check_contacts(t, spec);

  // ---- contact kinematics and constrained inverse dynamics ----
  {
    std::mt19937_64 rng(o.seed * 31 + 7);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    const VecX lambda = VecX::NullaryExpr(contact_rows(spec), [&]() { return u(rng); });

    const PointKinematics pk = point_kinematics(t, q, qd, qdd, spec, 2);
    auto pk_at = [&](const VecX& qq, const VecX& v) { return point_kinematics(t, qq, v, qdd, spec, 1); };
    ck.fd("contact.dJ_dq", select_pages(pk.dJ, dirs),
          fd_tensor(along_q([&](const VecX& qq) { return pk_at(qq, qd).J; }), nv, dirs, h), o.tol_fo);
    ck.fd("contact.dacc_dq", select_cols(pk.dacc_dq, dirs),
          fd_jacobian(along_q([&](const VecX& qq) { return pk_at(qq, qd).acc; }), nv, dirs, h), o.tol_fo);
    ck.fd("contact.dacc_dqd", select_cols(pk.dacc_dqd, dirs),
          fd_jacobian(along_qd([&](const VecX& v) { return pk_at(q, v).acc; }), nv, dirs, h), o.tol_fo);
    ck.fd("contact.d2acc_dq2", select_pages(pk.d2acc_dq2, dirs),
          fd_tensor(along_q([&](const VecX& qq) { return MatX(pk_at(qq, qd).dacc_dq); }), nv, dirs, h), o.tol_fo);
    ck.fd("contact.d2acc_dqd2", select_pages(pk.d2acc_dqd2, dirs),
          fd_tensor(along_qd([&](const VecX& v) { return MatX(pk_at(q, v).dacc_dqd); }), nv, dirs, h), o.tol_fo);
    ck.fd("contact.d2acc_dqd_dq", select_pages(pk.d2acc_dqd_dq, dirs),
          fd_tensor(along_q([&](const VecX& qq) { return MatX(pk_at(qq, qd).dacc_dqd); }), nv, dirs, h), o.tol_fo);

    const FextDerivs dfe = fext_cumulative_fo(t, q, spec, lambda);
    MatX dfe_all(6 * t.N(), nv);
    for (int i = 0; i < t.N(); ++i) dfe_all.middleRows(6 * i, 6) = dfe.blocks[i];
    ck.fd("contact.dfextC_dq", select_cols(dfe_all, dirs),
          fd_jacobian(along_q([&](const VecX& qq) {
                        const KinematicsCache k = forward_pass(t, qq, qd, qdd, g);
                        const std::vector<Force> fe = contact_forces(t, k, spec, lambda);
                        const DynamicsCache d = rnea(t, qq, qd, qdd, g, &fe);
                        VecX y(6 * t.N());
                        for (int i = 0; i < t.N(); ++i) y.segment<6>(6 * i) = d.fextC[i];
                        return y;
                      }),
                      nv, dirs, h),
          o.tol_fo);

    const FirstOrderDerivs foc = id_fo_constrained(t, s, spec, lambda);
    ck.fd("fo_c.dtau_dq", select_cols(foc.dtau_dq, dirs),
          fd_jacobian(along_q([&](const VecX& qq) { return rnea_constrained(t, qq, qd, qdd, g, spec, lambda); }), nv,
                      dirs, h),
          o.tol_fo);
    ck.fd("fo_c.dtau_dqd", select_cols(foc.dtau_dqd, dirs),
          fd_jacobian(along_qd([&](const VecX& v) { return rnea_constrained(t, q, v, qdd, g, spec, lambda); }), nv,
                      dirs, h),
          o.tol_fo);
    const SecondOrderDerivs soc = id_so_constrained(t, s, spec, lambda);
    ck.fd("so_c.d2tau_dq2", select_pages(soc.d2tau_dq2, dirs),
          fd_tensor(along_q([&](const VecX& qq) {
                      return id_fo_constrained(t, qq, qd, qdd, g, spec, lambda).dtau_dq;
                    }),
                    nv, dirs, h),
          o.tol_so);
  }

  if (!detail::contacts_full_rank(t, q, spec)) {
    rep.skipped.push_back("kkt and impact checks (rank-deficient contact Jacobian)");
    return rep;
  }

  // ---- KKT ----
  {
    const VecX tau = rnea(t, s).tau;
    const KktFirstOrder kf = kkt_fo(t, q, qd, tau, spec);
    const PointKinematics pk = point_kinematics(t, q, qd, kf.qdd, spec, 0);
    ck.zero("kkt.constraint_residual", detail::max_abs(pk.acc), 1.0, 1e-9);

    auto sol_q = [&](const VecX& qq) {
      const KktSolution r = kkt_solve(t, qq, qd, tau, spec);
      VecX y(r.qdd.size() + r.lambda.size());
      y << r.qdd, r.lambda;
      return y;
    };
    auto stacked = [&](const MatX& a, const MatX& b) {
      MatX m(a.rows() + b.rows(), a.cols());
      m << a, b;
      return m;
    };
    ck.fd("kkt.fo.d_dq", select_cols(stacked(kf.dqdd_dq, kf.dlam_dq), dirs), fd_jacobian(along_q(sol_q), nv, dirs, hs),
          o.tol_fo);
    ck.fd("kkt.fo.d_dqd", select_cols(stacked(kf.dqdd_dqd, kf.dlam_dqd), dirs),
          fd_jacobian(along_qd([&](const VecX& v) {
                        const KktSolution r = kkt_solve(t, q, v, tau, spec);
                        VecX y(r.qdd.size() + r.lambda.size());
                        y << r.qdd, r.lambda;
                        return y;
                      }),
                      nv, dirs, hs),
          o.tol_fo);
    ck.fd("kkt.fo.d_dtau", select_cols(stacked(kf.dqdd_dtau, kf.dlam_dtau), dirs),
          fd_jacobian([&](const VecX& dv) {
                        const KktSolution r = kkt_solve(t, q, qd, VecX(tau + dv), spec);
                        VecX y(r.qdd.size() + r.lambda.size());
                        y << r.qdd, r.lambda;
                        return y;
                      },
                      nv, dirs, hs),
          o.tol_fo);

    const KktSecondOrder ks = kkt_so(t, q, qd, tau, spec);
    auto kfo_q = [&](auto pick) {
      return fd_tensor(along_q([&, pick](const VecX& qq) { return pick(kkt_fo(t, qq, qd, tau, spec)); }), nv, dirs, hs);
    };
    ck.fd("kkt.so.qdd_qq", select_pages(ks.qdd_qq, dirs), kfo_q([](const KktFirstOrder& f) { return f.dqdd_dq; }),
          o.tol_fo);
    ck.fd("kkt.so.lambda_qq", select_pages(ks.lam_qq, dirs), kfo_q([](const KktFirstOrder& f) { return f.dlam_dq; }),
          o.tol_fo);
    ck.fd("kkt.so.qdd_qd_q", select_pages(ks.qdd_qd_q, dirs),
          kfo_q([](const KktFirstOrder& f) { return f.dqdd_dqd; }), o.tol_fo);
    ck.fd("kkt.so.lambda_qd_q", select_pages(ks.lam_qd_q, dirs),
          kfo_q([](const KktFirstOrder& f) { return f.dlam_dqd; }), o.tol_fo);
    ck.fd("kkt.so.qdd_tau_q", select_pages(ks.qdd_tau_q, dirs),
          kfo_q([](const KktFirstOrder& f) { return f.dqdd_dtau; }), o.tol_fo);
    ck.fd("kkt.so.lambda_tau_q", select_pages(ks.lam_tau_q, dirs),
          kfo_q([](const KktFirstOrder& f) { return f.dlam_dtau; }), o.tol_fo);
    auto kfo_v = [&](auto pick) {
      return fd_tensor(along_qd([&, pick](const VecX& v) { return pick(kkt_fo(t, q, v, tau, spec)); }), nv, dirs, hs);
    };
    ck.fd("kkt.so.qdd_qdqd", select_pages(ks.qdd_qdqd, dirs),
          kfo_v([](const KktFirstOrder& f) { return f.dqdd_dqd; }), o.tol_fo);
    ck.fd("kkt.so.lambda_qdqd", select_pages(ks.lam_qdqd, dirs),
          kfo_v([](const KktFirstOrder& f) { return f.dlam_dqd; }), o.tol_fo);

    // The tau-tau block: the tau-derivatives of kkt_fo do not move with tau.
    const Tensor3 tt = fd_tensor(
      [&](const VecX& dv) {
        const KktFirstOrder f = kkt_fo(t, q, qd, VecX(tau + dv), spec);
        MatX m(f.dqdd_dtau.rows() + f.dlam_dtau.rows(), nv);
        m << f.dqdd_dtau, f.dlam_dtau;
        return m;
      },
      nv, dirs, hs);
    ck.exact_zero("kkt.so.tau_tau_zero", tt.max_abs());
  }

  // ---- impact ----
  {
    const VecX& qdm = qd;
    const ImpactFirstOrder imf = impact_fo(t, q, qdm, spec);
    const MatX M = crba(t, q);
    const MatX J = point_kinematics(t, q, qdm, qdd, spec, 0).J;
    ck.zero("impact.velocity_constraint", detail::max_abs(J * imf.qd_plus), 1.0, 1e-9);
    const VecX mom = M * (imf.qd_plus - qdm);
    ck.zero("impact.momentum", detail::max_abs(mom - J.transpose() * imf.lambda_hat), detail::max_abs(mom), 1e-9);
    const double ke_minus = 0.5 * qdm.dot(M * qdm), ke_plus = 0.5 * imf.qd_plus.dot(M * imf.qd_plus);
    ck.zero("impact.energy_non_increasing", std::max(0.0, ke_plus - ke_minus), ke_minus, 1e-10);

    auto isol = [&](const VecX& qq, const VecX& v) {
      const ImpactResult r = impact_solve(t, qq, v, spec);
      VecX y(r.qd_plus.size() + r.lambda_hat.size());
      y << r.qd_plus, r.lambda_hat;
      return y;
    };
    auto stacked = [&](const MatX& a, const MatX& b) {
      MatX m(a.rows() + b.rows(), a.cols());
      m << a, b;
      return m;
    };
    ck.fd("impact.fo.d_dq", select_cols(stacked(imf.dqdp_dq, imf.dlam_dq), dirs),
          fd_jacobian(along_q([&](const VecX& qq) { return isol(qq, qdm); }), nv, dirs, hs), o.tol_fo);
    ck.fd("impact.fo.d_dqd_minus", select_cols(stacked(imf.dqdp_dqdm, imf.dlam_dqdm), dirs),
          fd_jacobian(along_qd([&](const VecX& v) { return isol(q, v); }), nv, dirs, hs), o.tol_fo);

    const ImpactSecondOrder iso = impact_so(t, q, qdm, spec);
    auto ifo_q = [&](auto pick) {
      return fd_tensor(along_q([&, pick](const VecX& qq) { return pick(impact_fo(t, qq, qdm, spec)); }), nv, dirs, hs);
    };
    ck.fd("impact.so.qd_plus_qq", select_pages(iso.qdp_qq, dirs),
          ifo_q([](const ImpactFirstOrder& f) { return f.dqdp_dq; }), o.tol_fo);
    ck.fd("impact.so.lambda_qq", select_pages(iso.lam_qq, dirs),
          ifo_q([](const ImpactFirstOrder& f) { return f.dlam_dq; }), o.tol_fo);
    ck.fd("impact.so.qd_plus_qdm_q", select_pages(iso.qdp_qdm_q, dirs),
          ifo_q([](const ImpactFirstOrder& f) { return f.dqdp_dqdm; }), o.tol_fo);
    ck.fd("impact.so.lambda_qdm_q", select_pages(iso.lam_qdm_q, dirs),
          ifo_q([](const ImpactFirstOrder& f) { return f.dlam_dqdm; }), o.tol_fo);
    const Tensor3 vv = fd_tensor(along_qd([&](const VecX& v) { return impact_fo(t, q, v, spec).dqdp_dqdm; }), nv, dirs, hs);
    ck.exact_zero("impact.so.qdm_qdm_zero", vv.max_abs());
  }
  return rep;
}

// Closed-form checks for a planar pendulum: one revolute joint about z, a
// point mass on the +x axis of the link, gravity along -y. Returns an empty
// list for other models.
inline std::vector<CheckResult> pendulum_checks(const KinematicTree& t, double tol = 1e-10)
{
  if (t.N() != 1 || t.joint(0).type != JointType::Revolute) return {};
  const BodyParams& b = t.body(0);
  const Vec3 axis = t.joint(0).axis;
  const Transform& X = t.placement(0);
  if ((axis - Vec3::UnitZ()).norm() > 1e-12 || b.I6.norm() != 0.0 || b.com.y() != 0.0 || b.com.z() != 0.0 ||
      b.com.x() <= 0.0 || t.gravity.x() != 0.0 || t.gravity.z() != 0.0 || !(t.gravity.y() < 0.0) ||
      !X.E.isIdentity(0.0))
    return {};
  const double m = b.mass, l = b.com.x(), gmag = -t.gravity.y();
  const VecX z = VecX::Zero(1);
  auto at = [](double v) { return VecX::Constant(1, v); };
  std::vector<CheckResult> out;
  auto rec = [&](const std::string& name, double got, double want) {
    const double err = std::abs(got - want);
    out.push_back({name, err, err / std::max(std::abs(want), 1e-8), err <= tol, tol});
  };
  rec("pendulum.tau(q=0)", rnea(t, at(0.0), z, z, t.gravity).tau[0], m * gmag * l);
  rec("pendulum.dtau_dq(q=pi/2)", id_fo(t, at(M_PI / 2), z, z, t.gravity).dtau_dq(0, 0), -m * gmag * l);
  rec("pendulum.d2tau_dq2(q=0)", id_so(t, at(0.0), z, z, t.gravity).d2tau_dq2(0, 0, 0), -m * gmag * l);
  rec("pendulum.M(q=0.3)", crba(t, at(0.3))(0, 0), m * l * l);
  rec("pendulum.dM_dq(q=0.3)", id_so(t, at(0.3), z, z, t.gravity).dM_dq(0, 0, 0), 0.0);
  return out;
}

} // namespace rbdd
