// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include "rbdd/rbdd.hpp"

using namespace rbdd;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  std::vector<std::string> failures;

  void require(bool ok, const std::string& what)
  {
    if (!ok) {
      pass = false;
      if (failures.size() < 5) failures.push_back(what);
    }
  }
  void take(const CheckResult& c, const std::string& where)
  {
    std::ostringstream os;
    os << where << c.name << " (abs " << c.max_abs_err << ", rel " << c.max_rel_err << ")";
    require(c.pass, os.str());
  }
};

int failed = 0;

void criterion(const std::string& name, const std::function<void(Outcome&)>& body)
{
  Outcome o;
  const auto t0 = Clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.require(false, std::string("exception: ") + e.what());
  }
  std::printf("%s %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.str().c_str(),
              seconds_since(t0));
  for (const std::string& f : o.failures) std::printf("     failed: %s\n", f.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failed;
}

bool starts_with(const std::string& s, const std::string& p) { return s.rfind(p, 0) == 0; }

// The random tree set: 20 trees, N from 3 to 12, all four joint kinds, one
// point contact on the last body.
struct Case {
  KinematicTree t;
  RobotState s;
  ValidationReport report;
};

KinematicTree case_tree(int k)
{
  RandomModelOptions o;
  o.N = 3 + k % 10;
  o.seed = static_cast<unsigned long long>(k + 1);
  o.branching = 0.3;
  KinematicTree t = random_model(o);
  t.contacts.push_back({t.N() - 1, Vec3(0.1, -0.2, 0.15)});
  return t;
}

std::vector<Case>& cases()
{
  static std::vector<Case> cs = [] {
    std::vector<Case> out;
    for (int k = 0; k < 20; ++k) {
      Case c;
      c.t = case_tree(k);
      c.s = random_state(c.t, static_cast<unsigned long long>(k + 1));
      ValidationOptions o;
      o.identities = false;
      o.seed = static_cast<unsigned long long>(k + 1);
      c.report = run_validation(c.t, c.s, c.t.contacts, o);
      out.push_back(std::move(c));
    }
    return out;
  }();
  return cs;
}

// Feeds every check whose name starts with one of the prefixes.
int take_checks(Outcome& o, const std::vector<std::string>& prefixes, int first = 0, int count = 20)
{
  int n = 0;
  for (int k = first; k < first + count; ++k) {
    const Case& c = cases()[static_cast<size_t>(k)];
    for (const CheckResult& r : c.report.checks)
      for (const std::string& p : prefixes)
        if (starts_with(r.name, p)) {
          o.take(r, "tree " + std::to_string(k) + ": ");
          ++n;
          break;
        }
  }
  return n;
}

} // namespace

int main()
{
  criterion("identity suite (P1-P10, M1-M27; 200 instances; <= 1e-11; < 5 s)", [](Outcome& o) {
    const auto t0 = Clock::now();
    std::vector<CheckResult> all = vector_property_suite(200, 1);
    const std::vector<CheckResult> m = matrix_property_suite(200, 1);
    all.insert(all.end(), m.begin(), m.end());
    const double dt = seconds_since(t0);
    double worst = 0;
    for (const CheckResult& c : all) {
      o.take(c, "");
      o.require(c.max_abs_err <= 1e-11, c.name + " above 1e-11");
      worst = std::max(worst, c.max_abs_err);
    }
    o.require(all.size() == 37, "expected 37 named identities");
    o.require(dt < 5.0, "runtime");
    o.detail << all.size() << " identities, worst residual " << worst << ", " << dt << " s";
  });

  criterion("kinematic/dynamic identities J1-J9, K1-K16 (20 trees, N <= 12, rel 1e-6, h = 4e-6, < 30 s)",
            [](Outcome& o) {
              const auto t0 = Clock::now();
              int checks = 0;
              std::map<JointType, int> kinds;
              for (int k = 0; k < 20; ++k) {
                const KinematicTree t = case_tree(k);
                for (int i = 0; i < t.N(); ++i) ++kinds[t.joint(i).type];
                const RobotState s = random_state(t, static_cast<unsigned long long>(k + 1));
                for (const CheckResult& c : kinematic_identity_suite(t, s, 4e-6, 1e-6)) {
                  o.take(c, "tree " + std::to_string(k) + ": ");
                  ++checks;
                }
              }
              const double dt = seconds_since(t0);
              o.require(kinds.size() == 4, "all four joint kinds present");
              o.require(checks == 20 * 25, "25 identities per tree");
              o.require(dt < 30.0, "runtime");
              o.detail << checks << " checks, " << kinds[JointType::Spherical] << " spherical and "
                       << kinds[JointType::Free] << " free joints, " << dt << " s";
            });

  criterion("first-order ID derivatives, free and with contact (20 trees, rel 1e-6)", [](Outcome& o) {
    const int n = take_checks(o, {"fo.", "fo_c."});
    o.require(n == 20 * 4, "four checks per tree");
    o.detail << n << " FD comparisons";
  });

  criterion("second-order ID derivatives (FD of FO rel 1e-7, double FD 5e-4, symmetry, qd-independence)",
            [](Outcome& o) {
              const int n = take_checks(o, {"so.d2tau", "so_c.", "so.double_fd."});
              o.require(n >= 20 * 5, "second-order checks present");
              // Entries between distinct joints are copies.
              long long copies = 0;
              for (int k = 0; k < 20; ++k) {
                const Case& c = cases()[static_cast<size_t>(k)];
                const SecondOrderDerivs d = id_so(c.t, c.s);
                for (int a = 0; a < c.t.nv(); ++a)
                  for (int b = 0; b < c.t.nv(); ++b) {
                    if (c.t.joint_of_dof(a) == c.t.joint_of_dof(b)) continue;
                    for (int r = 0; r < c.t.nv(); ++r) {
                      o.require(d.d2tau_dq2(r, a, b) == d.d2tau_dq2(r, b, a), "d2tau_dq2 copy");
                      o.require(d.d2tau_dqd2(r, a, b) == d.d2tau_dqd2(r, b, a), "d2tau_dqd2 copy");
                      ++copies;
                    }
                  }
              }
              o.detail << n << " checks, " << copies << " copied entries bitwise equal";
            });

  criterion("mass-matrix derivative (FD of crba rel 1e-6, zero-block law exact)", [](Outcome& o) {
    const int n = take_checks(o, {"so.dM_dq"});
    long long zeros = 0;
    for (int k = 0; k < 20; ++k) {
      const Case& c = cases()[static_cast<size_t>(k)];
      const KinematicTree& t = c.t;
      const Tensor3 dM = id_so(t, c.s).dM_dq;
      for (int i = 0; i < t.N(); ++i)
        for (int j : t.ancestors(i))
          for (int kk : t.ancestors(j))
            for (int a = t.dof_offset(j); a < t.dof_offset(j) + t.dofs(j); ++a)
              for (int b = t.dof_offset(i); b < t.dof_offset(i) + t.dofs(i); ++b)
                for (int r = t.dof_offset(kk); r < t.dof_offset(kk) + t.dofs(kk); ++r) {
                  o.require(dM(a, b, r) == 0.0 && dM(b, a, r) == 0.0, "zero block in tree " + std::to_string(k));
                  zeros += 2;
                }
    }
    o.require(n == 20, "one FD check per tree");
    o.detail << n << " FD checks, " << zeros << " literal zeros";
  });

  criterion("second-order ID/FD relation (10 trees, <= 1e-8) and fd_so vs FD of fd_fo (rel 1e-6)", [](Outcome& o) {
    const int rel = take_checks(o, {"fd.so.relation_"}, 0, 10);
    const int fd = take_checks(o, {"fd.so.qq", "fd.so.qdqd", "fd.so.qd_q", "fd.so.tau_q", "fd.fo.", "fd.round_trip"});
    o.require(rel == 10 * 4, "four relation residuals per tree");
    o.detail << rel << " relation residuals, " << fd << " forward-dynamics checks";
  });

  criterion("KKT dynamics (constraint <= 1e-9, kkt_fo/kkt_so rel 1e-6, tau-tau zero)", [](Outcome& o) {
    int trees = 0;
    for (const Case& c : cases())
      for (const CheckResult& r : c.report.checks)
        if (r.name == "kkt.constraint_residual") ++trees;
    const int n = take_checks(o, {"kkt."});
    o.require(trees >= 10, "at least 10 trees with a full-rank contact");
    o.detail << n << " checks on " << trees << " trees with a full-rank contact";
  });

  criterion("impact (velocity constraint, momentum, energy, impact_fo/impact_so rel 1e-6, qd-qd zero)",
            [](Outcome& o) {
              int trees = 0;
              for (const Case& c : cases())
                for (const CheckResult& r : c.report.checks)
                  if (r.name == "impact.velocity_constraint") ++trees;
              const int n = take_checks(o, {"impact."});
              o.require(trees >= 10, "at least 10 trees with a full-rank contact");
              o.detail << n << " checks on " << trees << " trees";
            });

  criterion("pendulum closed form (1e-10)", [](Outcome& o) {
    const KinematicTree t = load_model(std::string(RBDD_MODELS_DIR) + "/pendulum.json");
    const std::vector<CheckResult> r = pendulum_checks(t, 1e-10);
    for (const CheckResult& c : r) o.take(c, "");
    o.require(r.size() == 5, "five closed-form values");
    o.detail << r.size() << " values";
  });

  criterion("visit counts on chains (N = 8, 16, 32, 64) and N = 64 validate < 60 s", [](Outcome& o) {
    for (int N : {8, 16, 32, 64}) {
      RandomModelOptions mo;
      mo.N = N;
      mo.seed = 1;
      const KinematicTree t = random_model(mo);
      const RobotState s = random_state(t, 1);
      VisitCounter fo, so;
      (void)id_fo(t, s, &fo);
      (void)id_so(t, s, &so);
      const long long n = N;
      o.require(fo.pairs == n * (n + 1) / 2, "pairs N=" + std::to_string(N));
      o.require(so.triples == n * (n + 1) * (n + 2) / 6, "triples N=" + std::to_string(N));
      o.detail << "N=" << N << ": " << fo.pairs << "/" << so.triples << "; ";
    }
    // Same configuration as `rbdd_cli validate --gen N=64,seed=1,branch=0`.
    RandomModelOptions mo;
    mo.N = 64;
    mo.seed = 1;
    KinematicTree t = random_model(mo);
    t.contacts.push_back({t.N() - 1, Vec3(0.1, -0.2, 0.15)});
    ValidationOptions vo;
    vo.max_directions = 48;
    const auto t0 = Clock::now();
    const ValidationReport r = run_validation(t, random_state(t, 1), t.contacts, vo);
    const double dt = seconds_since(t0);
    for (const CheckResult& c : r.checks) o.take(c, "N=64: ");
    o.require(dt < 60.0, "N=64 validate runtime");
    o.detail << "N=64 validate " << r.checks.size() << " checks in " << dt << " s";
  });

  std::printf("%s: %d criteria failed\n", failed ? "FAIL" : "PASS", failed);
  return failed ? 1 : 0;
}
