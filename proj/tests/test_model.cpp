// Kinematic trees, model files, forward kinematics, RNEA and CRBA.

#include <chrono>
#include <cmath>

#include "test_util.hpp"

using namespace rbdd;
using namespace rbdd::testing;

namespace {

void expect_tree_invariants(const KinematicTree& t)
{
  int expected_off = 0;
  for (int i = 0; i < t.N(); ++i) {
    EXPECT_LT(t.parent(i), i);
    EXPECT_EQ(t.dof_offset(i), expected_off);
    EXPECT_GT(t.dofs(i), 0);
    expected_off += t.dofs(i);
    for (int j = 0; j < t.N(); ++j) {
      const auto& anc = t.ancestors(i);
      const auto& sub = t.subtree(j);
      const bool j_anc_i = std::find(anc.begin(), anc.end(), j) != anc.end();
      const bool i_sub_j = std::find(sub.begin(), sub.end(), i) != sub.end();
      EXPECT_EQ(j_anc_i, i_sub_j);
      EXPECT_EQ(j_anc_i, t.is_ancestor(j, i));
    }
    const JointKinematics jk = joint_kinematics(t.joint(i), neutral_configuration(t).data() + t.q_offset(i));
    if (t.dofs(i) == 1) EXPECT_NEAR(jk.S.norm(), 1.0, 1e-12);
  }
  EXPECT_EQ(expected_off, t.nv());
}

const char* kTwoLink = R"({
  "name": "two",
  "gravity": [0, 0, -9.81],
  "joints": [
    {"id": 1, "parent": 0, "type": "revolute", "axis": [0, 0, 1],
     "inertia": {"mass": 1.0, "com": [0.5, 0, 0], "I": [0.01, 0.01, 0.01, 0, 0, 0]}},
    {"id": 2, "parent": 1, "type": "revolute", "axis": [0, 0, 1], "placement": {"xyz": [1, 0, 0]},
     "inertia": {"mass": 1.0, "com": [0.5, 0, 0], "I": [0.01, 0.01, 0.01, 0, 0, 0]}}
  ]
})";

std::string expect_model_error(const std::string& text)
{
  try {
    (void)parse_model(text);
  } catch (const ModelError& e) {
    return e.what();
  }
  ADD_FAILURE() << "expected a model error";
  return {};
}

// Kinetic and potential energy from the cache, as an independent route to tau.
double kinetic(const KinematicTree& t, const VecX& q, const VecX& qd)
{
  const DynamicsCache d = rnea(t, q, qd, VecX::Zero(t.nv()), Vec3::Zero());
  double T = 0;
  for (int i = 0; i < t.N(); ++i) T += 0.5 * d.kin.v[i].dot(d.I[i] * d.kin.v[i]);
  return T;
}

double potential(const KinematicTree& t, const VecX& q)
{
  const VecX z = VecX::Zero(t.nv());
  const KinematicsCache k = forward_pass(t, q, z, z, Vec3::Zero());
  double V = 0;
  for (int i = 0; i < t.N(); ++i) V -= t.body(i).mass * t.gravity.dot(k.world_point(i, t.body(i).com));
  return V;
}

VecX momentum(const KinematicTree& t, const VecX& q, const VecX& qd)
{
  // T is quadratic in qd, so a unit central step is exact.
  return fd_vec(qd, [&](const VecX& x) { return VecX::Constant(1, kinetic(t, q, x)); }, 1.0).row(0).transpose();
}

VecX lagrangian_tau(const KinematicTree& t, const VecX& q, const VecX& qd, const VecX& qdd,
                    const std::vector<Force>& fext)
{
  const double h = 1e-5;
  const VecX dp = (momentum(t, q + h * qd, qd + h * qdd) - momentum(t, q - h * qd, qd - h * qdd)) / (2 * h);
  const VecX dT = fd_vec(q, [&](const VecX& x) { return VecX::Constant(1, kinetic(t, x, qd)); }).row(0).transpose();
  const VecX dV = fd_vec(q, [&](const VecX& x) { return VecX::Constant(1, potential(t, x)); }).row(0).transpose();
  VecX tau = dp - dT + dV;
  // Virtual work of the external wrenches.
  for (int k = 0; k < t.nv(); ++k) {
    const DynamicsCache d = rnea(t, q, VecX(VecX::Unit(t.nv(), k)), VecX::Zero(t.nv()), Vec3::Zero());
    for (int i = 0; i < t.N(); ++i) tau[k] -= fext[i].dot(d.kin.v[i]);
  }
  return tau;
}

} // namespace

// ---- tree ----

TEST(KinematicTree, MinimalPendulum)
{
  const KinematicTree t = pendulum();
  EXPECT_EQ(t.N(), 1);
  EXPECT_EQ(t.nv(), 1);
  EXPECT_EQ(t.nq(), 1);
  EXPECT_EQ(t.contacts.size(), 1u);
  expect_tree_invariants(t);
}

TEST(KinematicTree, ChainTopology)
{
  const KinematicTree t = parse_model(kTwoLink);
  EXPECT_EQ(t.ancestors(1), (std::vector<int>{0, 1}));
  EXPECT_EQ(t.subtree(0), (std::vector<int>{0, 1}));
  EXPECT_EQ(t.subtree(1), (std::vector<int>{1}));
}

TEST(KinematicTree, RejectsForwardParent)
{
  KinematicTree t;
  EXPECT_THROW(t.add_joint(0, JointModel{}, Vec3::Zero(), Vec3::Zero(), BodyParams{}), std::invalid_argument);
}

TEST(KinematicTree, JointSubspaces)
{
  JointModel rz;
  rz.type = JointType::Revolute;
  rz.axis = Vec3::UnitZ();
  const double q0 = 0.0;
  const JointKinematics a = joint_kinematics(rz, &q0);
  EXPECT_EQ(a.XJ.E, Mat3::Identity());
  EXPECT_EQ(a.XJ.r, Vec3::Zero());
  EXPECT_EQ(Vec6(a.S), spatial(Vec3::UnitZ(), Vec3::Zero()));

  const double q1 = M_PI / 2;
  const JointKinematics b = joint_kinematics(rz, &q1);
  // E maps parent coordinates to child coordinates, so its transpose is the child frame rotation.
  const Mat3 Rz = Eigen::AngleAxisd(M_PI / 2, Vec3::UnitZ()).toRotationMatrix();
  EXPECT_LE((b.XJ.E.transpose() - Rz).cwiseAbs().maxCoeff(), 1e-15);

  JointModel fr;
  fr.type = JointType::Free;
  const double qf[7] = {1, 0, 0, 0, 0.1, 0.2, 0.3};
  EXPECT_EQ(joint_kinematics(fr, qf).S, MotionMat(MotionMat::Identity(6, 6)));

  JointModel pr;
  pr.type = JointType::Prismatic;
  pr.axis = Vec3::UnitY();
  const double qp = 0.7;
  const JointKinematics c = joint_kinematics(pr, &qp);
  EXPECT_EQ(Vec6(c.S), spatial(Vec3::Zero(), Vec3::UnitY()));
  EXPECT_LE((c.XJ.r - Vec3(0, 0.7, 0)).norm(), 1e-15);
}

TEST(RandomModel, ZeroBranchingIsAChain)
{
  const KinematicTree t = tree(5, 42, 0.0);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(t.parent(i), i - 1);
  EXPECT_EQ(t.depth(), 5);
}

TEST(RandomModel, Deterministic)
{
  EXPECT_EQ(write_model(tree(12, 3, 0.4)), write_model(tree(12, 3, 0.4)));
  EXPECT_NE(write_model(tree(12, 3, 0.4)), write_model(tree(12, 4, 0.4)));
}

TEST(RandomModel, GeneratorContract)
{
  const KinematicTree t = tree(30, 7, 0.3);
  expect_tree_invariants(t);
  bool kinds[4] = {false, false, false, false};
  for (int i = 0; i < t.N(); ++i) {
    kinds[static_cast<int>(t.joint(i).type)] = true;
    EXPECT_GE(t.body(i).mass, 0.1);
    EXPECT_LE(t.body(i).mass, 2.0);
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<Mat3>(t.body(i).rot_inertia()).eigenvalues().minCoeff(), 0.0);
  }
  for (bool k : kinds) EXPECT_TRUE(k);
}

TEST(RandomModel, RejectsBadArguments)
{
  RandomModelOptions o;
  o.N = 0;
  EXPECT_THROW((void)random_model(o), std::invalid_argument);
  o.N = 3;
  o.branching = 1.5;
  EXPECT_THROW((void)random_model(o), std::invalid_argument);
  o.branching = 0.2;
  o.kinds = "RX";
  EXPECT_THROW((void)random_model(o), std::invalid_argument);
}

TEST(Configuration, RetractionKeepsQuaternionsUnit)
{
  const KinematicTree t = tree(8, 11, 0.3, "SF");
  const RobotState s = random_state(t, 2);
  const VecX q = integrate(t, s.q, VecX::Constant(t.nv(), 0.7));
  for (int i = 0; i < t.N(); ++i) EXPECT_NEAR(q.segment<4>(t.q_offset(i)).norm(), 1.0, 1e-14);
  // A zero step only renormalizes.
  EXPECT_LE((integrate(t, s.q, VecX::Zero(t.nv())) - s.q).lpNorm<Eigen::Infinity>(), 1e-15);
}

// ---- model files ----

TEST(ModelIo, RoundTripIsByteIdentical)
{
  for (unsigned long long seed : {1ULL, 2ULL, 9ULL}) {
    const std::string first = write_model(tree(15, seed, 0.5));
    EXPECT_EQ(write_model(parse_model(first)), first);
  }
  const std::string one = write_model(tree(1, 3));
  EXPECT_EQ(parse_model(one).N(), 1);
}

TEST(ModelIo, ContactsRoundTrip)
{
  const KinematicTree t = load_model(model_path("double_pendulum.json"));
  ASSERT_EQ(t.contacts.size(), 1u);
  EXPECT_EQ(t.contacts[0].body, 1);
  EXPECT_EQ(parse_model(write_model(t)).contacts[0].point, Vec3(1, 0, 0));
}

TEST(ModelIo, SyntaxErrorReportsLine)
{
  const std::string msg = expect_model_error("{\n  \"joints\": [\n    {\"id\": 1,,}\n  ]\n}\n");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(ModelIo, ForwardParent)
{
  std::string text = R"({"joints": [
    {"id": 1, "parent": 0, "type": "prismatic", "axis": [1, 0, 0], "inertia": {"mass": 1}},
    {"id": 2, "parent": 1, "type": "prismatic", "axis": [1, 0, 0], "inertia": {"mass": 1}},
    {"id": 3, "parent": 5, "type": "prismatic", "axis": [1, 0, 0], "inertia": {"mass": 1}}]})";
  const std::string msg = expect_model_error(text);
  EXPECT_NE(msg.find("joint 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("forward parent"), std::string::npos) << msg;
}

TEST(ModelIo, RejectsInvalidBodiesAndJoints)
{
  auto one = [](const std::string& joint) { return "{\"joints\": [" + joint + "]}"; };
  EXPECT_NE(expect_model_error(one(R"({"id": 1, "parent": 0, "type": "revolute", "axis": [0, 0, 2],
      "inertia": {"mass": 1}})")).find("unit"), std::string::npos);
  EXPECT_NE(expect_model_error(one(R"({"id": 1, "parent": 0, "type": "revolute", "axis": [0, 0, 1],
      "inertia": {"mass": 1, "I": [1, 1, 1, 5, 0, 0]}})")).find("semidefinite"), std::string::npos);
  EXPECT_NE(expect_model_error(one(R"({"id": 1, "parent": 0, "type": "revolute", "axis": [0, 0, 1],
      "inertia": {"mass": 0}})")).find("mass"), std::string::npos);
  EXPECT_NE(expect_model_error(one(R"({"id": 1, "parent": 0, "type": "hinge", "axis": [0, 0, 1],
      "inertia": {"mass": 1}})")).find("unknown joint type"), std::string::npos);
  EXPECT_NE(expect_model_error(one(R"({"id": 2, "parent": 0, "type": "revolute", "axis": [0, 0, 1],
      "inertia": {"mass": 1}})")).find("ids"), std::string::npos);
  EXPECT_NE(expect_model_error(R"({"joints": [{"id": 1, "parent": 0, "type": "free", "inertia": {"mass": 1}}],
      "contacts": [{"body": 2, "point": [0, 0, 0]}]})").find("contact 1"), std::string::npos);
  EXPECT_THROW((void)load_model(model_path("does_not_exist.json")), ModelError);
}

TEST(ModelIo, NearlyUnitAxisIsNormalized)
{
  const KinematicTree t = parse_model(R"({"joints": [{"id": 1, "parent": 0, "type": "revolute",
      "axis": [0, 0, 1.0000005], "inertia": {"mass": 1}}]})");
  EXPECT_NEAR(t.joint(0).axis.norm(), 1.0, 1e-15);
}

TEST(ModelIo, StateFiles)
{
  const KinematicTree t = tree(4, 5, 0.0, "SF");
  const RobotState s = random_state(t, 3);
  const RobotState back = parse_state(t, write_state(s));
  EXPECT_LE((back.q - s.q).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(back.qd, s.qd);
  EXPECT_EQ(back.qdd, s.qdd);

  const KinematicTree p = pendulum();
  const RobotState z = parse_state(p, R"({"q": [0.5]})");
  EXPECT_EQ(z.qd, VecX::Zero(1));
  EXPECT_THROW((void)parse_state(p, R"({"q": [0.5, 1.0]})"), ModelError);
  EXPECT_THROW((void)parse_state(p, R"({"qd": [0.5]})"), ModelError);
}

// ---- forward kinematics ----

TEST(Kinematics, ChainAtRestCarriesGravityOnly)
{
  const KinematicTree t = tree(6, 1, 0.0);
  const RobotState s0 = random_state(t, 1);
  const VecX z = VecX::Zero(t.nv());
  const KinematicsCache k = forward_pass(t, s0.q, z, z, t.gravity);
  for (int i = 0; i < t.N(); ++i) {
    EXPECT_EQ(k.v[i], Vec6::Zero());
    EXPECT_LE((k.a[i] - k.a0).cwiseAbs().maxCoeff(), 1e-13);
  }
  EXPECT_EQ(k.a0, spatial(Vec3::Zero(), -t.gravity));
}

TEST(Kinematics, SpinningPendulum)
{
  const KinematicTree t = pendulum();
  const VecX q = VecX::Zero(1), qd = VecX::Constant(1, 2.5);
  const KinematicsCache k = forward_pass(t, q, qd, VecX::Zero(1), t.gravity);
  EXPECT_EQ(k.v[0], spatial(Vec3(0, 0, 2.5), Vec3::Zero()));
}

TEST(Kinematics, RecursionsAgreeWithNaiveRecomputation)
{
  const KinematicTree t = tree(6, 17, 0.5);
  const RobotState s = random_state(t, 4);
  const KinematicsCache k = forward_pass(t, s);
  for (int i = 0; i < t.N(); ++i) {
    // World placement from the chain of local transforms.
    Transform X;
    for (int a : t.ancestors(i))
      X = joint_kinematics(t.joint(a), s.q.data() + t.q_offset(a)).XJ * t.placement(a) * X;
    EXPECT_LE((X.E - k.X0[i].E).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_LE((X.r - k.X0[i].r).cwiseAbs().maxCoeff(), 1e-13);

    const MotionMat S = k.X0[i].inv_apply_motion(
      joint_kinematics(t.joint(i), s.q.data() + t.q_offset(i)).S);
    EXPECT_LE((S - k.S[i]).cwiseAbs().maxCoeff(), 1e-13);

    const auto qd_i = s.qd.segment(t.dof_offset(i), t.dofs(i));
    const auto qdd_i = s.qdd.segment(t.dof_offset(i), t.dofs(i));
    EXPECT_LE((k.v[i] - k.v_parent(t, i) - S * qd_i).cwiseAbs().maxCoeff(), 1e-13);
    const Vec6 a = k.a_parent(t, i) + S * qdd_i + crm(k.v[i]) * (S * qd_i);
    EXPECT_LE((k.a[i] - a).cwiseAbs().maxCoeff(), 1e-13);
  }
}

TEST(Kinematics, JointRatesVanishAtRest)
{
  const KinematicTree t = tree(8, 2, 0.3);
  RobotState s = random_state(t, 5);
  s.qd.setZero();
  const KinematicsCache k = forward_pass(t, s.q, s.qd, s.qdd, Vec3::Zero());
  for (int i = 0; i < t.N(); ++i) {
    EXPECT_EQ(k.Phid[i].cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(k.Psid[i].cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Kinematics, DirectionalDerivativeIdentities)
{
  for (unsigned long long seed : {1ULL, 2ULL, 3ULL}) {
    const KinematicTree t = tree(7, seed, 0.4);
    EXPECT_TRUE(all_pass(kinematic_identity_suite(t, random_state(t, seed))));
  }
}

// ---- RNEA and CRBA ----

TEST(Rnea, PendulumClosedForm)
{
  const KinematicTree t = pendulum();
  const VecX z = VecX::Zero(1);
  for (double q0 : {0.0, 0.3, 1.2, -2.0}) {
    const double qdd = 0.7;
    const double tau = rnea(t, VecX::Constant(1, q0), z, VecX::Constant(1, qdd), t.gravity).tau[0];
    EXPECT_NEAR(tau, qdd + 9.81 * std::cos(q0), 1e-12);
  }
  EXPECT_EQ(rnea(t, z, z, z, t.gravity).tau[0], 9.81);
}

TEST(Rnea, NoMotionNoGravityNoTorque)
{
  const KinematicTree t = tree(9, 8, 0.3);
  const RobotState s = random_state(t, 1);
  const VecX z = VecX::Zero(t.nv());
  EXPECT_EQ(rnea(t, s.q, z, z, Vec3::Zero()).tau.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Rnea, LagrangianOracle)
{
  for (unsigned long long seed : {3ULL, 4ULL, 5ULL}) {
    const KinematicTree t = tree(8, seed, 0.4, "RP");
    const RobotState s = random_state(t, seed);
    std::mt19937_64 g(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Force> fext(t.N());
    for (Force& f : fext) f = Vec6::NullaryExpr([&]() { return u(g); });
    const VecX tau = rnea(t, s.q, s.qd, s.qdd, t.gravity, &fext).tau;
    const VecX ref = lagrangian_tau(t, s.q, s.qd, s.qdd, fext);
    EXPECT_TRUE(near(tau, ref, 1e-5)) << "seed " << seed;
  }
}

TEST(Rnea, TorqueFromCompositesInCache)
{
  const KinematicTree t = tree(10, 6, 0.5);
  const RobotState s = random_state(t, 2);
  std::vector<Force> fext(t.N(), spatial(Vec3(0.1, 0.2, 0.3), Vec3(-0.4, 0.5, 0.6)));
  const DynamicsCache d = rnea(t, s, &fext);
  for (int i = 0; i < t.N(); ++i) {
    const VecX ti = d.kin.S[i].transpose() * (d.fC[i] - d.fextC[i]);
    EXPECT_LE((ti - d.tau.segment(t.dof_offset(i), t.dofs(i))).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Composites, SubtreeSums)
{
  const KinematicTree t = tree(12, 9, 0.5);
  const DynamicsCache d = rnea(t, random_state(t, 3));
  for (int i = 0; i < t.N(); ++i) {
    Mat6 IC = Mat6::Zero(), BC = Mat6::Zero();
    for (int k : t.subtree(i)) {
      IC += d.I[k];
      BC += d.B[k];
    }
    EXPECT_LE((IC - d.IC[i]).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((BC - d.BC[i]).cwiseAbs().maxCoeff(), 1e-12);
    if (t.subtree(i).size() == 1) EXPECT_EQ(d.IC[i], d.I[i]);
  }
  const KinematicTree c = tree(3, 1, 0.0);
  const DynamicsCache dc = rnea(c, random_state(c, 1));
  EXPECT_LE((dc.IC[0] - (dc.I[0] + dc.I[1] + dc.I[2])).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Composites, BiasMatrixVanishesAtRest)
{
  const KinematicTree t = tree(6, 4, 0.3);
  const RobotState s = random_state(t, 2);
  const DynamicsCache d = rnea(t, s.q, VecX::Zero(t.nv()), s.qdd, t.gravity);
  for (const Mat6& B : d.B) EXPECT_EQ(B, Mat6::Zero());
}

TEST(Crba, PendulumUnitInertia)
{
  EXPECT_EQ(crba(pendulum(), VecX::Constant(1, 0.3))(0, 0), 1.0);
}

TEST(Crba, ZeroVelocityInverseDynamics)
{
  for (unsigned long long seed : {1ULL, 2ULL}) {
    const KinematicTree t = tree(10, seed, 0.4);
    const RobotState s = random_state(t, seed);
    const MatX M = crba(t, s.q);
    EXPECT_LE((M - M.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    const VecX ref = rnea(t, s.q, VecX::Zero(t.nv()), s.qdd, Vec3::Zero()).tau;
    EXPECT_LE((M * s.qdd - ref).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<MatX>(M).eigenvalues().minCoeff(), 0.0);
  }
}

TEST(Crba, CoriolisSkewProperty)
{
  for (unsigned long long seed : {1ULL, 2ULL, 3ULL}) {
    const KinematicTree t = tree(9, seed, 0.4);
    const RobotState s = random_state(t, seed);
    const double h = 1e-5;
    const MatX Mdot = (crba(t, integrate(t, s.q, h * s.qd)) - crba(t, integrate(t, s.q, -h * s.qd))) / (2 * h);
    const VecX c = rnea(t, s.q, s.qd, VecX::Zero(t.nv()), Vec3::Zero()).tau;
    const double lhs = s.qd.dot(Mdot * s.qd), rhs = 2 * s.qd.dot(c);
    EXPECT_NEAR(lhs, rhs, 1e-6 * std::max(1.0, std::abs(rhs)));
  }
}
