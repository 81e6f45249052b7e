#pragma once

// JSON model files and state files.
//
// Model: { "name", "gravity": [3], "joints": [ { "id", "parent", "type",
//   "axis" (1-dof only), "placement": {"xyz", "rpy"},
//   "inertia": {"mass", "com", "I": [Ixx, Iyy, Izz, Ixy, Ixz, Iyz]} } ],
//   "contacts": [ {"body": id, "point": [3]} ] (optional) }
// Ids are 1-based in files; parent 0 is the fixed base.
//
// State: { "q": [...], "qd": [...], "qdd": [...] } with q in the tree's
// configuration layout (quaternions as w, x, y, z).

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "rbdd/model.hpp"

namespace rbdd {

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

using nlohmann::json;

inline int line_of_byte(const std::string& text, size_t byte)
{
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

inline const json& need(const json& j, const char* key, const std::string& where)
{
  if (!j.is_object() || !j.contains(key)) throw ModelError(where + ": missing \"" + key + "\"");
  return j.at(key);
}

inline double num(const json& j, const std::string& where)
{
  if (!j.is_number()) throw ModelError(where + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ModelError(where + ": non-finite value");
  return v;
}

inline VecX numbers(const json& j, int n, const std::string& where)
{
  if (!j.is_array() || (n >= 0 && static_cast<int>(j.size()) != n))
    throw ModelError(where + ": expected an array of " + std::to_string(n) + " numbers");
  VecX v(j.size());
  for (size_t k = 0; k < j.size(); ++k) v[static_cast<Eigen::Index>(k)] = num(j[k], where);
  return v;
}

inline Vec3 vec3(const json& j, const std::string& where) { return numbers(j, 3, where); }

inline json array_of(const Eigen::Ref<const VecX>& v)
{
  json a = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v[k]);
  return a;
}

inline JointType parse_type(const std::string& s, const std::string& where)
{
  if (s == "revolute") return JointType::Revolute;
  if (s == "prismatic") return JointType::Prismatic;
  if (s == "spherical") return JointType::Spherical;
  if (s == "free") return JointType::Free;
  throw ModelError(where + ": unknown joint type \"" + s + "\"");
}

} // namespace detail

inline KinematicTree parse_model(const std::string& text)
{
  using detail::json;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ModelError("syntax error at line " + std::to_string(detail::line_of_byte(text, e.byte)) + ": " +
                     e.what());
  }
  if (!root.is_object()) throw ModelError("model: top level must be an object");

  KinematicTree t;
  if (root.contains("name")) {
    if (!root["name"].is_string()) throw ModelError("model: name must be a string");
    t.name = root["name"].get<std::string>();
  }
  if (root.contains("gravity")) t.gravity = detail::vec3(root["gravity"], "gravity");

  const json& joints = detail::need(root, "joints", "model");
  if (!joints.is_array() || joints.empty()) throw ModelError("model: joints must be a non-empty array");
  for (size_t k = 0; k < joints.size(); ++k) {
    const json& jj = joints[k];
    const int expected = static_cast<int>(k) + 1;
    const std::string where = "joint " + std::to_string(expected);
    const json& idj = detail::need(jj, "id", where);
    if (!idj.is_number_integer() || idj.get<long long>() != expected)
      throw ModelError(where + ": ids must be 1..N in order");
    const json& pj = detail::need(jj, "parent", where);
    if (!pj.is_number_integer()) throw ModelError(where + ": parent must be an integer");
    const long long parent = pj.get<long long>();
    if (parent < 0) throw ModelError(where + ": parent must be >= 0");
    if (parent >= expected)
      throw ModelError(where + ": parent " + std::to_string(parent) + " does not precede the joint (cycle or forward parent)");

    const json& tj = detail::need(jj, "type", where);
    if (!tj.is_string()) throw ModelError(where + ": type must be a string");
    JointModel jm;
    jm.type = detail::parse_type(tj.get<std::string>(), where);
    if (jm.nv() == 1) {
      Vec3 axis = detail::vec3(detail::need(jj, "axis", where), where + " axis");
      const double n = axis.norm();
      if (std::abs(n - 1.0) > 1e-6) throw ModelError(where + ": axis is not unit length");
      // Leave axes that are unit up to rounding untouched so files round-trip.
      jm.axis = std::abs(n - 1.0) > 1e-14 ? Vec3(axis / n) : axis;
    }

    Vec3 xyz = Vec3::Zero(), rpy = Vec3::Zero();
    if (jj.contains("placement")) {
      const json& pl = jj["placement"];
      if (pl.contains("xyz")) xyz = detail::vec3(pl["xyz"], where + " placement.xyz");
      if (pl.contains("rpy")) rpy = detail::vec3(pl["rpy"], where + " placement.rpy");
    }

    const json& in = detail::need(jj, "inertia", where);
    BodyParams b;
    b.mass = detail::num(detail::need(in, "mass", where + " inertia"), where + " mass");
    if (!(b.mass > 0.0)) throw ModelError(where + ": mass must be positive");
    if (in.contains("com")) b.com = detail::vec3(in["com"], where + " com");
    if (in.contains("I")) b.I6 = detail::numbers(in["I"], 6, where + " I");
    const Mat3 Ic = b.rot_inertia();
    const double lmin = Eigen::SelfAdjointEigenSolver<Mat3>(Ic).eigenvalues().minCoeff();
    if (lmin < -1e-12 * std::max(1.0, Ic.cwiseAbs().maxCoeff()))
      throw ModelError(where + ": rotational inertia is not positive semidefinite");

    t.add_joint(static_cast<int>(parent) - 1, jm, xyz, rpy, b);
  }

  if (root.contains("contacts")) {
    const json& cs = root["contacts"];
    if (!cs.is_array()) throw ModelError("model: contacts must be an array");
    for (size_t k = 0; k < cs.size(); ++k) {
      const std::string where = "contact " + std::to_string(k + 1);
      const json& bj = detail::need(cs[k], "body", where);
      if (!bj.is_number_integer() || bj.get<long long>() < 1 || bj.get<long long>() > t.N())
        throw ModelError(where + ": body must be a joint id");
      Contact c;
      c.body = static_cast<int>(bj.get<long long>()) - 1;
      if (cs[k].contains("point")) c.point = detail::vec3(cs[k]["point"], where + " point");
      t.contacts.push_back(c);
    }
  }
  return t;
}

inline KinematicTree load_model(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot open model file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

inline nlohmann::json model_to_json(const KinematicTree& t)
{
  using detail::array_of;
  nlohmann::json root;
  root["name"] = t.name;
  root["gravity"] = array_of(t.gravity);
  nlohmann::json joints = nlohmann::json::array();
  for (int i = 0; i < t.N(); ++i) {
    nlohmann::json j;
    j["id"] = i + 1;
    j["parent"] = t.parent(i) + 1;
    j["type"] = joint_type_name(t.joint(i).type);
    if (t.joint(i).nv() == 1) j["axis"] = array_of(t.joint(i).axis);
    j["placement"] = {{"xyz", array_of(t.placement_xyz(i))}, {"rpy", array_of(t.placement_rpy(i))}};
    const BodyParams& b = t.body(i);
    j["inertia"] = {{"mass", b.mass}, {"com", array_of(b.com)}, {"I", array_of(b.I6)}};
    joints.push_back(std::move(j));
  }
  root["joints"] = std::move(joints);
  if (!t.contacts.empty()) {
    nlohmann::json cs = nlohmann::json::array();
    for (const Contact& c : t.contacts) cs.push_back({{"body", c.body + 1}, {"point", array_of(c.point)}});
    root["contacts"] = std::move(cs);
  }
  return root;
}

inline std::string write_model(const KinematicTree& t) { return model_to_json(t).dump(2) + "\n"; }

inline RobotState parse_state(const KinematicTree& t, const std::string& text)
{
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ModelError("state: syntax error at line " + std::to_string(detail::line_of_byte(text, e.byte)));
  }
  RobotState s;
  s.q = detail::numbers(detail::need(root, "q", "state"), t.nq(), "state q");
  s.qd = root.contains("qd") ? detail::numbers(root["qd"], t.nv(), "state qd") : VecX(VecX::Zero(t.nv()));
  s.qdd = root.contains("qdd") ? detail::numbers(root["qdd"], t.nv(), "state qdd") : VecX(VecX::Zero(t.nv()));
  for (int i = 0; i < t.N(); ++i)
    if (t.joint(i).nq() > t.joint(i).nv()) {
      const double n = s.q.segment<4>(t.q_offset(i)).norm();
      if (std::abs(n - 1.0) > 1e-6) throw ModelError("state q: quaternion of joint " + std::to_string(i + 1) + " is not unit");
      s.q.segment<4>(t.q_offset(i)) /= n;
    }
  return s;
}

inline std::string write_state(const RobotState& s)
{
  nlohmann::json root;
  root["q"] = detail::array_of(s.q);
  root["qd"] = detail::array_of(s.qd);
  root["qdd"] = detail::array_of(s.qdd);
  return root.dump(2) + "\n";
}

} // namespace rbdd
