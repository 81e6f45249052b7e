// rbdd_cli: validate, deriv, bench and gen-model commands.
//
// Exit codes: 0 success, 1 failed checks (or a numerical error), 2 usage or
// configuration error.

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rbdd/model_io.hpp"
#include "rbdd/validate.hpp"

using namespace rbdd;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::map<std::string, std::string> parse_kv(const std::string& text, const std::string& what)
{
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(what + ": expected key=value, got \"" + item + "\"");
    kv[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return kv;
}

double to_double(const std::string& s, const std::string& what)
{
  size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || s.empty()) throw ConfigError(what + ": not a number: \"" + s + "\"");
  return v;
}

long long to_int(const std::string& s, const std::string& what)
{
  size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != s.size() || s.empty()) throw ConfigError(what + ": not an integer: \"" + s + "\"");
  return v;
}

RandomModelOptions parse_gen(const std::string& text, bool need_n = true)
{
  RandomModelOptions o;
  o.N = 0;
  for (const auto& [k, v] : parse_kv(text, "--gen")) {
    if (k == "N") o.N = static_cast<int>(to_int(v, "--gen N"));
    else if (k == "seed") o.seed = static_cast<unsigned long long>(to_int(v, "--gen seed"));
    else if (k == "branch") o.branching = to_double(v, "--gen branch");
    else if (k == "kinds") o.kinds = v;
    else throw ConfigError("--gen: unknown key \"" + k + "\"");
  }
  if (need_n && o.N < 1) throw ConfigError("--gen: N must be >= 1");
  if (!(o.branching >= 0.0 && o.branching <= 1.0)) throw ConfigError("--gen: branch must lie in [0, 1]");
  if (o.kinds.empty() || o.kinds.find_first_not_of("RPSF") != std::string::npos)
    throw ConfigError("--gen: kinds must be a non-empty subset of RPSF");
  return o;
}

std::string read_file(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text)
{
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
}

struct Common {
  std::string model_path, gen, state = "seed=1", out, format = "json";
  double tol_fo = 1e-6, tol_so = 1e-7;
  int reps = 1;

  void add_model(CLI::App* c)
  {
    auto* m = c->add_option("--model", model_path, "model file (JSON)");
    auto* g = c->add_option("--gen", gen, "random model: N=..,seed=..,branch=..[,kinds=RPSF]");
    m->excludes(g);
  }
  void add_state(CLI::App* c) { c->add_option("--state", state, "seed=K or file=PATH")->capture_default_str(); }
  void add_output(CLI::App* c)
  {
    c->add_option("--out", out, "output path (default stdout)");
    c->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  }

  KinematicTree tree() const
  {
    if (model_path.empty() == gen.empty()) throw ConfigError("exactly one of --model or --gen is required");
    if (!model_path.empty()) return load_model(model_path);
    KinematicTree t = random_model(parse_gen(gen));
    // Generated models get one point contact on the last body.
    t.contacts.push_back({t.N() - 1, Vec3(0.1, -0.2, 0.15)});
    return t;
  }

  json config() const
  {
    json c;
    if (!model_path.empty()) c["model"] = model_path;
    if (!gen.empty()) c["gen"] = gen;
    c["state"] = state;
    c["tol_fo"] = tol_fo;
    c["tol_so"] = tol_so;
    c["reps"] = reps;
    c["format"] = format;
    return c;
  }
};

struct StateSource {
  std::optional<unsigned long long> seed;
  std::string file;
};

StateSource parse_state_source(const std::string& text)
{
  StateSource s;
  for (const auto& [k, v] : parse_kv(text, "--state")) {
    if (k == "seed") s.seed = static_cast<unsigned long long>(to_int(v, "--state seed"));
    else if (k == "file") s.file = v;
    else throw ConfigError("--state: unknown key \"" + k + "\"");
  }
  if (s.seed.has_value() == !s.file.empty()) throw ConfigError("--state: give exactly one of seed=.. or file=..");
  return s;
}

RobotState load_state(const KinematicTree& t, const StateSource& src, int rep, VecX* tau = nullptr)
{
  if (src.seed) return random_state(t, *src.seed + static_cast<unsigned long long>(rep));
  const std::string text = read_file(src.file);
  RobotState s = parse_state(t, text);
  if (tau) {
    const json j = json::parse(text);
    if (j.contains("tau")) *tau = detail::numbers(j["tau"], t.nv(), "state tau");
  }
  return s;
}

json check_json(const CheckResult& c)
{
  return {{"name", c.name}, {"pass", c.pass}, {"max_abs_err", c.max_abs_err}, {"max_rel_err", c.max_rel_err},
          {"tol", c.tol}};
}

// ---- validate ----

int cmd_validate(const Common& cm, int max_directions, const std::string& perturb)
{
  const KinematicTree t = cm.tree();
  const StateSource src = parse_state_source(cm.state);
  if (cm.reps < 1) throw ConfigError("--reps must be >= 1");
  if (!(cm.tol_fo > 0) || !(cm.tol_so > 0)) throw ConfigError("tolerances must be positive");

  const auto t0 = std::chrono::steady_clock::now();
  json cases = json::array();
  bool all_pass = true;
  int n_checks = 0, n_failed = 0;
  std::vector<std::string> table;
  auto line = [&](const CheckResult& c) {
    std::ostringstream os;
    os << (c.pass ? "PASS " : "FAIL ") << c.name << "  abs=" << c.max_abs_err << " rel=" << c.max_rel_err
       << " tol=" << c.tol;
    table.push_back(os.str());
    ++n_checks;
    if (!c.pass) ++n_failed;
    all_pass = all_pass && c.pass;
  };

  for (int rep = 0; rep < cm.reps; ++rep) {
    const RobotState s = load_state(t, src, rep);
    ValidationOptions o;
    o.tol_fo = cm.tol_fo;
    o.tol_so = cm.tol_so;
    o.max_directions = max_directions;
    o.perturb = perturb;
    o.seed = (src.seed ? *src.seed : 1) + static_cast<unsigned long long>(rep);
    const ValidationReport r = run_validation(t, s, t.contacts, o);
    json cj;
    cj["case"] = rep;
    if (src.seed) cj["state_seed"] = *src.seed + static_cast<unsigned long long>(rep);
    cj["nv"] = t.nv();
    cj["h_fo"] = o.fd.h_fo;
    cj["h_solve"] = r.h_solve;
    cj["mass_condition"] = r.mass_condition;
    cj["fd_directions"] = r.directions;
    cj["skipped"] = r.skipped;
    json checks = json::array();
    for (const CheckResult& c : r.checks) {
      checks.push_back(check_json(c));
      line(c);
    }
    for (const std::string& sk : r.skipped) table.push_back("SKIP " + sk);
    cj["checks"] = std::move(checks);
    cj["pass"] = r.pass();
    cases.push_back(std::move(cj));
  }

  json pend = json::array();
  for (const CheckResult& c : pendulum_checks(t)) {
    pend.push_back(check_json(c));
    line(c);
  }

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (const std::string& l : table) std::cout << l << "\n";
  std::cout << "validate: " << n_checks << " checks, " << n_failed << " failed, wall " << wall << " s\n";

  json report;
  report["tool"] = "rbdd_cli";
  report["version"] = kVersion;
  report["command"] = "validate";
  report["config"] = cm.config();
  report["config"]["max_directions"] = max_directions;
  if (!perturb.empty()) report["config"]["perturb"] = perturb;
  report["model"] = {{"name", t.name}, {"N", t.N()}, {"nv", t.nv()}, {"contacts", t.contacts.size()}};
  if (!cm.gen.empty()) report["seed"] = parse_gen(cm.gen).seed;
  report["cases"] = std::move(cases);
  if (!pend.empty()) report["pendulum"] = std::move(pend);
  report["wall_time_s"] = wall;
  report["pass"] = all_pass;
  if (!cm.out.empty()) {
    if (cm.format == "csv") {
      std::ostringstream os;
      os << "case,name,pass,max_abs_err,max_rel_err,tol\n";
      for (const json& c : report["cases"])
        for (const json& k : c["checks"])
          os << c["case"].get<int>() << "," << k["name"].get<std::string>() << "," << (k["pass"].get<bool>() ? 1 : 0)
             << "," << k["max_abs_err"].get<double>() << "," << k["max_rel_err"].get<double>() << ","
             << k["tol"].get<double>() << "\n";
      write_output(cm.out, os.str());
    } else {
      write_output(cm.out, report.dump(2) + "\n");
    }
  }
  return all_pass ? 0 : 1;
}

// ---- deriv ----

json tensor_json(const std::string& name, const std::vector<Eigen::Index>& dims, const double* data, size_t n)
{
  static const char* orders[] = {"", "out", "out,du", "out,du,dw"};
  json j;
  j["name"] = name;
  j["dims"] = dims;
  j["axis_order"] = orders[dims.size()];
  j["layout"] = "axis1-fastest";
  j["data"] = std::vector<double>(data, data + n);
  return j;
}

struct Object {
  std::vector<Eigen::Index> dims;
  std::vector<double> data;
};

Object obj(const VecX& v) { return {{v.size()}, std::vector<double>(v.data(), v.data() + v.size())}; }
Object obj(const MatX& m) { return {{m.rows(), m.cols()}, std::vector<double>(m.data(), m.data() + m.size())}; }
Object obj(const Tensor3& T) { return {{T.dim(0), T.dim(1), T.dim(2)}, T.data()}; }

const std::vector<std::string>& object_names()
{
  static const std::vector<std::string> names = {
    "tau", "M", "dtau_dq", "dtau_dqd", "d2tau_dq2", "d2tau_dqd2", "d2tau_dqd_dq", "d2tau_dq_dqd", "dM_dq",
    "qdd", "dqdd_dq", "dqdd_dqd", "dqdd_dtau", "d2qdd_dq2", "d2qdd_dqd2", "d2qdd_dqd_dq", "d2qdd_dtau_dq",
    "kkt_qdd", "kkt_lambda", "dkkt_qdd_dq", "dkkt_qdd_dqd", "dkkt_qdd_dtau", "dkkt_lambda_dq", "dkkt_lambda_dqd",
    "dkkt_lambda_dtau", "d2kkt_qdd_dq2", "d2kkt_qdd_dqd2", "d2kkt_qdd_dqd_dq", "d2kkt_qdd_dtau_dq",
    "d2kkt_lambda_dq2", "d2kkt_lambda_dqd2", "d2kkt_lambda_dqd_dq", "d2kkt_lambda_dtau_dq",
    "impact_qd_plus", "impact_lambda", "dimpact_qd_plus_dq", "dimpact_qd_plus_dqd_minus", "dimpact_lambda_dq",
    "dimpact_lambda_dqd_minus", "d2impact_qd_plus_dq2", "d2impact_qd_plus_dqd_minus_dq", "d2impact_lambda_dq2",
    "d2impact_lambda_dqd_minus_dq"};
  return names;
}

Object compute_object(const std::string& name, const KinematicTree& t, const RobotState& s, const VecX& tau)
{
  const VecX &q = s.q, &qd = s.qd;
  const ContactSpec& c = t.contacts;
  if (name == "tau") return obj(rnea(t, s).tau);
  if (name == "M") return obj(crba(t, q));
  if (name == "dtau_dq") return obj(id_fo(t, s).dtau_dq);
  if (name == "dtau_dqd") return obj(id_fo(t, s).dtau_dqd);
  if (name == "d2tau_dq2") return obj(id_so(t, s).d2tau_dq2);
  if (name == "d2tau_dqd2") return obj(id_so(t, s).d2tau_dqd2);
  if (name == "d2tau_dqd_dq") return obj(id_so(t, s).d2tau_cross);
  if (name == "d2tau_dq_dqd") return obj(rot23(id_so(t, s).d2tau_cross));
  if (name == "dM_dq") return obj(id_so(t, s).dM_dq);
  if (name == "qdd") return obj(forward_dynamics(t, q, qd, tau));
  if (name == "dqdd_dq") return obj(fd_fo(t, q, qd, tau).dqdd_dq);
  if (name == "dqdd_dqd") return obj(fd_fo(t, q, qd, tau).dqdd_dqd);
  if (name == "dqdd_dtau") return obj(fd_fo(t, q, qd, tau).dqdd_dtau);
  if (name == "d2qdd_dq2") return obj(fd_so(t, q, qd, tau).qq);
  if (name == "d2qdd_dqd2") return obj(fd_so(t, q, qd, tau).qdqd);
  if (name == "d2qdd_dqd_dq") return obj(fd_so(t, q, qd, tau).qd_q);
  if (name == "d2qdd_dtau_dq") return obj(fd_so(t, q, qd, tau).tau_q);
  if (name.rfind("kkt_", 0) == 0 || name.rfind("dkkt_", 0) == 0 || name.rfind("d2kkt_", 0) == 0 ||
      name.find("impact") != std::string::npos) {
    if (c.empty()) throw ConfigError("object " + name + " needs contacts in the model");
  }
  if (name == "kkt_qdd") return obj(kkt_solve(t, q, qd, tau, c).qdd);
  if (name == "kkt_lambda") return obj(kkt_solve(t, q, qd, tau, c).lambda);
  if (name.rfind("dkkt_", 0) == 0) {
    const KktFirstOrder f = kkt_fo(t, q, qd, tau, c);
    if (name == "dkkt_qdd_dq") return obj(f.dqdd_dq);
    if (name == "dkkt_qdd_dqd") return obj(f.dqdd_dqd);
    if (name == "dkkt_qdd_dtau") return obj(f.dqdd_dtau);
    if (name == "dkkt_lambda_dq") return obj(f.dlam_dq);
    if (name == "dkkt_lambda_dqd") return obj(f.dlam_dqd);
    if (name == "dkkt_lambda_dtau") return obj(f.dlam_dtau);
  }
  if (name.rfind("d2kkt_", 0) == 0) {
    const KktSecondOrder k = kkt_so(t, q, qd, tau, c);
    if (name == "d2kkt_qdd_dq2") return obj(k.qdd_qq);
    if (name == "d2kkt_qdd_dqd2") return obj(k.qdd_qdqd);
    if (name == "d2kkt_qdd_dqd_dq") return obj(k.qdd_qd_q);
    if (name == "d2kkt_qdd_dtau_dq") return obj(k.qdd_tau_q);
    if (name == "d2kkt_lambda_dq2") return obj(k.lam_qq);
    if (name == "d2kkt_lambda_dqd2") return obj(k.lam_qdqd);
    if (name == "d2kkt_lambda_dqd_dq") return obj(k.lam_qd_q);
    if (name == "d2kkt_lambda_dtau_dq") return obj(k.lam_tau_q);
  }
  if (name == "impact_qd_plus") return obj(impact_solve(t, q, qd, c).qd_plus);
  if (name == "impact_lambda") return obj(impact_solve(t, q, qd, c).lambda_hat);
  if (name.rfind("dimpact_", 0) == 0) {
    const ImpactFirstOrder f = impact_fo(t, q, qd, c);
    if (name == "dimpact_qd_plus_dq") return obj(f.dqdp_dq);
    if (name == "dimpact_qd_plus_dqd_minus") return obj(f.dqdp_dqdm);
    if (name == "dimpact_lambda_dq") return obj(f.dlam_dq);
    if (name == "dimpact_lambda_dqd_minus") return obj(f.dlam_dqdm);
  }
  if (name.rfind("d2impact_", 0) == 0) {
    const ImpactSecondOrder k = impact_so(t, q, qd, c);
    if (name == "d2impact_qd_plus_dq2") return obj(k.qdp_qq);
    if (name == "d2impact_qd_plus_dqd_minus_dq") return obj(k.qdp_qdm_q);
    if (name == "d2impact_lambda_dq2") return obj(k.lam_qq);
    if (name == "d2impact_lambda_dqd_minus_dq") return obj(k.lam_qdm_q);
  }
  throw ConfigError("unknown object \"" + name + "\"");
}

int cmd_deriv(const Common& cm, const std::vector<std::string>& requested)
{
  if (requested.empty()) throw ConfigError("--object is required");
  const auto& known = object_names();
  for (const std::string& n : requested)
    if (std::find(known.begin(), known.end(), n) == known.end()) {
      std::string list;
      for (const std::string& k : known) list += (list.empty() ? "" : ", ") + k;
      throw ConfigError("unknown object \"" + n + "\"; known objects: " + list);
    }

  const KinematicTree t = cm.tree();
  const StateSource src = parse_state_source(cm.state);
  VecX tau;
  const RobotState s = load_state(t, src, 0, &tau);
  if (tau.size() == 0) tau = rnea(t, s).tau;

  std::vector<std::pair<std::string, Object>> objs;
  for (const std::string& n : requested) objs.emplace_back(n, compute_object(n, t, s, tau));

  std::string payload;
  if (cm.format == "csv") {
    if (objs.size() != 1) throw ConfigError("csv output takes exactly one object");
    const Object& o = objs[0].second;
    if (o.dims.size() == 3) throw ConfigError("csv output is for vectors and matrices only");
    const Eigen::Index rows = o.dims[0], cols = o.dims.size() == 2 ? o.dims[1] : 1;
    std::ostringstream os;
    os.precision(17);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < cols; ++j) os << (j ? "," : "") << o.data[static_cast<size_t>(i + j * rows)];
      os << "\n";
    }
    payload = os.str();
  } else {
    json j;
    if (objs.size() == 1) {
      j = tensor_json(objs[0].first, objs[0].second.dims, objs[0].second.data.data(), objs[0].second.data.size());
    } else {
      j = json::array();
      for (const auto& [n, o] : objs) j.push_back(tensor_json(n, o.dims, o.data.data(), o.data.size()));
    }
    payload = j.dump(2) + "\n";
  }
  write_output(cm.out, payload);

  // The payload depends only on the requested objects; run metadata goes to
  // a sidecar so equal results give byte-identical files.
  if (!cm.out.empty()) {
    json meta;
    meta["tool"] = "rbdd_cli";
    meta["version"] = kVersion;
    meta["command"] = "deriv";
    meta["config"] = cm.config();
    meta["objects"] = requested;
    if (src.seed) meta["seed"] = *src.seed;
    meta["state"] = json::parse(write_state(s));
    meta["state"]["tau"] = std::vector<double>(tau.data(), tau.data() + tau.size());
    write_output(cm.out + ".meta.json", meta.dump(2) + "\n");
  }
  return 0;
}

// ---- bench ----

int cmd_bench(const Common& cm, const std::string& sizes)
{
  RandomModelOptions base = parse_gen(cm.gen.empty() ? "seed=1,branch=0" : cm.gen, false);
  std::vector<int> Ns;
  {
    std::stringstream ss(sizes);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const long long n = to_int(item, "--sizes");
      if (n < 1) throw ConfigError("--sizes entries must be >= 1");
      Ns.push_back(static_cast<int>(n));
    }
  }
  if (Ns.empty()) throw ConfigError("--sizes is empty");
  if (cm.reps < 1) throw ConfigError("--reps must be >= 1");
  const StateSource src = parse_state_source(cm.state);

  json rows = json::array();
  std::cout << "N nv depth fo_pairs so_triples fo_ms so_ms\n";
  for (int N : Ns) {
    RandomModelOptions o = base;
    o.N = N;
    const KinematicTree t = random_model(o);
    const RobotState s = load_state(t, src, 0);
    VisitCounter c1, c2;
    double fo_ms = std::numeric_limits<double>::infinity(), so_ms = fo_ms;
    for (int r = 0; r < cm.reps; ++r) {
      VisitCounter a, b;
      auto t0 = std::chrono::steady_clock::now();
      const FirstOrderDerivs fo = id_fo(t, s, &a);
      auto t1 = std::chrono::steady_clock::now();
      const SecondOrderDerivs so = id_so(t, s, &b);
      auto t2 = std::chrono::steady_clock::now();
      (void)fo;
      (void)so;
      fo_ms = std::min(fo_ms, std::chrono::duration<double, std::milli>(t1 - t0).count());
      so_ms = std::min(so_ms, std::chrono::duration<double, std::milli>(t2 - t1).count());
      c1 = a;
      c2 = b;
    }
    std::cout << N << " " << t.nv() << " " << t.depth() << " " << c1.pairs << " " << c2.triples << " " << fo_ms
              << " " << so_ms << "\n";
    rows.push_back({{"N", N}, {"nv", t.nv()}, {"depth", t.depth()}, {"fo_pairs", c1.pairs},
                    {"so_triples", c2.triples}, {"fo_ms", fo_ms}, {"so_ms", so_ms}});
  }
  json report;
  report["tool"] = "rbdd_cli";
  report["version"] = kVersion;
  report["command"] = "bench";
  report["config"] = cm.config();
  report["config"]["sizes"] = sizes;
  report["seed"] = base.seed;
  report["rows"] = std::move(rows);
  if (!cm.out.empty()) write_output(cm.out, report.dump(2) + "\n");
  return 0;
}

// ---- gen-model ----

int cmd_gen_model(const Common& cm)
{
  if (cm.gen.empty()) throw ConfigError("--gen is required");
  const KinematicTree t = random_model(parse_gen(cm.gen));
  write_output(cm.out, write_model(t));
  return 0;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Rigid-body dynamics derivatives: validation, dumps, benchmarks"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Common cm;
  int max_directions = 48;
  std::string perturb, sizes = "8,16,32,64";
  std::vector<std::string> objects;

  auto* v = app.add_subcommand("validate", "identity suites and FD oracle comparisons");
  cm.add_model(v);
  cm.add_state(v);
  cm.add_output(v);
  v->add_option("--tol-fo", cm.tol_fo, "first-order relative tolerance")->capture_default_str();
  v->add_option("--tol-so", cm.tol_so, "second-order relative tolerance")->capture_default_str();
  v->add_option("--reps", cm.reps, "number of states (seed, seed+1, ...)")->capture_default_str();
  v->add_option("--max-directions", max_directions, "sample FD directions above this nv (0 = never)")
    ->capture_default_str();
  v->add_option("--perturb", perturb, "test hook: corrupt the analytic side of a named check");

  auto* d = app.add_subcommand("deriv", "write derivative objects");
  cm.add_model(d);
  cm.add_state(d);
  cm.add_output(d);
  d->add_option("--object", objects, "object name(s)")->delimiter(',');

  auto* b = app.add_subcommand("bench", "wall time and inner-loop visit counts");
  b->add_option("--gen", cm.gen, "generator template: seed=..,branch=..[,kinds=..]");
  b->add_option("--sizes", sizes, "comma-separated N list")->capture_default_str();
  b->add_option("--reps", cm.reps, "timing repetitions (minimum is reported)")->capture_default_str();
  cm.add_state(b);
  b->add_option("--out", cm.out, "JSON report path");

  auto* g = app.add_subcommand("gen-model", "write a random model file");
  g->add_option("--gen", cm.gen, "N=..,seed=..,branch=..[,kinds=RPSF]");
  g->add_option("--out", cm.out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*v) return cmd_validate(cm, max_directions, perturb);
    if (*d) return cmd_deriv(cm, objects);
    if (*b) return cmd_bench(cm, sizes);
    if (*g) return cmd_gen_model(cm);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
