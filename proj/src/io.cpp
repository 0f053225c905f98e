#include "stlc/io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace stlc {

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

std::vector<std::pair<long, cplx>> parse_modes(const json& j, const char* what) {
  std::vector<std::pair<long, cplx>> out;
  for (const json& e : j) {
    if (!e.is_array() || e.size() != 3) throw precondition_error(std::string(what) + " entries must be [j, re, im]");
    const long idx = e[0].get<long>();
    if (idx < 0) throw precondition_error(std::string(what) + " index must be nonnegative");
    out.emplace_back(idx, cplx(e[1].get<double>(), e[2].get<double>()));
  }
  return out;
}

}  // namespace

PotentialSpec parse_potential(const json& j) {
  if (!j.is_object() || !j.contains("type")) throw precondition_error("potential descriptor needs a type");
  const std::string type = j.at("type").get<std::string>();
  PotentialSpec s;
  if (type == "linear") {
    s.desc = PotentialDesc::linear();
  } else if (type == "zero") {
    s.desc = PotentialDesc::zero();
  } else if (type == "coeffs") {
    s.desc.kind = PotentialDesc::Kind::Coeffs;
    if (!j.contains("m")) throw precondition_error("insufficient potential data");
    s.desc.m = j.at("m").get<std::vector<double>>();
    s.desc.slope0 = get_or(j, "slope0", 0.0);
    s.desc.slope1 = get_or(j, "slope1", 0.0);
  } else if (type == "cosine_poly") {
    s.desc.kind = PotentialDesc::Kind::CosinePoly;
    for (const json& t : j.at("terms")) s.desc.terms.emplace_back(t.at("j").get<int>(), t.at("amp").get<double>());
  } else if (type == "balanced") {
    s.balanced = true;
    s.balanced_k = get_or(j, "k", 1);
    if (s.balanced_k < 0) throw precondition_error("mode index must be nonnegative");
  } else {
    throw precondition_error("unknown potential type: " + type);
  }
  return s;
}

Potential make_potential(const PotentialSpec& spec, long J) {
  if (spec.balanced) return find_balanced_potential(spec.balanced_k, default_balanced_family(spec.balanced_k, J)).pot;
  return cosine_coefficients(spec.desc, J);
}

RunConfig parse_config(const json& j) {
  if (!j.is_object()) throw precondition_error("config must be a JSON object");
  RunConfig c;
  try {
    if (j.contains("potential")) c.potential = parse_potential(j.at("potential"));
    c.k = get_or(j, "k", 0);
    if (j.contains("T")) {
      const json& t = j.at("T");
      c.T = t.is_array() ? t.get<std::vector<double>>() : std::vector<double>{t.get<double>()};
    }
    c.J_series = get_or(j, "J_series", c.J_series);
    c.J_sim = get_or(j, "J_sim", c.J_sim);
    c.N = get_or(j, "N", c.N);
    c.seed = get_or(j, "seed", c.seed);
    c.samples = get_or(j, "samples", c.samples);
    c.order = get_or(j, "order", c.order);
    c.nu = get_or(j, "nu", c.nu);
    c.tol = get_or(j, "tol", c.tol);
    c.eps = get_or(j, "eps", c.eps);
    c.regular = get_or(j, "regular", c.regular);
    c.out = get_or(j, "out", c.out);
    if (j.contains("target")) c.target = parse_modes(j.at("target"), "target");
    if (j.contains("moments")) c.moments = parse_modes(j.at("moments"), "moments");
  } catch (const json::exception& e) {
    throw precondition_error(std::string("config parse error: ") + e.what());
  }
  if (c.T.empty()) throw precondition_error("T sweep list must be nonempty");
  for (double t : c.T)
    if (!(t > 0.0)) throw precondition_error("horizon must be positive");
  if (c.k < 0) throw precondition_error("mode index must be nonnegative");
  if (c.J_series < 1 || c.J_sim < 1 || c.N < 1 || c.samples < 0) throw precondition_error("sizes must be positive");
  if (c.k > c.J_sim) throw precondition_error("mode k outside the Galerkin range");
  if (!(c.tol > 0.0)) throw precondition_error("tolerances must be positive");
  if (c.order < 1) throw precondition_error("order must be at least 1");
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw precondition_error("cannot open config: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw precondition_error(std::string("config parse error: ") + e.what());
  }
  return parse_config(j);
}

Vec config_target(const RunConfig& c, long J) {
  Vec t = Vec::Zero(J + 1);
  if (c.target.empty()) {
    const double e = c.eps;
    if (!(e >= 0.0 && e < 1.0)) throw precondition_error("eps must lie in [0, 1)");
    t(0) = std::sqrt(1.0 - e * e);
    t(c.k) += cplx(0.0, e);
    return t;
  }
  for (const auto& [j, v] : c.target) {
    if (j > J) throw precondition_error("target mode outside the Galerkin range");
    t(j) += v;
  }
  const double n = t.norm();
  if (!(n > 0.0)) throw precondition_error("target must be nonzero");
  return t / n;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_coefficients_csv(std::ostream& os, const Potential& pot, const KernelModel& model) {
  os << "j,lambda_j,m_j,c_j\n";
  const long J = std::min(pot.J(), model.J());
  for (long j = 0; j <= J; ++j)
    os << j << ',' << fmt(lambda(j)) << ',' << fmt(pot.m[std::size_t(j)]) << ',' << fmt(model.c[std::size_t(j)])
       << '\n';
}

void write_control_csv(std::ostream& os, const Control& u) {
  os << "t_start,value_re,value_im\n";
  for (long n = 0; n < u.N(); ++n) {
    const cplx v = u.values[std::size_t(n)];
    os << fmt(u.t(n)) << ',' << fmt(v.real()) << ',' << fmt(v.imag()) << '\n';
  }
}

Control read_control_csv(std::istream& is, double T) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("t_start", 0) != 0) throw precondition_error("control CSV header missing");
  std::vector<cplx> v;
  bool real = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string a, b, c;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') || !std::getline(ls, c))
      throw precondition_error("malformed control CSV row");
    v.emplace_back(std::stod(b), std::stod(c));
    if (v.back().imag() != 0.0) real = false;
  }
  if (v.empty()) throw precondition_error("control CSV has no rows");
  return Control(T, std::move(v), real);
}

json control_to_json(const Control& u) {
  json vals = json::array();
  for (const cplx& v : u.values) {
    if (u.real)
      vals.push_back(v.real());
    else
      vals.push_back(cjson(v));
  }
  return json{{"T", u.T}, {"values", vals}};
}

Control control_from_json(const json& j) {
  std::vector<cplx> v;
  bool real = true;
  for (const json& e : j.at("values")) {
    if (e.is_array()) {
      v.emplace_back(e[0].get<double>(), e[1].get<double>());
      real = false;
    } else {
      v.emplace_back(e.get<double>());
    }
  }
  if (v.empty()) throw precondition_error("control has no values");
  return Control(j.at("T").get<double>(), std::move(v), real);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  os << "t,j,re_psi,im_psi\n";
  for (const StateVector& s : tr.samples)
    for (long j = 0; j <= s.J(); ++j)
      os << fmt(s.time) << ',' << j << ',' << fmt(s.coeffs(j).real()) << ',' << fmt(s.coeffs(j).imag()) << '\n';
}

void write_kernel_csv(std::ostream& os, const KernelModel& model, double sigma_max, long n) {
  os << "sigma,re_K,im_K\n";
  for (long i = 0; i <= n; ++i) {
    const double s = sigma_max * double(i) / double(n);
    const cplx K = kernel_value(model, s).value;
    os << fmt(s) << ',' << fmt(K.real()) << ',' << fmt(K.imag()) << '\n';
  }
}

void write_theta_csv(std::ostream& os, const KernelModel& model, double omega_max, long n) {
  os << "omega,theta,theta_pv,theta_reg\n";
  for (long i = 1; i <= n; ++i) {
    const double w = omega_max * double(i) / double(n);
    const ThetaSplit s = theta_split(model, w);
    os << fmt(w) << ',' << fmt(s.theta) << ',' << fmt(s.pv_part) << ',' << fmt(s.reg_part) << '\n';
  }
}

json to_json(const Classification& c) {
  return json{{"verdict", to_string(c.verdict)}, {"margin", c.margin}, {"m_k", c.m_k}, {"a", c.a},
              {"K0", c.K0},                      {"a_k", c.a_k},       {"tie_tol", c.tie_tol}};
}

json to_json(const QuadFormBreakdown& b) {
  return json{{"total", cjson(b.total)},
              {"dirac", cjson(b.dirac)},
              {"inv_sq", cjson(b.inv_sq)},
              {"pv", cjson(b.pv)},
              {"reg", cjson(b.reg)},
              {"pv_eps", b.pv_eps},
              {"certified_error", b.certified_error},
              {"note", "frequency formula applied on H; piecewise-constant controls are not smooth at 0 and T"}};
}

json to_json(const DriftCertificate& c) {
  return json{{"order", c.order},
              {"nu", c.nu},
              {"projection", cjson(c.projection)},
              {"a_p", c.a_p},
              {"up_norm2", c.up_norm2},
              {"lhs", c.lhs},
              {"rhs_components",
               {{"gamma_term", c.gamma_term}, {"state_dev2", c.state_dev2}, {"u1T", c.u1T}}},
              {"gamma", c.gamma},
              {"closed_loop_rhs", c.closed_loop_rhs},
              {"fitted_C", c.fitted_C}};
}

json to_json(const RemainderRecord& r) {
  return json{{"quad_rem", r.quad_rem},       {"quad_bound", r.quad_bound},
              {"quad_ratio", r.quad_ratio},   {"cubic_rem", r.cubic_rem},
              {"cubic_bound", r.cubic_bound}, {"cubic_ratio", r.cubic_ratio},
              {"gauge_norm_defect", r.gauge_norm_defect}, {"gauge_roundtrip", r.gauge_roundtrip}};
}

json to_json(const MomentSolution& m) {
  return json{{"regular", m.regular},     {"index", m.index},         {"residuals", m.residuals},
              {"max_residual", m.max_residual}, {"l2norm", m.l2norm}, {"cost_NT", m.cost_NT},
              {"ridge", m.ridge}};
}

json to_json(const TangentCertificate& c) {
  return json{{"psi2", cjson(c.psi2)},   {"psi1_max", c.psi1_max}, {"psi1_norm", c.psi1_norm},
              {"u_norm", c.u_norm},      {"u1_norm", c.u1_norm},   {"u1T", c.u1T},
              {"re_over_T2", c.re_over_T2}, {"im_over_T3", c.im_over_T3}, {"scale", c.scale},
              {"j0", c.j0},              {"probe_sign", c.probe_sign}};
}

json to_json(const SteeringReport& r) {
  return json{{"status", r.status},         {"reason", r.reason},
              {"iterations", r.iterations}, {"z_target", cjson(r.z_target)},
              {"z_final", cjson(r.z_final)}, {"final_error", r.final_error},
              {"proj_error", r.proj_error}, {"u_norm", r.u_norm},
              {"u1_norm", r.u1_norm},       {"cost_NT", r.cost_NT},
              {"bound_L2", r.bound_L2},     {"bound_H1", r.bound_H1},
              {"trace", r.trace},           {"warnings", r.warnings}};
}

}  // namespace stlc
