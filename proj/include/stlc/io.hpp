#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "stlc/synthesis.hpp"

namespace stlc {

using json = nlohmann::ordered_json;

// {"type":"linear"} | {"type":"zero"} | {"type":"coeffs","m":[...],"slope0":..,"slope1":..}
// | {"type":"cosine_poly","terms":[{"j":..,"amp":..}]} | {"type":"balanced","k":..}
struct PotentialSpec {
  PotentialDesc desc;
  bool balanced = false;  // resolved through find_balanced_potential
  int balanced_k = 1;
};
PotentialSpec parse_potential(const json& j);
Potential make_potential(const PotentialSpec& spec, long J);

struct RunConfig {
  PotentialSpec potential;
  int k = 0;
  std::vector<double> T{0.1};
  long J_series = 4000;
  long J_sim = 32;
  long N = 1024;
  std::uint64_t seed = 1;
  long samples = 100;
  int order = 1;
  double nu = 0.125;
  double tol = 1e-10;
  double eps = 1e-3;
  // [[j, re, im], ...]; empty: √(1−ε²)φ₀ + iεφ_k, with the phase on φ₀ when k = 0
  std::vector<std::pair<long, cplx>> target;
  std::vector<std::pair<long, cplx>> moments;
  bool regular = false;
  std::string out = ".";
};
RunConfig parse_config(const json& j);
RunConfig load_config(const std::string& path);
// Unit-norm steering target on J+1 modes.
Vec config_target(const RunConfig& c, long J);

// Fixed-precision number formatting shared by every emitter.
std::string fmt(double x);

void write_coefficients_csv(std::ostream& os, const Potential& pot, const KernelModel& model);
void write_control_csv(std::ostream& os, const Control& u);
Control read_control_csv(std::istream& is, double T);
json control_to_json(const Control& u);
Control control_from_json(const json& j);
void write_trajectory_csv(std::ostream& os, const Trajectory& tr);
void write_kernel_csv(std::ostream& os, const KernelModel& model, double sigma_max, long n);
void write_theta_csv(std::ostream& os, const KernelModel& model, double omega_max, long n);

json to_json(const Classification& c);
json to_json(const QuadFormBreakdown& b);
json to_json(const DriftCertificate& c);
json to_json(const RemainderRecord& r);
json to_json(const MomentSolution& m);
json to_json(const TangentCertificate& c);
json to_json(const SteeringReport& r);

}  // namespace stlc
