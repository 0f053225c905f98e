#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <omp.h>

#include "CLI11.hpp"
#include "stlc/io.hpp"

using namespace stlc;
namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& dir, const std::string& name) {
  std::ofstream os(dir / name);
  if (!os) throw precondition_error("cannot write " + (dir / name).string());
  return os;
}

void write_json(const fs::path& dir, const std::string& name, const json& j) { open_out(dir, name) << j.dump(2) << '\n'; }

// Sample i of a sweep is reproducible from (seed, i) alone, whatever the thread count.
Control random_H(std::uint64_t seed, long i, double T, long N) {
  std::seed_seq ss{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                   static_cast<std::uint32_t>(i)};
  std::mt19937_64 rng(ss);
  std::normal_distribution<double> nd;
  std::vector<double> v(static_cast<std::size_t>(N));
  for (double& x : v) x = nd(rng);
  Control u = project_zero_mean(Control::from_real(T, v));
  u.real = true;
  return u.scaled(1.0 / u.l2norm());
}

// Runs f(i) for i < n on the worker pool; the first exception is rethrown on the caller.
template <class F>
void parallel_for(long n, F&& f) {
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    try {
      f(i);
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
}

int cmd_analyze(const RunConfig& c, const fs::path& out) {
  const Potential pot = make_potential(c.potential, c.J_series);
  const KernelModel model = interaction_coefficients(pot, c.k, c.J_series);
  std::ofstream csv = open_out(out, "coefficients.csv");
  write_coefficients_csv(csv, pot, model);
  json v = to_json(classify(pot, c.k));
  v["k"] = c.k;
  v["source"] = pot.source;
  write_json(out, "verdict.json", v);
  std::cout << v.at("verdict").get<std::string>() << '\n';
  return 0;
}

int cmd_kernels(const RunConfig& c, const fs::path& out) {
  const Potential pot = make_potential(c.potential, c.J_series);
  const KernelModel model = interaction_coefficients(pot, c.k, c.J_series);
  std::ofstream k = open_out(out, "kernel.csv");
  write_kernel_csv(k, model, c.T.front(), c.N);
  std::ofstream t = open_out(out, "theta.csv");
  write_theta_csv(t, model, lambda(std::min<long>(c.J_series, 64)), c.N);
  return 0;
}

int cmd_coercivity(const RunConfig& c, const fs::path& out) {
  const Potential pot = make_potential(c.potential, c.J_series);
  const KernelModel model = interaction_coefficients(pot, c.k, c.J_series);
  std::ofstream csv = open_out(out, "coercivity_scan.csv");
  csv << "T,min_ratio,max_residual\n";
  for (std::size_t ti = 0; ti < c.T.size(); ++ti) {
    const double T = c.T[ti];
    std::vector<CoercivityRecord> rec(static_cast<std::size_t>(c.samples));
    parallel_for(c.samples, [&](long i) {
      const Control u = random_H(c.seed + ti, i, T, c.N);
      rec[std::size_t(i)] = coercivity_residual(model, u, u, c.nu);
    });
    double min_ratio = std::numeric_limits<double>::infinity(), max_res = 0.0;
    for (const CoercivityRecord& r : rec) {
      min_ratio = std::min(min_ratio, r.q.imag() / r.n_l2);
      max_res = std::max(max_res, r.ratio);
    }
    csv << fmt(T) << ',' << fmt(min_ratio) << ',' << fmt(max_res) << '\n';
  }
  return 0;
}

int cmd_drift(const RunConfig& c, const fs::path& out) {
  const Potential pot = make_potential(c.potential, std::max(c.J_series, c.J_sim));
  const KernelModel model = interaction_coefficients(pot, c.k, c.J_series);
  const Galerkin g(pot, c.J_sim);
  const double T = c.T.front();
  std::vector<DriftCertificate> cert(static_cast<std::size_t>(c.samples));
  parallel_for(c.samples, [&](long i) {
    cert[std::size_t(i)] = drift_certificate(g, model, random_H(c.seed, i, T, c.N), c.order, c.nu);
  });
  std::ofstream csv = open_out(out, "drift_scan.csv");
  csv << "sample,projection_im,a_p,up_norm2,lhs,gamma_term,state_dev2,fitted_C\n";
  json all = json::array();
  for (long i = 0; i < c.samples; ++i) {
    const DriftCertificate& d = cert[std::size_t(i)];
    csv << i << ',' << fmt(d.projection.imag()) << ',' << fmt(d.a_p) << ',' << fmt(d.up_norm2) << ',' << fmt(d.lhs)
        << ',' << fmt(d.gamma_term) << ',' << fmt(d.state_dev2) << ',' << fmt(d.fitted_C) << '\n';
    all.push_back(to_json(d));
  }
  write_json(out, "drift_certificates.json", all);
  return 0;
}

int cmd_remainders(const RunConfig& c, const fs::path& out) {
  const Potential pot = make_potential(c.potential, std::max(c.J_series, c.J_sim));
  const KernelModel model = interaction_coefficients(pot, c.k, c.J_series);
  const Galerkin g(pot, c.J_sim);
  const double T = c.T.front();
  std::vector<RemainderRecord> rec(static_cast<std::size_t>(c.samples));
  parallel_for(c.samples, [&](long i) { rec[std::size_t(i)] = remainder_norms(g, model, random_H(c.seed, i, T, c.N)); });
  std::ofstream csv = open_out(out, "remainders.csv");
  csv << "sample,quad_rem,quad_bound,quad_ratio,cubic_rem,cubic_bound,cubic_ratio,gauge_roundtrip\n";
  for (long i = 0; i < c.samples; ++i) {
    const RemainderRecord& r = rec[std::size_t(i)];
    csv << i << ',' << fmt(r.quad_rem) << ',' << fmt(r.quad_bound) << ',' << fmt(r.quad_ratio) << ','
        << fmt(r.cubic_rem) << ',' << fmt(r.cubic_bound) << ',' << fmt(r.cubic_ratio) << ','
        << fmt(r.gauge_roundtrip) << '\n';
  }
  return 0;
}

int cmd_synthesize(const RunConfig& c, const fs::path& out) {
  const Potential pot = make_potential(c.potential, std::max<long>(c.J_sim, 200));
  const KernelModel model = interaction_coefficients(pot, c.k, c.J_series);
  const Galerkin g(pot, c.J_sim);
  const Vec target = config_target(c, c.J_sim);
  SteerOptions opt;
  opt.tol = c.tol;
  const SteeringReport r = steer_full(g, model, c.T.front(), target, opt);
  write_json(out, "steering_report.json", to_json(r));
  std::ofstream csv = open_out(out, "control.csv");
  write_control_csv(csv, r.u);
  std::cout << r.status << (r.reason.empty() ? "" : ": " + r.reason) << '\n';
  return r.converged ? 0 : 3;
}

int cmd_moments(const RunConfig& c, const fs::path& out) {
  if (c.moments.empty()) throw precondition_error("no moments requested");
  std::map<long, cplx> d(c.moments.begin(), c.moments.end());
  const MomentSolution m = solve_moments(c.T.front(), d, c.regular, {c.N, c.tol});
  write_json(out, "moments.json", to_json(m));
  std::ofstream csv = open_out(out, "control.csv");
  write_control_csv(csv, m.u);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quadratic-obstruction toolkit for the bilinear Schrodinger equation on (0,1)"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config, outdir;
  long seed = -1;
  int jobs = 0;
  app.add_option("--config", config, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--out", outdir, "output directory (overrides the config)");
  app.add_option("--seed", seed, "base seed (overrides the config)");
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::NonNegativeNumber);

  using Cmd = int (*)(const RunConfig&, const fs::path&);
  const std::vector<std::pair<std::string, Cmd>> verbs{
      {"analyze", cmd_analyze},       {"kernels", cmd_kernels},         {"coercivity-scan", cmd_coercivity},
      {"drift", cmd_drift},           {"remainders", cmd_remainders},   {"synthesize", cmd_synthesize},
      {"moments", cmd_moments}};
  for (const auto& [name, fn] : verbs) app.add_subcommand(name);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    RunConfig c = config.empty() ? parse_config(json::object()) : load_config(config);
    if (seed >= 0) c.seed = static_cast<std::uint64_t>(seed);
    if (!outdir.empty()) c.out = outdir;
    if (jobs > 0) omp_set_num_threads(jobs);
    const fs::path out(c.out);
    fs::create_directories(out);
    for (const auto& [name, fn] : verbs)
      if (app.got_subcommand(name)) return fn(c, out);
  } catch (const precondition_error& e) {
    std::cerr << "precondition: " << e.what() << '\n';
    return 2;
  } catch (const numerical_error& e) {
    std::cerr << "numerical: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
