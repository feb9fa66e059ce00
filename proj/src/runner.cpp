#include "preytaxis/runner.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>
#include <vector>

#include "preytaxis/bifurcation.hpp"
#include "preytaxis/continuation.hpp"
#include "preytaxis/errors.hpp"
#include "preytaxis/scalar_solvers.hpp"
#include "preytaxis/steady_system.hpp"
#include "preytaxis/timestepper.hpp"

namespace preytaxis {

namespace {

namespace fs = std::filesystem;

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("io", "cannot open output file '" + path.string() + "'");
  out << content;
  if (!out) throw config_error("io", "write failed for '" + path.string() + "'");
}

// Two-column plot data with the Dirichlet boundary rows included.
std::string profile_dat(const Field& f) {
  std::ostringstream o;
  o << "0 0\n";
  for (int i = 0; i < f.size(); ++i) o << fmt(f.grid.x(i)) << " " << fmt(f[i]) << "\n";
  o << fmt(f.grid.length) << " 0\n";
  return o.str();
}

std::string triple_block(const Field& u, const Field& v) {
  std::ostringstream o;
  o << "0 0 0\n";
  for (int i = 0; i < u.size(); ++i)
    o << fmt(u.grid.x(i)) << " " << fmt(u[i]) << " " << fmt(v[i]) << "\n";
  o << fmt(u.grid.length) << " 0 0\n";
  return o.str();
}

void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
  workers = std::max(1, std::min(workers, count));
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (std::thread& t : pool) t.join();
  for (int i = 0; i < count; ++i)
    if (errors[i]) std::rethrow_exception(errors[i]);
}

std::string cmd_eig(const RunConfig& cfg, const fs::path& out) {
  const Grid grid = make_grid(cfg);
  const EigenPair e = principal_eigen(Coefficient(cfg.eig_p), Coefficient(cfg.eig_q),
                                      Coefficient(cfg.eig_r), grid);
  std::ostringstream csv;
  csv << "sigma1,residual,iterations\n"
      << fmt(e.sigma) << "," << fmt(e.residual) << "," << e.iterations << "\n";
  write_text(out / "eig.csv", csv.str());
  write_text(out / "eig_phi.dat", profile_dat(e.phi));
  return "sigma1=" + fmt(e.sigma);
}

std::string cmd_logistic(const RunConfig& cfg, const fs::path& out) {
  const Grid grid = make_grid(cfg);
  const Coefficient p(cfg.logistic_p), b(cfg.logistic_b);
  const auto sol = solve_logistic(p, cfg.logistic_a, b, grid);
  const double sigma1 =
      sol ? sol->sigma1
          : principal_eigen(p, Coefficient(0.0), Coefficient(1.0), grid).sigma;
  std::ostringstream csv;
  csv << "exists,a,sigma1,residual,iterations\n"
      << (sol ? 1 : 0) << "," << fmt(cfg.logistic_a) << "," << fmt(sigma1) << ","
      << fmt(sol ? sol->residual : 0.0) << "," << (sol ? sol->newton_iterations : 0)
      << "\n";
  write_text(out / "logistic.csv", csv.str());
  if (sol) write_text(out / "logistic_theta.dat", profile_dat(sol->theta));
  return sol ? "exists sup=" + fmt(sol->theta.max()) : "no positive solution";
}

std::string cmd_thresholds(const RunConfig& cfg, const fs::path& out) {
  const Grid grid = make_grid(cfg);
  const ModelParams params = make_params(cfg);
  const BifurcationBundle bundle = lambda_mu_bundle(params, grid);
  double lstar = std::numeric_limits<double>::quiet_NaN();
  try {
    lstar = lambda_star(params.mu, params, grid);
  } catch (const Error& e) {
    if (e.kind() != "not-applicable") throw;
  }
  const double floor = nonexistence_lower_bound(params, grid);

  std::ostringstream csv;
  csv << "lambda_mu,lambda_star,nonexistence_lower,lambda_prime0\n"
      << fmt(bundle.lambda_mu) << "," << fmt(lstar) << "," << fmt(floor) << ","
      << fmt(bundle.lambda_prime0) << "\n";
  write_text(out / "thresholds.csv", csv.str());

  std::ostringstream st;
  st << "lambda,prey_only,prey_margin,predator_only,predator_margin\n";
  for (double lam : cfg.thresholds_lambda.values()) {
    const StabilityVerdict prey =
        classify_semitrivial(SemitrivialKind::prey_only, lam, params, grid);
    const StabilityVerdict pred =
        classify_semitrivial(SemitrivialKind::predator_only, lam, params, grid);
    st << fmt(lam) << "," << to_string(prey.verdict) << "," << fmt(prey.margin) << ","
       << to_string(pred.verdict) << "," << fmt(pred.margin) << "\n";
  }
  write_text(out / "stability.csv", st.str());
  return "lambda_mu=" + fmt(bundle.lambda_mu);
}

std::string cmd_steady(const RunConfig& cfg, const fs::path& out) {
  const Grid grid = make_grid(cfg);
  const ModelParams params = make_params(cfg);
  NewtonOptions opts;
  opts.tol = cfg.newton_tol;
  opts.max_iter = cfg.newton_max_iter;
  opts.class_threshold = cfg.class_threshold;
  Field u0(grid, 0.0), v0(grid, 0.0);
  if (cfg.steady_u0.kind == "predictor") {
    // First-order branch predictor off the prey-only state; on the wrong side
    // of the bifurcation point the amplitude clamps to zero and Newton settles
    // on the semitrivial root instead.
    const BifurcationBundle b = lambda_mu_bundle(params, grid);
    const double amp = std::max((params.lambda - b.lambda_mu) / b.lambda_prime0, 0.0);
    u0 = amp * b.phi;
    v0 = b.omega + amp * b.psi;
  } else {
    u0 = make_initial_field(cfg.steady_u0, params, grid);
    v0 = make_initial_field(cfg.steady_v0, params, grid);
  }
  const SteadyState s = newton_solve(u0, v0, params.lambda, params, opts);

  std::ostringstream csv;
  csv << "lambda,kind,residual,iterations,positive,sup_u,sup_v\n"
      << fmt(s.lambda) << "," << to_string(s.kind) << "," << fmt(s.residual_norm) << ","
      << s.newton_iterations << "," << (s.positive ? 1 : 0) << "," << fmt(s.u.sup_norm())
      << "," << fmt(s.v.sup_norm()) << "\n";
  write_text(out / "steady.csv", csv.str());
  write_text(out / "steady_u.dat", profile_dat(s.u));
  write_text(out / "steady_v.dat", profile_dat(s.v));
  return to_string(s.kind);
}

std::string cmd_branch(const RunConfig& cfg, const fs::path& out) {
  const Grid grid = make_grid(cfg);
  const ModelParams params = make_params(cfg);
  const BifurcationBundle bundle = lambda_mu_bundle(params, grid);
  const Branch br = branch_from_prey_bifurcation(bundle, params, grid, cfg.branch);

  std::ostringstream csv;
  csv << "index,lambda,arclength,amplitude,sup_u,sup_v,residual\n";
  for (size_t k = 0; k < br.points.size(); ++k) {
    const BranchPoint& p = br.points[k];
    csv << k << "," << fmt(p.lambda) << "," << fmt(p.arclength) << ","
        << fmt(p.amplitude) << "," << fmt(p.u.sup_norm()) << "," << fmt(p.v.sup_norm())
        << "," << fmt(p.residual) << "\n";
  }
  write_text(out / "branch.csv", csv.str());

  std::ostringstream meta;
  meta << "origin,origin_lambda,endpoint,endpoint_lambda,fold_count,lambda_min,"
          "lambda_max,points\n"
       << br.origin << "," << fmt(br.origin_lambda) << "," << to_string(br.endpoint)
       << "," << fmt(br.endpoint_lambda) << "," << br.fold_count << ","
       << fmt(br.lambda_min) << "," << fmt(br.lambda_max) << "," << br.points.size()
       << "\n";
  write_text(out / "branch_meta.csv", meta.str());

  std::ostringstream prof;
  for (size_t k = 0; k < br.points.size(); ++k) {
    const BranchPoint& p = br.points[k];
    prof << "# point " << k << " lambda=" << fmt(p.lambda) << "\n"
         << triple_block(p.u, p.v) << "\n";
  }
  write_text(out / "branch_profiles.dat", prof.str());
  if (br.terminal_u.size() > 0)
    write_text(out / "branch_terminal.dat",
               "# terminal lambda=" + fmt(br.endpoint_lambda) + "\n" +
                   triple_block(br.terminal_u, br.terminal_v));
  return std::string(to_string(br.endpoint)) + " at lambda=" + fmt(br.endpoint_lambda);
}

std::string cmd_simulate(const RunConfig& cfg, const fs::path& out) {
  const Trajectory traj = simulate(make_sim_config(cfg));

  std::ostringstream csv;
  csv << "regime,final_time,steps,dt_halvings,dt_final,sup_v_bound,sup_v_observed,"
         "max_clamped\n"
      << to_string(traj.regime) << "," << fmt(traj.final_time) << "," << traj.steps << ","
      << traj.dt_halvings << "," << fmt(traj.dt_final) << "," << fmt(traj.sup_v_bound)
      << "," << fmt(traj.sup_v_observed) << "," << fmt(traj.max_clamped) << "\n";
  write_text(out / "simulate.csv", csv.str());

  std::ostringstream tr;
  tr << "time,sup_u,sup_v\n";
  for (size_t k = 0; k < traj.times.size(); ++k)
    tr << fmt(traj.times[k]) << "," << fmt(traj.u_snapshots[k].sup_norm()) << ","
       << fmt(traj.v_snapshots[k].sup_norm()) << "\n";
  write_text(out / "trajectory.csv", tr.str());
  write_text(out / "final_u.dat", profile_dat(traj.final_u));
  write_text(out / "final_v.dat", profile_dat(traj.final_v));
  return to_string(traj.regime);
}

std::string dispatch_single(const RunConfig& cfg, const fs::path& out);

std::string cmd_sweep(const RunConfig& cfg, const fs::path& out, int workers) {
  const std::vector<double> lambdas = cfg.sweep_lambda.values();
  std::vector<std::string> summaries(lambdas.size());
  parallel_for(static_cast<int>(lambdas.size()), workers, [&](int k) {
    RunConfig sub = cfg;
    sub.lambda = lambdas[k];
    sub.command = cfg.sweep_command;
    const fs::path subdir = out / ("lambda_" + std::to_string(k));
    fs::create_directories(subdir);
    summaries[k] = dispatch_single(sub, subdir);
  });

  std::ostringstream csv;
  csv << "index,lambda,result\n";
  for (size_t k = 0; k < lambdas.size(); ++k)
    csv << k << "," << fmt(lambdas[k]) << "," << summaries[k] << "\n";
  write_text(out / "sweep.csv", csv.str());
  return std::to_string(lambdas.size()) + " runs";
}

// Figure protocol: Omega = (0, 4), n = 256, d = 1, chi = 1, D = 1, mu = 2,
// gamma = 0.6, u0 = v0 = 0.1 + 0.1 sin(5x), T = 500, dt = 1e-3, and the
// lambda set {-1, 1.5, 5}; the response distinguishes the two figures.
std::string cmd_figure(const RunConfig& base, const std::string& response,
                       const std::string& stem, const fs::path& out, int workers) {
  RunConfig cfg; // pinned protocol: deliberately not inheriting model keys
  cfg.response_label = response;
  cfg.zeta = 1.0;
  cfg.out_dir = base.out_dir;
  const double lambdas[3] = {-1.0, 1.5, 5.0};

  std::vector<Trajectory> trajs(3);
  parallel_for(3, workers, [&](int k) {
    RunConfig sub = cfg;
    sub.lambda = lambdas[k];
    trajs[k] = simulate(make_sim_config(sub));
  });

  std::ostringstream csv;
  csv << "lambda,regime,sup_u,sup_v\n";
  for (int k = 0; k < 3; ++k) {
    csv << fmt(lambdas[k]) << "," << to_string(trajs[k].regime) << ","
        << fmt(trajs[k].final_u.sup_norm()) << "," << fmt(trajs[k].final_v.sup_norm())
        << "\n";
    const std::string tag = stem + "_case" + std::to_string(k);
    write_text(out / (tag + "_u.dat"), profile_dat(trajs[k].final_u));
    write_text(out / (tag + "_v.dat"), profile_dat(trajs[k].final_v));
  }
  write_text(out / (stem + ".csv"), csv.str());
  std::string summary;
  for (int k = 0; k < 3; ++k)
    summary += std::string(k ? " " : "") + to_string(trajs[k].regime);
  return summary;
}

std::string dispatch_single(const RunConfig& cfg, const fs::path& out) {
  if (cfg.command == "eig") return cmd_eig(cfg, out);
  if (cfg.command == "logistic") return cmd_logistic(cfg, out);
  if (cfg.command == "thresholds") return cmd_thresholds(cfg, out);
  if (cfg.command == "steady") return cmd_steady(cfg, out);
  if (cfg.command == "branch") return cmd_branch(cfg, out);
  if (cfg.command == "simulate") return cmd_simulate(cfg, out);
  throw config_error("unknown command '" + cfg.command + "'");
}

} // namespace

std::string run_command(const RunConfig& cfg, int workers) {
  validate_config(cfg);
  if (workers < 1) throw config_error("workers must be at least 1");
  const fs::path out(cfg.out_dir);
  fs::create_directories(out);
  if (cfg.command == "sweep") return cmd_sweep(cfg, out, workers);
  if (cfg.command == "figure2")
    return cmd_figure(cfg, "lotka-volterra", "figure2", out, workers);
  if (cfg.command == "figure4") return cmd_figure(cfg, "holling3", "figure4", out, workers);
  return dispatch_single(cfg, out);
}

} // namespace preytaxis
