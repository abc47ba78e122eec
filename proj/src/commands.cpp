#include "turnpike/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <set>

#include "json.hpp"
#include "turnpike/analytic_lq.hpp"
#include "turnpike/errors.hpp"
#include "turnpike/nlp.hpp"
#include "turnpike/parallel.hpp"
#include "turnpike/scenario_io.hpp"
#include "turnpike/symmetry.hpp"
#include "turnpike/transcription.hpp"
#include "turnpike/turnpike.hpp"

namespace turnpike::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    auto d = std::chrono::steady_clock::now() - start_;
    return std::chrono::duration<double, std::milli>(d).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

LoadedScenario load(const CommandOptions& opts) {
  if (opts.scenario_path.empty()) throw ParseError("no scenario file given (--scenario)");
  LoadedScenario s = load_scenario_file(opts.scenario_path);
  if (opts.nodes > 0) {
    if (opts.nodes < 2) throw ParseError("--nodes must be at least 2");
    s.transcription.N = opts.nodes;
  }
  if (opts.tol > 0.0) s.solver.tol_kkt = opts.tol;
  if (opts.seed >= 0) s.solver.seed = static_cast<unsigned>(opts.seed);
  return s;
}

fs::path require_out_dir(const CommandOptions& opts) {
  if (opts.out_dir.empty()) throw ParseError("no output directory given (--out)");
  fs::path dir(opts.out_dir);
  fs::create_directories(dir);
  return dir;
}

void write_json_file(const fs::path& path, const ordered_json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open '" + path.string() + "' for writing");
  out << doc.dump(2) << '\n';
}

ordered_json to_json(const Eigen::VectorXd& x) {
  ordered_json arr = ordered_json::array();
  for (Eigen::Index i = 0; i < x.size(); ++i) arr.push_back(x(i));
  return arr;
}

std::string describe(const Eigen::VectorXd& x) {
  std::string out = "[";
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (i > 0) out += ", ";
    out += format_double(x(i));
  }
  return out + "]";
}

/// The run manifest is deliberately plain text: it echoes every effective
/// option so a run can be reproduced, and it is the one output file whose
/// bytes may differ between reruns (wall time).
void write_manifest(const fs::path& dir, const std::string& command, const CommandOptions& opts,
                    const LoadedScenario& s, double wall_ms) {
  std::ofstream out(dir / "manifest.txt", std::ios::binary);
  if (!out) throw ParseError("cannot open manifest.txt for writing");
  out << "tool = turnpike " << kToolVersion << '\n';
  out << "command = " << command << '\n';
  out << "scenario_file = " << opts.scenario_path << '\n';
  out << "out_dir = " << opts.out_dir << '\n';
  if (!opts.T_list.empty()) {
    out << "T_list =";
    for (double T : opts.T_list) out << ' ' << format_double(T);
    out << '\n';
  }
  out << "threads = " << par::max_threads() << '\n';
  out << "wall_time_ms = " << format_double(wall_ms) << '\n';
  out << "--- effective scenario ---\n";
  out << serialize_scenario(s);
}

/// True when the scenario is exactly the problem the closed form solves:
/// scalar point mass, unit speed and effort weights, no boxes.
bool closed_form_applies(const LoadedScenario& s) {
  const Scenario& sc = s.scenario;
  if (sc.model != "double_integrator") return false;
  if (sc.cost.w_v.size() != 1 || sc.cost.w_u.size() != 1) return false;
  if (sc.cost.w_v(0) != 1.0 || sc.cost.w_u(0) != 1.0) return false;
  if (sc.cost.scale != 0.5) return false;
  if (sc.cost.v_ref.size() > 0 && sc.cost.v_ref.cwiseAbs().maxCoeff() > 0.0) return false;
  if (!sc.control_bounds.empty() || !sc.state_bounds.empty()) return false;
  return true;
}

Trajectory solve_closed_form(const LoadedScenario& s, double T, ordered_json& metrics) {
  const Scenario& sc = s.scenario;
  CostateInit init = solve_costates(sc.x0.q(0), sc.x0.v(0), sc.xT.q(0), sc.xT.v(0), T);
  Trajectory traj = sample_optimal(init, sc.x0.q(0), s.transcription.N + 1);
  metrics["method"] = "analytic";
  metrics["objective"] = trajectory_cost(traj, sc.cost);
  metrics["lambda1_0"] = init.lambda1_0;
  metrics["lambda2_0"] = init.lambda2_0;
  return traj;
}

Trajectory solve_collocation(const LoadedScenario& s, double T, ordered_json& metrics,
                             bool& converged) {
  Scenario sc = s.scenario;
  sc.horizon = T;
  auto model = build_model(s);
  NlpProblem problem = transcribe(model, sc, s.transcription);
  Eigen::VectorXd z0 = initial_guess(sc, s.transcription);
  SolveReport report = solve(problem, z0, s.solver);
  converged = report.converged;
  metrics["method"] = "collocation";
  metrics["objective"] = problem.objective(report.z_star);
  metrics["kkt_residual"] = report.kkt_residual;
  metrics["feasibility"] = report.feasibility;
  metrics["converged"] = report.converged;
  metrics["outer_iterations"] = report.outer_iterations;
  metrics["inner_iterations"] = report.inner_iterations;
  return solution_trajectory(report, model, sc, s.transcription);
}

/// Velocity box the optimal steady state is searched over: the scenario's
/// state box when it gives finite velocity bounds, otherwise a symmetric
/// box wide enough to contain the boundary and reference velocities.
Box reference_box(const LoadedScenario& s) {
  const Eigen::Index nq = s.scenario.x0.dim();
  if (!s.scenario.state_bounds.empty()) {
    Eigen::VectorXd lo = s.scenario.state_bounds.lo.segment(nq, nq);
    Eigen::VectorXd hi = s.scenario.state_bounds.hi.segment(nq, nq);
    if (lo.allFinite() && hi.allFinite()) return Box{lo, hi};
  }
  double radius = 10.0;
  radius = std::max(radius, s.scenario.x0.v.cwiseAbs().maxCoeff());
  radius = std::max(radius, s.scenario.xT.v.cwiseAbs().maxCoeff());
  if (s.scenario.cost.v_ref.size() > 0)
    radius = std::max(radius, 2.0 * s.scenario.cost.v_ref.cwiseAbs().maxCoeff());
  return Box{Eigen::VectorXd::Constant(nq, -radius), Eigen::VectorXd::Constant(nq, radius)};
}

ordered_json horizon_json(const HorizonDiagnostics& h) {
  ordered_json row;
  row["T"] = h.T;
  row["delta"] = std::isfinite(h.delta) ? ordered_json(h.delta) : ordered_json(nullptr);
  row["window_defined"] = h.window.defined;
  row["tau0"] = h.window.tau0;
  row["tauT"] = h.window.tauT;
  row["max_deviation"] = h.max_deviation;
  row["window_deviation"] = h.window_deviation;
  row["scaled_deviation"] = h.scaled;
  row["theta"] = to_json(h.theta);
  return row;
}

int guarded(const std::string& command, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ParseError& e) {
    std::cerr << command << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const ContractError& e) {
    std::cerr << command << ": invalid input: " << e.what() << '\n';
    return kExitUsage;
  } catch (const RangeError& e) {
    std::cerr << command << ": invalid input: " << e.what() << '\n';
    return kExitUsage;
  } catch (const OverflowError& e) {
    std::cerr << command << ": " << e.what() << '\n';
    return kExitUsage;
  } catch (const RootFindError& e) {
    std::cerr << command << ": " << e.what() << '\n';
    return kExitNoConverge;
  } catch (const DivergenceError& e) {
    std::cerr << command << ": " << e.what() << '\n';
    return kExitNoConverge;
  } catch (const std::exception& e) {
    std::cerr << command << ": internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace

int cmd_solve(const CommandOptions& opts) {
  return guarded("solve", [&]() -> int {
    Stopwatch clock;
    LoadedScenario s = load(opts);
    fs::path dir = require_out_dir(opts);

    ordered_json metrics;
    bool converged = false;
    Trajectory traj = solve_collocation(s, s.scenario.horizon, metrics, converged);

    write_trajectory_csv((dir / "trajectory.csv").string(), traj);
    write_json_file(dir / "metrics.json", metrics);
    write_manifest(dir, "solve", opts, s, clock.ms());

    std::cout << (converged ? "converged" : "not converged")
              << "  objective = " << format_double(metrics["objective"].get<double>())
              << "  kkt = " << format_double(metrics["kkt_residual"].get<double>())
              << "  feasibility = " << format_double(metrics["feasibility"].get<double>())
              << '\n';
    std::cout << "wrote " << (dir / "trajectory.csv").string() << '\n';
    return converged ? kExitOk : kExitNoConverge;
  });
}

int cmd_analytic(const CommandOptions& opts) {
  return guarded("analytic", [&]() -> int {
    Stopwatch clock;
    LoadedScenario s = load(opts);
    if (!closed_form_applies(s))
      throw ParseError(
          "closed form covers only the double integrator with unit weights and no bounds");
    fs::path dir = require_out_dir(opts);

    ordered_json metrics;
    Trajectory traj = solve_closed_form(s, s.scenario.horizon, metrics);

    const double T = s.scenario.horizon;
    const double q_tilde = s.scenario.xT.q(0) - s.scenario.x0.q(0);
    double max_v = 0.0;
    double max_u = 0.0;
    for (Eigen::Index k = 0; k < traj.node_count(); ++k) {
      max_v = std::max(max_v, std::abs(traj.states[static_cast<std::size_t>(k)].v(0)));
      max_u = std::max(max_u, std::abs(traj.controls[static_cast<std::size_t>(k)](0)));
    }
    metrics["max_abs_v"] = max_v;
    metrics["max_abs_u"] = max_u;
    const bool rest = s.scenario.x0.v(0) == 0.0 && s.scenario.xT.v(0) == 0.0;
    if (q_tilde != 0.0 && rest) {
      metrics["velocity_ratio"] = rest_velocity_ratio(T);
      metrics["control_ratio"] = rest_control_ratio(T);
    } else if (q_tilde != 0.0) {
      metrics["velocity_ratio"] = T * max_v / std::abs(q_tilde);
      metrics["control_ratio"] = T * max_u / std::abs(q_tilde);
    }

    write_trajectory_csv((dir / "trajectory.csv").string(), traj);
    write_json_file(dir / "metrics.json", metrics);
    write_manifest(dir, "analytic", opts, s, clock.ms());

    std::cout << "lambda(0) = (" << format_double(metrics["lambda1_0"].get<double>()) << ", "
              << format_double(metrics["lambda2_0"].get<double>())
              << ")  objective = " << format_double(metrics["objective"].get<double>()) << '\n';
    std::cout << "wrote " << (dir / "trajectory.csv").string() << '\n';
    return kExitOk;
  });
}

int cmd_sweep(const CommandOptions& opts) {
  return guarded("sweep", [&]() -> int {
    Stopwatch clock;
    LoadedScenario s = load(opts);
    if (opts.T_list.empty()) throw ParseError("sweep requires --T-list");
    std::vector<double> horizons = opts.T_list;
    std::sort(horizons.begin(), horizons.end());
    horizons.erase(std::unique(horizons.begin(), horizons.end()), horizons.end());
    for (double T : horizons) {
      if (!(T > 0.0)) throw ParseError("every sweep horizon must be positive");
    }
    fs::path dir = require_out_dir(opts);

    const bool analytic = closed_form_applies(s);
    auto model = build_model(s);
    std::vector<std::pair<double, Trajectory>> sweep;
    bool all_converged = true;
    for (double T : horizons) {
      ordered_json metrics;
      Trajectory traj;
      if (analytic) {
        traj = solve_closed_form(s, T, metrics);
      } else {
        bool converged = false;
        traj = solve_collocation(s, T, metrics, converged);
        all_converged = all_converged && converged;
      }
      fs::path sub = dir / ("T_" + format_double(T));
      fs::create_directories(sub);
      write_trajectory_csv((sub / "trajectory.csv").string(), traj);
      write_json_file(sub / "metrics.json", metrics);
      sweep.emplace_back(T, std::move(traj));
    }

    VelocitySteadyState ref_state =
        optimal_velocity_steady_state(*model, s.scenario.cost, reference_box(s));
    TurnpikeReference ref{ref_state.v_bar, ref_state.u_bar};
    TurnpikeReport report = analyze_sweep(sweep, ref);

    ordered_json doc;
    doc["reference"] = {{"v_bar", to_json(ref.v_bar)},
                        {"u_bar", to_json(ref.u_bar)},
                        {"residual", ref_state.residual},
                        {"degenerate", ref_state.degenerate}};
    doc["C_estimate"] = report.C_estimate;
    doc["growth_flag"] = report.growth_flag;
    doc["eps_grid"] = to_json(report.eps_grid);
    doc["nu_hat"] = to_json(report.envelope.nu_hat);
    doc["C_whole"] = report.envelope.C_whole;
    doc["implication_ok"] = report.envelope.implication_ok;
    ordered_json rows = ordered_json::array();
    for (const HorizonDiagnostics& h : report.horizons) rows.push_back(horizon_json(h));
    doc["horizons"] = rows;
    write_json_file(dir / "report.json", doc);
    write_manifest(dir, "sweep", opts, s, clock.ms());

    std::cout << "swept " << horizons.size() << " horizons ("
              << (analytic ? "analytic" : "collocation")
              << ")  C_estimate = " << format_double(report.C_estimate)
              << "  growth_flag = " << (report.growth_flag ? "true" : "false") << '\n';
    std::cout << "wrote " << (dir / "report.json").string() << '\n';
    return all_converged ? kExitOk : kExitNoConverge;
  });
}

int cmd_check(const CommandOptions& opts) {
  return guarded("check", [&]() -> int {
    LoadedScenario s = load(opts);
    auto model = build_model(s);

    struct Row {
      std::string name;
      bool pass = false;
      double value = 0.0;
      std::string note;
    };
    std::vector<Row> rows;
    auto run_check = [&rows](const std::string& name, double threshold,
                             const std::function<double()>& fn) {
      Row row;
      row.name = name;
      try {
        row.value = fn();
        row.pass = row.value <= threshold;
      } catch (const std::exception& e) {
        row.pass = false;
        row.value = std::numeric_limits<double>::quiet_NaN();
        row.note = e.what();
      }
      rows.push_back(std::move(row));
    };

    std::mt19937 rng(s.solver.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    auto random_vector = [&](Eigen::Index n) {
      Eigen::VectorXd x(n);
      for (Eigen::Index i = 0; i < n; ++i) x(i) = unit(rng);
      return x;
    };

    run_check("derivatives", 1e-6, [&]() {
      LoadedScenario small = s;
      small.transcription.N = std::min(small.transcription.N, 40);
      NlpProblem problem = transcribe(model, small.scenario, small.transcription);
      Eigen::VectorXd z = initial_guess(small.scenario, small.transcription);
      z += 0.1 * random_vector(z.size());
      return gradient_check(problem, z, 1e-6);
    });

    run_check("equivariance", 1e-8, [&]() {
      auto action = default_action(*model);
      double worst = 0.0;
      for (int trial = 0; trial < 5; ++trial) {
        Eigen::VectorXd g = action->exp(random_vector(action->group_dim()), 1.0);
        State x0{s.scenario.x0.q + 0.5 * random_vector(model->config_dim()),
                 s.scenario.x0.v + 0.5 * random_vector(model->config_dim())};
        Eigen::VectorXd a = random_vector(model->control_dim());
        Eigen::VectorXd b = random_vector(model->control_dim());
        ControlSignal u = [a, b](double t) { return a + std::sin(t) * b; };
        worst = std::max(worst, check_equivariance(*model, *action, g, x0, u, 2.0, 101));
      }
      return worst;
    });

    run_check("steady state at vT", 1e-10, [&]() {
      return find_velocity_steady_state(*model, s.scenario.xT.v).residual;
    });

    run_check("optimal steady state", 1e-10, [&]() {
      return optimal_velocity_steady_state(*model, s.scenario.cost, reference_box(s)).residual;
    });

    bool all_pass = true;
    std::size_t width = 0;
    for (const Row& row : rows) width = std::max(width, row.name.size());
    for (const Row& row : rows) {
      all_pass = all_pass && row.pass;
      std::cout << row.name << std::string(width + 2 - row.name.size(), ' ')
                << (row.pass ? "PASS" : "FAIL") << "  " << format_double(row.value);
      if (!row.note.empty()) std::cout << "  (" << row.note << ")";
      std::cout << '\n';
    }
    return all_pass ? kExitOk : kExitInternal;
  });
}

int cmd_trims(const CommandOptions& opts) {
  return guarded("trims", [&]() -> int {
    LoadedScenario s = load(opts);
    auto model = build_model(s);
    const Scenario& sc = s.scenario;

    std::vector<std::pair<std::string, Eigen::VectorXd>> candidates;
    candidates.emplace_back("rest", Eigen::VectorXd::Zero(model->config_dim()));
    candidates.emplace_back("v0", sc.x0.v);
    candidates.emplace_back("vT", sc.xT.v);
    candidates.emplace_back("transfer qT-q0 over T",
                            ((sc.xT.q - sc.x0.q) / sc.horizon).eval());

    std::cout << "velocity steady states for " << model->name() << ":\n";
    for (const auto& [label, v_bar] : candidates) {
      std::cout << "  " << label << ": v_bar = " << describe(v_bar);
      try {
        VelocitySteadyState vss = find_velocity_steady_state(*model, v_bar);
        std::cout << "  u_bar = " << describe(vss.u_bar)
                  << "  residual = " << format_double(vss.residual) << '\n';
      } catch (const RootFindError& e) {
        std::cout << "  (no steady state: " << e.what() << ")\n";
      }
    }

    VelocitySteadyState best = optimal_velocity_steady_state(*model, sc.cost, reference_box(s));
    std::cout << "optimal for the stage cost: v_bar = " << describe(best.v_bar)
              << "  u_bar = " << describe(best.u_bar)
              << "  residual = " << format_double(best.residual)
              << (best.degenerate ? "  (degenerate: minimum-norm pick)" : "") << '\n';
    return kExitOk;
  });
}

}  // namespace turnpike::cli
