#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fpot/dual.hpp"
#include "fpot/gaussian.hpp"
#include "fpot/io.hpp"
#include "fpot/markov.hpp"
#include "fpot/penalty.hpp"
#include "fpot/sa.hpp"
#include "fpot/solve.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Options {
  std::string input;
  std::string out = ".";
  std::optional<double> eps;
  std::optional<double> kappa;
  std::optional<long> iters;
  std::uint64_t seed = 0;
  std::string estimator = "conditional";
  int split_k = 2;
  int workers = 0;  // 0 means all available cores
  bool no_timestamp = false;
  std::string method = "newton";
  bool dump_coupling = false;
  std::vector<double> grid;  // lo, hi, count for the two-feature dual surface
};

int resolve_workers(const Options& opt) {
  if (opt.workers > 0) return opt.workers;
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::string vector_string(const fpot::Vector& v) {
  std::string out = "[";
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (k > 0) out += ", ";
    out += fpot::format_double(v(k));
  }
  out += "]";
  return out;
}

json vec_json(const fpot::Vector& v) {
  json a = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v(k));
  return a;
}

json mat_json(const fpot::Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

std::string status_name(fpot::SolveStatus status) {
  switch (status) {
    case fpot::SolveStatus::kConverged: return "converged";
    case fpot::SolveStatus::kIterLimit: return "iteration-limit";
    case fpot::SolveStatus::kDiverged: return "diverged";
  }
  return "unknown";
}

std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string write_report(const Options& opt, json j) {
  if (!opt.no_timestamp) j["timestamp"] = utc_timestamp();
  fs::path path = fs::path(opt.out) / "report.json";
  fpot::write_text_file(path.string(), j.dump(2) + "\n");
  return path.string();
}

std::string write_table(const Options& opt, const std::string& name,
                        const std::vector<std::string>& header, const fpot::Matrix& rows) {
  fs::path path = fs::path(opt.out) / name;
  fpot::write_csv(path.string(), header, rows);
  return path.string();
}

void dump_coupling(const Options& opt, const fpot::Problem& pr, const fpot::Vector& lambda,
                   double eps) {
  fpot::DualState state = fpot::evaluate_dual(pr, lambda, eps, resolve_workers(opt));
  fpot::Coupling coupling = fpot::coupling_from_state(pr, state);
  fpot::Matrix rows(coupling.gamma.size(), 3);
  Eigen::Index n = 0;
  for (Eigen::Index i = 0; i < coupling.gamma.rows(); ++i) {
    for (Eigen::Index j = 0; j < coupling.gamma.cols(); ++j, ++n) {
      rows(n, 0) = static_cast<double>(i);
      rows(n, 1) = static_cast<double>(j);
      rows(n, 2) = coupling.gamma(i, j);
    }
  }
  std::cout << "wrote " << write_table(opt, "coupling.csv", {"i", "j", "mass"}, rows) << "\n";
}

void dump_dual_surface(const Options& opt, const fpot::Problem& pr, double eps,
                       const fpot::Penalty* penalty) {
  if (pr.feature_count() != 2) {
    throw std::invalid_argument("the dual surface grid needs exactly two features");
  }
  const double lo = opt.grid[0];
  const double hi = opt.grid[1];
  const auto count = static_cast<Eigen::Index>(opt.grid[2]);
  if (!(hi > lo) || count < 2) throw std::invalid_argument("grid must be lo hi count with count >= 2");
  fpot::Matrix rows(count * count, 3);
  fpot::Vector lambda(2);
  for (Eigen::Index a = 0; a < count; ++a) {
    lambda(0) = lo + (hi - lo) * static_cast<double>(a) / static_cast<double>(count - 1);
    for (Eigen::Index b = 0; b < count; ++b) {
      lambda(1) = lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(count - 1);
      double value = penalty ? fpot::dual_value_fprp(pr, lambda, eps, *penalty)
                             : fpot::dual_value_fpr(pr, lambda, eps);
      rows(a * count + b, 0) = lambda(0);
      rows(a * count + b, 1) = lambda(1);
      rows(a * count + b, 2) = value;
    }
  }
  std::cout << "wrote "
            << write_table(opt, "dual_surface.csv", {"lambda_1", "lambda_2", "dual_value"}, rows)
            << "\n";
}

int run_discrete_solve(const Options& opt, bool penalized) {
  const std::string command = penalized ? "solve-fprp" : "solve-fpr";
  fpot::DiscreteFile file = fpot::load_discrete_file(opt.input);
  const fpot::Problem& pr = file.problem;
  const double eps = opt.eps.value_or(file.epsilon);

  std::unique_ptr<fpot::QuadraticPenalty> penalty;
  if (penalized) {
    double kappa = 0.0;
    if (opt.kappa) {
      kappa = *opt.kappa;
    } else if (file.has_kappa) {
      kappa = file.kappa;
    } else {
      throw std::invalid_argument("field kappa: missing (set it in the file or pass --kappa)");
    }
    penalty = std::make_unique<fpot::QuadraticPenalty>(kappa);
  }
  fs::create_directories(opt.out);

  json j;
  j["command"] = command;
  j["method"] = opt.method;
  j["epsilon"] = eps;
  if (penalty) j["kappa"] = penalty->kappa();

  bool converged = false;
  fpot::Vector lambda;
  if (opt.method == "newton") {
    fpot::SolveOptions so;
    so.max_iters = static_cast<int>(opt.iters.value_or(so.max_iters));
    so.workers = resolve_workers(opt);
    fpot::SolveReport rep = penalty ? fpot::solve_fprp(pr, eps, *penalty, so)
                                    : fpot::solve_fpr(pr, eps, so);
    converged = rep.converged();
    lambda = rep.lambda_star;

    j["status"] = status_name(rep.status);
    j["converged"] = converged;
    j["iterations"] = rep.iterations;
    j["dual_value"] = rep.dual_value;
    j["primal_value"] = rep.primal_value;
    j["gap"] = rep.gap;
    j["transport_cost"] = rep.transport_cost;
    j["entropy"] = rep.entropy;
    j["lambda"] = vec_json(rep.lambda_star);
    j["moment_residual"] = vec_json(rep.moment_residual);
    j["moment_residual_norm"] = rep.moment_residual.lpNorm<Eigen::Infinity>();
    if (!rep.message.empty()) j["message"] = rep.message;

    fpot::Matrix trace(rep.trace.size(), 3);
    for (std::size_t n = 0; n < rep.trace.size(); ++n) {
      trace(static_cast<Eigen::Index>(n), 0) = static_cast<double>(n);
      trace(static_cast<Eigen::Index>(n), 1) = rep.trace[n].value;
      trace(static_cast<Eigen::Index>(n), 2) = rep.trace[n].grad_norm;
    }

    std::cout << command << ": " << status_name(rep.status) << " after " << rep.iterations
              << " iterations\n"
              << "dual value " << fpot::format_double(rep.dual_value) << "\n"
              << "primal value " << fpot::format_double(rep.primal_value) << "\n"
              << "gap " << fpot::format_double(rep.gap) << "\n"
              << "moment residual sup norm "
              << fpot::format_double(rep.moment_residual.lpNorm<Eigen::Infinity>()) << "\n"
              << "lambda_star " << vector_string(rep.lambda_star) << "\n";
    std::cout << "wrote " << write_report(opt, j) << "\n";
    std::cout << "wrote "
              << write_table(opt, "trace.csv", {"n", "dual_value", "grad_norm"}, trace) << "\n";
  } else {
    fpot::SAOptions sa;
    sa.horizon = opt.iters.value_or(sa.horizon);
    sa.seed = opt.seed;
    sa.estimator = opt.estimator == "split" ? fpot::Estimator::kSplit : fpot::Estimator::kConditional;
    sa.split_k = opt.split_k;
    fpot::SATrace tr = opt.method == "sgd" ? fpot::sgd_solve(pr, eps, penalty.get(), sa)
                                           : fpot::zap_solve(pr, eps, penalty.get(), sa);
    converged = !tr.diverged;
    lambda = eps * tr.zeta_averaged;

    fpot::Vector m = fpot::grad_J(pr, tr.zeta_averaged, eps);
    fpot::Vector stationarity = penalty ? fpot::Vector(m + penalty->dual_penalty_grad(lambda)) : m;
    double dual = penalty ? fpot::dual_value_fprp(pr, lambda, eps, *penalty)
                          : fpot::dual_value_fpr(pr, lambda, eps);

    j["status"] = tr.diverged ? "diverged" : "completed";
    j["converged"] = converged;
    j["iterations"] = tr.iterations;
    j["seed"] = tr.seed;
    j["estimator"] = opt.estimator;
    j["dual_value"] = dual;
    j["lambda"] = vec_json(lambda);
    j["moment_residual"] = vec_json(m);
    j["moment_residual_norm"] = m.lpNorm<Eigen::Infinity>();
    j["stationarity_norm"] = stationarity.lpNorm<Eigen::Infinity>();

    fpot::Matrix trace(tr.m_tilde.rows(), 2);
    for (Eigen::Index n = 0; n < tr.m_tilde.rows(); ++n) {
      trace(n, 0) = static_cast<double>(n + 1);
      trace(n, 1) = tr.m_tilde.row(n).norm();
    }

    std::cout << command << ": " << (tr.diverged ? "diverged" : "completed") << " after "
              << tr.iterations << " steps (" << opt.method << ")\n"
              << "dual value " << fpot::format_double(dual) << "\n"
              << "moment residual sup norm "
              << fpot::format_double(m.lpNorm<Eigen::Infinity>()) << "\n"
              << "lambda_star " << vector_string(lambda) << "\n";
    std::cout << "wrote " << write_report(opt, j) << "\n";
    std::cout << "wrote "
              << write_table(opt, "trace.csv", {"n", "grad_estimate_norm"}, trace) << "\n";
  }

  if (opt.dump_coupling) dump_coupling(opt, pr, lambda, eps);
  if (!opt.grid.empty()) dump_dual_surface(opt, pr, eps, penalty.get());

  if (!converged) {
    if (!penalized) {
      std::cerr << "hint: unbounded multipliers usually mean infeasible moment targets; "
                   "solve-fprp with a penalty stays bounded\n";
    }
    return 2;
  }
  return 0;
}

int run_continuation(const Options& opt) {
  fpot::DiscreteFile file = fpot::load_discrete_file(opt.input);
  const fpot::Problem& pr = file.problem;

  fpot::ContinuationSchedule schedule;
  if (opt.eps) schedule.eps_min = *opt.eps;
  fpot::SolveOptions so;
  so.max_iters = static_cast<int>(opt.iters.value_or(so.max_iters));
  so.workers = resolve_workers(opt);
  fs::create_directories(opt.out);

  fpot::ContinuationReport rep = fpot::continuation_fp(pr, schedule, so);

  fpot::Matrix stages(static_cast<Eigen::Index>(rep.stages.size()), 6);
  for (std::size_t k = 0; k < rep.stages.size(); ++k) {
    const fpot::SolveReport& s = rep.stages[k];
    auto row = static_cast<Eigen::Index>(k);
    stages(row, 0) = s.epsilon;
    stages(row, 1) = s.dual_value;
    stages(row, 2) = s.transport_cost;
    stages(row, 3) = s.entropy;
    stages(row, 4) = s.iterations;
    stages(row, 5) = s.converged() ? 1.0 : 0.0;
  }

  json j;
  j["command"] = "continuation";
  j["completed"] = rep.completed;
  j["stage_count"] = rep.stages.size();
  j["epsilon_final"] = rep.stages.empty() ? schedule.eps0 : rep.stages.back().epsilon;
  j["lambda_final"] = vec_json(rep.lambda_final);
  j["dual_value_unregularized"] = rep.dual_fp_final;

  std::cout << "continuation: " << rep.stages.size() << " stages, "
            << (rep.completed ? "completed" : "stopped early") << "\n"
            << "final epsilon "
            << fpot::format_double(rep.stages.empty() ? schedule.eps0 : rep.stages.back().epsilon)
            << "\n"
            << "unregularized dual value " << fpot::format_double(rep.dual_fp_final) << "\n"
            << "lambda_final " << vector_string(rep.lambda_final) << "\n";
  std::cout << "wrote " << write_report(opt, j) << "\n";
  std::cout << "wrote "
            << write_table(opt, "stages.csv",
                           {"epsilon", "dual_value", "transport_cost", "entropy", "iterations",
                            "converged"},
                           stages)
            << "\n";

  if (opt.dump_coupling && !rep.stages.empty()) {
    dump_coupling(opt, pr, rep.lambda_final, rep.stages.back().epsilon);
  }
  return rep.completed ? 0 : 2;
}

int run_gaussian(const Options& opt) {
  fpot::GaussianFile file = fpot::load_gaussian_file(opt.input);
  const double eps = opt.eps.value_or(file.epsilon);
  fs::create_directories(opt.out);

  fpot::OptimalKernelResult res = fpot::optimal_kernel(file.target, eps);

  json j;
  j["command"] = "gaussian";
  j["epsilon"] = eps;
  j["dimension"] = file.target.m_y.size();
  j["sigma_t"] = mat_json(res.kernel.sigma_t);
  j["lambda1"] = vec_json(res.multiplier.lambda1);
  j["lambda2"] = mat_json(res.multiplier.lambda2);
  j["riccati_residual"] = res.riccati_residual;

  std::cout << "gaussian: dimension " << file.target.m_y.size() << ", epsilon "
            << fpot::format_double(eps) << "\n"
            << "sigma_t diagonal " << vector_string(res.kernel.sigma_t.diagonal()) << "\n"
            << "lambda1 " << vector_string(res.multiplier.lambda1) << "\n"
            << "riccati residual " << fpot::format_double(res.riccati_residual) << "\n";
  std::cout << "wrote " << write_report(opt, j) << "\n";
  return 0;
}

int run_markov(const Options& opt) {
  fpot::MarkovFile file = fpot::load_markov_file(opt.input);
  fpot::MarkovProblem pr = file.problem;
  if (opt.eps) {
    pr.epsilon = *opt.eps;
    pr.validate();
  }
  std::unique_ptr<fpot::QuadraticPenalty> penalty;
  if (opt.kappa) penalty = std::make_unique<fpot::QuadraticPenalty>(*opt.kappa);
  fs::create_directories(opt.out);

  fpot::TrackingOptions to;
  to.iterations = opt.iters.value_or(to.iterations);
  to.seed = opt.seed;
  fpot::TrackingReport rep = fpot::tracking_solve(pr, penalty.get(), to);

  fpot::Matrix table(pr.steps(), 4);
  for (Eigen::Index k = 0; k < pr.steps(); ++k) {
    table(k, 0) = static_cast<double>(k + 1);
    table(k, 1) = pr.r(k);
    table(k, 2) = rep.achieved(k);
    table(k, 3) = rep.error(k);
  }

  fpot::Matrix trace(rep.trace.m_tilde.rows(), 2);
  for (Eigen::Index n = 0; n < rep.trace.m_tilde.rows(); ++n) {
    trace(n, 0) = static_cast<double>(n + 1);
    trace(n, 1) = rep.trace.m_tilde.row(n).norm();
  }

  json j;
  j["command"] = "markov-track";
  j["epsilon"] = pr.epsilon;
  if (penalty) j["kappa"] = penalty->kappa();
  j["status"] = rep.trace.diverged ? "diverged" : "completed";
  j["converged"] = !rep.trace.diverged;
  j["iterations"] = rep.trace.iterations;
  j["seed"] = rep.trace.seed;
  j["lambda"] = vec_json(rep.lambda_final);
  j["targets"] = vec_json(pr.r);
  j["achieved"] = vec_json(rep.achieved);
  j["max_error"] = rep.max_error;

  std::cout << "markov-track: " << (rep.trace.diverged ? "diverged" : "completed") << " after "
            << rep.trace.iterations << " steps\n"
            << "max tracking error " << fpot::format_double(rep.max_error) << "\n"
            << "lambda " << vector_string(rep.lambda_final) << "\n";
  std::cout << "wrote " << write_report(opt, j) << "\n";
  std::cout << "wrote "
            << write_table(opt, "tracking.csv", {"k", "target", "achieved", "error"}, table)
            << "\n";
  std::cout << "wrote " << write_table(opt, "trace.csv", {"n", "residual_norm"}, trace) << "\n";

  if (rep.trace.diverged) {
    std::cerr << "hint: unreachable targets push the multiplier to the guard; "
                 "pass --kappa to penalize tracking instead\n";
    return 2;
  }
  return 0;
}

int run_check(const Options& opt) {
  switch (fpot::peek_file_kind(opt.input)) {
    case fpot::FileKind::kDiscrete: {
      fpot::DiscreteFile file = fpot::load_discrete_file(opt.input);
      const fpot::Problem& pr = file.problem;
      std::cout << "discrete problem\n"
                << "source atoms " << pr.source_size() << "\n"
                << "target atoms " << pr.target_size() << "\n"
                << "point dimension " << pr.mu1().dim() << "\n"
                << "features " << pr.feature_count() << "\n"
                << "epsilon " << fpot::format_double(file.epsilon) << "\n";
      if (file.has_kappa) std::cout << "kappa " << fpot::format_double(file.kappa) << "\n";
      for (Eigen::Index m = 0; m < pr.feature_count(); ++m) {
        double lo = pr.features2().row(m).minCoeff();
        double hi = pr.features2().row(m).maxCoeff();
        double r = pr.targets()(m);
        std::cout << "target " << m << " " << fpot::format_double(r) << " "
                  << (r >= lo && r <= hi ? "inside" : "OUTSIDE") << " the feature range ["
                  << fpot::format_double(lo) << ", " << fpot::format_double(hi) << "]\n";
      }
      double min_eig = pr.min_feature_cov_eigenvalue();
      std::cout << "smallest feature covariance eigenvalue " << fpot::format_double(min_eig)
                << (min_eig < 1e-10 ? " (degenerate features under mu2)" : "") << "\n";
      return 0;
    }
    case fpot::FileKind::kGaussian: {
      fpot::GaussianFile file = fpot::load_gaussian_file(opt.input);
      fpot::Matrix sigma = file.target.sigma_y();
      fpot::SymmetricEigen eig = fpot::symmetric_eigen_sorted(sigma);
      std::cout << "gaussian target\n"
                << "dimension " << file.target.m_y.size() << "\n"
                << "epsilon " << fpot::format_double(file.epsilon) << "\n"
                << "covariance eigenvalue range ["
                << fpot::format_double(eig.values(eig.values.size() - 1)) << ", "
                << fpot::format_double(eig.values(0)) << "]\n"
                << "covariance is "
                << (eig.values(eig.values.size() - 1) > 0 ? "positive definite"
                                                          : "NOT positive definite")
                << "\n";
      return 0;
    }
    case fpot::FileKind::kMarkov: {
      fpot::MarkovFile file = fpot::load_markov_file(opt.input);
      const fpot::MarkovProblem& pr = file.problem;
      std::cout << "markov chain\n"
                << "states " << pr.state_count() << "\n"
                << "steps " << pr.steps() << "\n"
                << "state dimension " << pr.states.cols() << "\n"
                << "epsilon " << fpot::format_double(pr.epsilon) << "\n";
      double lo = pr.u.minCoeff();
      double hi = pr.u.maxCoeff();
      std::cout << "statistic range [" << fpot::format_double(lo) << ", "
                << fpot::format_double(hi) << "]\n";
      for (Eigen::Index k = 0; k < pr.steps(); ++k) {
        std::cout << "target " << k + 1 << " " << fpot::format_double(pr.r(k)) << " "
                  << (pr.r(k) >= lo && pr.r(k) <= hi ? "inside" : "OUTSIDE")
                  << " the statistic range\n";
      }
      return 0;
    }
  }
  throw std::invalid_argument("field type: unknown problem type");
}

void add_common(CLI::App* sub, Options& opt) {
  sub->add_option("--input", opt.input, "problem file (JSON)")->required();
  sub->add_option("--out", opt.out, "output directory (default: current directory)");
  sub->add_flag("--no-timestamp", opt.no_timestamp, "omit the timestamp from report.json");
}

void add_eps(CLI::App* sub, Options& opt, const char* what) {
  sub->add_option("--eps", opt.eps, what)->check(CLI::PositiveNumber);
}

void add_solver(CLI::App* sub, Options& opt) {
  sub->add_option("--iters", opt.iters, "iteration budget")->check(CLI::PositiveNumber);
  sub->add_option("--seed", opt.seed, "random seed for stochastic methods");
  sub->add_option("--method", opt.method, "newton, sgd, or zap")
      ->check(CLI::IsMember({"newton", "sgd", "zap"}));
  sub->add_option("--estimator", opt.estimator, "conditional or split moment estimator")
      ->check(CLI::IsMember({"conditional", "split"}));
  sub->add_option("--K", opt.split_k, "draws per step for the split estimator")
      ->check(CLI::PositiveNumber);
  sub->add_option("--workers", opt.workers, "kernel evaluation threads (default: all cores)")
      ->check(CLI::NonNegativeNumber);
  sub->add_flag("--dump-coupling", opt.dump_coupling, "write the optimal coupling as CSV");
  sub->add_option("--grid", opt.grid, "lo hi count: dual surface lattice for two features")
      ->expected(3);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"feature-projected entropic optimal transport toolkit"};
  app.require_subcommand(1);
  Options opt;

  CLI::App* fpr = app.add_subcommand("solve-fpr", "solve the moment-constrained dual");
  add_common(fpr, opt);
  add_eps(fpr, opt, "regularization epsilon (overrides the file)");
  add_solver(fpr, opt);

  CLI::App* fprp = app.add_subcommand("solve-fprp", "solve the penalized dual");
  add_common(fprp, opt);
  add_eps(fprp, opt, "regularization epsilon (overrides the file)");
  add_solver(fprp, opt);
  fprp->add_option("--kappa", opt.kappa, "quadratic penalty stiffness")
      ->check(CLI::PositiveNumber);

  CLI::App* cont = app.add_subcommand("continuation", "anneal epsilon toward the sharp dual");
  add_common(cont, opt);
  add_eps(cont, opt, "final epsilon of the schedule");
  cont->add_option("--iters", opt.iters, "iteration budget per stage")->check(CLI::PositiveNumber);
  cont->add_option("--workers", opt.workers, "kernel evaluation threads (default: all cores)")
      ->check(CLI::NonNegativeNumber);
  cont->add_flag("--dump-coupling", opt.dump_coupling, "write the final coupling as CSV");

  CLI::App* gauss = app.add_subcommand("gaussian", "closed-form optimal kernel for a Gaussian target");
  add_common(gauss, opt);
  add_eps(gauss, opt, "regularization epsilon (overrides the file)");

  CLI::App* markov = app.add_subcommand("markov-track", "track per-step targets on a Markov chain");
  add_common(markov, opt);
  add_eps(markov, opt, "regularization epsilon (overrides the file)");
  markov->add_option("--iters", opt.iters, "stochastic iteration budget")
      ->check(CLI::PositiveNumber);
  markov->add_option("--seed", opt.seed, "random seed");
  markov->add_option("--kappa", opt.kappa, "quadratic penalty stiffness")
      ->check(CLI::PositiveNumber);

  CLI::App* check = app.add_subcommand("check", "validate a problem file and print diagnostics");
  check->add_option("--input", opt.input, "problem file (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (fpr->parsed()) return run_discrete_solve(opt, false);
    if (fprp->parsed()) return run_discrete_solve(opt, true);
    if (cont->parsed()) return run_continuation(opt);
    if (gauss->parsed()) return run_gaussian(opt);
    if (markov->parsed()) return run_markov(opt);
    if (check->parsed()) return run_check(opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
