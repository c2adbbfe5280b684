#pragma once

#include <stdexcept>
#include <vector>

#include "hdgdd/dd_problem.hpp"

// Neumann-Neumann iteration for two subdomains. Each step solves Dirichlet
// problems with the current interface trace, feeds the flux mismatch to
// zero-source Neumann problems on both sides, and corrects the trace with
// the sum of the resulting Neumann traces scaled by theta.
namespace hdgdd {

struct NNConfig {
  double theta = 0.25;
  double tol = 1e-6;
  int max_iter = 1000;
  /// Sign of the trace correction; -1 is the classical update.
  int update_sign = -1;
};

struct NNState {
  EdgeFunction trace;  // current interface trace on Γ12
  int iteration = 0;
  IterationHistory history;
  bool diverged = false;
  /// Dirichlet half-step solutions of the last step.
  std::vector<SubdomainSolution> half_step;
  /// Flux mismatch qhat1.n1 + qhat2.n2 of the last half-step.
  EdgeFunction residual;
};

inline void check_nn(const DDProblem& problem, const NNConfig& cfg) {
  if (problem.num_subdomains() != 2) {
    throw std::invalid_argument("Neumann-Neumann iteration needs exactly two subdomains");
  }
  if (!(cfg.theta > 0.0)) throw std::invalid_argument("theta must be > 0");
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("tol must be > 0");
  if (cfg.update_sign != 1 && cfg.update_sign != -1) {
    throw std::invalid_argument("update_sign must be +1 or -1");
  }
}

inline NNState initial_nn_state(const DDProblem& problem) {
  NNState s;
  s.trace = EdgeFunction::Zero(2 * static_cast<Eigen::Index>(problem.interface(0).num_edges()));
  return s;
}

inline NNState nn_step(NNState state, const DDProblem& problem, const NNConfig& cfg) {
  check_nn(problem, cfg);
  Stopwatch clock;
  constexpr int kGamma = 0;

  std::vector<SubdomainSolution> dirichlet(2);
  parallel_for(2, [&](int i) {
    BoundaryData data{{kGamma, {InterfaceKind::kTrace, state.trace}}};
    dirichlet[i] = solve(problem.system(i), data);
  });

  const EdgeFunction residual = interface_numerical_flux(dirichlet[0], kGamma) +
                                interface_numerical_flux(dirichlet[1], kGamma);

  std::vector<EdgeFunction> correction(2);
  parallel_for(2, [&](int i) {
    BoundaryData data{{kGamma, {InterfaceKind::kFlux, residual}}};
    correction[i] = interface_trace(solve(problem.system(i), data, SourceMode::kZero), kGamma);
  });

  EdgeFunction next = state.trace + (cfg.update_sign * cfg.theta) * (correction[0] + correction[1]);
  const double diff = problem.interface_norm(kGamma, next - state.trace);
  const ErrorNorms err = problem.errors(dirichlet);

  state.trace = std::move(next);
  state.iteration += 1;
  state.history.push_back({state.iteration, err.q(), err.u(), diff, clock.elapsed_ms()});
  state.diverged = diverging(diff);
  state.half_step = std::move(dirichlet);
  state.residual = residual;
  return state;
}

struct NNResult {
  std::vector<SubdomainSolution> solutions;
  IterationHistory history;
  RunStatus status = RunStatus::kMaxIter;
  EdgeFunction trace;
};

/// Iterates from a zero interface trace unless `initial` is given.
inline NNResult run_nn(const NNConfig& cfg, const DDProblem& problem,
                       const EdgeFunction* initial = nullptr) {
  check_nn(problem, cfg);
  NNState state = initial_nn_state(problem);
  if (initial != nullptr) state.trace = *initial;
  NNResult result;
  while (true) {
    state = nn_step(std::move(state), problem, cfg);
    const double diff = state.history.back().interface_diff;
    if (state.diverged) {
      result.status = RunStatus::kDiverged;
      break;
    }
    if (diff < cfg.tol) {
      result.status = RunStatus::kConverged;
      break;
    }
    if (state.iteration >= cfg.max_iter) {
      result.status = RunStatus::kMaxIter;
      break;
    }
  }
  result.solutions = std::move(state.half_step);
  result.history = std::move(state.history);
  result.trace = std::move(state.trace);
  return result;
}

}  // namespace hdgdd
