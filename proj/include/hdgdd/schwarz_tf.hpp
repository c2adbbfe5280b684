#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "hdgdd/dd_problem.hpp"

// Trace-flux alternating iteration on a strip decomposition.
//
// Every interface carries a trace and a flux value and a kind. In a
// half-step each subdomain takes Dirichlet data from its trace-kind
// interfaces and Neumann data from its flux-kind interfaces. Afterwards the
// flux-kind interfaces average the two one-sided traces, the trace-kind
// interfaces average the two one-sided fluxes, and all kinds flip. There is
// no relaxation parameter.
namespace hdgdd {

enum class SignConvention {
  /// lambda is the flux along the interface normal (left to right).
  kOriented,
  /// Signs (-1)^(i-1) per subdomain and a plain sum of the one-sided fluxes.
  kLiteral,
};

struct TFConfig {
  double tol = 1e-6;
  int max_iter = 1000;
  SignConvention signs = SignConvention::kOriented;
};

struct InterfaceState {
  InterfaceKind kind = InterfaceKind::kTrace;
  EdgeFunction trace;
  EdgeFunction flux;
};

inline InterfaceKind flipped(InterfaceKind k) {
  return k == InterfaceKind::kTrace ? InterfaceKind::kFlux : InterfaceKind::kTrace;
}

/// Γ12, Γ34, ... start as trace interfaces, the others as flux interfaces.
inline std::vector<InterfaceState> initial_interface_states(const DDProblem& problem) {
  std::vector<InterfaceState> states(problem.num_interfaces());
  for (int id = 0; id < problem.num_interfaces(); ++id) {
    const auto n = 2 * static_cast<Eigen::Index>(problem.interface(id).num_edges());
    states[id].kind = id % 2 == 0 ? InterfaceKind::kTrace : InterfaceKind::kFlux;
    states[id].trace = EdgeFunction::Zero(n);
    states[id].flux = EdgeFunction::Zero(n);
  }
  return states;
}

/// Sign applied to lambda when subdomain `sub` solves with Neumann data on
/// interface `g`.
inline double neumann_sign(const InterfaceDescriptor& g, int sub, SignConvention signs) {
  if (signs == SignConvention::kLiteral) return sub % 2 == 0 ? 1.0 : -1.0;
  return sub == g.left ? 1.0 : -1.0;
}

inline BoundaryData boundary_data_for(const DDProblem& problem,
                                      const std::vector<InterfaceState>& states, int sub,
                                      SignConvention signs) {
  BoundaryData data;
  for (int id : problem.decomposition().interfaces_of(sub)) {
    const auto& st = states[id];
    if (st.kind == InterfaceKind::kTrace) {
      data[id] = {InterfaceKind::kTrace, st.trace};
    } else {
      data[id] = {InterfaceKind::kFlux, neumann_sign(problem.interface(id), sub, signs) * st.flux};
    }
  }
  return data;
}

inline std::vector<SubdomainSolution> tf_half_step(const std::vector<InterfaceState>& states,
                                                   const DDProblem& problem,
                                                   const TFConfig& cfg) {
  if (static_cast<int>(states.size()) != problem.num_interfaces()) {
    throw std::invalid_argument("one interface state per interface required");
  }
  std::vector<SubdomainSolution> sols(problem.num_subdomains());
  parallel_for(problem.num_subdomains(), [&](int i) {
    sols[i] = solve(problem.system(i), boundary_data_for(problem, states, i, cfg.signs));
  });
  return sols;
}

struct TFUpdate {
  std::vector<InterfaceState> states;
  /// L2(Γ) change of the trace on each interface updated in this half-step,
  /// 0 on the others.
  std::vector<double> trace_change;
};

inline TFUpdate tf_update(std::vector<InterfaceState> states,
                          const std::vector<SubdomainSolution>& sols, const DDProblem& problem,
                          const TFConfig& cfg) {
  TFUpdate out;
  out.trace_change.assign(states.size(), 0.0);
  for (int id = 0; id < static_cast<int>(states.size()); ++id) {
    const auto& g = problem.interface(id);
    auto& st = states[id];
    if (st.kind == InterfaceKind::kFlux) {
      EdgeFunction next =
          0.5 * (interface_trace(sols[g.left], id) + interface_trace(sols[g.right], id));
      out.trace_change[id] = problem.interface_norm(id, next - st.trace);
      st.trace = std::move(next);
    } else {
      const EdgeFunction& left = interface_numerical_flux(sols[g.left], id);
      const EdgeFunction& right = interface_numerical_flux(sols[g.right], id);
      st.flux = cfg.signs == SignConvention::kOriented ? EdgeFunction(0.5 * (left - right))
                                                        : EdgeFunction(0.5 * (left + right));
    }
  }
  out.states = std::move(states);
  return out;
}

inline std::vector<InterfaceState> flip_kinds(std::vector<InterfaceState> states) {
  for (auto& st : states) st.kind = flipped(st.kind);
  return states;
}

struct TFResult {
  std::vector<SubdomainSolution> solutions;
  IterationHistory history;
  RunStatus status = RunStatus::kMaxIter;
  std::vector<InterfaceState> states;
};

/// One full iteration is two half-steps, each followed by an update and a
/// flip. Convergence is measured on the trace changes of the full iteration.
inline TFResult run_tf(const TFConfig& cfg, const DDProblem& problem,
                       std::vector<InterfaceState> states) {
  if (problem.num_subdomains() < 2) {
    throw std::invalid_argument("trace-flux iteration needs at least two subdomains");
  }
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("tol must be > 0");
  TFResult result;
  for (int iter = 1;; ++iter) {
    Stopwatch clock;
    double diff = 0.0;
    for (int half = 0; half < 2; ++half) {
      result.solutions = tf_half_step(states, problem, cfg);
      TFUpdate up = tf_update(std::move(states), result.solutions, problem, cfg);
      for (double d : up.trace_change) {
        diff = std::max(diff, std::isfinite(d) ? d : std::numeric_limits<double>::infinity());
      }
      states = flip_kinds(std::move(up.states));
    }
    const ErrorNorms err = problem.errors(result.solutions);
    result.history.push_back({iter, err.q(), err.u(), diff, clock.elapsed_ms()});
    if (diverging(diff)) {
      result.status = RunStatus::kDiverged;
      break;
    }
    if (diff < cfg.tol) {
      result.status = RunStatus::kConverged;
      break;
    }
    if (iter >= cfg.max_iter) {
      result.status = RunStatus::kMaxIter;
      break;
    }
  }
  result.states = std::move(states);
  return result;
}

inline TFResult run_tf(const TFConfig& cfg, const DDProblem& problem) {
  return run_tf(cfg, problem, initial_interface_states(problem));
}

}  // namespace hdgdd
