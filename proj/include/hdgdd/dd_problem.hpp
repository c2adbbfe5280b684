#pragma once

#include <chrono>
#include <cmath>
#include <future>
#include <memory>
#include <string_view>
#include <utility>
#include <vector>

#include "hdgdd/mesh.hpp"
#include "hdgdd/problem.hpp"
#include "hdgdd/subdomain_solver.hpp"

namespace hdgdd {

/// Runs fn(0..n-1) concurrently and rethrows the first failure.
template <class Fn>
void parallel_for(int n, Fn&& fn) {
  if (n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::future<void>> jobs;
  jobs.reserve(n);
  for (int i = 0; i < n; ++i) jobs.push_back(std::async(std::launch::async, [&fn, i] { fn(i); }));
  for (auto& j : jobs) j.get();
}

/// A strip decomposition with one assembled trace system per subdomain.
class DDProblem {
 public:
  DDProblem(SubdomainDecomposition dd, double tau, ManufacturedSolution exact)
      : dd_(std::move(dd)), tau_(tau), exact_(std::move(exact)) {
    systems_.resize(dd_.submeshes.size());
    parallel_for(dd_.num_subdomains(), [this](int i) {
      systems_[i] = assemble(dd_.submeshes[i], tau_, exact_.f);
    });
  }

  [[nodiscard]] const SubdomainDecomposition& decomposition() const { return dd_; }
  [[nodiscard]] int num_subdomains() const { return dd_.num_subdomains(); }
  [[nodiscard]] int num_interfaces() const { return static_cast<int>(dd_.interfaces.size()); }
  [[nodiscard]] const InterfaceDescriptor& interface(int id) const { return dd_.interfaces[id]; }
  [[nodiscard]] const SubdomainSystem& system(int i) const { return *systems_[i]; }
  [[nodiscard]] const ManufacturedSolution& exact() const { return exact_; }
  [[nodiscard]] double tau() const { return tau_; }

  /// Combined L2 errors over all subdomains.
  [[nodiscard]] ErrorNorms errors(const std::vector<SubdomainSolution>& sols) const {
    ErrorNorms e;
    for (int i = 0; i < num_subdomains(); ++i) e += l2_errors(system(i), sols[i], exact_);
    return e;
  }

  [[nodiscard]] double interface_norm(int id, const EdgeFunction& g) const {
    return edge_l2_norm(dd_.interfaces[id].segments, g);
  }

 private:
  SubdomainDecomposition dd_;
  double tau_;
  ManufacturedSolution exact_;
  std::vector<std::unique_ptr<SubdomainSystem>> systems_;
};

inline std::vector<double> equal_breakpoints(int n) {
  std::vector<double> b(n + 1);
  for (int i = 0; i <= n; ++i) b[i] = static_cast<double>(i) / n;
  b.back() = 1.0;
  return b;
}

enum class RunStatus { kConverged, kMaxIter, kDiverged };

inline std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::kConverged: return "converged";
    case RunStatus::kMaxIter: return "maxiter";
    case RunStatus::kDiverged: return "diverged";
  }
  return "unknown";
}

struct IterationRecord {
  int iteration = 0;
  double err_q = 0.0;
  double err_u = 0.0;
  double interface_diff = 0.0;
  double wall_ms = 0.0;
};

using IterationHistory = std::vector<IterationRecord>;

inline constexpr double kDivergenceThreshold = 1e6;

inline bool diverging(double interface_diff) {
  return !std::isfinite(interface_diff) || interface_diff > kDivergenceThreshold;
}

class Stopwatch {
 public:
  [[nodiscard]] double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace hdgdd
