// Command-line front end: monolithic and decomposed solves, parameter
// sweeps, convergence-order studies, history plots and mesh inspection.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "hdgdd/hdgdd.hpp"

namespace fs = std::filesystem;
using namespace hdgdd;

namespace {

constexpr int kUsageError = 1;

struct CommonFlags {
  std::string config_path;
  std::string algo, nn_sign, tf_signs, out;
  double h = 0, alpha = 0, theta = 0, tau = 0, tol = 0;
  int n = 0, max_iter = 0;
  std::vector<std::pair<CLI::Option*, std::string>> overrides;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config_path, "flat key=value config file")
      ->check(CLI::ExistingFile);
  auto reg = [&](CLI::Option* opt, const std::string& key) { f.overrides.emplace_back(opt, key); };
  reg(app->add_option("--algo", f.algo, "monolithic, nn or tf")
          ->check(CLI::IsMember({"monolithic", "nn", "tf"})),
      "algo");
  reg(app->add_option("--h", f.h, "mesh size"), "h");
  reg(app->add_option("--n", f.n, "number of equal strips"), "n");
  reg(app->add_option("--alpha", f.alpha, "two strips split at x = alpha"), "alpha");
  reg(app->add_option("--theta", f.theta, "Neumann-Neumann relaxation"), "theta");
  reg(app->add_option("--tau", f.tau, "HDG stabilization"), "tau");
  reg(app->add_option("--tol", f.tol, "interface difference tolerance"), "tol");
  reg(app->add_option("--max-iter", f.max_iter, "iteration limit"), "max-iter");
  reg(app->add_option("--nn-sign", f.nn_sign, "trace correction sign")
          ->check(CLI::IsMember({"plus", "minus"})),
      "nn-sign");
  reg(app->add_option("--tf-signs", f.tf_signs, "flux sign convention")
          ->check(CLI::IsMember({"oriented", "literal"})),
      "tf-signs");
  reg(app->add_option("--out", f.out, "output directory"), "out");
}

ExperimentConfig resolve(const CommonFlags& f) {
  ExperimentConfig cfg;
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    cfg = parse_config(in);
  }
  // Command-line values beat the file.
  for (const auto& [opt, key] : f.overrides) {
    if (opt->count() > 0) {
      const auto results = opt->results();
      set_config_value(cfg, key, results.back());
      if (key == "n") {
        cfg.alpha.reset();
        cfg.breakpoints.clear();
      } else if (key == "alpha") {
        cfg.breakpoints.clear();
      }
    }
  }
  validate(cfg);
  return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

template <class Writer>
std::string to_text(Writer&& w) {
  std::ostringstream os;
  w(os);
  return os.str();
}

int cmd_solve(const CommonFlags& flags) {
  const ExperimentConfig cfg = resolve(flags);
  const RunReport rep = run(cfg);
  const fs::path out(cfg.out);
  write_text(out / "history.csv", to_text([&](std::ostream& os) {
               write_history_csv(os, rep.history);
             }));
  write_text(out / "report.json", to_json(rep).dump(2) + "\n");
  std::printf("%s: status=%s iterations=%d err_q=%.6e err_u=%.6e\n", to_string(cfg.algo).c_str(),
              rep.status_name().c_str(), rep.iterations, rep.err_q, rep.err_u);
  return exit_code(rep);
}

int cmd_sweep(const CommonFlags& flags, const std::string& param, const std::string& values) {
  const ExperimentConfig cfg = resolve(flags);
  const SweepParameter p = parse_sweep_parameter(param);
  const SweepResult res = sweep(cfg, p, parse_real_list("values", values));
  const fs::path out(cfg.out);
  write_text(out / "summary.csv", to_text([&](std::ostream& os) { write_summary_csv(os, res); }));
  nlohmann::ordered_json j;
  j["parameter"] = param;
  j["runs"] = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < res.runs.size(); ++k) {
    const std::string name = param + "_" + format_double(res.values[k]);
    write_text(out / (name + ".csv"), to_text([&](std::ostream& os) {
                 write_history_csv(os, res.runs[k].history);
               }));
    auto r = to_json(res.runs[k]);
    r["value"] = res.values[k];
    r["history"] = name + ".csv";
    j["runs"].push_back(r);
    std::printf("%s=%-8s status=%-9s iterations=%-5d err_q=%.6e\n", param.c_str(),
                format_double(res.values[k]).c_str(), res.runs[k].status_name().c_str(),
                res.runs[k].iterations, res.runs[k].err_q);
  }
  if (res.loglog_slope) {
    j["loglog_slope"] = *res.loglog_slope;
    std::printf("log-log slope of iterations vs N: %.4f\n", *res.loglog_slope);
  }
  write_text(out / "sweep.json", j.dump(2) + "\n");
  return 0;
}

int cmd_order(const CommonFlags& flags, const std::string& hs) {
  const ExperimentConfig cfg = resolve(flags);
  const auto rows = convergence_order(parse_real_list("hs", hs), cfg.tau);
  const std::string csv = to_text([&](std::ostream& os) { write_order_csv(os, rows); });
  write_text(fs::path(cfg.out) / "order.csv", csv);
  std::cout << csv;
  return 0;
}

int cmd_plot(const std::vector<std::string>& inputs, const std::string& output) {
  if (inputs.empty()) throw ConfigError("plot needs at least one history CSV");
  std::vector<HistorySeries> series;
  for (const auto& path : inputs) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path);
    series.push_back(read_history_csv(in, fs::path(path).stem().string()));
  }
  write_text(output, to_text([&](std::ostream& os) { write_svg(os, series); }));
  std::printf("wrote %s (%zu series)\n", output.c_str(), series.size());
  return 0;
}

void print_mesh(const std::string& name, const Mesh& m) {
  std::size_t interface = 0, dirichlet = 0;
  double area = 0.0;
  for (const auto& e : m.edges()) {
    interface += e.kind == EdgeKind::kInterface;
    dirichlet += e.kind == EdgeKind::kDirichlet;
  }
  for (std::size_t t = 0; t < m.num_triangles(); ++t) area += m.triangle_area(t);
  const long euler = static_cast<long>(m.num_vertices()) - static_cast<long>(m.num_edges()) +
                     static_cast<long>(m.num_triangles());
  std::printf("%s: vertices=%zu triangles=%zu edges=%zu dirichlet=%zu interface=%zu V-E+F=%ld "
              "area=%.15g\n",
              name.c_str(), m.num_vertices(), m.num_triangles(), m.num_edges(), dirichlet,
              interface, euler, area);
}

int cmd_mesh_info(const CommonFlags& flags, const std::string& import_path,
                  const std::string& export_path) {
  if (!import_path.empty()) {
    std::ifstream in(import_path);
    if (!in) throw ConfigError("cannot read " + import_path);
    print_mesh(import_path, import_mesh(in));
    return 0;
  }
  const ExperimentConfig cfg = resolve(flags);
  const auto dd = decompose_strips(breakpoints_of(cfg), cfg.h);
  for (int i = 0; i < dd.num_subdomains(); ++i) {
    print_mesh("subdomain " + std::to_string(i + 1), dd.submeshes[i]);
  }
  for (const auto& g : dd.interfaces) {
    std::printf("interface %d: x=%.15g edges=%zu\n", g.id + 1, g.x, g.num_edges());
  }
  const Mesh whole = merge_submeshes(dd.submeshes);
  print_mesh("union", whole);
  if (!export_path.empty()) {
    write_text(export_path, to_text([&](std::ostream& os) { export_mesh(whole, os); }));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HDG Poisson solver with Neumann-Neumann and trace-flux domain decomposition"};
  app.require_subcommand(1);
  // `--h` is the mesh size; keep help on the long form only.
  app.set_help_flag("--help", "print this help message and exit");

  CommonFlags solve_flags, sweep_flags, order_flags, mesh_flags;
  auto* solve_cmd = app.add_subcommand("solve", "run one configuration");
  add_common(solve_cmd, solve_flags);

  auto* sweep_cmd = app.add_subcommand("sweep", "run one configuration per parameter value");
  add_common(sweep_cmd, sweep_flags);
  std::string sweep_param, sweep_values;
  sweep_cmd->add_option("--param", sweep_param, "theta, alpha or N")->required();
  sweep_cmd->add_option("--values", sweep_values, "comma-separated values")->required();

  auto* order_cmd = app.add_subcommand("order", "observed convergence rates of the HDG solver");
  add_common(order_cmd, order_flags);
  std::string order_hs = "0.125,0.0625,0.03125";
  order_cmd->add_option("--hs", order_hs, "comma-separated mesh sizes")->capture_default_str();

  auto* plot_cmd = app.add_subcommand("plot", "log-scale SVG chart of history CSVs");
  std::vector<std::string> plot_inputs;
  std::string plot_output = "convergence.svg";
  plot_cmd->add_option("inputs", plot_inputs, "history CSV files");
  plot_cmd->add_option("-o,--output", plot_output, "SVG path")->capture_default_str();

  auto* mesh_cmd = app.add_subcommand("mesh-info", "describe (and export) a decomposition mesh");
  add_common(mesh_cmd, mesh_flags);
  std::string mesh_import, mesh_export;
  mesh_cmd->add_option("--mesh", mesh_import, "import an hdgmesh file instead");
  mesh_cmd->add_option("--export", mesh_export, "write the union mesh");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*solve_cmd) return cmd_solve(solve_flags);
    if (*sweep_cmd) return cmd_sweep(sweep_flags, sweep_param, sweep_values);
    if (*order_cmd) return cmd_order(order_flags, order_hs);
    if (*plot_cmd) return cmd_plot(plot_inputs, plot_output);
    if (*mesh_cmd) return cmd_mesh_info(mesh_flags, mesh_import, mesh_export);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kUsageError;
  } catch (const MeshError& e) {
    std::fprintf(stderr, "mesh error: %s\n", e.what());
    return kUsageError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsageError;
  }
  return kUsageError;
}
