// Command-line front end: solve, audit, sweep, eigen, kernel, tables.
//
// Exit codes: 0 success, 1 configuration/input error, 2 solver hard failure,
// 3 failed audit verdict.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "fpmlab/harness.hpp"

namespace {

using fpm::Json;

void emit_error(const std::string& kind, const std::string& message) {
  std::cerr << "error (" << kind << "): " << message << "\n";
  Json j;
  j["error"] = Json{{"kind", kind}, {"message", message}};
  std::cerr << j.dump() << "\n";
}

std::filesystem::path resolve_out_dir(const std::string& cfg_dir, const std::string& override_dir) {
  std::string dir = override_dir.empty() ? cfg_dir : override_dir;
  if (const char* root = std::getenv("FPMLAB_OUT"); root && *root)
    return std::filesystem::path(root) / dir;
  return dir;
}

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  int jobs = 0;
  bool strict = true;
  std::vector<std::string> filters;
};

fpm::ExperimentConfig load(const CommonOpts& opts) {
  fpm::ExperimentConfig cfg = fpm::load_config_file(opts.config_path, opts.strict);
  cfg.out_dir = resolve_out_dir(cfg.out_dir, opts.out_dir).string();
  if (!opts.filters.empty()) {
    std::vector<fpm::AuditSpec> kept;
    for (const auto& a : cfg.audits)
      for (const auto& f : opts.filters)
        if (a.name == f) {
          kept.push_back(a);
          break;
        }
    if (kept.empty()) {
      std::string names;
      for (const auto& a : cfg.audits) names += (names.empty() ? "" : ", ") + a.name;
      throw fpm::ConfigError("audit filter matched nothing; config has: " + names);
    }
    cfg.audits = std::move(kept);
  }
  return cfg;
}

int cmd_solve(const CommonOpts& opts, bool with_audits, bool needs_sweep = false) {
  fpm::ExperimentConfig cfg = load(opts);
  if (!with_audits) cfg.audits.clear();
  if (with_audits && cfg.audits.empty())
    throw fpm::ConfigError("audit: the config declares no audits");
  if (needs_sweep && !cfg.sweep)
    throw fpm::ConfigError("sweep: the config declares no sweep section");
  const fpm::ExperimentResult result = fpm::run_experiment(cfg, opts.jobs);
  std::cout << "wrote " << result.out_dir.string() << " (config " << result.config_hash
            << ")\n";
  for (std::size_t i = 0; i < result.reports.size(); ++i) {
    const auto& rep = result.reports[i];
    const bool eff = rep.passed() != result.expected_fail[i];
    std::cout << (eff ? "[pass] " : "[FAIL] ") << rep.claim << " verdict=" << rep.verdict
              << (result.expected_fail[i] ? " (expected_fail)" : "") << "\n";
    if (!rep.note.empty()) std::cout << "       " << rep.note << "\n";
  }
  if (with_audits && !result.all_ok()) return 3;
  return 0;
}

int cmd_eigen(const CommonOpts& opts) {
  fpm::ExperimentConfig cfg = load(opts);
  const fpm::DiscreteOperator op = fpm::DiscreteOperator::assemble(cfg.op);
  const fpm::Grid& g = op.grid();
  // default window, widened on coarse grids so the fit keeps enough points
  const double hi = std::max(0.1 * g.length(), 8.0 * g.h());
  const fpm::SideFits fits = fpm::boundary_exponent_fit(op.phi1(), op, 2.0 * g.h(), hi);
  Json j;
  j["lambda1"] = op.lambda1();
  j["gamma"] = cfg.op.gamma();
  j["phi1_exponent_left"] = fits.left.exponent;
  j["phi1_exponent_right"] = fits.right.exponent;
  j["phi1_l1_norm"] = op.phi1_l1_norm();
  const auto dir = std::filesystem::path(cfg.out_dir);
  std::filesystem::create_directories(dir);
  std::ostringstream csv;
  csv << "x,phi1\n";
  for (int i = 0; i < g.n; ++i)
    csv << fpm::format_double(g.point(i)) << ',' << fpm::format_double(op.phi1()(i)) << "\n";
  fpm::write_text_file(dir / "phi1.csv", csv.str());
  fpm::write_text_file(dir / "eigen_report.json", j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_kernel(const CommonOpts& opts) {
  fpm::ExperimentConfig cfg = load(opts);
  const fpm::DiscreteOperator op = fpm::DiscreteOperator::assemble(cfg.op);
  const fpm::KernelBoundsReport kb = op.verify_kernel_bounds();
  Json j;
  j["pair_count"] = kb.pair_count;
  j["fitted_c0"] = kb.fitted_c0;
  j["fitted_c1"] = kb.fitted_c1;
  j["lower_ok"] = kb.lower_ok;
  j["upper_ok"] = kb.upper_ok;
  if (cfg.op.kind != fpm::OperatorKind::classical) {
    const fpm::KernelFormReport kf = op.kernel_form();
    j["kernel_floor"] = kf.fitted_kernel_floor;
    j["min_zero_order"] = kf.min_zero_order;
    j["zero_order_exponent"] = kf.zero_order_exponent;
    j["offdiag_nonnegative"] = kf.offdiag_nonnegative;
    j["zero_order_nonnegative"] = kf.zero_order_nonnegative;
  }
  const auto dir = std::filesystem::path(cfg.out_dir);
  std::filesystem::create_directories(dir);
  fpm::write_text_file(dir / "kernel_report.json", j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for Dirichlet filtration equations"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string tables_out = "out/tables";
  auto add_common = [&](CLI::App* sub, bool needs_config = true) {
    if (needs_config)
      sub->add_option("--config", opts.config_path, "experiment config (or manifest) path")
          ->required();
    sub->add_option("--out", opts.out_dir, "output directory override");
    sub->add_option("--jobs", opts.jobs, "worker count (0 = hardware)");
    sub->add_option("--filter", opts.filters, "run only the named audits")->delimiter(',');
    sub->add_flag("--strict,!--no-strict", opts.strict,
                  "reject unknown config keys (default on)");
  };

  CLI::App* solve = app.add_subcommand("solve", "run the solver, persist the trajectory");
  add_common(solve);
  CLI::App* audit = app.add_subcommand("audit", "run the config's audit list");
  add_common(audit);
  CLI::App* sweep = app.add_subcommand("sweep", "run a parameter sweep with audits");
  add_common(sweep);
  CLI::App* eigen = app.add_subcommand("eigen", "principal eigenpair inspection");
  add_common(eigen);
  CLI::App* kernel = app.add_subcommand("kernel", "Green kernel and kernel-form audits");
  add_common(kernel);
  CLI::App* tables = app.add_subcommand("tables", "emit the three canonical summary tables");
  tables->add_option("--out", tables_out, "output directory");
  tables->add_option("--jobs", opts.jobs, "worker count (0 = hardware)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return cmd_solve(opts, false);
    if (audit->parsed()) return cmd_solve(opts, true);
    if (sweep->parsed()) return cmd_solve(opts, true, true);
    if (eigen->parsed()) return cmd_eigen(opts);
    if (kernel->parsed()) return cmd_kernel(opts);
    if (tables->parsed()) {
      const char* root = std::getenv("FPMLAB_OUT");
      const auto dir = root && *root ? std::filesystem::path(root) / tables_out
                                     : std::filesystem::path(tables_out);
      fpm::run_table_bundles(dir, opts.jobs);
      std::cout << "wrote tables under " << dir.string() << "\n";
      return 0;
    }
  } catch (const fpm::ConfigError& e) {
    emit_error("config", e.what());
    return 1;
  } catch (const fpm::OperatorError& e) {
    emit_error("config", e.what());
    return 1;
  } catch (const fpm::NonlinearityError& e) {
    emit_error("config", e.what());
    return 1;
  } catch (const fpm::SolverError& e) {
    emit_error("solver", e.what());
    return 2;
  } catch (const std::exception& e) {
    emit_error("internal", e.what());
    return 2;
  }
  return 0;
}
