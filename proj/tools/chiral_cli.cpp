// Command-line front end: sweep, scan, single, lines, selfcheck.
//
// Exit codes: 0 success, 1 other failure, 2 basis truncation failure,
// 3 configuration error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chiral/chiral.hpp"
#include "selfcheck.hpp"

namespace {

struct Common {
  std::string config_path;
  std::string manifest_path;
  std::string out_dir = "out";
  std::vector<std::string> overrides;
  int workers = -1;
  std::string engine;
  int jmax = -1;
  bool quiet = false;
};

void add_common(CLI::App *cmd, Common &c) {
  cmd->add_option("-c,--config", c.config_path, "key = value configuration file");
  cmd->add_option("--manifest", c.manifest_path, "re-run the configuration recorded in a manifest");
  cmd->add_option("-o,--out", c.out_dir, "output directory");
  cmd->add_option("-s,--set", c.overrides, "override a configuration key (key=value)");
  cmd->add_option("-w,--workers", c.workers, "worker threads (0: all cores)");
  cmd->add_option("--engine", c.engine, "sudden or ode");
  cmd->add_option("--jmax", c.jmax, "basis truncation J_max / N_max (0: automatic)");
  cmd->add_flag("-q,--quiet", c.quiet, "no progress output");
}

chiral::RunConfig load(const Common &c) {
  std::map<std::string, std::string> entries;
  if (!c.manifest_path.empty()) entries = chiral::manifest_config(c.manifest_path);
  if (!c.config_path.empty())
    for (const auto &[k, v] : chiral::read_config_file(c.config_path)) entries[k] = v;
  for (const auto &o : c.overrides) chiral::apply_override(entries, o);
  if (c.workers >= 0) entries["workers"] = std::to_string(c.workers);
  if (!c.engine.empty()) entries["engine"] = c.engine;
  if (c.jmax >= 0) entries["truncation"] = c.jmax == 0 ? "auto" : std::to_string(c.jmax);
  return chiral::make_config(entries);
}

std::string in_dir(const Common &c, const std::string &name) {
  return (std::filesystem::path(c.out_dir) / name).string();
}

int run_grid_command(const std::string &command, const Common &common) {
  const auto config = load(common);
  chiral::SweepOptions options;
  std::mutex mu;
  std::size_t last = 0;
  if (!common.quiet) {
    options.progress = [&](std::size_t done, std::size_t total) {
      std::lock_guard lock(mu);
      const std::size_t pct = total ? done * 100 / total : 100;
      if (pct >= last + 5 || done == total) {
        last = pct;
        std::fprintf(stderr, "%s: %zu/%zu cells (%zu%%)\n", command.c_str(), done, total, pct);
      }
    };
  }
  const auto result = command == "sweep" ? chiral::run_sweep(config, options) : chiral::run_scan(config, options);

  std::vector<std::string> outputs;
  const std::string csv = in_dir(common, "results.csv");
  chiral::write_csv(result, csv);
  outputs.push_back(csv);
  if (result.ok) {
    for (const auto &f : chiral::write_heatmaps(result, config.heatmaps, common.out_dir)) outputs.push_back(f.path);
  }
  const std::string manifest = in_dir(common, "manifest.json");
  chiral::write_manifest(chiral::make_manifest(command, config, result, outputs), manifest);

  if (!result.ok) {
    std::fprintf(stderr, "%s failed: %s\n", command.c_str(), result.failure.c_str());
    return result.exit_code;
  }
  if (!common.quiet)
    std::fprintf(stderr, "%s: %zu cells in %.2f s with %d workers -> %s\n", command.c_str(), result.cell_count(),
                 result.wall_seconds, result.workers, common.out_dir.c_str());
  return 0;
}

int run_single_command(const Common &common) {
  const auto config = load(common);
  if (config.taus.size() != 1 || config.deltas.size() != 1)
    throw chiral::ConfigError("single: set exactly one tau and one delta (tau_values, delta_values)");
  chiral::SweepOptions options;
  options.workers = 1;
  const auto result = chiral::run_grid(config, options);
  if (!result.ok) {
    std::fprintf(stderr, "single failed: %s\n", result.failure.c_str());
    return result.exit_code;
  }
  std::cout << chiral::format_csv(result);
  return 0;
}

int run_lines_command(const Common &common) {
  const auto config = load(common);
  const std::string path = in_dir(common, "lines.csv");
  chiral::write_lines(config, path);
  if (!common.quiet) std::fprintf(stderr, "lines -> %s\n", path.c_str());
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Rotational excitation of diatomic molecules by chiral pulse trains"};
  app.require_subcommand(1);
  app.set_version_flag("--version", chiral::version);

  Common common;
  auto *sweep = app.add_subcommand("sweep", "(tau, delta) grid of thermally averaged observables");
  auto *scan = app.add_subcommand("scan", "tau scan at fixed delta for one or more species");
  auto *single = app.add_subcommand("single", "one train, printed as CSV");
  auto *lines = app.add_subcommand("lines", "resonance-line overlay for the configured grid");
  auto *selfcheck = app.add_subcommand("selfcheck", "compare the library against independent reference values");
  for (auto *cmd : {sweep, scan, single, lines}) add_common(cmd, common);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sweep->parsed()) return run_grid_command("sweep", common);
    if (scan->parsed()) return run_grid_command("scan", common);
    if (single->parsed()) return run_single_command(common);
    if (lines->parsed()) return run_lines_command(common);
    if (selfcheck->parsed()) return chiral_tools::selfcheck(std::cout) ? 0 : 1;
  } catch (const chiral::TruncationError &e) {
    std::fprintf(stderr, "truncation error: %s\n", e.what());
    return 2;
  } catch (const chiral::ConfigError &e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 3;
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
