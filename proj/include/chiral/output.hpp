#pragma once

// Result files: per-cell CSV, 16-bit PGM heatmaps, JSON run manifest and
// resonance-line overlays.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "chiral/config.hpp"
#include "chiral/interference.hpp"
#include "chiral/sweep.hpp"
#include "chiral/version.hpp"

namespace chiral {

namespace detail {

inline std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::ofstream open_out(const std::string &path, std::ios::openmode mode = std::ios::out) {
  const auto parent = std::filesystem::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  std::ofstream out(path, mode);
  if (!out) throw Error("cannot write '" + path + "'");
  return out;
}

} // namespace detail

inline constexpr const char *csv_header = "species,tau,delta,level,Q,eps,Jz,E_abs";

/// One row per (cell, requested level) in species, tau, delta, level order.
/// Cells that never ran are skipped; a failed run ends with a `# status=failed`
/// marker line.
inline std::string format_csv(const SweepResult &r) {
  std::string out = std::string(csv_header) + "\n";
  for (std::size_t i = 0; i < r.cells.size(); ++i) {
    if (!r.done[i]) continue;
    const auto c = r.coord(i);
    const auto &rep = r.cells[i];
    for (int level : r.levels) {
      out += r.species[c.species];
      out += ',' + detail::fmt17(r.taus[c.tau]);
      out += ',' + detail::fmt17(r.deltas[c.delta]);
      out += ',' + std::to_string(level);
      out += ',' + detail::fmt17(rep.population(level));
      out += ',' + detail::fmt17(rep.directionality(level));
      out += ',' + detail::fmt17(rep.jz);
      out += ',' + detail::fmt17(rep.energy_absorbed);
      out += '\n';
    }
  }
  if (!r.ok) out += "# status=failed exit_code=" + std::to_string(r.exit_code) + " " + r.failure + "\n";
  return out;
}

inline void write_csv(const SweepResult &r, const std::string &path) {
  auto out = detail::open_out(path);
  out << format_csv(r);
  if (!out) throw Error("failed writing '" + path + "'");
}

struct CsvRow {
  std::string species;
  double tau = 0.0;
  double delta = 0.0;
  int level = 0;
  double q = 0.0;
  double eps = 0.0;
  double jz = 0.0;
  double e_abs = 0.0;
};

/// Reads a result CSV back; comment lines are skipped.
inline std::vector<CsvRow> read_csv(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != csv_header) throw Error("'" + path + "' is not a result CSV");
  std::vector<CsvRow> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f;
    std::string item;
    std::istringstream ls(line);
    while (std::getline(ls, item, ',')) f.push_back(item);
    if (f.size() != 8) throw Error("malformed CSV row: " + line);
    auto num = [](const std::string &s) { return std::strtod(s.c_str(), nullptr); };
    rows.push_back({f[0], num(f[1]), num(f[2]), std::stoi(f[3]), num(f[4]), num(f[5]), num(f[6]), num(f[7])});
  }
  return rows;
}

/// Binary 16-bit PGM of `values` (row-major, `height` rows), mapped linearly
/// from [lo, hi] to [0, 65535]. NaN maps to the midpoint.
inline void write_pgm(const std::string &path, std::size_t width, std::size_t height, const std::vector<double> &values,
                      double lo, double hi) {
  if (values.size() != width * height) throw Error("write_pgm: value count does not match dimensions");
  auto out = detail::open_out(path, std::ios::out | std::ios::binary);
  out << "P5\n" << width << " " << height << "\n65535\n";
  const double span = hi > lo ? hi - lo : 1.0;
  for (double v : values) {
    double x = std::isnan(v) ? 0.5 : (v - lo) / span;
    x = std::clamp(x, 0.0, 1.0);
    const auto g = static_cast<unsigned>(std::lround(x * 65535.0));
    out.put(static_cast<char>(g >> 8));
    out.put(static_cast<char>(g & 0xff));
  }
  if (!out) throw Error("failed writing '" + path + "'");
}

struct PgmImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<unsigned> pixels;
};

inline PgmImage read_pgm(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  std::string magic;
  unsigned maxval = 0;
  PgmImage img;
  in >> magic >> img.width >> img.height >> maxval;
  in.get();
  if (magic != "P5" || maxval != 65535) throw Error("'" + path + "' is not a 16-bit PGM");
  img.pixels.resize(img.width * img.height);
  for (auto &p : img.pixels) {
    const int hi = in.get();
    const int lo = in.get();
    if (!in) throw Error("truncated PGM '" + path + "'");
    p = (static_cast<unsigned>(hi) << 8) | static_cast<unsigned>(lo);
  }
  return img;
}

struct HeatmapFile {
  std::string path;
  std::string species;
  std::string observable;
  int level = -1;
  double lo = 0.0;
  double hi = 0.0;
};

namespace detail {

inline double observable_value(const LevelReport &r, const std::string &obs, int level) {
  if (obs == "Q") return r.population(level);
  if (obs == "eps") return r.directionality(level);
  if (obs == "Jz") return r.jz;
  return r.energy_absorbed;
}

} // namespace detail

/// Heatmaps with delta along x and tau along y; the top row is the largest tau.
/// Q and E_abs map [0, max]; eps maps [-1, 1]; Jz maps [-max|Jz|, max|Jz|].
inline std::vector<HeatmapFile> write_heatmaps(const SweepResult &r, const std::vector<std::string> &observables,
                                               const std::string &dir) {
  std::vector<HeatmapFile> files;
  const std::size_t w = r.deltas.size(), h = r.taus.size();
  if (w == 0 || h == 0) return files;
  for (std::size_t s = 0; s < r.species.size(); ++s) {
    for (const auto &obs : observables) {
      const bool per_level = obs == "Q" || obs == "eps";
      std::vector<int> levels = per_level ? r.levels : std::vector<int>{-1};
      for (int level : levels) {
        std::vector<double> v(w * h, std::numeric_limits<double>::quiet_NaN());
        double vmax = 0.0;
        for (std::size_t t = 0; t < h; ++t) {
          for (std::size_t d = 0; d < w; ++d) {
            const auto i = r.index(s, t, d);
            if (!r.done[i]) continue;
            const double x = detail::observable_value(r.cells[i], obs, level);
            v[(h - 1 - t) * w + d] = x;
            if (!std::isnan(x)) vmax = std::max(vmax, std::abs(x));
          }
        }
        HeatmapFile f;
        f.species = r.species[s];
        f.observable = obs;
        f.level = level;
        if (obs == "eps") {
          f.lo = -1.0;
          f.hi = 1.0;
        } else if (obs == "Jz") {
          f.lo = -vmax;
          f.hi = vmax;
        } else {
          f.lo = 0.0;
          f.hi = vmax;
        }
        const std::string name = r.species[s] + "_" + obs + (per_level ? "_L" + std::to_string(level) : "") + ".pgm";
        f.path = (std::filesystem::path(dir) / name).string();
        write_pgm(f.path, w, h, v, f.lo, f.hi);
        files.push_back(f);
      }
    }
  }
  return files;
}

/// Resonance lines of every species and requested level (>= 2) for both
/// Delta M = +-2 and 0, sampled at the grid's delta values and clipped to its
/// tau range. Columns: species,level,delta_m,m,delta,tau.
inline std::string format_lines(const RunConfig &config) {
  std::string out = "species,level,delta_m,m,delta,tau\n";
  if (config.taus.empty()) return out;
  const auto [tmin, tmax] = std::minmax_element(config.taus.begin(), config.taus.end());
  for (const auto &mol : config.molecules) {
    for (int level : config.levels) {
      if (level < 2) continue;
      if (mol.is_case_b() && detail::is_even(level)) continue;
      for (int dm : {-2, 0, 2}) {
        for (const auto &line : resonance_lines(mol, level, dm, config.lines_m_min, config.lines_m_max)) {
          for (double delta : config.deltas) {
            const double tau = line.tau_at(delta);
            if (tau < *tmin || tau > *tmax) continue;
            out += mol.name + "," + std::to_string(level) + "," + std::to_string(dm) + "," + std::to_string(line.m) +
                   "," + detail::fmt17(delta) + "," + detail::fmt17(tau) + "\n";
          }
        }
      }
    }
  }
  return out;
}

inline void write_lines(const RunConfig &config, const std::string &path) {
  auto out = detail::open_out(path);
  out << format_lines(config);
}

/// Run manifest: complete configuration echo plus what the run used and produced.
inline nlohmann::json make_manifest(const std::string &command, const RunConfig &config, const SweepResult &r,
                                    const std::vector<std::string> &outputs) {
  nlohmann::json j;
  j["program"] = "chiral";
  j["version"] = version;
  j["command"] = command;
  j["config"] = config.entries;
  j["status"] = r.ok ? "ok" : "failed";
  j["exit_code"] = r.exit_code;
  if (!r.ok) {
    j["failure"] = r.failure;
    if (r.failed_cell) j["failed_cell"] = {{"species", r.species[r.failed_cell->species]},
                                           {"tau", r.taus[r.failed_cell->tau]},
                                           {"delta", r.deltas[r.failed_cell->delta]}};
  }
  nlohmann::json trunc = nlohmann::json::object();
  for (std::size_t s = 0; s < r.truncation.size(); ++s) trunc[r.species[s]] = r.truncation[s];
  j["truncation"] = trunc;
  j["grid"] = {{"species", r.species}, {"tau_points", r.taus.size()}, {"delta_points", r.deltas.size()},
               {"cells", r.cell_count()}, {"completed", r.completed()}};
  j["engine"] = to_string(config.engine);
  j["workers"] = r.workers;
  j["wall_seconds"] = r.wall_seconds;
  j["outputs"] = outputs;
  return j;
}

inline void write_manifest(const nlohmann::json &manifest, const std::string &path) {
  auto out = detail::open_out(path);
  out << manifest.dump(2) << "\n";
}

/// Configuration entries recorded in a manifest.
inline std::map<std::string, std::string> manifest_config(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read manifest '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError("manifest '" + path + "': " + e.what());
  }
  if (!j.contains("config") || !j["config"].is_object()) throw ConfigError("manifest '" + path + "' has no config");
  return j["config"].get<std::map<std::string, std::string>>();
}

} // namespace chiral
