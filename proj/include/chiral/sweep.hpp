#pragma once

// Thermal-ensemble runs over (species, tau, delta) grids.
//
// Each grid cell is one work unit: its thermal initial states are propagated
// one after another and reduced in a fixed order, so the result of a cell
// does not depend on which worker ran it. Workers claim cells from a shared
// counter and write into preallocated slots.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "chiral/config.hpp"
#include "chiral/observables.hpp"
#include "chiral/propagator.hpp"

namespace chiral {

/// One thermal initial state, located inside its lattice block.
struct InitialState {
  std::size_t block = 0;
  std::size_t index = 0;
  double weight = 0.0;
  double energy = 0.0;
};

/// Propagation context of one species: lattice blocks at a fixed truncation
/// plus the weighted initial states.
template <class Basis>
class SpeciesModel {
public:
  SpeciesModel(const MoleculeSpec &molecule, double temperature, int truncation,
               double truncation_threshold = default_truncation_threshold)
      : molecule_(molecule), truncation_(truncation) {
    molecule_.validate();
    const int cutoff = thermal_cutoff(molecule_, temperature);
    if (truncation_ < cutoff) throw ConfigError("truncation is below the thermal cutoff");
    const auto weights = thermal_weights<Basis>(molecule_, temperature, cutoff);

    std::vector<int> block_of_key(4, -1);
    for (const auto &w : weights) {
      const int key = block_key(w.label);
      if (block_of_key[static_cast<std::size_t>(key)] < 0) {
        block_of_key[static_cast<std::size_t>(key)] = static_cast<int>(blocks_.size());
        blocks_.push_back(std::make_shared<const Dynamics<Basis>>(
            std::make_shared<const Basis>(make_block(key)), molecule_, truncation_threshold));
      }
      const auto b = static_cast<std::size_t>(block_of_key[static_cast<std::size_t>(key)]);
      const auto idx = blocks_[b]->basis().find(w.label);
      if (idx < 0) throw Error("initial state missing from its lattice block");
      starts_.push_back({b, static_cast<std::size_t>(idx), w.weight, energy(molecule_, w.label)});
    }
  }

  const MoleculeSpec &molecule() const { return molecule_; }
  int truncation() const { return truncation_; }
  std::span<const InitialState> initial_states() const { return starts_; }
  const Dynamics<Basis> &block(std::size_t b) const { return *blocks_[b]; }
  std::size_t block_count() const { return blocks_.size(); }

  /// Final amplitudes of one initial state after the train.
  std::vector<cplx> propagate(const InitialState &s, const TrainSpec &train, Engine engine, Workspace &ws) const {
    const auto &dyn = *blocks_[s.block];
    std::vector<cplx> c(dyn.size());
    c[s.index] = 1.0;
    double time = train.pulses.empty() ? 0.0 : train.pulses.front().center_time;
    dyn.run_train(std::span<cplx>(c), 1, time, train, engine, ws);
    return c;
  }

  /// Thermal average of the observables after the train.
  LevelReport run(const TrainSpec &train, Engine engine, Workspace &ws) const {
    EnsembleAccumulator acc;
    for (const auto &s : starts_) {
      const auto c = propagate(s, train, engine, ws);
      const auto &dyn = *blocks_[s.block];
      acc.add(summarize(dyn.basis(), std::span<const cplx>(c), dyn.energies(), s.energy), s.weight);
    }
    return acc.report();
  }

private:
  static int block_key(const RotorLabel &l) { return detail::parity_of(l.j) * 2 + detail::parity_of(l.m); }
  static int block_key(const CaseBLabel &l) { return detail::parity_of(l.m); }

  Basis make_block(int key) const {
    if constexpr (std::is_same_v<Basis, RotorBasis>)
      return RotorBasis::lattice(truncation_, key / 2, key % 2);
    else
      return CaseBBasis::lattice(truncation_, key);
  }

  MoleculeSpec molecule_;
  int truncation_;
  std::vector<std::shared_ptr<const Dynamics<Basis>>> blocks_;
  std::vector<InitialState> starts_;
};

using AnyModel = std::variant<SpeciesModel<RotorBasis>, SpeciesModel<CaseBBasis>>;

/// Truncation (J_max or N_max) used for a species under a configuration.
inline int resolve_truncation(const RunConfig &config, const MoleculeSpec &molecule) {
  int t = config.truncation > 0 ? config.truncation
                                : default_truncation(config.p_total, thermal_cutoff(molecule, config.temperature));
  if (molecule.is_case_b() && detail::is_even(t)) ++t;
  return t;
}

inline AnyModel make_model(const RunConfig &config, const MoleculeSpec &molecule) {
  const int t = resolve_truncation(config, molecule);
  if (molecule.is_case_b())
    return AnyModel(std::in_place_index<1>, molecule, config.temperature, t, config.truncation_threshold);
  return AnyModel(std::in_place_index<0>, molecule, config.temperature, t, config.truncation_threshold);
}

inline LevelReport run_model(const AnyModel &model, const TrainSpec &train, Engine engine, Workspace &ws) {
  return std::visit([&](const auto &m) { return m.run(train, engine, ws); }, model);
}

inline int model_truncation(const AnyModel &model) {
  return std::visit([](const auto &m) { return m.truncation(); }, model);
}

struct CellCoord {
  std::size_t species = 0;
  std::size_t tau = 0;
  std::size_t delta = 0;
};

/// Grid of ensemble reports over species x tau x delta.
struct SweepResult {
  std::vector<std::string> species;
  std::vector<double> taus;
  std::vector<double> deltas;
  std::vector<int> levels;
  std::vector<int> truncation; // per species
  std::vector<LevelReport> cells;
  std::vector<unsigned char> done;

  bool ok = true;
  int exit_code = 0;
  std::string failure;
  std::optional<CellCoord> failed_cell;
  double wall_seconds = 0.0;
  int workers = 1;

  std::size_t cell_count() const { return species.size() * taus.size() * deltas.size(); }
  std::size_t index(std::size_t s, std::size_t t, std::size_t d) const {
    return (s * taus.size() + t) * deltas.size() + d;
  }
  CellCoord coord(std::size_t i) const {
    const std::size_t d = i % deltas.size();
    const std::size_t t = (i / deltas.size()) % taus.size();
    return {i / (deltas.size() * taus.size()), t, d};
  }
  const LevelReport &at(std::size_t s, std::size_t t, std::size_t d) const { return cells[index(s, t, d)]; }
  std::size_t completed() const { return static_cast<std::size_t>(std::count(done.begin(), done.end(), 1)); }
};

inline int default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

/// Runs `body(i, workspace)` for i in [0, count) on `workers` threads. Cells
/// are claimed from an atomic counter; after the first failure no new cells
/// are started. Returns the failing index with its exception, lowest index
/// first when several cells fail.
inline std::optional<std::pair<std::size_t, std::exception_ptr>>
parallel_cells(std::size_t count, int workers, const std::function<void(std::size_t, Workspace &)> &body,
               const std::function<void(std::size_t)> &progress = {}) {
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> finished{0};
  std::atomic<bool> stop{false};
  std::mutex mu;
  std::optional<std::pair<std::size_t, std::exception_ptr>> failure;

  auto worker = [&] {
    Workspace ws;
    for (;;) {
      if (stop.load(std::memory_order_relaxed)) return;
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        body(i, ws);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure || i < failure->first) failure = std::make_pair(i, std::current_exception());
        stop = true;
        return;
      }
      const std::size_t f = finished.fetch_add(1, std::memory_order_relaxed) + 1;
      if (progress) progress(f);
    }
  };

  const int n = std::max(1, std::min<int>(workers, static_cast<int>(std::max<std::size_t>(count, 1))));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) pool.emplace_back(worker);
  }
  return failure;
}

struct SweepOptions {
  int workers = 0; // 0: take the configuration's value
  std::function<void(std::size_t done, std::size_t total)> progress;
};

namespace detail {

inline std::string describe_cell(const SweepResult &r, const CellCoord &c) {
  return "species=" + r.species[c.species] + " tau=" + std::to_string(r.taus[c.tau]) +
         " delta=" + std::to_string(r.deltas[c.delta]);
}

} // namespace detail

/// Ensemble observables on every (species, tau, delta) point of the grid.
/// Failures do not throw: the result carries the failing cell, its message,
/// the exit code (2 truncation, 3 configuration, 1 other) and every cell that
/// did complete.
inline SweepResult run_grid(const RunConfig &config, const SweepOptions &options = {}) {
  const auto start = std::chrono::steady_clock::now();
  SweepResult r;
  for (const auto &m : config.molecules) r.species.push_back(m.name);
  r.taus = config.taus;
  r.deltas = config.deltas;
  r.levels = config.levels;
  int workers = options.workers > 0 ? options.workers : config.workers;
  r.workers = workers > 0 ? workers : default_workers();

  std::vector<AnyModel> models;
  try {
    for (const auto &m : config.molecules) {
      models.push_back(make_model(config, m));
      r.truncation.push_back(model_truncation(models.back()));
    }
  } catch (const TruncationError &e) {
    r.ok = false;
    r.exit_code = 2;
    r.failure = e.what();
  } catch (const ConfigError &e) {
    r.ok = false;
    r.exit_code = 3;
    r.failure = e.what();
  }

  const std::size_t total = r.ok ? r.cell_count() : 0;
  r.cells.assign(r.ok ? r.cell_count() : 0, LevelReport{});
  r.done.assign(r.cells.size(), 0);

  auto body = [&](std::size_t i, Workspace &ws) {
    const auto c = r.coord(i);
    const auto train = config.make_train(r.taus[c.tau], r.deltas[c.delta]);
    r.cells[i] = run_model(models[c.species], train, config.engine, ws);
    r.done[i] = 1;
  };
  std::function<void(std::size_t)> progress;
  if (options.progress) progress = [&](std::size_t f) { options.progress(f, total); };

  if (total > 0) {
    if (const auto fail = parallel_cells(total, r.workers, body, progress)) {
      r.ok = false;
      r.failed_cell = r.coord(fail->first);
      const std::string where = detail::describe_cell(r, *r.failed_cell);
      try {
        std::rethrow_exception(fail->second);
      } catch (const TruncationError &e) {
        r.exit_code = 2;
        r.failure = std::string(e.what()) + " at " + where;
      } catch (const ConfigError &e) {
        r.exit_code = 3;
        r.failure = std::string(e.what()) + " at " + where;
      } catch (const std::exception &e) {
        r.exit_code = 1;
        r.failure = std::string(e.what()) + " at " + where;
      }
    }
  }
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

/// Two-dimensional (tau, delta) sweep; both axes must be non-empty.
inline SweepResult run_sweep(const RunConfig &config, const SweepOptions &options = {}) {
  if (config.taus.empty() || config.deltas.empty()) throw ConfigError("sweep: tau and delta ranges must be non-empty");
  return run_grid(config, options);
}

/// One-dimensional tau scan for every configured species at each configured
/// delta (usually one). An empty tau axis gives an empty, successful result.
inline SweepResult run_scan(const RunConfig &config, const SweepOptions &options = {}) {
  if (config.deltas.empty()) throw ConfigError("scan: needs at least one delta");
  return run_grid(config, options);
}

/// Ensemble observables of one species for a single train.
inline LevelReport run_single(const RunConfig &config, const MoleculeSpec &molecule, double tau, double delta) {
  const auto model = make_model(config, molecule);
  Workspace ws;
  return run_model(model, config.make_train(tau, delta), config.engine, ws);
}

} // namespace chiral
