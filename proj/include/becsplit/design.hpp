#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <vector>

#include "becsplit/constants.hpp"
#include "becsplit/experiments.hpp"
#include "becsplit/grid.hpp"
#include "becsplit/model.hpp"

// Optimal experiment selection: which subset of a discretized experiment
// domain pins down the five trap parameters with the least collinearity.
// The figure of merit is rho = 1/sqrt(lambda_min) of the normalized Fisher
// information matrix assembled from precomputed frequency sensitivities; a
// small genetic algorithm searches the subset lattice for its minimizer.
namespace becsplit::design {

// One selectable experiment. n_freq > 1 makes the experiment contribute one
// sensitivity row per extracted frequency component.
struct DomainEntry {
  experiments::ExperimentSpec spec;
  int n_freq = 1;

  bool operator==(const DomainEntry&) const = default;
};

// The finite, ordered experiment domain; subsets are referred to by index.
struct ExperimentDomain {
  std::vector<DomainEntry> entries;

  int size() const { return static_cast<int>(entries.size()); }

  // Throws ConfigError on duplicate entries or invalid specs.
  void validate() const;
};

// Default discretizations. Trap 1 is the nominal configuration; Trap 2 has a
// higher splitting value with correspondingly shifted ramp and offset ranges.
ExperimentDomain trap1_domain();
ExperimentDomain trap2_domain();

// Trap-2 configuration paired with trap2_domain(): higher A_s, weaker
// curvature slopes, tighter minima-position scale than the nominal trap.
inline constexpr model::ModelParameters kTrap2Params{-1100.0, 1700.0, 1.8, 0.5,
                                                     6.28};

using Row = std::array<double, model::kParamCount>;

// Per-frequency gradients of the measured frequencies with respect to the
// model parameters, evaluated once so that subset search never resimulates.
struct SensitivityTable {
  model::ModelParameters computed_at{};
  std::vector<Row> rows;            // one row per (experiment, frequency)
  std::vector<int> row_owner;       // domain index owning each row
  std::vector<double> baseline;     // unperturbed frequency per row

  // All rows owned by the given domain indices, in table order.
  std::vector<Row> rows_for(const std::vector<int>& ids) const;
};

// Central-difference gradient of the experiment's leading frequency. Steps
// are delta * |p_j| per component, with an absolute step of delta for A_s
// (and for any component that is exactly zero).
Row sensitivity_row(const model::ModelParameters& p,
                    const experiments::ExperimentSpec& spec,
                    double delta = 1e-3, const SpatialGrid& grid = {},
                    PhysicalConstants pc = {});

// Full table for a domain. Simulations are distributed over `threads` worker
// threads (0 = hardware concurrency) with a static partition, so the result
// is identical for every thread count. Multi-frequency entries are matched
// to the unperturbed spectrum by proximity before differencing.
SensitivityTable build_sensitivity_table(const model::ModelParameters& p,
                                         const ExperimentDomain& domain,
                                         double delta = 1e-3, int threads = 0,
                                         const SpatialGrid& grid = {},
                                         PhysicalConstants pc = {});

// Row-major 5x5 Fisher information matrix.
using Fim = std::array<double, model::kParamCount * model::kParamCount>;

// Information matrix of the selected rows scaled by q^{-1/2}, without column
// normalization (used for the monotonicity property of raw information).
Fim unnormalized_fim(const std::vector<Row>& rows, double q);

// Fully normalized information matrix: rows scaled by q^{-1/2}, then every
// column of the scaled sensitivity matrix brought to unit Euclidean norm, so
// the result has unit diagonal. A column that is identically zero (parameter
// unexcited by the selection) is left unscaled and reported via
// *zero_column; the minimal eigenvalue is then 0.
Fim normalized_fim(const std::vector<Row>& rows, double q,
                   bool* zero_column = nullptr);

// Eigenvalues of a symmetric 5x5 information matrix, ascending.
std::array<double, model::kParamCount> fim_spectrum(const Fim& fim);

// Collinearity index rho = 1/sqrt(lambda_min) of the normalized information
// matrix; +infinity when lambda_min <= 1e-12 (rank-deficient selection,
// which includes every selection of fewer than five rows).
double collinearity_index(const std::vector<Row>& rows, double q = 1.0);

// A subset of domain indices together with its collinearity index.
struct Selection {
  std::vector<int> ids;  // sorted, unique
  double rho = std::numeric_limits<double>::infinity();
};

// Collinearity threshold above which a selection is considered to carry
// substantial linear dependence between parameters.
inline constexpr double kCollinearityWarning = 20.0;

struct GAConfig {
  int population = 240;     // members per generation, divisible by 3
  int init_size = 30;       // experiments per initial member
  double survivor_fraction = 1.0 / 3.0;
  double p_swap = 0.001;    // per-experiment swap probability
  double p_add = 0.005;     // per-member add probability
  double p_remove = 0.006;  // per-member remove probability
  int iterations = 20000;
  std::uint64_t seed = 1;
  double q = 1.0;           // measurement variance entering the FIM

  // Throws ConfigError on out-of-range probabilities or a population that
  // does not split into thirds.
  void validate() const;
};

// Progress record of a GA run: fittest member of the seeded population and
// the best rho seen up to each iteration (non-increasing by construction).
struct GAReport {
  double initial_best_rho = std::numeric_limits<double>::infinity();
  std::vector<double> best_rho_history;
};

// Genetic subset search: evaluate rho for every member, cull the worst
// two-thirds, refill by union-crossover of random survivor pairs, then
// mutate (per-experiment swap, per-member add/remove). The best member of
// every generation is archived and the overall best returned. Deterministic
// for a fixed seed and config, independent of thread count.
Selection ga_select(const ExperimentDomain& domain,
                    const SensitivityTable& table, const GAConfig& cfg,
                    GAReport* report = nullptr);

// Brute-force oracle: globally best selection over all subsets of at most
// size_cap experiments. Refuses (ConfigError, reporting the count) when the
// number of candidate subsets exceeds 1e6.
Selection exhaustive_best(const ExperimentDomain& domain,
                          const SensitivityTable& table, int size_cap,
                          double q = 1.0);

}  // namespace becsplit::design
