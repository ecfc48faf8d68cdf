#include "becsplit/design.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <random>
#include <string>
#include <thread>
#include <utility>

#include "becsplit/errors.hpp"
#include "becsplit/linalg.hpp"

namespace becsplit::design {

using experiments::ExperimentKind;
using experiments::ExperimentSpec;
using model::kParamCount;

namespace {

ExperimentSpec lr_spec(double A_R, double T_R) {
  ExperimentSpec s;
  s.kind = ExperimentKind::kLinearRamp;
  s.A_end = A_R;
  s.T_R = T_R;
  return s;
}

ExperimentSpec clr_spec(double A_R) {
  ExperimentSpec s;
  s.kind = ExperimentKind::kConsecutiveLinearRamp;
  s.A_end = A_R;
  return s;
}

ExperimentSpec offset_spec(double A_T) {
  ExperimentSpec s;
  s.kind = ExperimentKind::kOffset;
  s.A_end = A_T;
  return s;
}

ExperimentDomain grid_domain(double A_lo, double A_hi, double A_off_lo,
                             double A_off_hi) {
  ExperimentDomain d;
  auto values = [](double lo, double hi) {
    std::vector<double> v;
    // 0.02 control steps; rounding keeps the values exactly on the grid
    const int n = static_cast<int>(std::lround((hi - lo) / 0.02));
    for (int i = 0; i <= n; ++i) v.push_back(lo + 0.02 * i);
    return v;
  };
  for (double a : values(A_lo, A_hi))
    for (int i = 0; i < 10; ++i)
      d.entries.push_back({lr_spec(a, 0.3 + 0.2 * i), 1});
  for (double a : values(A_lo, A_hi)) d.entries.push_back({clr_spec(a), 1});
  for (double a : values(A_off_lo, A_off_hi))
    d.entries.push_back({offset_spec(a), 1});
  return d;
}

// Unbiased draw from [0, n) with rejection; bit-exact on every platform,
// unlike std::uniform_int_distribution.
int uniform_below(std::mt19937_64& rng, int n) {
  const auto un = static_cast<std::uint64_t>(n);
  const std::uint64_t threshold = (0 - un) % un;  // 2^64 mod n
  std::uint64_t v = rng();
  while (v < threshold) v = rng();
  return static_cast<int>(v % un);
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Floyd's algorithm: k distinct values from [0, n), returned sorted.
std::vector<int> sample_distinct(std::mt19937_64& rng, int n, int k) {
  k = std::min(k, n);
  std::vector<int> out;
  out.reserve(k);
  for (int j = n - k; j < n; ++j) {
    const int t = uniform_below(rng, j + 1);
    auto it = std::lower_bound(out.begin(), out.end(), t);
    if (it != out.end() && *it == t) {
      out.insert(std::lower_bound(out.begin(), out.end(), j), j);
    } else {
      out.insert(it, t);
    }
  }
  return out;
}

// The r-th id not contained in the sorted member list.
int nth_outside(int r, const std::vector<int>& member) {
  int id = r;
  for (int m : member) {
    if (m <= id)
      ++id;
    else
      break;
  }
  return id;
}

int draw_outside(std::mt19937_64& rng, int n, const std::vector<int>& member) {
  return nth_outside(uniform_below(rng, n - static_cast<int>(member.size())),
                     member);
}

void insert_id(std::vector<int>* member, int id) {
  member->insert(std::lower_bound(member->begin(), member->end(), id), id);
}

// For each baseline frequency, the probe candidate nearest to it. A perturbed
// model can reorder the peak powers, so a probe run carries spare candidates
// and each baseline peak follows its closest continuation; without this the
// finite differences jump between branches of the spectrum. Pairs are
// assigned globally nearest first, each candidate used once; only when the
// probe spectrum has fewer peaks than the baseline do leftovers share their
// nearest candidate.
std::vector<double> match_to_baseline(const std::vector<double>& base,
                                      const std::vector<double>& probe) {
  if (probe.empty())
    throw NumericalError("design: probe run produced no spectral peaks");
  std::vector<double> out(base.size());
  std::vector<char> done(base.size(), 0);
  std::vector<char> used(probe.size(), 0);
  const std::size_t rounds = std::min(base.size(), probe.size());
  for (std::size_t round = 0; round < rounds; ++round) {
    std::size_t bi = base.size();
    std::size_t bj = probe.size();
    double best = 0.0;
    for (std::size_t i = 0; i < base.size(); ++i) {
      if (done[i]) continue;
      for (std::size_t j = 0; j < probe.size(); ++j) {
        if (used[j]) continue;
        const double dist = std::abs(probe[j] - base[i]);
        if (bi == base.size() || dist < best) {
          bi = i;
          bj = j;
          best = dist;
        }
      }
    }
    out[bi] = probe[bj];
    done[bi] = 1;
    used[bj] = 1;
  }
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (done[i]) continue;
    std::size_t bj = 0;
    for (std::size_t j = 1; j < probe.size(); ++j)
      if (std::abs(probe[j] - base[i]) < std::abs(probe[bj] - base[i])) bj = j;
    out[i] = probe[bj];
  }
  return out;
}

std::array<double, kParamCount> probe_steps(const model::ModelParameters& p,
                                            double delta) {
  const std::array<double, kParamCount> v = model::to_array(p);
  std::array<double, kParamCount> d;
  for (int j = 0; j < kParamCount; ++j) {
    // A_s (and any exactly-zero component) gets an absolute step; the rest
    // scale with the parameter magnitude.
    d[j] = (j == 3 || v[j] == 0.0) ? delta : delta * std::abs(v[j]);
  }
  return d;
}

std::string probe_name(int v) {
  if (v == 0) return "baseline";
  const int j = (v - 1) / 2;
  return std::string(model::kParamNames[j]) + ((v % 2 == 1) ? "+" : "-");
}

// Row indices of the table grouped by owning domain id.
std::vector<std::vector<int>> rows_by_owner(const SensitivityTable& table,
                                            int domain_size) {
  std::vector<std::vector<int>> by_owner(domain_size);
  for (std::size_t r = 0; r < table.row_owner.size(); ++r) {
    const int owner = table.row_owner[r];
    if (owner < 0 || owner >= domain_size)
      throw ConfigError("design: table row owner out of domain range");
    by_owner[owner].push_back(static_cast<int>(r));
  }
  for (int i = 0; i < domain_size; ++i)
    if (by_owner[i].empty())
      throw ConfigError("design: sensitivity table does not cover domain id " +
                        std::to_string(i));
  return by_owner;
}

}  // namespace

void ExperimentDomain::validate() const {
  for (const DomainEntry& e : entries) {
    e.spec.validate();
    if (e.n_freq < 1)
      throw ConfigError("design: n_freq must be at least 1");
  }
  for (std::size_t i = 0; i < entries.size(); ++i)
    for (std::size_t j = i + 1; j < entries.size(); ++j)
      if (entries[i] == entries[j])
        throw ConfigError("design: duplicate domain entry " +
                          entries[i].spec.label());
}

ExperimentDomain trap1_domain() { return grid_domain(0.44, 0.70, 0.30, 0.70); }

ExperimentDomain trap2_domain() { return grid_domain(0.54, 0.80, 0.40, 0.80); }

std::vector<Row> SensitivityTable::rows_for(const std::vector<int>& ids) const {
  std::vector<Row> out;
  for (std::size_t r = 0; r < rows.size(); ++r)
    if (std::binary_search(ids.begin(), ids.end(), row_owner[r]))
      out.push_back(rows[r]);
  return out;
}

Row sensitivity_row(const model::ModelParameters& p, const ExperimentSpec& spec,
                    double delta, const SpatialGrid& grid,
                    PhysicalConstants pc) {
  if (!(delta > 0.0))
    throw ConfigError("design: finite-difference delta must be positive");
  ExperimentDomain domain;
  domain.entries.push_back({spec, 1});
  const SensitivityTable table =
      build_sensitivity_table(p, domain, delta, 1, grid, pc);
  return table.rows.front();
}

SensitivityTable build_sensitivity_table(const model::ModelParameters& p,
                                         const ExperimentDomain& domain,
                                         double delta, int threads,
                                         const SpatialGrid& grid,
                                         PhysicalConstants pc) {
  if (!(delta > 0.0))
    throw ConfigError("design: finite-difference delta must be positive");
  p.validate();
  domain.validate();

  const int n_exp = domain.size();
  const std::array<double, kParamCount> base = model::to_array(p);
  const std::array<double, kParamCount> steps = probe_steps(p, delta);

  // Probe 0 is the unperturbed model; probes 1+2j / 2+2j shift parameter j
  // up / down by its step.
  constexpr int kProbes = 1 + 2 * kParamCount;
  std::array<model::ModelParameters, kProbes> probe_params;
  probe_params[0] = p;
  for (int j = 0; j < kParamCount; ++j) {
    std::array<double, kParamCount> up = base;
    std::array<double, kParamCount> dn = base;
    up[j] += steps[j];
    dn[j] -= steps[j];
    probe_params[1 + 2 * j] = model::from_array(up);
    probe_params[2 + 2 * j] = model::from_array(dn);
  }
  for (const auto& pp : probe_params) pp.validate();

  int n_threads = threads > 0
                      ? threads
                      : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::clamp(n_threads, 1, std::max(1, n_exp));

  // freqs[v][e]: extracted spectrum of experiment e under probe model v.
  // Every slot is written by exactly one thread (static partition over
  // experiments), so the table is identical for every thread count.
  std::vector<std::vector<std::vector<double>>> freqs(
      kProbes, std::vector<std::vector<double>>(n_exp));
  std::vector<std::exception_ptr> failures(
      static_cast<std::size_t>(kProbes) * n_exp);

  auto worker = [&](int t) {
    const int lo = static_cast<int>(static_cast<long long>(n_exp) * t /
                                    n_threads);
    const int hi = static_cast<int>(static_cast<long long>(n_exp) * (t + 1) /
                                    n_threads);
    if (lo >= hi) return;
    for (int v = 0; v < kProbes; ++v) {
      // One runner per probe model keeps ground states shared across the
      // experiments this thread simulates for that model.
      experiments::Runner runner(probe_params[v], grid, pc);
      for (int e = lo; e < hi; ++e) {
        const int n_freq = domain.entries[e].n_freq;
        try {
          if (v == 0) {
            freqs[v][e] =
                runner.simulate(domain.entries[e].spec, n_freq).frequencies;
          } else {
            // Perturbed runs carry spare peaks so the baseline components can
            // follow their nearest continuation (see match_to_baseline).
            freqs[v][e] = runner.candidate_frequencies(
                domain.entries[e].spec, std::min(n_freq + 3, 6));
          }
        } catch (...) {
          failures[static_cast<std::size_t>(e) * kProbes + v] =
              std::current_exception();
        }
      }
    }
  };

  if (n_threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker, t);
    for (std::thread& th : pool) th.join();
  }

  for (int e = 0; e < n_exp; ++e)
    for (int v = 0; v < kProbes; ++v)
      if (auto err = failures[static_cast<std::size_t>(e) * kProbes + v]) {
        try {
          std::rethrow_exception(err);
        } catch (const std::exception& inner) {
          throw NumericalError("sensitivity probe " + probe_name(v) + ": " +
                               inner.what());
        }
      }

  SensitivityTable table;
  table.computed_at = p;
  for (int e = 0; e < n_exp; ++e) {
    const std::vector<double>& f0 = freqs[0][e];
    std::array<std::vector<double>, 2 * kParamCount> matched;
    for (int j = 0; j < 2 * kParamCount; ++j)
      matched[j] = match_to_baseline(f0, freqs[1 + j][e]);
    for (std::size_t k = 0; k < f0.size(); ++k) {
      Row row;
      for (int j = 0; j < kParamCount; ++j)
        row[j] =
            (matched[2 * j][k] - matched[2 * j + 1][k]) / (2.0 * steps[j]);
      table.rows.push_back(row);
      table.row_owner.push_back(e);
      table.baseline.push_back(f0[k]);
    }
  }
  return table;
}

Fim unnormalized_fim(const std::vector<Row>& rows, double q) {
  if (rows.empty())
    throw ConfigError("design: information matrix needs at least one row");
  if (!(q > 0.0))
    throw ConfigError("design: measurement variance must be positive");
  Fim fim{};
  const double w = 1.0 / q;  // each row carries q^{-1/2} twice
  for (const Row& r : rows)
    for (int i = 0; i < kParamCount; ++i)
      for (int j = 0; j < kParamCount; ++j)
        fim[i * kParamCount + j] += w * r[i] * r[j];
  return fim;
}

Fim normalized_fim(const std::vector<Row>& rows, double q, bool* zero_column) {
  if (rows.empty())
    throw ConfigError("design: information matrix needs at least one row");
  if (!(q > 0.0))
    throw ConfigError("design: measurement variance must be positive");
  const double w = 1.0 / std::sqrt(q);

  std::array<double, kParamCount> col_norm{};
  for (const Row& r : rows)
    for (int j = 0; j < kParamCount; ++j)
      col_norm[j] += (w * r[j]) * (w * r[j]);
  bool flagged = false;
  std::array<double, kParamCount> scale;
  for (int j = 0; j < kParamCount; ++j) {
    if (col_norm[j] == 0.0) {
      flagged = true;
      scale[j] = 1.0;  // column stays zero; lambda_min collapses to 0
    } else {
      scale[j] = 1.0 / std::sqrt(col_norm[j]);
    }
  }
  if (zero_column != nullptr) *zero_column = flagged;

  Fim fim{};
  for (const Row& r : rows)
    for (int i = 0; i < kParamCount; ++i)
      for (int j = 0; j < kParamCount; ++j)
        fim[i * kParamCount + j] +=
            (w * r[i] * scale[i]) * (w * r[j] * scale[j]);
  return fim;
}

std::array<double, kParamCount> fim_spectrum(const Fim& fim) {
  const std::vector<double> eig = linalg::sym_eigenvalues(
      std::vector<double>(fim.begin(), fim.end()), kParamCount);
  std::array<double, kParamCount> out;
  std::copy(eig.begin(), eig.end(), out.begin());
  return out;
}

double collinearity_index(const std::vector<Row>& rows, double q) {
  if (rows.size() < static_cast<std::size_t>(kParamCount))
    return std::numeric_limits<double>::infinity();
  const std::array<double, kParamCount> eig =
      fim_spectrum(normalized_fim(rows, q));
  const double lambda_min = eig.front();
  if (lambda_min <= 1e-12) return std::numeric_limits<double>::infinity();
  return 1.0 / std::sqrt(lambda_min);
}

void GAConfig::validate() const {
  if (population < 3 || population % 3 != 0)
    throw ConfigError("ga: population must be a positive multiple of 3");
  if (init_size < 1) throw ConfigError("ga: init_size must be positive");
  for (double prob : {p_swap, p_add, p_remove})
    if (!(prob >= 0.0 && prob <= 1.0))
      throw ConfigError("ga: mutation probabilities must lie in [0,1]");
  if (!(survivor_fraction > 0.0 && survivor_fraction < 1.0))
    throw ConfigError("ga: survivor_fraction must lie in (0,1)");
  const double s = population * survivor_fraction;
  if (std::abs(s - std::lround(s)) > 1e-9 || std::lround(s) < 1)
    throw ConfigError("ga: population * survivor_fraction must be integral");
  if (iterations < 0) throw ConfigError("ga: iterations must be non-negative");
  if (!(q > 0.0)) throw ConfigError("ga: variance q must be positive");
}

Selection ga_select(const ExperimentDomain& domain,
                    const SensitivityTable& table, const GAConfig& cfg,
                    GAReport* report) {
  cfg.validate();
  domain.validate();
  const int n = domain.size();
  const std::vector<std::vector<int>> by_owner = rows_by_owner(table, n);

  std::vector<Row> row_buf;
  auto rho_of = [&](const std::vector<int>& ids) {
    row_buf.clear();
    for (int id : ids)
      for (int r : by_owner[id]) row_buf.push_back(table.rows[r]);
    return collinearity_index(row_buf, cfg.q);
  };

  std::mt19937_64 rng(cfg.seed);
  const int init_k = std::min(cfg.init_size, n);
  const int survivors =
      static_cast<int>(std::lround(cfg.population * cfg.survivor_fraction));

  std::vector<std::vector<int>> pop(cfg.population);
  std::vector<double> fit(cfg.population);
  for (int i = 0; i < cfg.population; ++i) {
    pop[i] = sample_distinct(rng, n, init_k);
    fit[i] = rho_of(pop[i]);
  }

  Selection best;
  auto archive = [&] {
    int arg = 0;
    for (int i = 1; i < cfg.population; ++i)
      if (fit[i] < fit[arg]) arg = i;
    if (fit[arg] < best.rho) {
      best.ids = pop[arg];
      best.rho = fit[arg];
    }
    if (report != nullptr) report->best_rho_history.push_back(best.rho);
  };

  if (report != nullptr) {
    report->initial_best_rho =
        *std::min_element(fit.begin(), fit.end());
    report->best_rho_history.clear();
  }
  archive();

  std::vector<int> order(cfg.population);
  for (int it = 0; it < cfg.iterations; ++it) {
    // Selection: keep the third with the lowest rho (stable in index on ties
    // so the run is reproducible).
    for (int i = 0; i < cfg.population; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return fit[a] < fit[b]; });
    std::vector<std::vector<int>> next(cfg.population);
    std::vector<double> next_fit(cfg.population);
    std::vector<char> dirty(cfg.population, 0);
    for (int i = 0; i < survivors; ++i) {
      next[i] = std::move(pop[order[i]]);
      next_fit[i] = fit[order[i]];
    }

    // Crossover: every fresh slot is a random subset of the union of two
    // distinct random survivors, its size uniform between the parent sizes.
    for (int i = survivors; i < cfg.population; ++i) {
      const int a = uniform_below(rng, survivors);
      int b = a;  // a lone survivor pairs with itself
      if (survivors > 1) {
        b = uniform_below(rng, survivors - 1);
        if (b >= a) ++b;
      }
      std::vector<int> merged;
      std::set_union(next[a].begin(), next[a].end(), next[b].begin(),
                     next[b].end(), std::back_inserter(merged));
      const int lo =
          static_cast<int>(std::min(next[a].size(), next[b].size()));
      const int hi =
          static_cast<int>(std::max(next[a].size(), next[b].size()));
      const int child_size = lo + uniform_below(rng, hi - lo + 1);
      const std::vector<int> pick =
          sample_distinct(rng, static_cast<int>(merged.size()), child_size);
      std::vector<int> child;
      child.reserve(pick.size());
      for (int idx : pick) child.push_back(merged[idx]);
      next[i] = std::move(child);
      dirty[i] = 1;
    }

    // Mutation over every member: per-experiment swap, then a chance to add
    // or drop one experiment. An emptied member is reseeded from scratch.
    for (int i = 0; i < cfg.population; ++i) {
      std::vector<int>& m = next[i];
      const std::vector<int> snapshot = m;
      for (int id : snapshot) {
        if (uniform01(rng) >= cfg.p_swap ||
            m.size() >= static_cast<std::size_t>(n))
          continue;
        m.erase(std::lower_bound(m.begin(), m.end(), id));
        insert_id(&m, draw_outside(rng, n, m));
        dirty[i] = 1;
      }
      if (uniform01(rng) < cfg.p_add &&
          m.size() < static_cast<std::size_t>(n)) {
        insert_id(&m, draw_outside(rng, n, m));
        dirty[i] = 1;
      }
      if (uniform01(rng) < cfg.p_remove && !m.empty()) {
        m.erase(m.begin() + uniform_below(rng, static_cast<int>(m.size())));
        dirty[i] = 1;
      }
      if (m.empty()) {
        m = sample_distinct(rng, n, init_k);
        dirty[i] = 1;
      }
    }

    pop = std::move(next);
    fit = std::move(next_fit);
    for (int i = 0; i < cfg.population; ++i)
      if (dirty[i]) fit[i] = rho_of(pop[i]);
    archive();
  }
  return best;
}

Selection exhaustive_best(const ExperimentDomain& domain,
                          const SensitivityTable& table, int size_cap,
                          double q) {
  domain.validate();
  if (size_cap < 1) throw ConfigError("design: size_cap must be positive");
  const int n = domain.size();
  const std::vector<std::vector<int>> by_owner = rows_by_owner(table, n);
  const int cap = std::min(size_cap, n);

  // Count all candidate subsets up to the cap before enumerating anything.
  double count = 0.0;
  double binom = 1.0;
  for (int k = 1; k <= cap; ++k) {
    binom *= static_cast<double>(n - k + 1) / k;
    count += binom;
    if (count > 1e6)
      throw ConfigError(
          "design: exhaustive search over more than 1e6 subsets refused "
          "(domain " +
          std::to_string(n) + ", cap " + std::to_string(size_cap) + ")");
  }

  Selection best;
  if (cap < kParamCount) return best;  // every subset is rank-deficient

  std::vector<Row> row_buf;
  std::vector<int> ids;
  for (int k = kParamCount; k <= cap; ++k) {
    ids.resize(k);
    for (int i = 0; i < k; ++i) ids[i] = i;
    while (true) {
      row_buf.clear();
      for (int id : ids)
        for (int r : by_owner[id]) row_buf.push_back(table.rows[r]);
      const double rho = collinearity_index(row_buf, q);
      if (rho < best.rho) {
        best.ids = ids;
        best.rho = rho;
      }
      // Next k-combination in lexicographic order.
      int i = k - 1;
      while (i >= 0 && ids[i] == n - k + i) --i;
      if (i < 0) break;
      ++ids[i];
      for (int j = i + 1; j < k; ++j) ids[j] = ids[j - 1] + 1;
    }
  }
  return best;
}

}  // namespace becsplit::design
