#pragma once

#include "stlab/harness/catalog.hpp"
#include "stlab/harness/config.hpp"
#include "stlab/harness/io.hpp"

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace stlab::harness {

/// A catalog problem failed its residual invariant, or a check failed.
class InvariantFailure : public Error {
 public:
  using Error::Error;
};

/// Discrete function as layout plus coefficient blocks.
struct DiscreteFn {
  SchemeLayout<double> layout;
  Mat<double> blocks;
};

TripleSpec triple_spec(const ExperimentConfig& c, int dim);
std::vector<SchemeSpec<double>> schemes(const ExperimentConfig& c);
ContractionMap<double> contraction(const std::string& name, const SpaceTriple<double>& t);

DiscreteFn solve_problem(const ManufacturedProblem& p, const SchemeSpec<double>& spec,
                         const TimeGrid<double>& grid);

/// Runs fn(0..n-1) on a pool of worker threads. Each call writes only to
/// its own slot, so results do not depend on scheduling.
void parallel_for(int n, const std::function<void(int)>& fn);

struct OrderFit {
  double order = 0;  // NaN when fewer than two points survive
  int points = 0;
};

/// Least-squares slope of log(err) against log(k), dropping errors below
/// 10 x floor.
OrderFit fit_order(const std::vector<double>& ks, const std::vector<double>& errs,
                   double floor = 1e-11);

struct ConvergenceResult {
  Table rows;
  Table orders;
};

/// Beta-hat values keyed by scheme, Phi, N, triple.
using BetaCache = std::map<std::string, double>;
std::string beta_key(const SchemeSpec<double>& s, const std::string& phi, int N,
                     const std::string& triple_label, double T);

ConvergenceResult run_convergence(const ExperimentConfig& c);
Table run_quasi_optimality(const ExperimentConfig& c, BetaCache* cache = nullptr);
/// Sweep rows; `summary` (when given) receives min/max beta-hat per family.
Table run_bnb_scan(const ExperimentConfig& c, BetaCache* cache = nullptr,
                   Table* summary = nullptr);
Table run_cfl_scan(const ExperimentConfig& c);
Table run_gram_check(int q_max);
/// Residual invariants of every catalog problem on the configured triples.
Table run_catalog(const ExperimentConfig& c);

/// True when every row has "true" in the given column.
bool all_true(const Table& t, const std::string& column);

}  // namespace stlab::harness
