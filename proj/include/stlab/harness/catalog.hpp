#pragma once

#include "stlab/stlab.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace stlab::harness {

struct TripleSpec {
  TripleKind kind = TripleKind::spectral_diagonal;
  int dim = 8;         // spectral: number of modes
  int n_cells = 8;     // p1
  double length = 1;   // p1

  SpaceTriple<double> build() const;
  /// The same family refined by `factor` (modes or cells).
  TripleSpec refined(int factor) const;
  std::string describe() const;
};

/// A problem u' + A u = f, u(0) - Phi u(T) = xi0 on a given triple, with
/// data given modally and, when available, the exact solution.
struct ManufacturedProblem {
  std::string name;
  SpaceTriple<double> triple;
  FormSpec<double> form;
  ContractionMap<double> phi;
  ModalFunction<double> xi0_modal;  // constant in time
  ModalFunction<double> f;
  std::optional<ModalFunction<double>> exact;
  double T = 1;
  std::uint64_t seed = 0;
  std::string provenance;

  bool rough() const { return !exact.has_value(); }
  Vector xi0() const { return xi0_modal.pair_H(0.0); }
  LoadFn<double> load() const;
};

std::vector<std::string> problem_names();

ManufacturedProblem make_problem(const std::string& name,
                                 const SpaceTriple<double>& triple, double T = 1,
                                 std::uint64_t seed = 0);

std::vector<ManufacturedProblem> catalog(const SpaceTriple<double>& triple,
                                         double T = 1, std::uint64_t seed = 0);

struct ResidualCheck {
  double ode_residual = 0;       // relative, max over 64 samples
  double coupling_residual = 0;  // ||u(0) - Phi u(T) - xi0||_H, relative
  bool has_exact = false;
  bool ok = true;
};

/// Modal substitution of the exact solution into the equation.
ResidualCheck check_problem(const ManufacturedProblem& p, double tol = 1e-9);

}  // namespace stlab::harness
