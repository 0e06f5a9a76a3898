#include "stlab/harness/catalog.hpp"

#include <map>
#include <numbers>
#include <random>

namespace stlab::harness {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kRoughModes = 64;

/// Mode j of the triple; spectral modes past the triple continue the
/// lambda_j = j^2 sequence.
SpatialAtom<double> atom_for(const SpaceTriple<double>& t, int j) {
  if (t.kind() == TripleKind::p1_fem_dirichlet || j < t.dim()) return mode_atom(t, j);
  return spectral_atom(t, j, double(j + 1) * double(j + 1));
}

/// Deterministic per (seed, mode, salt) stream.
std::mt19937_64 mode_rng(std::uint64_t seed, int mode, std::uint64_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(mode), static_cast<std::uint32_t>(salt)};
  return std::mt19937_64(seq);
}

double uniform01(std::mt19937_64& g) {
  return double(g() >> 11) * (1.0 / 9007199254740992.0);
}

double gaussian(std::mt19937_64& g) {
  const double u1 = std::max(uniform01(g), 1e-300);
  const double u2 = uniform01(g);
  return std::sqrt(-2 * std::log(u1)) * std::cos(2 * kPi * u2);
}

}  // namespace

SpaceTriple<double> TripleSpec::build() const {
  if (kind == TripleKind::p1_fem_dirichlet) return make_p1_fem_triple<double>(n_cells, length);
  return make_default_spectral_triple<double>(dim);
}

TripleSpec TripleSpec::refined(int factor) const {
  TripleSpec s = *this;
  s.dim *= factor;
  s.n_cells *= factor;
  return s;
}

std::string TripleSpec::describe() const {
  if (kind == TripleKind::p1_fem_dirichlet)
    return "p1(" + std::to_string(n_cells) + "," + std::to_string(length) + ")";
  return "spectral(" + std::to_string(dim) + ")";
}

LoadFn<double> ManufacturedProblem::load() const {
  if (f.empty()) return {};
  const ModalFunction<double> g = f;
  return [g](double t) { return g.pair_H(t); };
}

std::vector<std::string> problem_names() { return {"decay", "periodic", "antiperiodic", "rough"}; }

ManufacturedProblem make_problem(const std::string& name, const SpaceTriple<double>& triple,
                                 double T, std::uint64_t seed) {
  const int n = triple.dim();
  ManufacturedProblem p{name,
                        triple,
                        make_scaled_form(triple, 1.0),
                        make_contraction(ContractionKind::zero, triple),
                        ModalFunction<double>(n),
                        ModalFunction<double>(n),
                        std::nullopt,
                        T,
                        seed,
                        ""};
  const auto e1 = atom_for(triple, 0);
  const double lam = e1.Lambda;
  if (name == "decay") {
    p.xi0_modal.add(e1, poly_time<double>({1.0}));
    ModalFunction<double> u(n);
    u.add(e1, exp_time(-lam));
    p.exact = u;
    p.provenance = "u = exp(-lambda_1 t) e_1, f = 0, Phi = 0";
  } else if (name == "periodic" || name == "antiperiodic") {
    const bool per = name == "periodic";
    const double omega = per ? 2 * kPi / T : kPi / T;
    p.phi = make_contraction(per ? ContractionKind::identity : ContractionKind::neg_identity,
                             triple);
    p.f.add(e1, cos_time(omega));
    ModalFunction<double> u(n);
    u.add(e1, cos_response_time(lam, omega));
    p.exact = u;
    p.provenance = std::string("f = cos(omega t) e_1, omega = ") + (per ? "2 pi/T" : "pi/T") +
                   ", closed-form " + (per ? "periodic" : "antiperiodic") + " response";
  } else if (name == "rough") {
    for (int j = 0; j < kRoughModes; ++j) {
      auto g = mode_rng(seed, j, 1);
      const double c = gaussian(g);
      const double omega = 2 * kPi * (0.5 + 1.5 * uniform01(g)) / T;
      const double phase = 2 * kPi * uniform01(g);
      p.f.add(atom_for(triple, j), cos_time(omega, phase, c));
      auto h = mode_rng(seed, j, 2);
      p.xi0_modal.add(atom_for(triple, j), poly_time<double>({gaussian(h) / (j + 1)}));
    }
    p.provenance = "random modal f with unit-variance coefficients on 64 modes, "
                   "xi0 coefficients ~ 1/j, Phi = 0; no exact solution";
  } else {
    throw DomainError("make_problem: unknown problem '" + name + "'");
  }
  return p;
}

std::vector<ManufacturedProblem> catalog(const SpaceTriple<double>& triple, double T,
                                         std::uint64_t seed) {
  std::vector<ManufacturedProblem> out;
  for (const auto& n : problem_names()) out.push_back(make_problem(n, triple, T, seed));
  return out;
}

ResidualCheck check_problem(const ManufacturedProblem& p, double tol) {
  ResidualCheck r;
  if (!p.exact) return r;
  r.has_exact = true;
  const auto& u = *p.exact;
  std::map<int, const ModalTerm<double>*> fm, xm;
  for (const auto& t : p.f.terms()) fm[t.atom.mode] = &t;
  for (const auto& t : p.xi0_modal.terms()) xm[t.atom.mode] = &t;
  // a = <.,.>_U acts on an eigenfunction as multiplication by Lambda
  double worst = 0;
  for (int s = 0; s < 64; ++s) {
    const double t = p.T * (s + 0.5) / 64;
    double res = 0, scale = 0;
    for (const auto& term : u.terms()) {
      const double lam = term.atom.Lambda, h = term.atom.h_norm2;
      const double fy = fm.count(term.atom.mode) ? fm[term.atom.mode]->y(t, 0) : 0.0;
      const double du = term.y(t, 1), uu = term.y(t, 0);
      const double e = du + lam * uu - fy;
      res += e * e * h / lam;
      scale += (du * du + lam * lam * uu * uu + fy * fy) * h / lam;
    }
    for (const auto& [mode, term] : fm) {
      bool in_u = false;
      for (const auto& ut : u.terms()) in_u |= ut.atom.mode == mode;
      if (!in_u) {
        const double fy = term->y(t, 0);
        res += fy * fy * term->atom.h_norm2 / term->atom.Lambda;
      }
    }
    worst = std::max(worst, std::sqrt(res / std::max(scale, 1e-300)));
  }
  r.ode_residual = worst;
  const double c = p.phi.scalar;
  double cres = 0, cscale = 0;
  for (const auto& term : u.terms()) {
    const double x = xm.count(term.atom.mode) ? xm[term.atom.mode]->y(0, 0) : 0.0;
    const double u0 = term.y(0, 0), uT = term.y(p.T, 0);
    const double e = u0 - c * uT - x;
    cres += e * e * term.atom.h_norm2;
    cscale += (u0 * u0 + uT * uT + x * x) * term.atom.h_norm2;
  }
  for (const auto& [mode, term] : xm) {
    bool in_u = false;
    for (const auto& ut : u.terms()) in_u |= ut.atom.mode == mode;
    if (!in_u) cres += std::pow(term->y(0, 0), 2) * term->atom.h_norm2;
  }
  r.coupling_residual = std::sqrt(cres / std::max(cscale, 1e-300));
  r.ok = r.ode_residual <= tol && r.coupling_residual <= tol;
  return r;
}

}  // namespace stlab::harness
