#include "stlab/harness/experiments.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace stlab;
using namespace stlab::harness;

namespace {

struct Common {
  std::string config;
  std::string out = ".";
  std::string format = "csv";
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "experiment configuration (key=value or JSON)");
  app->add_option("--out", c.out, "output directory");
  app->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app->add_option("--seed", c.seed, "seed override");
  app->add_flag("--quiet", c.quiet, "suppress the summary on stdout");
}

ExperimentConfig load(const Common& c, const std::string& kind) {
  ExperimentConfig cfg;
  if (!c.config.empty()) cfg = load_config(c.config);
  cfg.kind = kind;
  if (c.seed) cfg.seed = *c.seed;
  validate(cfg);
  return cfg;
}

void emit(const Common& c, const Table& t, const std::string& stem) {
  fs::create_directories(c.out);
  const std::string path = (fs::path(c.out) / (stem + "." + c.format)).string();
  write_file(path, render(t, c.format));
  if (!c.quiet) std::cout << "wrote " << path << " (" << t.size() << " rows)\n";
}

int run_solve(const Common& c) {
  const auto cfg = load(c, "solve");
  const auto specs = schemes(cfg);
  if (specs.empty() || cfg.problems.empty() || cfg.Ns.empty() || cfg.dims.empty())
    throw ConfigError("solve: needs one problem, one scheme, one N and one dim");
  const auto p = make_problem(cfg.problems.front(), triple_spec(cfg, cfg.dims.front()).build(),
                              cfg.T, cfg.seed);
  const auto grid = make_grid(cfg.T, cfg.Ns.front());
  const auto spec = specs.front();
  const auto fn = solve_problem(p, spec, grid);
  fs::create_directories(c.out);
  Table sol;
  std::string header;
  if (spec.kind == SchemeKind::theta) {
    ThetaSolution<double> s{spec.theta, grid, fn.blocks};
    sol = solution_table(s);
    header = solution_header_json(s, p.triple, p.phi);
  } else {
    DgSolution<double> s{spec.q, grid, fn.blocks};
    sol = solution_table(s);
    header = solution_header_json(s, p.triple, p.phi);
  }
  emit(c, sol, "solution");
  write_file((fs::path(c.out) / "solution_header.json").string(), header);
  if (p.exact) {
    const auto b = error_bundle(ModalTarget<double>(*p.exact), fn.layout, fn.blocks, p.triple);
    Table t{"error-bundle", bundle_columns(), {}};
    t.add_row(bundle_cells(b));
    emit(c, t, "error_bundle");
  }
  return 0;
}

int run_converge(const Common& c) {
  const auto r = run_convergence(load(c, "converge"));
  emit(c, r.rows, "converge");
  emit(c, r.orders, "converge_orders");
  return 0;
}

int run_quasiopt(const Common& c) {
  const auto t = run_quasi_optimality(load(c, "quasiopt"));
  emit(c, t, "quasiopt");
  if (!all_true(t, "within_bound")) {
    std::cerr << "quasiopt: ratio above bound\n";
    return 2;
  }
  return 0;
}

int run_bnb(const Common& c) {
  Table summary;
  const auto t = run_bnb_scan(load(c, "bnb-scan"), nullptr, &summary);
  emit(c, t, "bnb_scan");
  emit(c, summary, "bnb_summary");
  return 0;
}

int run_cfl(const Common& c) {
  emit(c, run_cfl_scan(load(c, "cfl-scan")), "cfl_scan");
  return 0;
}

int run_gram(const Common& c, int q_max_flag) {
  auto cfg = load(c, "gram-check");
  const int q_max = q_max_flag >= 0 ? q_max_flag : cfg.q_max;
  const auto t = run_gram_check(q_max);
  emit(c, t, "gram_check");
  if (!all_true(t, "pass")) {
    std::cerr << "gram-check: failure\n";
    return 2;
  }
  return 0;
}

int run_cat(const Common& c) {
  const auto t = run_catalog(load(c, "solve"));
  emit(c, t, "catalog");
  return all_true(t, "ok") ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stlab: space-time discretizations of abstract parabolic problems"};
  app.require_subcommand(1);
  Common common;
  int q_max = -1;
  auto* solve = app.add_subcommand("solve", "solve one problem and write the solution");
  auto* conv = app.add_subcommand("converge", "error bundles and observed orders");
  auto* qopt = app.add_subcommand("quasiopt", "discrete versus best-approximation error");
  auto* bnb = app.add_subcommand("bnb-scan", "discrete inf-sup constants over a sweep");
  auto* cfl = app.add_subcommand("cfl-scan", "explicit scheme on a single stiff mode");
  auto* gram = app.add_subcommand("gram-check", "Hilbert Gram inverse identities");
  auto* cat = app.add_subcommand("catalog", "residual checks of the problem catalog");
  for (auto* s : {solve, conv, qopt, bnb, cfl, gram, cat}) add_common(s, common);
  gram->add_option("--q-max", q_max, "largest degree to check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 3;
  }
  try {
    if (*solve) return run_solve(common);
    if (*conv) return run_converge(common);
    if (*qopt) return run_quasiopt(common);
    if (*bnb) return run_bnb(common);
    if (*cfl) return run_cfl(common);
    if (*gram) return run_gram(common, q_max);
    if (*cat) return run_cat(common);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 3;
  } catch (const SingularSchemeError& e) {
    std::cerr << e.what() << "\n";
    return 4;
  } catch (const InvariantFailure& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
