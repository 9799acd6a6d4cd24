#include "nodalab/cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/Core>

#include "nodalab/nodal.hpp"
#include "nodalab/parallel.hpp"
#include "nodalab/report_io.hpp"
#include "nodalab/studies.hpp"

namespace nodalab {

namespace {

constexpr const char* kVersion = "0.1.0";

struct RunConfig {
  std::string domain = "rect:1x0.618";
  Json domain_json;
  int resolution = 256;
  std::string potential_file;
  std::string out = ".";
  int threads = 0;
  double tol = 1e-9;

  int count = 12;
  int n_max = 12;
  std::string mode;
  int n = 0;
  int K = 4;
  double dt = 1e-2;
  double eps = 1e-3;
  double amplitude = 0.02;
  std::string direction = "cos2";
  int max_iters = 40;
  double gtol = 1e-3;
  bool check_symmetry = false;
};

double positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be positive");
  return v;
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  const Json j = read_json(path);
  try {
    if (j.contains("domain")) {
      const Json& d = j["domain"];
      if (d.is_string()) {
        cfg.domain = d.get<std::string>();
      } else {
        cfg.domain_json = d;
      }
    }
    if (j.contains("resolution")) cfg.resolution = j["resolution"].get<int>();
    if (j.contains("potential")) {
      const Json& v = j["potential"];
      if (v.is_string()) {
        if (v.get<std::string>() != "zero") throw ConfigError("unknown potential " + v.get<std::string>());
        cfg.potential_file.clear();
      } else {
        std::filesystem::path file = v.at("grid_file").get<std::string>();
        if (file.is_relative()) file = std::filesystem::path(path).parent_path() / file;
        cfg.potential_file = file.string();
      }
    }
    auto take = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j[key].get<std::decay_t<decltype(field)>>();
    };
    take("out", cfg.out);
    take("threads", cfg.threads);
    take("tol", cfg.tol);
    take("count", cfg.count);
    take("n_max", cfg.n_max);
    take("n", cfg.n);
    take("K", cfg.K);
    take("dt", cfg.dt);
    take("eps", cfg.eps);
    take("amplitude", cfg.amplitude);
    take("direction", cfg.direction);
    take("max_iters", cfg.max_iters);
    take("gtol", cfg.gtol);
    take("check_symmetry", cfg.check_symmetry);
    if (j.contains("mode")) {
      const Json& m = j["mode"];
      cfg.mode = m.is_string() ? m.get<std::string>()
                               : std::to_string(m.at(0).get<int>()) + "," + std::to_string(m.at(1).get<int>());
    }
  } catch (const Json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

DomainSpec domain_of(const RunConfig& cfg) {
  DomainSpec d;
  if (!cfg.domain_json.is_null()) {
    try {
      const std::string kind = cfg.domain_json.at("kind").get<std::string>();
      if (kind == "rectangle") {
        d = DomainSpec::rectangle(cfg.domain_json.at("a").get<double>(), cfg.domain_json.at("b").get<double>());
      } else if (kind == "disk") {
        d = DomainSpec::disk(cfg.domain_json.at("r").get<double>());
      } else {
        throw ConfigError("unknown domain kind " + kind);
      }
    } catch (const Json::exception& e) {
      throw ConfigError(std::string("domain: ") + e.what());
    }
  } else {
    d = parse_domain(cfg.domain);
  }
  if (!cfg.potential_file.empty()) load_potential_grid(d, cfg.potential_file);
  d.validate();
  return d;
}

std::pair<int, int> parse_mode(const std::string& text) {
  int m = 0, k = 0;
  char comma = 0;
  std::istringstream in(text);
  if (!(in >> m >> comma >> k) || comma != ',' || !in.eof()) throw ConfigError("mode must read m,k: " + text);
  if (m < 1 || k < 1) throw ConfigError("mode indices must be at least 1");
  return {m, k};
}

Json config_json(const RunConfig& cfg, const std::string& command) {
  Json j;
  j["command"] = command;
  j["domain"] = cfg.domain_json.is_null() ? Json(cfg.domain) : cfg.domain_json;
  j["resolution"] = cfg.resolution;
  j["potential"] = cfg.potential_file.empty() ? Json("zero") : Json{{"grid_file", cfg.potential_file}};
  j["out"] = cfg.out;
  j["tol"] = cfg.tol;
  j["count"] = cfg.count;
  j["n_max"] = cfg.n_max;
  j["mode"] = cfg.mode;
  j["n"] = cfg.n;
  j["K"] = cfg.K;
  j["dt"] = cfg.dt;
  j["eps"] = cfg.eps;
  j["amplitude"] = cfg.amplitude;
  j["direction"] = cfg.direction;
  j["max_iters"] = cfg.max_iters;
  j["gtol"] = cfg.gtol;
  j["check_symmetry"] = cfg.check_symmetry;
  return j;
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.out) / name).string();
}

/// The working partition of a command: a rectangle mode chart, or the nodal
/// partition of the n-th eigenfunction.
struct Target {
  int m = 0, k = 0, n = 0;
  Partition partition;
  std::string chart;
  EigenPair pair;
};

Target resolve_target(const RunConfig& cfg, const Grid& grid, const SolverOptions& opt, bool need_pair) {
  Target t;
  const bool product = grid.domain.kind == DomainKind::rectangle && !grid.domain.potential;
  if (!cfg.mode.empty()) {
    if (!product) throw ConfigError("--mode needs a rectangle with zero potential");
    std::tie(t.m, t.k) = parse_mode(cfg.mode);
    t.n = rectangle_mode_index(grid.domain, t.m, t.k);
  } else if (cfg.n >= 1) {
    t.n = cfg.n;
    if (product) std::tie(t.m, t.k) = rectangle_mode_at(grid.domain, t.n);
  } else {
    throw ConfigError("give --mode m,k or --n N");
  }
  if (t.n > 20) throw ConfigError("eigenvalue index above 20");
  if (need_pair || !product) {
    const auto spec = lowest_eigenpairs(assemble_operator(grid), t.n, opt);
    t.pair = spec.back();
  }
  if (product) {
    auto charts = rectangle_mode_charts(grid, t.m, t.k);
    t.chart = charts.front().first;
    t.partition = std::move(charts.front().second);
  } else {
    t.partition = nodal_partition(t.pair, grid);
    t.chart = "nodal contours";
  }
  return t;
}

struct Context {
  RunConfig cfg;
  std::string command;
  Json outputs = Json::array();
  Json summary = Json::object();
};

void cmd_spectrum(Context& cx, const Grid& grid, const SolverOptions& opt) {
  const auto spec = lowest_eigenpairs(assemble_operator(grid), cx.cfg.count, opt);
  const std::string path = out_path(cx.cfg, "spectrum.csv");
  write_spectrum_csv(spec, path);
  cx.outputs.push_back(path);
  std::cout << std::setprecision(10);
  for (const EigenPair& e : spec) std::cout << e.n << "  " << e.lambda << "  (residual " << e.residual << ")\n";
}

void cmd_deficiency(Context& cx, const Grid& grid, const SolverOptions& opt) {
  const int rows = cx.cfg.n_max;
  if (rows < 1 || rows > 19) throw ConfigError("--n-max must be between 1 and 19");
  const auto spec = lowest_eigenpairs(assemble_operator(grid), rows + 1, opt);
  const auto table = deficiency_table(spec, grid, rows);
  const std::string path = out_path(cx.cfg, "deficiency.csv");
  write_deficiency_csv(table, path);
  cx.outputs.push_back(path);
  for (const NodalReport& r : table)
    std::cout << "n=" << r.n << " nu=" << r.nu << " d=" << r.deficiency << (r.is_tree ? " tree" : "")
              << (r.genericity.generic() ? "" : " non-generic") << '\n';
}

void cmd_hadamard(Context& cx, const Grid& grid, const SolverOptions& opt) {
  const Target t = resolve_target(cx.cfg, grid, opt, false);
  const HadamardCheck h = hadamard_check(t.partition, grid, cx.cfg.K, positive(cx.cfg.eps, "eps"), opt);
  Json j;
  j["n"] = t.n;
  if (t.m > 0) j["mode"] = {t.m, t.k};
  j["chart"] = t.chart;
  j["eps"] = h.eps;
  j["max_error"] = h.max_error;
  j["entries"] = Json::array();
  for (const HadamardEntry& e : h.entries)
    j["entries"].push_back({{"interface", e.interface},
                            {"basis", e.mode},
                            {"subdomain", e.subdomain},
                            {"hadamard", e.formula},
                            {"finite_difference", e.finite_difference},
                            {"error", e.error}});
  const std::string path = out_path(cx.cfg, "gradient.json");
  write_json(j, path);
  cx.outputs.push_back(path);
  cx.summary["max_error"] = h.max_error;
  std::cout << "max error (floored relative) " << h.max_error << '\n';
}

void cmd_criticality(Context& cx, const Grid& grid, const SolverOptions& opt) {
  const Target t = resolve_target(cx.cfg, grid, opt, true);
  const CriticalityStudy s = criticality_study(t.partition, t.pair, grid, cx.cfg.K, cx.cfg.amplitude, opt);
  Json j;
  j["n"] = s.n;
  if (t.m > 0) j["mode"] = {t.m, t.k};
  j["chart"] = t.chart;
  j["lambda"] = s.lambda;
  j["nu"] = s.nu;
  j["c"] = s.c.c;
  j["gradient_norm"] = s.gradient_norm;
  j["gradient_norm_displaced"] = s.gradient_norm_displaced;
  j["displacement_amplitude"] = s.amplitude;
  j["ratio"] = s.gradient_norm / s.gradient_norm_displaced;
  j["matched_derivative_mismatch"] = s.matched_mismatch;
  j["per_interface_mismatch"] = s.per_interface;
  const std::string path = out_path(cx.cfg, "criticality.json");
  write_json(j, path);
  cx.outputs.push_back(path);
  std::cout << "|grad Lambda_c| = " << s.gradient_norm << " (displaced " << s.gradient_norm_displaced
            << "), matched-derivative mismatch " << s.matched_mismatch << '\n';
}

void cmd_morse(Context& cx, const Grid& grid, const SolverOptions& opt) {
  RunConfig& cfg = cx.cfg;
  int m = 0, k = 0;
  if (!cfg.mode.empty()) {
    std::tie(m, k) = parse_mode(cfg.mode);
  } else if (cfg.n >= 1) {
    std::tie(m, k) = rectangle_mode_at(grid.domain, cfg.n);
  } else {
    throw ConfigError("give --mode m,k or --n N");
  }
  HessianOptions ho;
  ho.dt = positive(cfg.dt, "dt");
  ho.projection.solver = opt;
  ho.check_symmetry = cfg.check_symmetry;
  const MorseStudy ms = morse_study(grid, m, k, cfg.K, ho);
  Json j = hessian_json(ms.report(), m, k, ms.n, ms.deficiency);
  j["nu"] = ms.nu;
  j["chart"] = ms.branch_names[ms.chosen];
  j["branches"] = Json::array();
  for (std::size_t b = 0; b < ms.branches.size(); ++b)
    j["branches"].push_back({{"chart", ms.branch_names[b]},
                             {"morse_index", ms.branches[b].morse_index},
                             {"mu0_index", ms.branches[b].mu0_index},
                             {"eigenvalues", to_json(ms.branches[b].eigenvalues)}});
  const std::string path = out_path(cfg, "hessian.json");
  write_json(j, path);
  cx.outputs.push_back(path);
  cx.summary["morse_index"] = ms.report().morse_index;
  cx.summary["deficiency"] = ms.deficiency;
  const HessianReport& r = ms.report();
  std::cout << "mode (" << m << "," << k << "), n = " << ms.n << ", nu = " << ms.nu << ", d_n = " << ms.deficiency
            << '\n'
            << "tangent eigenvalues:";
  for (int i = 0; i < r.eigenvalues.size(); ++i) std::cout << ' ' << r.eigenvalues[i];
  std::cout << "\nmorse index " << r.morse_index << ", mu0 " << r.mu0_index << ", tau " << r.tau
            << (r.nondegenerate ? ", nondegenerate" : ", degenerate") << (r.critical ? "" : ", NOT critical") << '\n'
            << "MORSE == DEFICIENCY: " << (ms.equality() ? "yes" : "no") << '\n';
}

void cmd_minimize(Context& cx, const Grid& grid, const SolverOptions& opt) {
  RunConfig& cfg = cx.cfg;
  const Target t = resolve_target(cfg, grid, opt, false);
  const ModeBasis basis = ModeBasis::build(t.partition.interfaces, cfg.K);
  Eigen::VectorXd start = Eigen::VectorXd::Zero(basis.dimension());
  if (cfg.amplitude != 0.0) {
    Eigen::VectorXd dir = Eigen::VectorXd::Zero(basis.dimension());
    if (cfg.direction == "unstable") {
      HessianOptions ho;
      ho.dt = positive(cfg.dt, "dt");
      ho.projection.solver = opt;
      const HessianReport rep = hessian_of_lambda(t.partition, basis, grid, ho);
      if (rep.morse_index == 0) throw ComputationError("no unstable direction at this partition");
      dir = rep.tangent_basis * rep.eigenvectors.col(0);
      start = rep.base;
    } else {
      int idx = -1;
      for (int i = 0; i < basis.dimension(); ++i)
        if (basis.label(i) == cfg.direction || basis.label(i) == "s0:" + cfg.direction) idx = i;
      if (idx < 0) throw ConfigError("unknown direction " + cfg.direction);
      dir[idx] = 1.0;
    }
    const double sup = PerturbationCoords::from(basis, dir).sup_norm(t.partition);
    start += cfg.amplitude / sup * dir;
  }
  DescentOptions d;
  d.max_iters = cfg.max_iters;
  d.gradient_tol = positive(cfg.gtol, "gtol");
  d.projection.solver = opt;
  const DescentResult r = minimize_lambda(t.partition, PerturbationCoords::from(basis, start), grid, d);
  const std::string trace = out_path(cfg, "descent.csv");
  write_descent_csv(r.trace, trace);
  const std::string curves = out_path(cfg, "interfaces.csv");
  write_interfaces_csv(r.partition.interfaces, curves);
  cx.outputs.push_back(trace);
  cx.outputs.push_back(curves);
  cx.summary["converged"] = r.converged;
  cx.summary["final_lambda"] = r.trace.back().lambda;
  cx.summary["gradient_norm"] = r.gradient_norm;
  cx.summary["weights"] = r.c.c;
  std::cout << "Lambda " << r.trace.front().lambda << " -> " << r.trace.back().lambda << " in "
            << r.trace.size() - 1 << " steps, |grad| " << r.gradient_norm
            << (r.converged ? " (converged)" : " (not converged)") << '\n';
}

void cmd_contours(Context& cx, const Grid& grid, const SolverOptions& opt) {
  const int n = cx.cfg.n;
  if (n < 1 || n > 20) throw ConfigError("--n must be between 1 and 20");
  const auto spec = lowest_eigenpairs(assemble_operator(grid), n, opt);
  const EigenPair& e = spec.back();
  const auto curves = zero_contours(e.psi, grid);
  const std::string path = out_path(cx.cfg, "contours.csv");
  write_interfaces_csv(curves, path);
  const std::string psi = out_path(cx.cfg, "psi.txt");
  write_grid_function(grid, e.psi, psi);
  cx.outputs.push_back(path);
  cx.outputs.push_back(psi);
  int count = 0;
  sign_components(e.psi, grid, count);
  std::cout << "n=" << n << " lambda=" << e.lambda << " nodal domains " << count << ", " << curves.size()
            << " contour curves\n";
}

}  // namespace

DomainSpec parse_domain(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError("domain must read rect:AxB or disk:R");
  const std::string kind = text.substr(0, colon);
  const std::string rest = text.substr(colon + 1);
  try {
    std::size_t used = 0;
    if (kind == "rect" || kind == "rectangle") {
      const auto x = rest.find('x');
      if (x == std::string::npos) throw ConfigError("rectangle must read rect:AxB");
      const double a = std::stod(rest.substr(0, x), &used);
      if (used != x) throw ConfigError("bad rectangle width");
      const std::string bs = rest.substr(x + 1);
      const double b = std::stod(bs, &used);
      if (used != bs.size()) throw ConfigError("bad rectangle height");
      return DomainSpec::rectangle(a, b);
    }
    if (kind == "disk") {
      const double r = std::stod(rest, &used);
      if (used != rest.size()) throw ConfigError("bad disk radius");
      return DomainSpec::disk(r);
    }
  } catch (const std::invalid_argument&) {
    throw ConfigError("cannot read domain " + text);
  } catch (const std::out_of_range&) {
    throw ConfigError("cannot read domain " + text);
  }
  throw ConfigError("unknown domain kind " + kind);
}

void load_potential_grid(DomainSpec& domain, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  int nx = 0, ny = 0;
  double h = 0.0;
  if (!(in >> nx >> ny >> h) || nx < 2 || ny < 2 || !(h > 0.0)) throw ConfigError(path + ": bad header");
  std::vector<double> v(static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      char sep = 0;
      if (i > 0 && !(in >> sep && sep == ',')) throw ConfigError(path + ": expected ','");
      if (!(in >> v[i + static_cast<std::size_t>(nx) * j]) || !std::isfinite(v[i + static_cast<std::size_t>(nx) * j]))
        throw ConfigError(path + ": bad value in row " + std::to_string(j));
    }
  }
  const Vec2 origin = domain.kind == DomainKind::rectangle ? Vec2{0.0, 0.0} : Vec2{-domain.r, -domain.r};
  domain.potential = [v = std::move(v), nx, ny, h, origin](Vec2 p) {
    const double x = std::clamp((p.x - origin.x) / h, 0.0, nx - 1.0);
    const double y = std::clamp((p.y - origin.y) / h, 0.0, ny - 1.0);
    const int i = std::min(static_cast<int>(x), nx - 2);
    const int j = std::min(static_cast<int>(y), ny - 2);
    const double s = x - i, t = y - j;
    auto at = [&](int a, int b) { return v[a + static_cast<std::size_t>(nx) * b]; };
    return (1 - s) * (1 - t) * at(i, j) + s * (1 - t) * at(i + 1, j) + (1 - s) * t * at(i, j + 1) +
           s * t * at(i + 1, j + 1);
  };
  domain.potential_name = "grid_file:" + path;
}

int run_command(int argc, const char* const* argv) {
  Context cx;
  RunConfig& cfg = cx.cfg;
  std::string config_path;

  CLI::App app{"Nodal partitions, spectral equipartitions and Morse indices on planar domains", "nodalab"};
  app.fallthrough();
  app.require_subcommand(1);
  app.add_option("--domain", cfg.domain, "rect:AxB or disk:R")->capture_default_str();
  app.add_option("--res", cfg.resolution, "grid nodes per unit length")->capture_default_str();
  app.add_option("--config", config_path, "JSON configuration; its values override flags");
  app.add_option("--out", cfg.out, "output directory")->capture_default_str();
  app.add_option("--threads", cfg.threads, "worker threads (default: NODALAB_THREADS or hardware)");
  app.add_option("--tol", cfg.tol, "eigensolver residual tolerance")->capture_default_str();

  auto* spectrum = app.add_subcommand("spectrum", "lowest Dirichlet eigenvalues");
  spectrum->add_option("--count", cfg.count, "number of eigenpairs (1..20)")->capture_default_str();

  auto* deficiency = app.add_subcommand("deficiency-table", "nodal counts and deficiencies");
  deficiency->add_option("--n-max", cfg.n_max, "rows")->capture_default_str();

  auto add_target = [&](CLI::App* sub) {
    sub->add_option("--mode", cfg.mode, "rectangle product mode m,k");
    sub->add_option("--n", cfg.n, "eigenvalue index");
    sub->add_option("--K", cfg.K, "Fourier modes per interface")->capture_default_str();
  };
  auto* hadamard = app.add_subcommand("hadamard-check", "Hadamard formula against finite differences");
  add_target(hadamard);
  hadamard->add_option("--eps", cfg.eps, "finite-difference step")->capture_default_str();

  auto* criticality = app.add_subcommand("criticality", "gradient of Lambda_c at a nodal partition");
  add_target(criticality);
  criticality->add_option("--amplitude", cfg.amplitude, "comparison displacement")->capture_default_str();

  auto* morse = app.add_subcommand("morse-index", "Hessian of Lambda on the equipartitions");
  add_target(morse);
  morse->add_option("--dt", cfg.dt, "finite-difference step")->capture_default_str();
  morse->add_flag("--check-symmetry", cfg.check_symmetry, "recompute the lower triangle independently");

  auto* minimize = app.add_subcommand("minimize", "gradient descent of Lambda on the equipartitions");
  add_target(minimize);
  minimize->add_option("--amplitude", cfg.amplitude, "sup-norm of the starting displacement")->capture_default_str();
  minimize->add_option("--direction", cfg.direction, "basis label (e.g. s0:cos2) or 'unstable'")
      ->capture_default_str();
  minimize->add_option("--dt", cfg.dt, "Hessian step for --direction unstable")->capture_default_str();
  minimize->add_option("--max-iters", cfg.max_iters, "iteration limit")->capture_default_str();
  minimize->add_option("--gtol", cfg.gtol, "stop when |grad| < gtol * Lambda")->capture_default_str();

  auto* contours = app.add_subcommand("contours", "nodal lines of the n-th eigenfunction");
  contours->add_option("--n", cfg.n, "eigenvalue index")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 2;
  }
  cx.command = app.get_subcommands().front()->get_name();

  const auto t0 = std::chrono::steady_clock::now();
  Json manifest;
  int code = 0;
  try {
    if (!config_path.empty()) apply_config_file(cfg, config_path);
    positive(cfg.tol, "tol");
    if (cfg.K < 1 || cfg.K > 12) throw ConfigError("K must be between 1 and 12");
    if (cfg.threads < 0) throw ConfigError("threads must be non-negative");
    if (cfg.threads > 0) set_thread_count(cfg.threads);
    std::error_code ec;
    std::filesystem::create_directories(cfg.out, ec);
    if (ec || !std::filesystem::is_directory(cfg.out)) throw ConfigError("cannot create output directory " + cfg.out);

    const Grid grid = build_grid(domain_of(cfg), cfg.resolution);
    SolverOptions opt;
    opt.tol = cfg.tol;

    if (cx.command == "spectrum") cmd_spectrum(cx, grid, opt);
    else if (cx.command == "deficiency-table") cmd_deficiency(cx, grid, opt);
    else if (cx.command == "hadamard-check") cmd_hadamard(cx, grid, opt);
    else if (cx.command == "criticality") cmd_criticality(cx, grid, opt);
    else if (cx.command == "morse-index") cmd_morse(cx, grid, opt);
    else if (cx.command == "minimize") cmd_minimize(cx, grid, opt);
    else if (cx.command == "contours") cmd_contours(cx, grid, opt);
    manifest["status"] = "ok";
    manifest["seed"] = opt.seed;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    manifest["status"] = std::string("configuration error: ") + e.what();
    code = 2;
  } catch (const std::exception& e) {
    std::cerr << "computation failed: " << e.what() << '\n';
    manifest["status"] = std::string("computation failed: ") + e.what();
    code = 1;
  }
  manifest["config"] = config_json(cfg, cx.command);
  manifest["versions"] = {{"nodalab", kVersion},
                          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                        "." + std::to_string(EIGEN_MINOR_VERSION)},
                          {"compiler", __VERSION__}};
  manifest["threads"] = thread_count();
  manifest["timings"] = {
      {"total_seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
  manifest["outputs"] = cx.outputs;
  manifest["summary"] = cx.summary;
  if (code != 2 || std::filesystem::is_directory(cfg.out)) {
    try {
      write_json(manifest, out_path(cfg, "run.json"));
    } catch (const ConfigError&) {
    }
  }
  return code;
}

}  // namespace nodalab
