// Acceptance run: one PASS/FAIL line per criterion, tolerances fixed below.
// Usage: acceptance [--report file] [criterion ...]   (default: all, 1..8)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "nodalab/equipartition.hpp"
#include "nodalab/nodal.hpp"
#include "nodalab/studies.hpp"

using namespace nodalab;

namespace {

constexpr double kAspect = 0.618;
constexpr int kRes = 256;
constexpr int kFineRes = 512;

// Criterion 1
constexpr double kSpectrumRelTol = 5e-3;
constexpr double kSpectrumSeconds = 60.0;
constexpr double kSpectrumRefineRatio = 3.0;
// Criterion 3
constexpr double kGroundStateRelTol = 1e-2;
// Criterion 4
constexpr double kHadamardTol = 2e-2;
constexpr double kHadamardRefineRatio = 1.5;
constexpr double kHadamardEps = 1e-3;
constexpr int kHadamardK = 4;
// Criterion 5
constexpr double kCriticalityRatio = 0.05;
constexpr double kDisplacement = 0.02;
constexpr double kMatchedTol = 5e-2;
constexpr int kCriticalityK = 4;
// Criterion 6
constexpr int kMorseK = 4;
constexpr double kMorseDt = 1e-2;
constexpr int kMorseFineK = 6;
constexpr double kMorseFineDt = 5e-3;
constexpr double kMorseSeconds = 600.0;
// Criterion 7
constexpr double kDescentGradientRel = 1e-3;
constexpr double kDescentDistance = 2e-3;
constexpr double kSaddleDrop = 1e-3;
constexpr double kStartAmplitude = 0.02;
// Criterion 8
constexpr double kPullbackTol = 1e-6;
constexpr double kAsymmetryTol = 1e-3;
constexpr int kPullbackSamples = 10;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

DomainSpec rectangle() { return DomainSpec::rectangle(1.0, kAspect); }

const Grid& grid256() {
  static const Grid g = build_grid(rectangle(), kRes);
  return g;
}

const std::vector<EigenPair>& spectrum256() {
  static const auto s = lowest_eigenpairs(assemble_operator(grid256()), 13);
  return s;
}

std::vector<double> exact_spectrum(int count) {
  std::vector<double> out;
  for (int m = 1; m <= count; ++m)
    for (int k = 1; k <= count; ++k) out.push_back(rectangle_eigenvalue(rectangle(), m, k));
  std::sort(out.begin(), out.end());
  out.resize(count);
  return out;
}

// Every Hessian computed in this run, for the mu <= mu0 property.
std::vector<std::pair<std::string, MorseCounts>> g_morse_reports;

void record(const std::string& name, const HessianReport& r) {
  g_morse_reports.push_back({name, {r.morse_index, r.mu0_index, r.nondegenerate}});
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

Outcome criterion1() {
  Outcome o;
  auto errors = [](int res, double& secs) {
    const auto t0 = Clock::now();
    const Grid g = build_grid(rectangle(), res);
    const auto pairs = lowest_eigenpairs(assemble_operator(g), 12);
    secs = seconds_since(t0);
    const auto exact = exact_spectrum(12);
    std::vector<double> err;
    for (int i = 0; i < 12; ++i) err.push_back(std::abs(pairs[i].lambda - exact[i]) / exact[i]);
    return err;
  };
  double t256 = 0.0, t512 = 0.0;
  const auto e256 = errors(kRes, t256);
  const auto e512 = errors(kFineRes, t512);
  const double worst = *std::max_element(e256.begin(), e256.end());
  double min_ratio = 1e300;
  for (int i = 0; i < 12; ++i) min_ratio = std::min(min_ratio, e256[i] / e512[i]);
  o.detail << "max rel error " << worst << " at res " << kRes << ", " << t256 << " s; min error ratio res "
           << kRes << "/" << kFineRes << " = " << min_ratio;
  o.require(worst < kSpectrumRelTol, "relative error");
  o.require(t256 < kSpectrumSeconds, "runtime");
  o.require(min_ratio >= kSpectrumRefineRatio, "refinement ratio");
  return o;
}

Outcome criterion2() {
  Outcome o;
  const int expected[12][3] = {{1, 1, 0}, {2, 2, 0},  {3, 2, 1},  {4, 3, 1},  {5, 4, 1},  {6, 4, 2},
                               {7, 6, 1}, {8, 3, 5}, {9, 8, 1}, {10, 6, 4}, {11, 5, 6}, {12, 9, 3}};
  const auto table = deficiency_table(spectrum256(), grid256(), 12);
  o.require(table.size() == 12, "12 rows");
  int matched = 0;
  for (std::size_t i = 0; i < table.size() && i < 12; ++i) {
    const NodalReport& r = table[i];
    const bool ok = r.n == expected[i][0] && r.nu == expected[i][1] && r.deficiency == expected[i][2];
    matched += ok;
    if (!ok) o.detail << " row " << i + 1 << " got (" << r.n << "," << r.nu << "," << r.deficiency << ")";
    o.require(r.nu <= r.n, "Courant bound at n=" + std::to_string(r.n));
  }
  o.detail << " " << matched << "/12 rows exact";
  o.require(matched == 12, "table");
  return o;
}

Outcome criterion3() {
  Outcome o;
  double worst = 0.0;
  for (int n = 3; n <= 7; ++n) {
    const EigenPair& e = spectrum256()[n - 1];
    const Partition p = nodal_partition(e, grid256());
    for (int j = 1; j <= p.nu; ++j) {
      const double rel = std::abs(subdomain_groundstate(p, grid256(), j).lambda - e.lambda) / e.lambda;
      worst = std::max(worst, rel);
    }
    o.detail << " n=" << n << ":nu=" << p.nu;
  }
  o.detail << "; max |lambda1(D_j) - lambda_n|/lambda_n = " << worst;
  o.require(worst < kGroundStateRelTol, "ground-state matching");
  return o;
}

Outcome criterion4() {
  Outcome o;
  {
    // Left cell of the (2,1) partition has width L = 0.5; its constant-mode
    // derivative is -2 pi^2 / L^3 up to orientation.
    const Partition p = build_straight_partition(grid256(), 2, 1);
    const Eigen::MatrixXd J = xi_jacobian(evaluate_partition(p, grid256()), ModeBasis::build(p.interfaces, 1));
    const double exact = 2.0 * kPi * kPi / (0.5 * 0.5 * 0.5);
    const double rel = std::abs(std::abs(J(0, 0)) - exact) / exact;
    o.detail << "analytic rel error " << rel;
    o.require(rel < kHadamardTol, "analytic shift");
  }
  const Grid fine = build_grid(rectangle(), kFineRes);
  struct Case {
    std::string name;
    std::function<Partition(const Grid&)> make;
  };
  const std::vector<Case> cases = {
      {"(1,2)", [](const Grid& g) { return build_straight_partition(g, 1, 2); }},
      {"(2,2) vertical lines cut",
       [](const Grid& g) { return build_junction_partition(g, 2, 2, JunctionSplit::vertical); }},
      {"(2,2) horizontal lines cut",
       [](const Grid& g) { return build_junction_partition(g, 2, 2, JunctionSplit::horizontal); }},
  };
  for (const Case& c : cases) {
    const double e256 = hadamard_check(c.make(grid256()), grid256(), kHadamardK, kHadamardEps).max_error;
    const double e512 = hadamard_check(c.make(fine), fine, kHadamardK, kHadamardEps).max_error;
    o.detail << "; " << c.name << ": " << e256 << " -> " << e512 << " (x" << e256 / e512 << ")";
    o.require(e256 < kHadamardTol, c.name + " agreement");
    o.require(e256 / e512 >= kHadamardRefineRatio, c.name + " refinement");
  }
  return o;
}

Outcome criterion5() {
  Outcome o;
  for (int n = 2; n <= 6; ++n) {
    const EigenPair& e = spectrum256()[n - 1];
    const auto [m, k] = rectangle_mode_at(grid256().domain, n);
    // Crossing nodal lines: the contour partition has touching curves, so the
    // junction chart of the same cells is used.
    const Partition p = (m > 1 && k > 1) ? rectangle_mode_charts(grid256(), m, k).front().second
                                         : nodal_partition(e, grid256());
    const CriticalityStudy s = criticality_study(p, e, grid256(), kCriticalityK, kDisplacement);
    const double ratio = s.gradient_norm / s.gradient_norm_displaced;
    double worst = 0.0;
    for (double v : s.per_interface) worst = std::max(worst, v);
    o.detail << " n=" << n << ": |grad|=" << s.gradient_norm << " ratio=" << ratio << " mismatch=" << worst << ";";
    o.require(ratio <= kCriticalityRatio, "gradient ratio at n=" + std::to_string(n));
    o.require(worst < kMatchedTol, "matched derivatives at n=" + std::to_string(n));
  }
  return o;
}

Outcome criterion6() {
  Outcome o;
  const std::vector<std::pair<int, int>> modes = {{2, 1}, {1, 2}, {3, 1}, {2, 2}, {4, 1}};
  for (const auto& [m, k] : modes) {
    const std::string name = "(" + std::to_string(m) + "," + std::to_string(k) + ")";
    HessianOptions base;
    base.dt = kMorseDt;
    const auto t0 = Clock::now();
    const MorseStudy s = morse_study(grid256(), m, k, kMorseK, base);
    const double secs = seconds_since(t0);
    for (const HessianReport& r : s.branches) record(name, r);

    HessianOptions fine_dt = base;
    fine_dt.dt = kMorseFineDt;
    const MorseStudy s_dt = morse_study(grid256(), m, k, kMorseK, fine_dt);
    const MorseStudy s_k = morse_study(grid256(), m, k, kMorseFineK, base);
    for (const HessianReport& r : s_dt.branches) record(name + " dt", r);
    for (const HessianReport& r : s_k.branches) record(name + " K", r);

    const HessianReport& r = s.report();
    o.detail << " " << name << ": mu=" << r.morse_index << " d=" << s.deficiency << " (K=" << kMorseFineK << ": "
             << s_k.report().morse_index << ", dt=" << kMorseFineDt << ": " << s_dt.report().morse_index << ") "
             << secs << " s;";
    o.require(r.morse_index == s.deficiency, name + " mu == d");
    o.require(r.nondegenerate, name + " nondegenerate");
    o.require(s_k.report().morse_index == r.morse_index && s_dt.report().morse_index == r.morse_index,
              name + " stability");
    o.require(secs < kMorseSeconds, name + " runtime");
  }
  return o;
}

Outcome criterion7() {
  Outcome o;
  {
    const Partition p = build_straight_partition(grid256(), 2, 1);
    PerturbationCoords c = PerturbationCoords::zero(p, kMorseK);
    c.a[2] = kStartAmplitude;  // cos 2 on the single interface
    const DescentResult r = minimize_lambda(p, c, grid256());
    const double lambda2 = spectrum256()[1].lambda;
    const double dist = curve_distance(r.partition, p);
    o.detail << "(2,1): " << r.trace.size() - 1 << " steps, |grad|=" << r.gradient_norm
             << " (limit " << kDescentGradientRel * lambda2 << "), distance " << dist;
    o.require(r.gradient_norm < kDescentGradientRel * lambda2, "(2,1) gradient");
    o.require(dist < kDescentDistance, "(2,1) distance");
  }
  {
    const Partition p = build_straight_partition(grid256(), 1, 2);
    const ModeBasis basis = ModeBasis::build(p.interfaces, kMorseK);
    const HessianReport rep = hessian_of_lambda(p, basis, grid256(), HessianOptions{});
    record("(1,2) saddle", rep);
    o.require(rep.morse_index >= 1, "(1,2) has an unstable direction");
    const Eigen::VectorXd v = rep.tangent_basis * rep.eigenvectors.col(0);
    const double sup = PerturbationCoords::from(basis, v).sup_norm(p);
    const auto start = PerturbationCoords::from(basis, rep.base + kStartAmplitude / sup * v);
    DescentOptions d;
    d.max_iters = 10;
    const DescentResult r = minimize_lambda(p, start, grid256(), d);
    const double lambda3 = spectrum256()[2].lambda;
    const double final_lambda = r.trace.back().lambda;
    o.detail << "; (1,2): Lambda " << r.trace.front().lambda << " -> " << final_lambda << " (bound "
             << lambda3 * (1.0 - kSaddleDrop) << ")";
    o.require(final_lambda < lambda3 * (1.0 - kSaddleDrop), "(1,2) escape");
  }
  return o;
}

Outcome criterion8() {
  Outcome o;
  const Grid& g = grid256();

  // Pullback on random equipartitions.
  std::mt19937 rng(20240607u);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const std::vector<std::pair<int, int>> shapes = {{2, 1}, {1, 2}, {3, 1}, {4, 1}, {2, 1},
                                                   {3, 1}, {1, 2}, {4, 1}, {2, 1}, {3, 1}};
  double worst_pullback = 0.0;
  int structured = 0, tested = 0;
  ProjectionOptions popt;
  popt.tol_rel = 1e-9;
  for (int sample = 0; sample < kPullbackSamples; ++sample) {
    const Partition p = build_straight_partition(g, shapes[sample].first, shapes[sample].second);
    const ModeBasis basis = ModeBasis::build(p.interfaces, 3);
    Eigen::VectorXd a(basis.dimension());
    for (int i = 0; i < a.size(); ++i) a[i] = uni(rng);
    a *= 0.3 * p.rho / PerturbationCoords::from(basis, a).sup_norm(p);
    const ProjectionResult pr = project_to_equipartition(p, PerturbationCoords::from(basis, a), g, popt);
    const PartitionState st = evaluate_partition(pr.partition, g);
    Eigen::VectorXd c(p.nu);
    for (int j = 0; j < p.nu; ++j) c[j] = uni(rng);
    c.normalize();
    std::vector<double> f(g.size(), 0.0);
    for (int j = 0; j < p.nu; ++j)
      for (int k = 0; k < g.size(); ++k) f[k] += c[j] * st.ground[j].psi[k];
    const double q = rayleigh_quotient(f, assemble_operator(g, pr.partition, kAllLabels));
    worst_pullback = std::max(worst_pullback, std::abs(q - pr.lambda()) / pr.lambda());
    ++tested;
    const ModeBasis qb = ModeBasis::build(pr.partition.interfaces, 3);
    structured += jacobian_column_structure(xi_jacobian(st, qb), qb);
  }
  o.detail << "pullback max rel " << worst_pullback;
  o.require(worst_pullback <= kPullbackTol, "pullback");

  // Column structure on the unperturbed generic partitions as well.
  for (const auto& [m, k] : std::vector<std::pair<int, int>>{{2, 1}, {1, 2}, {3, 1}, {4, 1}}) {
    const Partition p = build_straight_partition(g, m, k);
    ++tested;
    const ModeBasis b = ModeBasis::build(p.interfaces, 4);
    structured += jacobian_column_structure(xi_jacobian(evaluate_partition(p, g), b), b);
  }
  const Grid disk = build_grid(DomainSpec::disk(0.5), kRes);
  const auto disk_spec = lowest_eigenpairs(assemble_operator(disk), 11);
  {
    const Partition p = nodal_partition(disk_spec[5], disk);  // radial: one closed interface
    ++tested;
    const ModeBasis b = ModeBasis::build(p.interfaces, 4);
    structured += jacobian_column_structure(xi_jacobian(evaluate_partition(p, disk), b), b);
  }
  o.detail << "; column structure " << structured << "/" << tested << " generic partitions";
  o.require(structured == tested, "column structure");

  // Symmetry of the finite-difference Hessian.
  {
    const Partition p = build_straight_partition(g, 1, 2);
    HessianOptions h;
    h.check_symmetry = true;
    const HessianReport r = hessian_of_lambda(p, ModeBasis::build(p.interfaces, kMorseK), g, h);
    record("(1,2) symmetry", r);
    o.detail << "; raw asymmetry " << r.raw_asymmetry;
    o.require(r.raw_asymmetry <= kAsymmetryTol, "symmetry");
  }

  int ordered = 0;
  for (const auto& [name, mc] : g_morse_reports) ordered += mc.mu <= mc.mu0;
  o.detail << "; mu <= mu0 in " << ordered << "/" << g_morse_reports.size() << " Hessians";
  o.require(ordered == static_cast<int>(g_morse_reports.size()), "mu <= mu0");

  // Nodal graphs: bipartite always, trees when generic.
  int graphs = 0, good = 0;
  auto check_table = [&](const std::vector<NodalReport>& table) {
    for (const NodalReport& r : table) {
      ++graphs;
      good += r.bipartite && (!r.genericity.generic() || r.is_tree);
    }
  };
  check_table(deficiency_table(spectrum256(), g, 12));
  check_table(deficiency_table(disk_spec, disk, 10));
  o.detail << "; bipartite/tree " << good << "/" << graphs << " nodal partitions (rectangle and disk)";
  o.require(good == graphs, "bipartite/tree");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria = {criterion1, criterion2, criterion3, criterion4,
                                                          criterion5, criterion6, criterion7, criterion8};
  std::set<int> selected;
  std::FILE* report = nullptr;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--report" && i + 1 < argc) {
      report = std::fopen(argv[++i], "w");
      if (!report) std::fprintf(stderr, "cannot write %s\n", argv[i]);
      continue;
    }
    selected.insert(std::atoi(argv[i]));
  }
  if (selected.empty())
    for (int i = 1; i <= 8; ++i) selected.insert(i);

  int failures = 0;
  for (int id : selected) {
    if (id < 1 || id > 8) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[id - 1]();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    failures += !o.pass;
    for (std::FILE* f : {stdout, report}) {
      if (!f) continue;
      std::fprintf(f, "CRITERION %d %s (%.0f s):%s\n", id, o.pass ? "PASS" : "FAIL", seconds_since(t0),
                   o.detail.str().c_str());
      std::fflush(f);
    }
  }
  if (report) std::fclose(report);
  return failures == 0 ? 0 : 1;
}
