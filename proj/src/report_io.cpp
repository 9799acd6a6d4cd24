#include "nodalab/report_io.hpp"

#include <fstream>
#include <iomanip>

namespace nodalab {

void write_json(const Json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << j.dump(2) << '\n';
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

Json to_json(const Eigen::VectorXd& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

Json to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (int i = 0; i < m.rows(); ++i) rows.push_back(to_json(Eigen::VectorXd(m.row(i).transpose())));
  return rows;
}

Json hessian_json(const HessianReport& rep, int m, int k, int n, int d_n) {
  Json j;
  j["mode"] = {m, k};
  j["n"] = n;
  if (d_n >= 0) j["d_n"] = d_n;
  j["dim"] = rep.basis.dimension();
  j["tangent_dim"] = rep.tangent_basis.cols();
  j["K"] = rep.basis.K;
  j["dt"] = rep.dt;
  j["tau"] = rep.tau;
  j["eigenvalues"] = to_json(rep.eigenvalues);
  j["morse_index"] = rep.morse_index;
  j["mu0_index"] = rep.mu0_index;
  j["nondegenerate"] = rep.nondegenerate;
  j["raw_asymmetry"] = rep.raw_asymmetry;
  j["lambda"] = rep.lambda;
  j["projection_tol"] = rep.projection_tol;
  j["criticality"] = rep.criticality;
  j["critical"] = rep.critical;
  j["evaluations"] = rep.evaluations;
  j["metric"] = "Euclidean inner product of the Fourier amplitudes";
  std::vector<std::string> labels;
  for (int i = 0; i < rep.basis.dimension(); ++i) labels.push_back(rep.basis.label(i));
  j["basis"] = labels;
  j["hessian"] = to_json(rep.hessian);
  return j;
}

void write_descent_csv(const std::vector<DescentStep>& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << "iteration,Lambda,gradient_norm,step\n" << std::setprecision(17);
  for (const DescentStep& s : trace)
    out << s.iteration << ',' << s.lambda << ',' << s.gradient_norm << ',' << s.step << '\n';
}

}  // namespace nodalab
