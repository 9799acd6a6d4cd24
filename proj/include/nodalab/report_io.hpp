#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "nodalab/equipartition.hpp"

namespace nodalab {

using Json = nlohmann::json;

/// Pretty-printed JSON; doubles keep their shortest round-trip form.
void write_json(const Json& j, const std::string& path);
Json read_json(const std::string& path);

Json to_json(const Eigen::VectorXd& v);
Json to_json(const Eigen::MatrixXd& m);

/// The hessian.json layout. `d_n` < 0 leaves the deficiency out.
Json hessian_json(const HessianReport& rep, int m, int k, int n, int d_n);

/// Columns iteration, Lambda, gradient_norm, step.
void write_descent_csv(const std::vector<DescentStep>& trace, const std::string& path);

}  // namespace nodalab
