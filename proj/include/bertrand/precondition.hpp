#pragma once

#include "bertrand/markup.hpp"
#include "bertrand/trust_region.hpp"

namespace bertrand {

/// Left scale Lambda^{-1} on live products, one elsewhere.
Eigen::VectorXd cg_left_scale(const PointState& st);

/// Wraps a combined-gradient Jacobian action with the Lambda^{-1} left preconditioner.
Linearization<double> precondition_cg(const ResidualSystem& system, const PointState& st, Linearization<double> base);

/// GMRES tolerance for the preconditioned combined-gradient system.
double preconditioned_tolerance(const Eigen::VectorXd& gradient, const Eigen::VectorXd& lambda, double delta);

}  // namespace bertrand
