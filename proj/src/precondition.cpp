#include "bertrand/precondition.hpp"

#include <stdexcept>

namespace bertrand {

Eigen::VectorXd cg_left_scale(const PointState& st) {
    Eigen::VectorXd scale = Eigen::VectorXd::Ones(st.p.size());
    for (Eigen::Index j = 0; j < scale.size(); ++j) {
        if (!st.live[static_cast<std::size_t>(j)]) continue;
        if (st.eval.lambda[j] == 0.0) throw std::domain_error("zero price sensitivity on the live set");
        scale[j] = 1.0 / st.eval.lambda[j];
    }
    return scale;
}

Linearization<double> precondition_cg(const ResidualSystem& system, const PointState& st, Linearization<double> base) {
    if (system.kind() != ResidualKind::CombinedGradient)
        throw std::invalid_argument("the Lambda preconditioner applies to the combined gradient system");
    base.left_scale = cg_left_scale(st);
    return base;
}

double preconditioned_tolerance(const Eigen::VectorXd& gradient, const Eigen::VectorXd& lambda, double delta) {
    return transfer_tolerance<double>(gradient, lambda.cwiseInverse(), delta);
}

}  // namespace bertrand
