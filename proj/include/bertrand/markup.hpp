#pragma once

#include "bertrand/demand.hpp"

#include <Eigen/Dense>

#include <memory>
#include <vector>

namespace bertrand {

enum class ResidualKind { CombinedGradient, EtaMarkup, ZetaMarkup };

/// Products with positive demand at the evaluated price.
std::vector<bool> positive_demand(const DemandEval& eval);

/// Solves (I - Omega_f) eta_f = -Lambda_f^{-1} P_f firm by firm on the live products.
/// Entries outside the live set are zero.
Eigen::VectorXd eta(const DemandEval& eval, const Market& market, const std::vector<bool>& live);
Eigen::VectorXd eta(const DemandEval& eval, const Market& market);

/// Omega~ (p - c) - Lambda^{-1} P on the live set, zero elsewhere.
Eigen::VectorXd zeta(const DemandEval& eval, const Market& market, const Eigen::VectorXd& p,
                     const std::vector<bool>& live);
Eigen::VectorXd zeta(const DemandEval& eval, const Market& market, const Eigen::VectorXd& p);

/// Limit of zeta_k as p_k rises to the largest reservation price: the other-product
/// Logit profit of firm f(k) for the draw with that reservation price.
double zeta_limit(const DemandSystem& demand, const Eigen::VectorXd& p, int k);
/// Gradient of zeta_limit with respect to p (entry k is zero).
Eigen::VectorXd zeta_limit_gradient(const DemandSystem& demand, const Eigen::VectorXd& p, int k);

/// zeta, with zeta_limit substituted wherever p_k is at or above the largest reservation price.
Eigen::VectorXd zeta_extended(const DemandSystem& demand, const Eigen::VectorXd& p);

struct ResidualOptions {
    double eps_P = 1e-10;
    bool extended_zeta = false;
};

/// Everything derived from one price vector.
struct PointState {
    Eigen::VectorXd p;
    LogitMatrix logit;
    DemandEval eval;
    std::vector<bool> live;      // P_j > eps_P and not extended
    std::vector<bool> extended;  // p_j >= varsigma*, extension enabled
    Eigen::VectorXd gradient;    // combined gradient, zero off the live set
    Eigen::VectorXd zeta;        // zeta on live, limit value on extended, else zero
    Eigen::VectorXd eta;         // eta on live, else zero; only for the eta kind

    int live_count() const;
    /// Extended products whose limit markup keeps them at or above varsigma*.
    std::vector<bool> exclusion_optimal(const Market& market, double varsigma_star) const;
};

/// One of the equivalent root problems F_pi, F_eta, F_zeta on a fixed demand system.
///
/// Components off the live set are held at zero so the solve stays J-dimensional;
/// extended components carry p_k - c_k - zeta_limit_k.
class ResidualSystem {
public:
    ResidualSystem(std::shared_ptr<const DemandSystem> demand, ResidualKind kind, ResidualOptions options = {});

    ResidualKind kind() const { return kind_; }
    const DemandSystem& demand() const { return *demand_; }
    std::shared_ptr<const DemandSystem> demand_ptr() const { return demand_; }
    const Market& market() const { return demand_->market(); }
    const ResidualOptions& options() const { return options_; }

    PointState evaluate(const Eigen::VectorXd& p) const;
    /// Evaluates with the live/extended classification fixed from another point.
    PointState evaluate(const Eigen::VectorXd& p, const std::vector<bool>& live,
                        const std::vector<bool>& extended) const;

    Eigen::VectorXd residual(const PointState& st) const;
    Eigen::VectorXd residual(const Eigen::VectorXd& p) const { return residual(evaluate(p)); }

    /// Analytic residual Jacobian: identity on frozen coordinates, zero cross terms.
    Eigen::MatrixXd jacobian(const PointState& st) const;

    /// Termination measure: ||combined gradient||_inf over live products, plus the
    /// extended residual of extended products that would re-enter.
    double stationarity(const PointState& st) const;

private:
    PointState build(const Eigen::VectorXd& p, const std::vector<bool>* live,
                     const std::vector<bool>* extended) const;

    std::shared_ptr<const DemandSystem> demand_;
    ResidualKind kind_;
    ResidualOptions options_;
};

/// Dense analytic Jacobians on the full product set (no truncation), for callers and tests.
Eigen::MatrixXd zeta_jacobian(const LogitMatrix& L, const DemandEval& eval, const HessianParts& parts,
                              const Market& market, const Eigen::VectorXd& p, const Eigen::VectorXd& zeta,
                              const std::vector<bool>& live);
Eigen::MatrixXd eta_jacobian(const LogitMatrix& L, const DemandEval& eval, const HessianParts& parts,
                             const Market& market, const Eigen::VectorXd& eta, const std::vector<bool>& live);

}  // namespace bertrand
