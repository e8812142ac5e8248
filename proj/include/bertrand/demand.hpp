#pragma once

#include "bertrand/market.hpp"
#include "bertrand/mixed_logit.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

namespace bertrand {

/// A market together with a utility model and a fixed consumer sample.
class DemandSystem {
public:
    DemandSystem(Market market, std::shared_ptr<const UtilityModel> model, SampleSet samples);

    const Market& market() const { return market_; }
    const UtilityModel& model() const { return *model_; }
    std::shared_ptr<const UtilityModel> model_ptr() const { return model_; }
    const SampleSet& samples() const { return samples_; }
    const DrawTables& tables() const { return tables_; }
    const ReservationOrder& reservation() const { return reservation_; }
    int J() const { return market_.J(); }
    int S() const { return samples_.S(); }
    /// Largest sampled reservation price (infinite for linear utility).
    double varsigma_star() const { return reservation_.varsigma_star; }

    LogitMatrix logit(const Eigen::VectorXd& p) const;

private:
    Market market_;
    std::shared_ptr<const UtilityModel> model_;
    SampleSet samples_;
    DrawTables tables_;
    ReservationOrder reservation_;
};

struct DemandEval {
    Eigen::VectorXd price;
    Eigen::VectorXd P;
    Eigen::VectorXd lambda;
    std::vector<Eigen::MatrixXd> gamma_blocks;  // per-firm intra-firm blocks of Gamma
    std::optional<Eigen::MatrixXd> gamma_full;
    Eigen::MatrixXd V;  // L o D
    std::vector<bool> dead;  // P_j == 0

    Eigen::MatrixXd gamma_tilde(const Market& market) const;
    /// Lambda^{-1} Gamma~' with zero rows for products where lambda vanishes.
    Eigen::MatrixXd omega_tilde(const Market& market) const;
    /// Jacobian of P with (j,k) entry D_k P_j; needs gamma_full.
    Eigen::MatrixXd dP() const;
};

DemandEval demand_eval(const LogitMatrix& L, const Market& market, const Eigen::VectorXd& p,
                       bool want_full_gamma = false);

Eigen::VectorXd profits(const DemandEval& eval, const Market& market, const Eigen::VectorXd& p);

/// Own-firm price derivatives of profit, stacked by product.
Eigen::VectorXd combined_gradient(const DemandEval& eval, const Market& market, const Eigen::VectorXd& p);

struct HessianParts {
    Eigen::MatrixXd phi;
    Eigen::MatrixXd psi;
    Eigen::VectorXd chi;
    Eigen::MatrixXd xi;
    Eigen::MatrixXd xi_tilde;

    /// Jacobian of the combined gradient.
    Eigen::MatrixXd combined_jacobian() const;
};

/// Per-draw Logit profit of each firm, S x F.
Eigen::MatrixXd sample_profits(const LogitMatrix& L, const Market& market, const Eigen::VectorXd& p);

/// Needs eval.gamma_full.
HessianParts hessian_parts(const LogitMatrix& L, const DemandEval& eval, const Market& market,
                           const Eigen::VectorXd& p);

/// Per-firm profit Hessians restricted to the given live products (all when empty).
std::vector<Eigen::MatrixXd> firm_hessians(const HessianParts& parts, const Market& market,
                                           const std::vector<bool>& live = {});

enum class DefiniteStatus { Pass, Fail, Degenerate };

struct SecondOrderReport {
    std::vector<DefiniteStatus> firms;
    bool pass = false;
};

SecondOrderReport second_order_check(const std::vector<Eigen::MatrixXd>& hessians);

struct BoundednessReport {
    double max_lambda_inv_P = 0.0;      // sup ||Lambda^{-1} P||_inf
    double max_omega_norm = 0.0;        // sup ||Omega~||_inf
    double max_omega_markup = 0.0;      // sup ||Omega~ (p-c)||_inf
    std::optional<double> last_inward;  // largest probe with some p_k - c_k - zeta_k <= 0
    int probes = 0;
};

BoundednessReport diagnostics(const DemandSystem& demand, const std::vector<Eigen::VectorXd>& probes);

/// Probes c + t 1 for t on a uniform grid in [0, t_max].
std::vector<Eigen::VectorXd> ray_probes(const Market& market, double t_max, int count);

void write_eval_csv(std::ostream& os, const DemandEval& eval, const Market& market);
void write_hessian_csv(std::ostream& os, const HessianParts& parts);

}  // namespace bertrand
