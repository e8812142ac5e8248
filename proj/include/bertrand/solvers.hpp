#pragma once

#include "bertrand/markup.hpp"
#include "bertrand/trust_region.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace bertrand {

enum class Method { ZetaFPI, EtaFPI, CGNewton, EtaNewton, ZetaNewton };
enum class JacobianMode { Analytic, FD1, FD2, FD4 };
enum class Extension { Auto, On, Off };
using RunStatus = EngineStatus;
using TraceRecord = IterationRecord<double>;

std::string to_string(Method m);
std::string to_string(RunStatus s);
std::string to_string(JacobianMode m);
Method parse_method(const std::string& name);
JacobianMode parse_jacobian(const std::string& name);
const std::vector<std::string>& method_names();

bool is_newton(Method m);
ResidualKind residual_kind(Method m);

/// Half a vehicle out of 16,947,754 annual sales, a truncation level tied to unit demand.
inline constexpr double kSalesTruncation = 0.5 / 16947754.0;

struct SolverOptions {
    double eps_T = 1e-6;
    double eps_P = 1e-10;
    int max_iter = 0;  // 0: 75 for Newton methods, 1000 for fixed-point iterations
    JacobianMode jacobian = JacobianMode::Analytic;
    Extension extension = Extension::Auto;
    TrustRegionConfig<double> trust_region;  // stop_tol and max_iter are taken from above
    bool precondition = true;
    double divergence_factor = 1e3;
};

struct SolverRun {
    Method method = Method::ZetaFPI;
    Eigen::VectorXd p0;
    Eigen::VectorXd p_final;
    int iterations = 0;
    std::vector<TraceRecord> trace;
    RunStatus status = RunStatus::MaxIterations;
    std::string message;
    bool fo_pass = false;
    bool so_pass = false;
    double grad_inf = 0.0;
    std::vector<int> live_set;
    bool extended = false;
    double wall_seconds = 0.0;
};

/// Live products {j : P_j > eps_P}; throws NumericalFailure when none remain.
std::vector<int> truncate_live_set(const DemandEval& eval, double eps_P);

/// Whether an extended residual system is used for the given method and options.
bool uses_extension(const DemandSystem& demand, Method method, const SolverOptions& options);

ResidualSystem make_system(std::shared_ptr<const DemandSystem> demand, Method method, const SolverOptions& options);

/// p <- c + zeta(p); extended products take c + zeta_limit.
SolverRun zeta_fpi(const ResidualSystem& system, const Eigen::VectorXd& p0, double eps_T, int max_iter = 1000);
/// p <- c + eta(p), stopped when ||p||_inf exceeds `divergence_factor` (||c|| + ||p0||).
SolverRun eta_fpi(const ResidualSystem& system, const Eigen::VectorXd& p0, double eps_T, int max_iter = 1000,
                  double divergence_factor = 1e3);
SolverRun newton_solve(const ResidualSystem& system, const Eigen::VectorXd& p0, const SolverOptions& options);

/// Builds the residual system for `method` and runs it, timing the call.
SolverRun solve(std::shared_ptr<const DemandSystem> demand, Method method, const Eigen::VectorXd& p0,
                const SolverOptions& options = {});

struct VerifyReport {
    double grad_inf = 0.0;
    double f_pi = 0.0;
    double f_eta = 0.0;
    double f_zeta = 0.0;
    double max_abs_lambda = 0.0;
    bool fo_pass = false;
    SecondOrderReport second_order;
    std::vector<int> live;
    std::vector<int> frozen;
    std::vector<int> extended;
    std::vector<int> exclusion_optimal;
    bool market_dead = false;
};

VerifyReport verify(const Eigen::VectorXd& p, const ResidualSystem& system, double eps_T);
VerifyReport verify(const SolverRun& run, const ResidualSystem& system, double eps_T);

struct InitStrategy {
    enum class Kind { AtCosts, UniformCostBox, UniformBox };
    Kind kind = Kind::AtCosts;
    double lo = 0.0;
    double hi = 0.0;
    std::optional<std::uint64_t> seed;  // overrides the run seed when set

    static InitStrategy at_costs() { return {}; }
    static InitStrategy cost_box(std::optional<std::uint64_t> seed = {}) { return {Kind::UniformCostBox, 0, 0, seed}; }
    static InitStrategy box(double lo, double hi, std::optional<std::uint64_t> seed = {}) {
        return {Kind::UniformBox, lo, hi, seed};
    }
    /// "costs", "cost-box[:seed]", "box:lo:hi[:seed]".
    static InitStrategy parse(const std::string& text);
    std::string label() const;
    Eigen::VectorXd generate(const Market& market, std::uint64_t run_seed) const;
};

}  // namespace bertrand
