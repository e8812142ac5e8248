#include "bertrand/solvers.hpp"

#include "bertrand/directional.hpp"
#include "bertrand/precondition.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace bertrand {

namespace {

const std::vector<std::pair<Method, std::string>>& method_table() {
    static const std::vector<std::pair<Method, std::string>> t{{Method::ZetaFPI, "zeta-fpi"},
                                                                {Method::EtaFPI, "eta-fpi"},
                                                                {Method::CGNewton, "cg-nm"},
                                                                {Method::EtaNewton, "eta-nm"},
                                                                {Method::ZetaNewton, "zeta-nm"}};
    return t;
}

std::vector<int> indices(const std::vector<bool>& flags) {
    std::vector<int> out;
    for (std::size_t j = 0; j < flags.size(); ++j)
        if (flags[j]) out.push_back(static_cast<int>(j));
    return out;
}

bool any(const std::vector<bool>& flags) {
    for (bool f : flags)
        if (f) return true;
    return false;
}

void finalize(SolverRun& run, const ResidualSystem& system, double eps_T) {
    run.iterations = static_cast<int>(run.trace.size()) - 1;
    try {
        const auto rep = verify(run.p_final, system, eps_T);
        run.grad_inf = rep.grad_inf;
        run.fo_pass = rep.fo_pass;
        run.so_pass = rep.second_order.pass;
        run.live_set = rep.live;
    } catch (const std::exception& e) {
        run.fo_pass = run.so_pass = false;
        run.grad_inf = std::numeric_limits<double>::quiet_NaN();
        if (run.status == RunStatus::Converged) run.status = RunStatus::NumericalFailure;
        if (run.message.empty()) run.message = e.what();
    }
    if (run.status == RunStatus::Converged && !run.fo_pass) run.status = RunStatus::NumericalFailure;
}

enum class MapKind { Zeta, Eta };

SolverRun fixed_point(const ResidualSystem& system, const Eigen::VectorXd& p0, double eps_T, int max_iter, MapKind map,
                      double divergence_factor) {
    const Market& m = system.market();
    SolverRun run;
    run.method = map == MapKind::Zeta ? Method::ZetaFPI : Method::EtaFPI;
    run.p0 = p0;
    run.extended = system.options().extended_zeta;
    const double blowup = divergence_factor * (m.costs().lpNorm<Eigen::Infinity>() + p0.lpNorm<Eigen::Infinity>());
    Eigen::VectorXd p = p0;
    double step = 0.0;
    for (int it = 0;; ++it) {
        PointState st;
        try {
            st = system.evaluate(p);
        } catch (const std::exception& e) {
            run.status = RunStatus::NumericalFailure;
            run.message = e.what();
            break;
        }
        if (st.live_count() == 0 && !any(st.extended)) {
            run.status = RunStatus::NumericalFailure;
            run.message = "market dead";
            run.trace.push_back({it, 0.0, 0.0, 0.0, 0, step, it > 0, 0});
            break;
        }
        const double stat = system.stationarity(st);
        run.trace.push_back({it, system.residual(st).norm(), stat, 0.0, 0, step, it > 0, 0});
        if (stat <= eps_T) {
            run.status = RunStatus::Converged;
            break;
        }
        if (it >= max_iter) {
            run.status = RunStatus::MaxIterations;
            run.message = "iteration limit reached";
            break;
        }
        const Eigen::VectorXd& markup = map == MapKind::Zeta ? st.zeta : st.eta;
        Eigen::VectorXd next = p;
        for (int k = 0; k < m.J(); ++k) {
            const auto u = static_cast<std::size_t>(k);
            if (st.live[u] || st.extended[u]) next[k] = m.costs()[k] + markup[k];
        }
        if (!next.allFinite()) {
            run.status = RunStatus::NumericalFailure;
            run.message = "non-finite iterate";
            break;
        }
        step = (next - p).norm();
        p = next;
        if (map == MapKind::Eta && p.lpNorm<Eigen::Infinity>() > blowup) {
            run.status = RunStatus::NumericalFailure;
            run.message = "iterates diverged";
            run.trace.push_back({it + 1, std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
                                 0.0, 0, step, true, 0});
            break;
        }
    }
    run.p_final = p;
    finalize(run, system, eps_T);
    return run;
}

/// Adapts a residual system to the trust-region engine.
class NewtonProblem {
public:
    NewtonProblem(const ResidualSystem& system, const SolverOptions& options) : system_(system), options_(options) {}

    Eigen::VectorXd residual(const Eigen::VectorXd& x) {
        // Negative prices are outside the domain; a NaN residual makes the engine reject the trial.
        if (x.minCoeff() < 0.0) return Eigen::VectorXd::Constant(x.size(), std::numeric_limits<double>::quiet_NaN());
        const PointState& st = state(x);
        if (st.live_count() == 0 && !any(st.extended)) throw NumericalFailure("market dead");
        return system_.residual(st);
    }

    double stationarity(const Eigen::VectorXd& x, const Eigen::VectorXd&) { return system_.stationarity(state(x)); }

    Linearization<double> linearize(const Eigen::VectorXd& x, const Eigen::VectorXd& F) {
        const PointState st = state(x);
        Linearization<double> lin;
        if (options_.jacobian == JacobianMode::Analytic) {
            auto Jm = std::make_shared<Eigen::MatrixXd>(system_.jacobian(st));
            lin.apply = [Jm](const Eigen::VectorXd& v) -> Eigen::VectorXd { return *Jm * v; };
        } else {
            const int order = options_.jacobian == JacobianMode::FD1 ? 1 : options_.jacobian == JacobianMode::FD2 ? 2 : 4;
            const ResidualSystem* sys = &system_;
            auto live = st.live;
            auto ext = st.extended;
            auto base = std::make_shared<Eigen::VectorXd>(F);
            lin.apply = [sys, live, ext, order, x, base](const Eigen::VectorXd& v) -> Eigen::VectorXd {
                auto fixed = [&](const Eigen::VectorXd& y) -> Eigen::VectorXd {
                    return sys->residual(sys->evaluate(y, live, ext));
                };
                return directional_derivative<double>(fixed, x, v, order, base.get());
            };
        }
        if (system_.kind() == ResidualKind::CombinedGradient && options_.precondition)
            lin = precondition_cg(system_, st, std::move(lin));
        return lin;
    }

private:
    const PointState& state(const Eigen::VectorXd& x) {
        for (const auto& c : cache_)
            if (c.p.size() == x.size() && c.p == x) return c;
        if (cache_.size() >= 2) cache_.erase(cache_.begin());
        cache_.push_back(system_.evaluate(x));
        return cache_.back();
    }

    const ResidualSystem& system_;
    const SolverOptions& options_;
    std::vector<PointState> cache_;
};

}  // namespace

std::string to_string(Method m) {
    for (const auto& [k, v] : method_table())
        if (k == m) return v;
    return "unknown";
}

const std::vector<std::string>& method_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& e : method_table()) n.push_back(e.second);
        return n;
    }();
    return names;
}

Method parse_method(const std::string& name) {
    for (const auto& [k, v] : method_table())
        if (v == name) return k;
    std::string valid;
    for (const auto& n : method_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown method '" + name + "' (valid: " + valid + ")");
}

std::string to_string(RunStatus s) {
    switch (s) {
        case RunStatus::Converged: return "Converged";
        case RunStatus::MaxIterations: return "MaxIterations";
        case RunStatus::StepTooSmall: return "StepTooSmall";
        case RunStatus::NumericalFailure: return "NumericalFailure";
    }
    return "unknown";
}

std::string to_string(JacobianMode m) {
    switch (m) {
        case JacobianMode::Analytic: return "analytic";
        case JacobianMode::FD1: return "fd1";
        case JacobianMode::FD2: return "fd2";
        case JacobianMode::FD4: return "fd4";
    }
    return "unknown";
}

JacobianMode parse_jacobian(const std::string& name) {
    for (auto m : {JacobianMode::Analytic, JacobianMode::FD1, JacobianMode::FD2, JacobianMode::FD4})
        if (to_string(m) == name) return m;
    throw std::invalid_argument("unknown Jacobian mode '" + name + "' (valid: analytic, fd1, fd2, fd4)");
}

bool is_newton(Method m) { return m == Method::CGNewton || m == Method::EtaNewton || m == Method::ZetaNewton; }

ResidualKind residual_kind(Method m) {
    switch (m) {
        case Method::CGNewton: return ResidualKind::CombinedGradient;
        case Method::EtaFPI:
        case Method::EtaNewton: return ResidualKind::EtaMarkup;
        default: return ResidualKind::ZetaMarkup;
    }
}

std::vector<int> truncate_live_set(const DemandEval& eval, double eps_P) {
    std::vector<int> live;
    for (Eigen::Index j = 0; j < eval.P.size(); ++j)
        if (eval.P[j] > eps_P) live.push_back(static_cast<int>(j));
    if (live.empty()) throw NumericalFailure("market dead");
    return live;
}

bool uses_extension(const DemandSystem& demand, Method method, const SolverOptions& options) {
    const bool zeta_method = residual_kind(method) == ResidualKind::ZetaMarkup;
    switch (options.extension) {
        case Extension::Off: return false;
        case Extension::On:
            if (!zeta_method) throw std::invalid_argument("the extended map applies to zeta methods only");
            if (!demand.model().finite_reservation())
                throw std::invalid_argument("the extended map needs finite reservation prices");
            return true;
        case Extension::Auto: return zeta_method && demand.model().finite_reservation();
    }
    return false;
}

ResidualSystem make_system(std::shared_ptr<const DemandSystem> demand, Method method, const SolverOptions& options) {
    const bool ext = uses_extension(*demand, method, options);
    return ResidualSystem(std::move(demand), residual_kind(method), {options.eps_P, ext});
}

SolverRun zeta_fpi(const ResidualSystem& system, const Eigen::VectorXd& p0, double eps_T, int max_iter) {
    if (system.kind() != ResidualKind::ZetaMarkup) throw std::invalid_argument("zeta iteration needs the zeta system");
    return fixed_point(system, p0, eps_T, max_iter, MapKind::Zeta, 0.0);
}

SolverRun eta_fpi(const ResidualSystem& system, const Eigen::VectorXd& p0, double eps_T, int max_iter,
                  double divergence_factor) {
    if (system.kind() != ResidualKind::EtaMarkup) throw std::invalid_argument("eta iteration needs the eta system");
    return fixed_point(system, p0, eps_T, max_iter, MapKind::Eta, divergence_factor);
}

SolverRun newton_solve(const ResidualSystem& system, const Eigen::VectorXd& p0, const SolverOptions& options) {
    SolverRun run;
    switch (system.kind()) {
        case ResidualKind::CombinedGradient: run.method = Method::CGNewton; break;
        case ResidualKind::EtaMarkup: run.method = Method::EtaNewton; break;
        case ResidualKind::ZetaMarkup: run.method = Method::ZetaNewton; break;
    }
    run.p0 = p0;
    run.extended = system.options().extended_zeta;
    TrustRegionConfig<double> cfg = options.trust_region;
    cfg.stop_tol = options.eps_T;
    cfg.max_iter = options.max_iter > 0 ? options.max_iter : 75;
    NewtonProblem problem(system, options);
    auto res = trust_region_solve<double>(problem, p0, cfg);
    run.p_final = res.x;
    run.trace = std::move(res.trace);
    run.status = res.status;
    run.message = res.message;
    finalize(run, system, options.eps_T);
    return run;
}

SolverRun solve(std::shared_ptr<const DemandSystem> demand, Method method, const Eigen::VectorXd& p0,
                const SolverOptions& options) {
    const auto t0 = std::chrono::steady_clock::now();
    const ResidualSystem system = make_system(std::move(demand), method, options);
    SolverRun run;
    switch (method) {
        case Method::ZetaFPI: run = zeta_fpi(system, p0, options.eps_T, options.max_iter > 0 ? options.max_iter : 1000); break;
        case Method::EtaFPI:
            run = eta_fpi(system, p0, options.eps_T, options.max_iter > 0 ? options.max_iter : 1000, options.divergence_factor);
            break;
        default: run = newton_solve(system, p0, options); break;
    }
    run.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return run;
}

VerifyReport verify(const Eigen::VectorXd& p, const ResidualSystem& system, double eps_T) {
    const Market& m = system.market();
    VerifyReport r;
    const PointState st = system.evaluate(p);
    r.live = indices(st.live);
    r.extended = indices(st.extended);
    for (int j = 0; j < m.J(); ++j)
        if (!st.live[static_cast<std::size_t>(j)]) r.frozen.push_back(j);
    r.exclusion_optimal = indices(st.exclusion_optimal(m, system.demand().varsigma_star()));
    r.market_dead = r.live.empty();
    r.grad_inf = system.stationarity(st);
    r.fo_pass = r.grad_inf <= eps_T && !(r.live.empty() && r.extended.empty());

    const Eigen::VectorXd margin = p - m.costs();
    const Eigen::VectorXd et = eta(st.eval, m, st.live);
    for (int j : r.live) {
        r.f_pi = std::max(r.f_pi, std::abs(st.gradient[j]));
        r.f_eta = std::max(r.f_eta, std::abs(margin[j] - et[j]));
        r.f_zeta = std::max(r.f_zeta, std::abs(margin[j] - st.zeta[j]));
        r.max_abs_lambda = std::max(r.max_abs_lambda, std::abs(st.eval.lambda[j]));
    }

    if (!r.live.empty()) {
        const HessianParts parts = hessian_parts(st.logit, st.eval, m, p);
        std::vector<Eigen::MatrixXd> hs;
        for (auto& H : firm_hessians(parts, m, st.live))
            if (H.size() > 0) hs.push_back(std::move(H));
        r.second_order = second_order_check(hs);
    }
    return r;
}

VerifyReport verify(const SolverRun& run, const ResidualSystem& system, double eps_T) {
    return verify(run.p_final, system, eps_T);
}

InitStrategy InitStrategy::parse(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.empty()) throw std::invalid_argument("empty initial condition");
    auto seed_at = [&](std::size_t i) -> std::optional<std::uint64_t> {
        if (parts.size() > i) return std::stoull(parts[i]);
        return std::nullopt;
    };
    if (parts[0] == "costs" && parts.size() == 1) return at_costs();
    if (parts[0] == "cost-box" && parts.size() <= 2) return cost_box(seed_at(1));
    if (parts[0] == "box" && (parts.size() == 3 || parts.size() == 4)) {
        const double lo = std::stod(parts[1]), hi = std::stod(parts[2]);
        if (!(lo >= 0.0 && hi >= lo)) throw std::invalid_argument("box bounds need 0 <= lo <= hi");
        return box(lo, hi, seed_at(3));
    }
    throw std::invalid_argument("unknown initial condition '" + text +
                                "' (valid: costs, cost-box[:seed], box:lo:hi[:seed])");
}

std::string InitStrategy::label() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::AtCosts: os << "costs"; break;
        case Kind::UniformCostBox: os << "cost-box"; break;
        case Kind::UniformBox: os << "box:" << lo << ':' << hi; break;
    }
    if (seed) os << ':' << *seed;
    return os.str();
}

Eigen::VectorXd InitStrategy::generate(const Market& market, std::uint64_t run_seed) const {
    const Eigen::VectorXd& c = market.costs();
    if (kind == Kind::AtCosts) return c;
    double a = lo, b = hi;
    if (kind == Kind::UniformCostBox) {
        a = c.minCoeff();
        b = c.maxCoeff();
    }
    std::mt19937_64 gen(seed.value_or(run_seed));
    Eigen::VectorXd p(market.J());
    for (int j = 0; j < market.J(); ++j) p[j] = a + (b - a) * uniform01(gen);
    return p;
}

}  // namespace bertrand
