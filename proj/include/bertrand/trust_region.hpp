#pragma once

#include "bertrand/gmres.hpp"
#include "bertrand/hookstep.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bertrand {

template <class Scalar>
struct TrustRegionConfig {
    Scalar rho = Scalar(1e-4);
    Scalar alpha = Scalar(2);
    Scalar beta1 = Scalar(0.25);
    Scalar beta2 = Scalar(0.5);
    std::optional<Scalar> delta0;  // default max(1, ||x0||_inf) / 10
    Scalar delta_min = Scalar(1e-12);
    Scalar gmres_tol = Scalar(1e-4);
    int max_krylov = 0;  // 0 means min(N, 50)
    int max_iter = 75;
    Scalar stop_tol = Scalar(1e-6);
    Scalar step_floor = Scalar(1e-12);  // relative to max(1, ||x||_inf)
    bool pure_newton = false;           // full subspace Newton steps, no radius

    void validate() const {
        if (!(rho > 0 && rho < 1)) throw std::invalid_argument("rho must lie in (0,1)");
        if (!(alpha > 1)) throw std::invalid_argument("alpha must exceed 1");
        if (!(beta1 > 0 && beta1 < 1 && beta2 > 0 && beta2 < 1))
            throw std::invalid_argument("shrink factors must lie in (0,1)");
        if (!(delta_min > 0)) throw std::invalid_argument("delta_min must be positive");
        if (!(gmres_tol >= 0)) throw std::invalid_argument("gmres_tol must be non-negative");
        if (delta0 && !(*delta0 > 0)) throw std::invalid_argument("delta0 must be positive");
        if (max_iter < 0) throw std::invalid_argument("max_iter must be non-negative");
    }
};

/// Jacobian action at an accepted iterate, with an optional diagonal left preconditioner.
template <class Scalar>
struct Linearization {
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    std::function<Vec(const Vec&)> apply;
    Vec left_scale;  // empty: no preconditioning
};

/// Tolerance for the left-scaled system M J s = -M F that keeps ||F + J s|| <= tol ||F||.
template <class Scalar>
Scalar transfer_tolerance(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& F,
                          const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& scale, Scalar tol) {
    const Scalar mfn = scale.cwiseProduct(F).norm();
    if (mfn == Scalar(0)) return tol;
    return tol * F.norm() * scale.cwiseAbs().minCoeff() / mfn;
}

enum class EngineStatus { Converged, MaxIterations, StepTooSmall, NumericalFailure };

/// Raised by a problem to end the solve with NumericalFailure.
struct NumericalFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <class Scalar>
struct IterationRecord {
    int iteration = 0;
    Scalar residual_norm = 0;
    Scalar stationarity = 0;
    Scalar delta = 0;
    int krylov_dim = 0;
    Scalar step_norm = 0;
    bool accepted = false;
    int rejections = 0;
};

template <class Scalar>
struct EngineResult {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x;
    EngineStatus status = EngineStatus::MaxIterations;
    int iterations = 0;
    std::vector<IterationRecord<Scalar>> trace;
    std::string message;
};

/// Inexact Newton with a hookstep trust region on the GMRES subspace.
///
/// `problem` provides residual(x), linearize(x, F) -> Linearization, and
/// stationarity(x, F), the measure compared with stop_tol.
template <class Scalar, class Problem>
EngineResult<Scalar> trust_region_solve(Problem& problem, Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x0,
                                        const TrustRegionConfig<Scalar>& cfg) {
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    cfg.validate();
    EngineResult<Scalar> out;
    Vec x = std::move(x0);
    const int N = static_cast<int>(x.size());
    const int max_krylov = cfg.max_krylov > 0 ? std::min(cfg.max_krylov, N) : std::min(N, 50);
    const Scalar shrink_lo = std::min(cfg.beta1, cfg.beta2), shrink_hi = std::max(cfg.beta1, cfg.beta2);
    Scalar delta = cfg.delta0 ? *cfg.delta0 : std::max(Scalar(1), x.template lpNorm<Eigen::Infinity>()) / Scalar(10);

    auto finish = [&](EngineStatus st, std::string msg) {
        out.status = st;
        out.message = std::move(msg);
        out.x = x;
        return out;
    };

    try {
        Vec F = problem.residual(x);
        if (!F.allFinite()) return finish(EngineStatus::NumericalFailure, "non-finite residual at the start");
        IterationRecord<Scalar> rec;
        rec.residual_norm = F.norm();
        rec.delta = delta;

        for (int it = 0;; ++it) {
            rec.stationarity = problem.stationarity(x, F);
            rec.iteration = it;
            out.trace.push_back(rec);
            out.iterations = it;
            if (rec.stationarity <= cfg.stop_tol) return finish(EngineStatus::Converged, "");
            if (it >= cfg.max_iter) return finish(EngineStatus::MaxIterations, "iteration limit reached");

            const Linearization<Scalar> lin = problem.linearize(x, F);
            const bool scaled = lin.left_scale.size() > 0;
            const Vec MF = scaled ? Vec(lin.left_scale.cwiseProduct(F)) : F;
            const Scalar tol = scaled ? transfer_tolerance<Scalar>(F, lin.left_scale, cfg.gmres_tol) : cfg.gmres_tol;
            auto op = [&](const Vec& v) -> Vec {
                Vec w = lin.apply(v);
                return scaled ? Vec(lin.left_scale.cwiseProduct(w)) : w;
            };
            const auto gm = gmres<Scalar>(op, Vec(-MF), tol, max_krylov);
            const Hookstep<Scalar> hook(gm.state.H, gm.state.beta);
            // Merit ||M F||^2 with M frozen at x, the quantity the subspace model approximates.
            const Scalar f0 = MF.squaredNorm();

            rec = IterationRecord<Scalar>{};
            rec.krylov_dim = gm.state.n;
            for (;;) {
                const auto step = cfg.pure_newton ? typename Hookstep<Scalar>::Step{hook.coefficients(Scalar(0)), 0, true}
                                                  : hook.solve(delta);
                const Vec s = gm.state.expand(step.q);
                const Scalar snorm = s.norm();
                if (!(snorm > cfg.step_floor * std::max(Scalar(1), x.template lpNorm<Eigen::Infinity>())))
                    return finish(EngineStatus::StepTooSmall, "step too small");
                const Vec xt = x + s;
                const Vec Ft = problem.residual(xt);
                const bool finite = Ft.allFinite();
                if (cfg.pure_newton) {
                    if (!finite) return finish(EngineStatus::NumericalFailure, "non-finite residual");
                    x = xt;
                    F = Ft;
                    rec.accepted = true;
                    rec.step_norm = snorm;
                    rec.delta = delta;
                    rec.residual_norm = F.norm();
                    break;
                }

                const Scalar lin_res = hook.model_residual(step.q);
                const Scalar slope = -gm.state.beta * (gm.state.H * step.q)[0];
                const Scalar pred = f0 - lin_res * lin_res;
                const Scalar f1 = finite ? (scaled ? lin.left_scale.cwiseProduct(Ft).squaredNorm() : Ft.squaredNorm())
                                          : std::numeric_limits<Scalar>::infinity();
                const Scalar ared = f0 - f1;
                if (finite && pred > 0 && ared >= cfg.rho * pred) {
                    rec.delta = delta;
                    if (ared >= Scalar(0.75) * pred && snorm >= Scalar(0.99) * delta) delta *= cfg.alpha;
                    x = xt;
                    F = Ft;
                    rec.accepted = true;
                    rec.step_norm = snorm;
                    rec.residual_norm = F.norm();
                    break;
                }
                // Minimizer of the quadratic through f0, slope and f1 along s.
                Scalar t = shrink_lo;
                if (finite) {
                    const Scalar g = Scalar(2) * slope;
                    const Scalar curv = f1 - f0 - g;
                    if (curv > 0) t = -g / (Scalar(2) * curv);
                    if (!std::isfinite(t)) t = shrink_lo;
                    t = std::clamp(t, shrink_lo, shrink_hi);
                }
                delta = t * std::min(delta, snorm);
                ++rec.rejections;
                if (delta < cfg.delta_min) return finish(EngineStatus::StepTooSmall, "trust radius collapsed");
            }
        }
    } catch (const NumericalFailure& e) {
        return finish(EngineStatus::NumericalFailure, e.what());
    }
}

}  // namespace bertrand
