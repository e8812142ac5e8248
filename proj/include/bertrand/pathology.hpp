#pragma once

#include "bertrand/trust_region.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace bertrand::pathology {

template <class Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// F(x) = x / (1 + ||x||^2).
template <class Scalar>
Vec<Scalar> field(const Vec<Scalar>& x) {
    return x / (Scalar(1) + x.squaredNorm());
}

template <class Scalar>
Mat<Scalar> jacobian(const Vec<Scalar>& x) {
    const Scalar q = Scalar(1) + x.squaredNorm();
    Mat<Scalar> J = Mat<Scalar>::Identity(x.size(), x.size()) - (Scalar(2) / q) * x * x.transpose();
    return J / q;
}

template <class Scalar>
Vec<Scalar> newton_step(const Vec<Scalar>& x) {
    const Scalar r2 = x.squaredNorm();
    if (r2 == Scalar(1)) throw std::domain_error("the Jacobian is singular on the unit sphere");
    return -((Scalar(1) + r2) / (Scalar(1) - r2)) * x;
}

/// x + s^N = -(2 r^2 / (1 - r^2)) x.
template <class Scalar>
Vec<Scalar> newton_point(const Vec<Scalar>& x) {
    const Scalar r2 = x.squaredNorm();
    if (r2 == Scalar(1)) throw std::domain_error("the Jacobian is singular on the unit sphere");
    return -(Scalar(2) * r2 / (Scalar(1) - r2)) * x;
}

/// Minimizer of the Gauss-Newton model along -DF' F.
template <class Scalar>
Vec<Scalar> cauchy_step(const Vec<Scalar>& x) {
    const Mat<Scalar> J = jacobian(x);
    const Vec<Scalar> d = J.transpose() * field(x);
    const Vec<Scalar> Jd = J * d;
    const Scalar jn = Jd.squaredNorm();
    if (jn == Scalar(0)) return Vec<Scalar>::Zero(x.size());
    return -(d.squaredNorm() / jn) * d;
}

/// Step of 2-norm min(delta, ||s^N||) on the dogleg path; the Cauchy and Newton points coincide here.
template <class Scalar>
Vec<Scalar> dogleg_step(const Vec<Scalar>& x, Scalar delta) {
    const Vec<Scalar> sn = newton_step(x);
    const Scalar n = sn.norm();
    return n <= delta ? sn : Vec<Scalar>(sn * (delta / n));
}

/// Solution of (DF'DF + lambda I) s = -DF' F.
template <class Scalar>
Vec<Scalar> hookstep(const Vec<Scalar>& x, Scalar lambda) {
    const Scalar r2 = x.squaredNorm();
    const Scalar q = Scalar(1) + r2;
    const Scalar Lam = Scalar(1) + lambda * q * q;
    const Scalar A = Scalar(2) / q;
    return -((Scalar(1) - r2) / q) / (Lam - A * A * r2) * x;
}

/// Step length along s^N / ||s^N|| that lands on the origin.
template <class Scalar>
Scalar exact_line_search_length(const Vec<Scalar>& x) {
    const Scalar r2 = x.squaredNorm();
    const Scalar ratio = (Scalar(1) + r2) / (Scalar(1) - r2);
    return (ratio > 0 ? Scalar(1) : Scalar(-1)) * std::sqrt(r2);
}

enum class NewtonBehavior { ConvergesToZero, Diverges, SignAlternates };

/// Pure-Newton behavior predicted from the starting radius.
template <class Scalar>
NewtonBehavior predicted_behavior(Scalar r0) {
    const Scalar threshold = Scalar(1) / std::sqrt(Scalar(3));
    if (std::abs(r0 - threshold) <= Scalar(1e-12)) return NewtonBehavior::SignAlternates;
    return r0 < threshold ? NewtonBehavior::ConvergesToZero : NewtonBehavior::Diverges;
}

/// Classifies a sequence of iterates from pure Newton.
template <class Scalar>
NewtonBehavior classify(const std::vector<Vec<Scalar>>& iterates) {
    if (iterates.size() < 2) throw std::invalid_argument("need at least two iterates");
    const Scalar r0 = iterates.front().norm();
    const Scalar rN = iterates.back().norm();
    if (!std::isfinite(rN) || rN > r0 * Scalar(1 + 1e-6)) return NewtonBehavior::Diverges;
    if (rN < r0 * Scalar(1e-6)) return NewtonBehavior::ConvergesToZero;
    bool alternates = true;
    for (std::size_t i = 1; i < iterates.size(); ++i)
        alternates = alternates && (iterates[i] + iterates[i - 1]).norm() <= Scalar(1e-8) * std::max(Scalar(1), r0);
    return alternates ? NewtonBehavior::SignAlternates : NewtonBehavior::Diverges;
}

/// The field as a trust-region problem with its exact Jacobian; records accepted iterates.
template <class Scalar>
struct FieldProblem {
    std::vector<Vec<Scalar>> iterates;

    Vec<Scalar> residual(const Vec<Scalar>& x) { return field(x); }
    Scalar stationarity(const Vec<Scalar>& x, const Vec<Scalar>& F) {
        if (iterates.empty() || !(iterates.back().size() == x.size() && iterates.back() == x)) iterates.push_back(x);
        return F.template lpNorm<Eigen::Infinity>();
    }
    Linearization<Scalar> linearize(const Vec<Scalar>& x, const Vec<Scalar>&) {
        const Mat<Scalar> J = jacobian(x);
        return {[J](const Vec<Scalar>& v) -> Vec<Scalar> { return J * v; }, {}};
    }
};

struct ThresholdCheck {
    NewtonBehavior predicted;
    NewtonBehavior observed;
    bool matches = false;
    std::vector<double> norms;
};

/// Runs the engine in pure-Newton mode from x0 and compares with the closed-form prediction.
inline ThresholdCheck contraction_threshold_check(const Vec<double>& x0, int iterations = 8) {
    FieldProblem<double> prob;
    TrustRegionConfig<double> cfg;
    cfg.pure_newton = true;
    cfg.gmres_tol = 0.0;
    cfg.max_iter = iterations;
    cfg.stop_tol = 1e-300;
    cfg.step_floor = 0.0;
    trust_region_solve<double>(prob, x0, cfg);
    ThresholdCheck out;
    out.predicted = predicted_behavior(x0.norm());
    out.observed = classify(prob.iterates);
    out.matches = out.predicted == out.observed;
    for (const auto& x : prob.iterates) out.norms.push_back(x.norm());
    return out;
}

}  // namespace bertrand::pathology
