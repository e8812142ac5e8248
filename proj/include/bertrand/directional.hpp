#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bertrand {

/// Step length along s for a difference stencil of the given order.
///
/// Order 1 uses sqrt(eps) max(1, ||x||) / ||s||; the central stencils use eps^(1/3) and eps^(1/5).
template <class Scalar>
Scalar difference_step(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x,
                       const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& s, int order) {
    const Scalar eps = std::numeric_limits<Scalar>::epsilon();
    Scalar root;
    switch (order) {
        case 1: root = std::sqrt(eps); break;
        case 2: root = std::cbrt(eps); break;
        case 4: root = std::pow(eps, Scalar(0.2)); break;
        default: throw std::invalid_argument("difference order must be 1, 2 or 4");
    }
    return root * std::max(Scalar(1), x.norm()) / s.norm();
}

/// Approximates (DF)(x) s. `Fx`, when given, is F(x) and saves one evaluation for order 1.
template <class Scalar, class Fn>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> directional_derivative(Fn&& F, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x,
                                                                const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& s, int order,
                                                                const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>* Fx = nullptr) {
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    if (s.norm() == Scalar(0)) {
        if (order != 1 && order != 2 && order != 4) throw std::invalid_argument("difference order must be 1, 2 or 4");
        return Vec::Zero(Fx ? Fx->size() : F(x).size());
    }
    const Scalar h = difference_step<Scalar>(x, s, order);
    switch (order) {
        case 1: {
            const Vec base = Fx ? *Fx : Vec(F(x));
            return (Vec(F(Vec(x + h * s))) - base) / h;
        }
        case 2: return (Vec(F(Vec(x + h * s))) - Vec(F(Vec(x - h * s)))) / (Scalar(2) * h);
        default:
            return (Scalar(8) * (Vec(F(Vec(x + h * s))) - Vec(F(Vec(x - h * s)))) -
                    (Vec(F(Vec(x + Scalar(2) * h * s))) - Vec(F(Vec(x - Scalar(2) * h * s))))) /
                   (Scalar(12) * h);
    }
}

/// Dense Jacobian assembled column by column from directional differences.
template <class Scalar, class Fn>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> difference_jacobian(Fn&& F, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x,
                                                                          int order) {
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const Vec Fx = F(x);
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> Jm(Fx.size(), x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i)
        Jm.col(i) = directional_derivative<Scalar>(F, x, Vec(Vec::Unit(x.size(), i)), order, &Fx);
    return Jm;
}

}  // namespace bertrand
