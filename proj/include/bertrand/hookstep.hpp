#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>

namespace bertrand {

/// Levenberg-Marquardt step on a Krylov subspace.
///
/// Minimizes ||beta e_1 - H q|| subject to ||q|| <= delta through the thin SVD
/// H = U Sigma V', with q(mu) = V (Sigma^2 + mu)^{-1} Sigma U' beta e_1.
/// The SVD is computed once and reused for every radius.
template <class Scalar>
class Hookstep {
public:
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    struct Step {
        Vec q;
        Scalar mu = 0;
        bool interior = true;
    };

    Hookstep(const Mat& H, Scalar beta) : H_(H), beta_(beta) {
        if (H.cols() == 0) {
            sigma_.resize(0);
            c_.resize(0);
            V_.resize(0, 0);
            return;
        }
        Eigen::JacobiSVD<Mat> svd(H, Eigen::ComputeThinU | Eigen::ComputeThinV);
        sigma_ = svd.singularValues();
        V_ = svd.matrixV();
        U_ = svd.matrixU();
        c_ = beta * U_.row(0).transpose();
        const Scalar cutoff = sigma_.size() ? sigma_[0] * std::numeric_limits<Scalar>::epsilon() * Scalar(H.rows()) : Scalar(0);
        rank_ = 0;
        for (Eigen::Index i = 0; i < sigma_.size(); ++i)
            if (sigma_[i] > cutoff) ++rank_;
    }

    const Vec& singular_values() const { return sigma_; }
    /// First row of U, i.e. U' e_1.
    Vec nu1() const { return U_.rows() ? Vec(U_.row(0).transpose()) : Vec(); }

    Vec coefficients(Scalar mu) const {
        Vec w = Vec::Zero(sigma_.size());
        for (Eigen::Index i = 0; i < rank_; ++i) w[i] = sigma_[i] * c_[i] / (sigma_[i] * sigma_[i] + mu);
        return V_ * w;
    }

    Scalar norm(Scalar mu) const {
        Scalar s = 0;
        for (Eigen::Index i = 0; i < rank_; ++i) {
            const Scalar t = sigma_[i] * c_[i] / (sigma_[i] * sigma_[i] + mu);
            s += t * t;
        }
        return std::sqrt(s);
    }

    /// ||beta e_1 - H q||.
    Scalar model_residual(const Vec& q) const {
        Vec r = -H_ * q;
        r[0] += beta_;
        return r.norm();
    }

    /// F' J s for s = Q q(mu) when Q' b = beta e_1 with b = -F.
    Scalar descent(Scalar mu) const {
        Scalar s = 0;
        for (Eigen::Index i = 0; i < rank_; ++i) {
            const Scalar d = sigma_[i] * sigma_[i] / (sigma_[i] * sigma_[i] + mu);
            s += c_[i] * c_[i] * d;
        }
        return -s;
    }

    /// The subspace Newton step when it fits, otherwise the step on the sphere of radius delta.
    Step solve(Scalar delta) const {
        Step out;
        const Scalar n0 = norm(Scalar(0));
        if (n0 <= delta || n0 == Scalar(0)) {
            out.q = coefficients(Scalar(0));
            return out;
        }
        out.interior = false;
        Scalar scn = 0;
        for (Eigen::Index i = 0; i < rank_; ++i) scn += sigma_[i] * sigma_[i] * c_[i] * c_[i];
        Scalar lo = 0, hi = std::sqrt(scn) / delta;
        Scalar mu = 0;
        const Scalar target = Scalar(1) / delta;
        for (int it = 0; it < 200; ++it) {
            const Scalar nm = norm(mu);
            const Scalar phi = Scalar(1) / nm - target;
            if (std::abs(nm - delta) <= Scalar(1e-12) * delta) break;
            if (phi < 0)
                lo = mu;
            else
                hi = mu;
            Scalar dn2 = 0;  // d(||q||^2)/dmu
            for (Eigen::Index i = 0; i < rank_; ++i) {
                const Scalar den = sigma_[i] * sigma_[i] + mu;
                dn2 -= Scalar(2) * sigma_[i] * sigma_[i] * c_[i] * c_[i] / (den * den * den);
            }
            const Scalar dphi = -dn2 / (Scalar(2) * nm * nm * nm);
            Scalar next = mu - phi / dphi;
            if (!(next > lo && next < hi)) next = Scalar(0.5) * (lo + hi);
            if (next == mu) break;
            mu = next;
        }
        out.mu = mu;
        out.q = coefficients(mu);
        return out;
    }

private:
    Mat H_;
    Scalar beta_;
    Mat U_;
    Mat V_;
    Vec sigma_;
    Vec c_;
    Eigen::Index rank_ = 0;
};

}  // namespace bertrand
