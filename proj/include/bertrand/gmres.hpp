#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

namespace bertrand {

/// Householder GMRES state: reflectors P_1..P_{n+1} and the unrotated Hessenberg matrix,
/// with A Q_n = Q_{n+1} H and Q_{n+1}' b = beta e_1.
/// Plane rotation acting as [c -s; s c].
template <class Scalar>
struct Givens {
    Scalar c = 1;
    Scalar s = 0;

    static Givens annihilating(Scalar a, Scalar b) {
        const Scalar r = std::hypot(a, b);
        if (r == Scalar(0)) return {};
        return {a / r, -b / r};
    }
    void apply(Scalar& a, Scalar& b) const {
        const Scalar x = a, y = b;
        a = c * x - s * y;
        b = s * x + c * y;
    }
};

template <class Scalar>
struct KrylovState {
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    int n = 0;
    int N = 0;
    std::vector<Vec> reflectors;  // unit vectors v_i, P_i = I - 2 v_i v_i'
    Mat H;                        // (n+1) x n
    Scalar beta = 0;
    std::vector<Givens<Scalar>> givens;
    Vec g;  // rotated right-hand side, length n+1

    void reflect(int i, Vec& x) const {
        const Vec& v = reflectors[static_cast<std::size_t>(i)];
        if (v.size() == 0) return;
        x -= (Scalar(2) * v.dot(x)) * v;
    }

    /// Column i of Q: P_1 ... P_{i+1} e_i.
    Vec basis_vector(int i) const {
        Vec z = Vec::Zero(N);
        z[i] = Scalar(1);
        for (int k = std::min(i, static_cast<int>(reflectors.size()) - 1); k >= 0; --k) reflect(k, z);
        return z;
    }

    /// Q_n y without forming Q.
    Vec expand(const Vec& y) const {
        Vec z = Vec::Zero(N);
        z.head(y.size()) = y;
        for (int k = static_cast<int>(std::min<std::size_t>(reflectors.size(), static_cast<std::size_t>(y.size()))) - 1;
             k >= 0; --k)
            reflect(k, z);
        return z;
    }

    Mat basis(int cols) const {
        Mat Q(N, cols);
        for (int i = 0; i < cols; ++i) Q.col(i) = basis_vector(i);
        return Q;
    }
};

template <class Scalar>
struct GmresResult {
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    KrylovState<Scalar> state;
    Vec y;                  // least-squares coefficients in the Krylov basis
    Scalar residual = 0;    // relative residual ||A x - b|| / ||b||
    std::vector<Scalar> history;  // relative residual after each dimension
    bool converged = false;
    bool exact = false;     // Krylov space became invariant

    Vec solution() const { return state.expand(y); }
};

namespace detail {

/// Reflector mapping x(i:) onto a multiple of e_i; returns that multiple.
template <class Scalar, class Vec>
Scalar make_reflector(const Vec& x, int i, Vec& v) {
    const auto N = x.size();
    const Scalar tail = x.segment(i, N - i).norm();
    v = Vec::Zero(N);
    if (tail == Scalar(0)) {
        v.resize(0);
        return Scalar(0);
    }
    const Scalar alpha = x[i] >= Scalar(0) ? -tail : tail;
    v.segment(i, N - i) = x.segment(i, N - i);
    v[i] -= alpha;
    const Scalar vn = v.norm();
    if (vn == Scalar(0)) {
        v.resize(0);
        return x[i];
    }
    v /= vn;
    return alpha;
}

}  // namespace detail

/// Minimizes ||A x - b|| over growing Krylov spaces until the relative residual is at
/// most `tol` or the space reaches `max_dim`.
template <class Scalar, class Op>
GmresResult<Scalar> gmres(Op&& apply_A, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& b, Scalar tol, int max_dim) {
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    GmresResult<Scalar> out;
    auto& st = out.state;
    const int N = static_cast<int>(b.size());
    st.N = N;
    const Scalar bnorm = b.norm();
    max_dim = std::max(1, std::min(max_dim, N));
    st.H = Mat::Zero(max_dim + 1, max_dim);
    st.g = Vec::Zero(max_dim + 1);
    if (bnorm == Scalar(0)) {
        st.H.resize(1, 0);
        st.g.resize(1);
        st.g[0] = 0;
        out.y.resize(0);
        out.converged = out.exact = true;
        return out;
    }

    Vec v;
    st.beta = detail::make_reflector<Scalar>(b, 0, v);
    st.reflectors.push_back(v);
    st.g[0] = st.beta;
    Mat R = Mat::Zero(max_dim + 1, max_dim);

    for (int n = 0; n < max_dim; ++n) {
        Vec w = apply_A(st.basis_vector(n));
        for (int k = 0; k <= n; ++k) st.reflect(k, w);
        Scalar sub = 0;
        if (n + 1 < N) {
            sub = detail::make_reflector<Scalar>(w, n + 1, v);
            st.reflectors.push_back(v);
        }
        st.H.col(n).head(n + 1) = w.head(n + 1);
        st.H(n + 1, n) = sub;

        Vec col = st.H.col(n).head(n + 2);
        for (int k = 0; k < n; ++k) st.givens[static_cast<std::size_t>(k)].apply(col[k], col[k + 1]);
        const auto G = Givens<Scalar>::annihilating(col[n], col[n + 1]);
        G.apply(col[n], col[n + 1]);
        G.apply(st.g[n], st.g[n + 1]);
        st.givens.push_back(G);
        R.col(n).head(n + 2) = col;
        st.n = n + 1;

        out.residual = std::abs(st.g[n + 1]) / bnorm;
        out.history.push_back(out.residual);
        if (std::abs(sub) < Scalar(1e-14) * bnorm) {
            out.exact = true;
            break;
        }
        if (out.residual <= tol) break;
    }
    const int n = st.n;
    st.H.conservativeResize(n + 1, n);
    st.g.conservativeResize(n + 1);
    out.y = R.topLeftCorner(n, n).template triangularView<Eigen::Upper>().solve(st.g.head(n));
    out.converged = out.exact || out.residual <= tol;
    return out;
}

}  // namespace bertrand
