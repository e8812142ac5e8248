#include "bertrand/markup.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bertrand {

namespace {

std::vector<int> live_products(const FirmBlock& b, const std::vector<bool>& live) {
    std::vector<int> idx;
    for (int j : b.products)
        if (live[static_cast<std::size_t>(j)]) idx.push_back(j);
    return idx;
}

struct RowLogit {
    Eigen::VectorXd L;
    Eigen::VectorXd d;
};

// Logit probabilities and price slopes of one draw.
RowLogit row_logit(const DemandSystem& demand, int s, const Eigen::VectorXd& p) {
    const auto& model = demand.model();
    const auto draw = demand.samples().draw(s);
    const auto& t = demand.tables();
    const auto J = p.size();
    RowLogit r{Eigen::VectorXd::Zero(J), Eigen::VectorXd::Zero(J)};
    Eigen::VectorXd u = Eigen::VectorXd::Constant(J, -kInf);
    double top = t.theta[s];
    for (Eigen::Index j = 0; j < J; ++j) {
        if (!(p[j] < t.varsigma[s])) continue;
        u[j] = model.price_utility(draw, p[j]) + t.v(s, j);
        r.d[j] = model.price_slope(draw, p[j]);
        top = std::max(top, u[j]);
    }
    if (top == -kInf) return r;
    double total = t.theta[s] > -kInf ? std::exp(t.theta[s] - top) : 0.0;
    for (Eigen::Index j = 0; j < J; ++j)
        if (u[j] > -kInf) {
            r.L[j] = std::exp(u[j] - top);
            total += r.L[j];
        }
    r.L /= total;
    return r;
}

}  // namespace

std::vector<bool> positive_demand(const DemandEval& eval) {
    std::vector<bool> live(static_cast<std::size_t>(eval.P.size()));
    for (Eigen::Index j = 0; j < eval.P.size(); ++j) live[static_cast<std::size_t>(j)] = eval.P[j] > 0.0;
    return live;
}

Eigen::VectorXd eta(const DemandEval& eval, const Market& market, const std::vector<bool>& live) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(market.J());
    const Eigen::MatrixXd Gt = eval.gamma_tilde(market);
    for (const auto& b : market.blocks()) {
        const auto idx = live_products(b, live);
        if (idx.empty()) continue;
        const auto n = static_cast<Eigen::Index>(idx.size());
        Eigen::MatrixXd A(n, n);
        Eigen::VectorXd rhs(n);
        for (Eigen::Index a = 0; a < n; ++a) {
            const int k = idx[static_cast<std::size_t>(a)];
            rhs[a] = -eval.P[k] / eval.lambda[k];
            for (Eigen::Index c = 0; c < n; ++c) {
                const int j = idx[static_cast<std::size_t>(c)];
                A(a, c) = (a == c ? 1.0 : 0.0) - Gt(j, k) / eval.lambda[k];
            }
        }
        const Eigen::VectorXd x = A.householderQr().solve(rhs);
        if (!x.allFinite()) throw std::runtime_error("singular firm markup system");
        for (Eigen::Index a = 0; a < n; ++a) out[idx[static_cast<std::size_t>(a)]] = x[a];
    }
    return out;
}

Eigen::VectorXd eta(const DemandEval& eval, const Market& market) {
    return eta(eval, market, positive_demand(eval));
}

Eigen::VectorXd zeta(const DemandEval& eval, const Market& market, const Eigen::VectorXd& p,
                     const std::vector<bool>& live) {
    const Eigen::VectorXd z = eval.omega_tilde(market) * (p - market.costs());
    Eigen::VectorXd out = Eigen::VectorXd::Zero(market.J());
    for (int k = 0; k < market.J(); ++k)
        if (live[static_cast<std::size_t>(k)]) out[k] = z[k] - eval.P[k] / eval.lambda[k];
    return out;
}

Eigen::VectorXd zeta(const DemandEval& eval, const Market& market, const Eigen::VectorXd& p) {
    return zeta(eval, market, p, positive_demand(eval));
}

double zeta_limit(const DemandSystem& demand, const Eigen::VectorXd& p, int k) {
    const auto& m = demand.market();
    Eigen::VectorXd q = p;
    q[k] = demand.varsigma_star();
    const auto r = row_logit(demand, demand.reservation().star_index, q);
    double z = 0.0;
    for (int j : m.blocks()[static_cast<std::size_t>(m.owner(k))].products)
        if (j != k) z += r.L[j] * (q[j] - m.costs()[j]);
    return z;
}

Eigen::VectorXd zeta_limit_gradient(const DemandSystem& demand, const Eigen::VectorXd& p, int k) {
    const auto& m = demand.market();
    Eigen::VectorXd q = p;
    q[k] = demand.varsigma_star();
    const auto r = row_logit(demand, demand.reservation().star_index, q);
    Eigen::VectorXd weight = Eigen::VectorXd::Zero(m.J());  // margins of the firm's other products
    for (int j : m.blocks()[static_cast<std::size_t>(m.owner(k))].products)
        if (j != k) weight[j] = q[j] - m.costs()[j];
    const double wl = weight.dot(r.L);
    Eigen::VectorXd g(m.J());
    for (int l = 0; l < m.J(); ++l) {
        const bool other = m.owner(l) == m.owner(k) && l != k;
        g[l] = (other ? r.L[l] : 0.0) + r.L[l] * r.d[l] * (weight[l] - wl);
    }
    g[k] = 0.0;
    return g;
}

Eigen::VectorXd zeta_extended(const DemandSystem& demand, const Eigen::VectorXd& p) {
    const auto L = demand.logit(p);
    const auto e = demand_eval(L, demand.market(), p);
    Eigen::VectorXd z = zeta(e, demand.market(), p);
    for (int k = 0; k < demand.J(); ++k)
        if (p[k] >= demand.varsigma_star()) z[k] = zeta_limit(demand, p, k);
    return z;
}

int PointState::live_count() const { return static_cast<int>(std::count(live.begin(), live.end(), true)); }

std::vector<bool> PointState::exclusion_optimal(const Market& market, double varsigma_star) const {
    std::vector<bool> out(live.size(), false);
    for (std::size_t k = 0; k < live.size(); ++k)
        if (extended[k]) out[k] = market.costs()[static_cast<Eigen::Index>(k)] + zeta[static_cast<Eigen::Index>(k)] >= varsigma_star;
    return out;
}

ResidualSystem::ResidualSystem(std::shared_ptr<const DemandSystem> demand, ResidualKind kind, ResidualOptions options)
    : demand_(std::move(demand)), kind_(kind), options_(options) {
    if (!demand_) throw std::invalid_argument("residual system needs a demand system");
    if (!(options_.eps_P >= 0.0)) throw std::invalid_argument("eps_P must be non-negative");
    if (options_.extended_zeta) {
        if (kind_ != ResidualKind::ZetaMarkup)
            throw std::invalid_argument("the extended map applies to the zeta residual only");
        if (!demand_->model().finite_reservation())
            throw std::invalid_argument("the extended map needs finite reservation prices");
    }
}

PointState ResidualSystem::evaluate(const Eigen::VectorXd& p) const { return build(p, nullptr, nullptr); }

PointState ResidualSystem::evaluate(const Eigen::VectorXd& p, const std::vector<bool>& live,
                                    const std::vector<bool>& extended) const {
    return build(p, &live, &extended);
}

PointState ResidualSystem::build(const Eigen::VectorXd& p, const std::vector<bool>* live,
                                 const std::vector<bool>* extended) const {
    const Market& m = market();
    const int J = m.J();
    PointState st;
    st.p = p;
    st.logit = demand_->logit(p);
    st.eval = demand_eval(st.logit, m, p, true);
    if (live) {
        st.live = *live;
        st.extended = *extended;
        // A fixed classification must not divide by a vanished sensitivity.
        for (int j = 0; j < J; ++j)
            if (st.live[static_cast<std::size_t>(j)] && st.eval.lambda[j] == 0.0) st.live[static_cast<std::size_t>(j)] = false;
    } else {
        st.live.assign(static_cast<std::size_t>(J), false);
        st.extended.assign(static_cast<std::size_t>(J), false);
        for (int j = 0; j < J; ++j) {
            const auto u = static_cast<std::size_t>(j);
            st.extended[u] = options_.extended_zeta && p[j] >= demand_->varsigma_star();
            st.live[u] = !st.extended[u] && st.eval.P[j] > options_.eps_P;
        }
    }
    st.gradient = combined_gradient(st.eval, m, p);
    for (int j = 0; j < J; ++j)
        if (!st.live[static_cast<std::size_t>(j)]) st.gradient[j] = 0.0;
    st.zeta = zeta(st.eval, m, p, st.live);
    for (int j = 0; j < J; ++j)
        if (st.extended[static_cast<std::size_t>(j)]) st.zeta[j] = zeta_limit(*demand_, p, j);
    if (kind_ == ResidualKind::EtaMarkup) st.eta = eta(st.eval, m, st.live);
    return st;
}

Eigen::VectorXd ResidualSystem::residual(const PointState& st) const {
    const Market& m = market();
    Eigen::VectorXd F = Eigen::VectorXd::Zero(m.J());
    for (int j = 0; j < m.J(); ++j) {
        const auto u = static_cast<std::size_t>(j);
        const double margin = st.p[j] - m.costs()[j];
        if (st.extended[u]) {
            F[j] = margin - st.zeta[j];
        } else if (st.live[u]) {
            switch (kind_) {
                case ResidualKind::CombinedGradient: F[j] = st.gradient[j]; break;
                case ResidualKind::EtaMarkup: F[j] = margin - st.eta[j]; break;
                case ResidualKind::ZetaMarkup: F[j] = margin - st.zeta[j]; break;
            }
        }
    }
    return F;
}

Eigen::MatrixXd zeta_jacobian(const LogitMatrix& L, const DemandEval& eval, const HessianParts& parts,
                              const Market& market, const Eigen::VectorXd& p, const Eigen::VectorXd& zeta,
                              const std::vector<bool>& live) {
    const int J = market.J();
    const double invS = 1.0 / static_cast<double>(L.L.rows());
    const Eigen::VectorXd margin = p - market.costs();
    const Eigen::MatrixXd piL_own = sample_profits(L, market, p) * market.ownership().transpose();
    const Eigen::MatrixXd weight = L.L.cwiseProduct(L.E + L.D.cwiseProduct(L.D));
    const Eigen::MatrixXd& G = *eval.gamma_full;

    Eigen::MatrixXd Dz = Eigen::MatrixXd::Zero(J, J);
    for (int k = 0; k < J; ++k) {
        if (!live[static_cast<std::size_t>(k)]) continue;
        const double a = invS * weight.col(k).dot((piL_own.col(k).array() - zeta[k]).matrix());
        for (int l = 0; l < J; ++l) {
            if (!live[static_cast<std::size_t>(l)]) continue;
            double t = zeta[k] * parts.phi(k, l) + G(k, l) - 2.0 * parts.psi(k, l);
            if (market.same_firm(k, l)) t += parts.phi(k, l) * margin[l] + G(l, k);
            if (k == l) t += a - eval.lambda[k];
            Dz(k, l) = t / eval.lambda[k];
        }
    }
    return Dz;
}

Eigen::MatrixXd eta_jacobian(const LogitMatrix& L, const DemandEval& eval, const HessianParts& parts,
                             const Market& market, const Eigen::VectorXd& eta, const std::vector<bool>& live) {
    const int J = market.J();
    const double invS = 1.0 / static_cast<double>(L.L.rows());
    // m(s,k) = sum over the products j of firm f(k) of eta_j L_sj
    const Eigen::MatrixXd m_own = (L.L * eta.asDiagonal() * market.ownership()) * market.ownership().transpose();
    const Eigen::MatrixXd weight = L.L.cwiseProduct(L.E + L.D.cwiseProduct(L.D));
    const Eigen::MatrixXd cross = 2.0 * invS * (eval.V.cwiseProduct(m_own).transpose() * eval.V);

    Eigen::MatrixXd rhs = eval.dP() + cross;  // A + DP
    for (int k = 0; k < J; ++k) {
        rhs(k, k) += invS * weight.col(k).dot((eta[k] - m_own.col(k).array()).matrix());
        for (int l = 0; l < J; ++l) {
            double t = eta[k] * parts.phi(k, l);
            if (market.same_firm(k, l)) t += eta[l] * parts.phi(k, l);
            rhs(k, l) -= t;
        }
    }

    Eigen::MatrixXd De = Eigen::MatrixXd::Zero(J, J);
    std::vector<int> cols;
    for (int l = 0; l < J; ++l)
        if (live[static_cast<std::size_t>(l)]) cols.push_back(l);
    const auto idx_cols = Eigen::Map<const Eigen::VectorXi>(cols.data(), static_cast<Eigen::Index>(cols.size()));
    for (const auto& b : market.blocks()) {
        const auto rows = live_products(b, live);
        if (rows.empty()) continue;
        const auto n = static_cast<Eigen::Index>(rows.size());
        Eigen::MatrixXd A(n, n);
        Eigen::MatrixXd B(n, static_cast<Eigen::Index>(cols.size()));
        for (Eigen::Index a = 0; a < n; ++a) {
            const int k = rows[static_cast<std::size_t>(a)];
            for (Eigen::Index c = 0; c < n; ++c) {
                const int j = rows[static_cast<std::size_t>(c)];
                A(a, c) = (a == c ? 1.0 : 0.0) - (*eval.gamma_full)(j, k) / eval.lambda[k];
            }
            B.row(a) = -rhs(k, idx_cols) / eval.lambda[k];
        }
        const Eigen::MatrixXd X = A.householderQr().solve(B);
        for (Eigen::Index a = 0; a < n; ++a) De(rows[static_cast<std::size_t>(a)], idx_cols) = X.row(a);
    }
    return De;
}

Eigen::MatrixXd ResidualSystem::jacobian(const PointState& st) const {
    const Market& m = market();
    const int J = m.J();
    const HessianParts parts = hessian_parts(st.logit, st.eval, m, st.p);
    Eigen::MatrixXd live_block;
    switch (kind_) {
        case ResidualKind::CombinedGradient: live_block = parts.combined_jacobian(); break;
        case ResidualKind::ZetaMarkup:
            live_block = Eigen::MatrixXd::Identity(J, J) - zeta_jacobian(st.logit, st.eval, parts, m, st.p, st.zeta, st.live);
            break;
        case ResidualKind::EtaMarkup:
            live_block = Eigen::MatrixXd::Identity(J, J) - eta_jacobian(st.logit, st.eval, parts, m, st.eta, st.live);
            break;
    }
    Eigen::MatrixXd Jac = Eigen::MatrixXd::Identity(J, J);
    for (int k = 0; k < J; ++k) {
        const auto uk = static_cast<std::size_t>(k);
        if (st.extended[uk]) {
            Jac.row(k) -= zeta_limit_gradient(*demand_, st.p, k).transpose();
            continue;
        }
        if (!st.live[uk]) continue;
        for (int l = 0; l < J; ++l)
            Jac(k, l) = st.live[static_cast<std::size_t>(l)] ? live_block(k, l) : 0.0;
    }
    return Jac;
}

double ResidualSystem::stationarity(const PointState& st) const {
    double r = st.gradient.lpNorm<Eigen::Infinity>();
    const auto excl = st.exclusion_optimal(market(), demand_->varsigma_star());
    for (int k = 0; k < market().J(); ++k) {
        const auto u = static_cast<std::size_t>(k);
        if (st.extended[u] && !excl[u]) r = std::max(r, std::abs(st.p[k] - market().costs()[k] - st.zeta[k]));
    }
    return r;
}

}  // namespace bertrand
