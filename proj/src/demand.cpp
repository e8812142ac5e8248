#include "bertrand/demand.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace bertrand {

DemandSystem::DemandSystem(Market market, std::shared_ptr<const UtilityModel> model, SampleSet samples)
    : market_(std::move(market)), model_(std::move(model)), samples_(std::move(samples)) {
    if (!model_) throw std::invalid_argument("demand system needs a utility model");
    if (samples_.S() == 0) throw std::invalid_argument("demand system needs at least one draw");
    if (!samples_.draws.allFinite()) throw std::invalid_argument("draws must be finite");
    const auto names = model_->coefficient_names(market_.K());
    if (static_cast<Eigen::Index>(names.size()) != samples_.draws.cols())
        throw std::invalid_argument("draw width does not match the model and characteristic count");
    for (int s = 0; s < samples_.S(); ++s)
        if (!(model_->reservation_price(samples_.draw(s)) > 0.0))
            throw std::invalid_argument("reservation prices must be positive");
    tables_ = tabulate(*model_, samples_, market_);
    reservation_ = reservation_order(*model_, samples_);
}

LogitMatrix DemandSystem::logit(const Eigen::VectorXd& p) const {
    if (p.size() != J()) throw std::invalid_argument("price vector length differs from product count");
    return logit_eval(*model_, samples_, tables_, p);
}

Eigen::MatrixXd DemandEval::gamma_tilde(const Market& market) const {
    const int J = market.J();
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(J, J);
    for (const auto& b : market.blocks()) {
        const auto& blk = gamma_blocks[static_cast<std::size_t>(b.firm)];
        for (std::size_t a = 0; a < b.products.size(); ++a)
            for (std::size_t c = 0; c < b.products.size(); ++c)
                g(b.products[a], b.products[c]) = blk(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c));
    }
    return g;
}

Eigen::MatrixXd DemandEval::omega_tilde(const Market& market) const {
    Eigen::MatrixXd om = gamma_tilde(market).transpose();
    for (Eigen::Index k = 0; k < om.rows(); ++k) {
        if (lambda[k] != 0.0)
            om.row(k) /= lambda[k];
        else
            om.row(k).setZero();
    }
    return om;
}

Eigen::MatrixXd DemandEval::dP() const {
    if (!gamma_full) throw std::logic_error("full Gamma was not computed");
    Eigen::MatrixXd d = -*gamma_full;
    d.diagonal() += lambda;
    return d;
}

DemandEval demand_eval(const LogitMatrix& L, const Market& market, const Eigen::VectorXd& p, bool want_full_gamma) {
    const double invS = 1.0 / static_cast<double>(L.L.rows());
    DemandEval e;
    e.price = p;
    e.V = L.L.cwiseProduct(L.D);
    e.P = invS * L.L.colwise().sum().transpose();
    e.lambda = invS * e.V.colwise().sum().transpose();
    e.dead.resize(static_cast<std::size_t>(market.J()));
    for (int j = 0; j < market.J(); ++j) {
        e.dead[static_cast<std::size_t>(j)] = e.P[j] == 0.0;
        if (e.P[j] > 0.0 && e.lambda[j] == 0.0)
            throw std::domain_error("product " + std::to_string(j + 1) +
                                    " has positive demand but zero price sensitivity");
    }
    if (want_full_gamma) {
        e.gamma_full = invS * (L.L.transpose() * e.V);
        for (const auto& b : market.blocks()) {
            const auto n = static_cast<Eigen::Index>(b.products.size());
            Eigen::MatrixXd blk(n, n);
            for (Eigen::Index a = 0; a < n; ++a)
                for (Eigen::Index c = 0; c < n; ++c)
                    blk(a, c) = (*e.gamma_full)(b.products[static_cast<std::size_t>(a)], b.products[static_cast<std::size_t>(c)]);
            e.gamma_blocks.push_back(std::move(blk));
        }
    } else {
        for (const auto& b : market.blocks()) {
            const auto idx = Eigen::Map<const Eigen::VectorXi>(b.products.data(), static_cast<Eigen::Index>(b.products.size()));
            const Eigen::MatrixXd Lf = L.L(Eigen::all, idx);
            const Eigen::MatrixXd Vf = e.V(Eigen::all, idx);
            e.gamma_blocks.push_back(invS * (Lf.transpose() * Vf));
        }
    }
    return e;
}

Eigen::VectorXd profits(const DemandEval& eval, const Market& market, const Eigen::VectorXd& p) {
    const Eigen::VectorXd margin = p - market.costs();
    return market.ownership().transpose() * eval.P.cwiseProduct(margin);
}

Eigen::VectorXd combined_gradient(const DemandEval& eval, const Market& market, const Eigen::VectorXd& p) {
    const Eigen::VectorXd margin = p - market.costs();
    return eval.lambda.cwiseProduct(margin) - eval.gamma_tilde(market).transpose() * margin + eval.P;
}

Eigen::MatrixXd HessianParts::combined_jacobian() const { return xi + 2.0 * psi + xi_tilde.transpose(); }

Eigen::MatrixXd sample_profits(const LogitMatrix& L, const Market& market, const Eigen::VectorXd& p) {
    const Eigen::VectorXd margin = p - market.costs();
    return L.L * margin.asDiagonal() * market.ownership();
}

HessianParts hessian_parts(const LogitMatrix& L, const DemandEval& eval, const Market& market,
                           const Eigen::VectorXd& p) {
    if (!eval.gamma_full) throw std::logic_error("hessian_parts needs the full Gamma");
    const double invS = 1.0 / static_cast<double>(L.L.rows());
    const Eigen::VectorXd margin = p - market.costs();
    const Eigen::MatrixXd piL = sample_profits(L, market, p);
    // S x J: Logit profit of the firm owning each column's product.
    const Eigen::MatrixXd piL_own = piL * market.ownership().transpose();
    const Eigen::MatrixXd curv = L.E + L.D.cwiseProduct(L.D);

    HessianParts h;
    h.phi = invS * (eval.V.transpose() * eval.V);
    h.psi = invS * (eval.V.cwiseProduct(piL_own).transpose() * eval.V);
    const Eigen::MatrixXd gap = (-piL_own).rowwise() + margin.transpose();
    h.chi = 0.5 * invS * curv.cwiseProduct(L.L).cwiseProduct(gap).colwise().sum().transpose();
    h.xi = -*eval.gamma_full - margin.asDiagonal() * h.phi;
    h.xi.diagonal() += eval.lambda + h.chi;
    h.xi_tilde = mask_intra_firm(market, h.xi);
    return h;
}

std::vector<Eigen::MatrixXd> firm_hessians(const HessianParts& parts, const Market& market,
                                           const std::vector<bool>& live) {
    std::vector<Eigen::MatrixXd> out;
    for (const auto& b : market.blocks()) {
        std::vector<int> idx;
        for (int j : b.products)
            if (live.empty() || live[static_cast<std::size_t>(j)]) idx.push_back(j);
        const auto n = static_cast<Eigen::Index>(idx.size());
        Eigen::MatrixXd H(n, n);
        for (Eigen::Index a = 0; a < n; ++a)
            for (Eigen::Index c = 0; c < n; ++c) {
                const int j = idx[static_cast<std::size_t>(a)], k = idx[static_cast<std::size_t>(c)];
                H(a, c) = (parts.xi(j, k) + parts.xi(k, j)) + (parts.psi(j, k) + parts.psi(k, j));
            }
        out.push_back(std::move(H));
    }
    return out;
}

SecondOrderReport second_order_check(const std::vector<Eigen::MatrixXd>& hessians) {
    SecondOrderReport r;
    r.pass = !hessians.empty();
    for (const auto& H : hessians) {
        DefiniteStatus st;
        if (H.size() == 0 || H.isZero(0.0)) {
            st = DefiniteStatus::Degenerate;
        } else {
            Eigen::LLT<Eigen::MatrixXd> llt(-H);
            st = llt.info() == Eigen::Success ? DefiniteStatus::Pass : DefiniteStatus::Fail;
        }
        r.pass = r.pass && st == DefiniteStatus::Pass;
        r.firms.push_back(st);
    }
    return r;
}

BoundednessReport diagnostics(const DemandSystem& demand, const std::vector<Eigen::VectorXd>& probes) {
    const Market& m = demand.market();
    BoundednessReport r;
    for (const auto& p : probes) {
        const auto L = demand.logit(p);
        const auto e = demand_eval(L, m, p);
        const Eigen::MatrixXd om = e.omega_tilde(m);
        const Eigen::VectorXd margin = p - m.costs();
        Eigen::VectorXd lp = Eigen::VectorXd::Zero(m.J());
        bool any_live = false;
        for (int j = 0; j < m.J(); ++j)
            if (e.lambda[j] != 0.0) {
                lp[j] = e.P[j] / e.lambda[j];
                any_live = true;
            }
        if (!any_live) continue;
        ++r.probes;
        const Eigen::VectorXd om_margin = om * margin;
        r.max_lambda_inv_P = std::max(r.max_lambda_inv_P, lp.lpNorm<Eigen::Infinity>());
        r.max_omega_norm = std::max(r.max_omega_norm, om.cwiseAbs().rowwise().sum().maxCoeff());
        r.max_omega_markup = std::max(r.max_omega_markup, om_margin.lpNorm<Eigen::Infinity>());
        const Eigen::VectorXd zeta = om_margin - lp;
        for (int j = 0; j < m.J(); ++j)
            if (e.lambda[j] != 0.0 && margin[j] - zeta[j] <= 0.0)
                r.last_inward = std::max(r.last_inward.value_or(0.0), p.lpNorm<Eigen::Infinity>());
    }
    return r;
}

std::vector<Eigen::VectorXd> ray_probes(const Market& market, double t_max, int count) {
    std::vector<Eigen::VectorXd> out;
    for (int i = 0; i < count; ++i) {
        const double t = count > 1 ? t_max * i / (count - 1) : t_max;
        out.push_back(market.costs().array() + t);
    }
    return out;
}

namespace {
void write_matrix(std::ostream& os, const std::string& name, const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            os << name << ',' << i + 1 << ',' << j + 1 << ',' << m(i, j) << '\n';
}
}  // namespace

void write_eval_csv(std::ostream& os, const DemandEval& eval, const Market& market) {
    const auto prec = os.precision(17);
    os << "quantity,row,col,value\n";
    write_matrix(os, "price", eval.price);
    write_matrix(os, "P", eval.P);
    write_matrix(os, "lambda", eval.lambda);
    write_matrix(os, "gamma_tilde", eval.gamma_tilde(market));
    write_matrix(os, "omega_tilde", eval.omega_tilde(market));
    os.precision(prec);
}

void write_hessian_csv(std::ostream& os, const HessianParts& parts) {
    const auto prec = os.precision(17);
    os << "quantity,row,col,value\n";
    write_matrix(os, "phi", parts.phi);
    write_matrix(os, "psi", parts.psi);
    write_matrix(os, "chi", parts.chi);
    write_matrix(os, "xi", parts.xi);
    os.precision(prec);
}

}  // namespace bertrand
