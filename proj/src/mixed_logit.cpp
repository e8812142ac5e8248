#include "bertrand/mixed_logit.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace bertrand {

LinearUtility::LinearUtility(std::vector<double> signs, double outside)
    : signs_(std::move(signs)), outside_(outside) {}

std::vector<std::string> LinearUtility::coefficient_names(int K) const {
    std::vector<std::string> names{"alpha"};
    for (int k = 1; k <= K; ++k) names.push_back("beta" + std::to_string(k));
    return names;
}

double LinearUtility::non_price_utility(DrawRef draw, const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    double v = 0.0;
    for (Eigen::Index k = 0; k < x.size(); ++k) v += signs_[static_cast<std::size_t>(k)] * draw[k + 1] * x[k];
    return v;
}

LogIncomeUtility::LogIncomeUtility(double alpha) : alpha_(alpha) {
    if (!(alpha > 1.0)) throw std::invalid_argument("log-income utility needs alpha > 1");
}

std::vector<std::string> LogIncomeUtility::coefficient_names(int K) const {
    std::vector<std::string> names{"phi"};
    for (int k = 1; k <= K; ++k) names.push_back("beta" + std::to_string(k));
    names.push_back("beta0");
    return names;
}

double LogIncomeUtility::price_utility(DrawRef draw, double p) const {
    return p < draw[0] ? alpha_ * std::log(draw[0] - p) : -kInf;
}

double LogIncomeUtility::price_slope(DrawRef draw, double p) const {
    return p < draw[0] ? -alpha_ / (draw[0] - p) : 0.0;
}

double LogIncomeUtility::price_curvature(DrawRef draw, double p) const {
    if (!(p < draw[0])) return 0.0;
    const double gap = draw[0] - p;
    return -alpha_ / (gap * gap);
}

double LogIncomeUtility::non_price_utility(DrawRef draw, const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    return draw.segment(1, x.size()).dot(x);
}

double LogIncomeUtility::outside_utility(DrawRef draw) const {
    return alpha_ * std::log(draw[0]) + draw[draw.size() - 1];
}

double inverse_normal_cdf(double u) {
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double lo = 0.02425;
    if (!(u > 0.0 && u < 1.0)) throw std::domain_error("inverse_normal_cdf needs u in (0,1)");
    if (u < lo) {
        const double q = std::sqrt(-2.0 * std::log(u));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (u > 1.0 - lo) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - u));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = u - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

SampleSet sample(const std::vector<Coefficient>& coefficients, int S, std::uint64_t seed) {
    if (S <= 0) throw std::invalid_argument("sample count must be positive");
    for (const auto& c : coefficients)
        if (!(c.sd >= 0.0) || !std::isfinite(c.mean) || !std::isfinite(c.sd))
            throw std::invalid_argument("coefficient " + c.name + " has an invalid distribution");

    SampleSet out;
    out.seed = seed;
    out.draws.resize(S, static_cast<Eigen::Index>(coefficients.size()));
    for (const auto& c : coefficients) out.names.push_back(c.name);

    std::mt19937_64 gen(seed);
    for (int s = 0; s < S; ++s) {
        for (std::size_t k = 0; k < coefficients.size(); ++k) {
            const double u = uniform01(gen);
            const double z = inverse_normal_cdf(u);
            const auto& c = coefficients[k];
            const double x = c.mean + c.sd * z;
            out.draws(s, static_cast<Eigen::Index>(k)) = c.law == Law::Lognormal ? std::exp(x) : x;
        }
    }
    return out;
}

void write_samples_csv(std::ostream& os, const SampleSet& samples) {
    os << "# seed=" << samples.seed << '\n';
    for (std::size_t k = 0; k < samples.names.size(); ++k) os << (k ? "," : "") << samples.names[k];
    os << '\n';
    std::ostringstream cell;
    cell.precision(17);
    for (int s = 0; s < samples.S(); ++s) {
        for (Eigen::Index k = 0; k < samples.draws.cols(); ++k) {
            cell.str({});
            cell << samples.draws(s, k);
            os << (k ? "," : "") << cell.str();
        }
        os << '\n';
    }
}

SampleSet read_samples_csv(std::istream& is) {
    SampleSet out;
    std::string line;
    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line.rfind("# seed=", 0) == 0) {
            out.seed = std::stoull(line.substr(7));
            continue;
        }
        std::stringstream ss(line);
        std::string cell;
        if (out.names.empty()) {
            while (std::getline(ss, cell, ',')) out.names.push_back(cell);
            continue;
        }
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() != out.names.size()) throw std::runtime_error("sample CSV row has wrong width");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("sample CSV has no draws");
    out.draws.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(out.names.size()));
    for (std::size_t s = 0; s < rows.size(); ++s)
        for (std::size_t k = 0; k < out.names.size(); ++k)
            out.draws(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(k)) = rows[s][k];
    return out;
}

DrawTables tabulate(const UtilityModel& model, const SampleSet& samples, const Market& market) {
    const int S = samples.S(), J = market.J();
    DrawTables t;
    t.v.resize(S, J);
    t.theta.resize(S);
    t.varsigma.resize(S);
    for (int s = 0; s < S; ++s) {
        const auto draw = samples.draw(s);
        for (int j = 0; j < J; ++j) t.v(s, j) = model.non_price_utility(draw, market.characteristics().row(j));
        t.theta[s] = model.outside_utility(draw);
        t.varsigma[s] = model.reservation_price(draw);
    }
    return t;
}

LogitMatrix logit_eval(const UtilityModel& model, const SampleSet& samples, const DrawTables& tables,
                       const Eigen::VectorXd& p) {
    const int S = samples.S();
    const auto J = p.size();
    LogitMatrix out;
    out.L.setZero(S, J);
    out.D.setZero(S, J);
    out.E.setZero(S, J);
    out.out.setZero(S);

    Eigen::VectorXd u(J);
    std::vector<bool> live(static_cast<std::size_t>(J));
    for (int s = 0; s < S; ++s) {
        const auto draw = samples.draw(s);
        const double theta = tables.theta[s];
        const bool outside = theta > -kInf;
        double top = outside ? theta : -kInf;
        for (Eigen::Index j = 0; j < J; ++j) {
            live[static_cast<std::size_t>(j)] = p[j] < tables.varsigma[s];
            if (!live[static_cast<std::size_t>(j)]) continue;
            u[j] = model.price_utility(draw, p[j]) + tables.v(s, j);
            top = std::max(top, u[j]);
            out.D(s, j) = model.price_slope(draw, p[j]);
            out.E(s, j) = model.price_curvature(draw, p[j]);
        }
        if (top == -kInf) {
            out.dead_rows.push_back(s);
            continue;
        }
        double total = outside ? std::exp(theta - top) : 0.0;
        for (Eigen::Index j = 0; j < J; ++j) {
            if (!live[static_cast<std::size_t>(j)]) continue;
            out.L(s, j) = std::exp(u[j] - top);
            total += out.L(s, j);
        }
        out.L.row(s) /= total;
        out.out[s] = outside ? std::exp(theta - top) / total : 0.0;
    }
    return out;
}

LogitMatrix logit_eval(const UtilityModel& model, const SampleSet& samples, const Market& market,
                       const Eigen::VectorXd& p) {
    return logit_eval(model, samples, tabulate(model, samples, market), p);
}

ReservationOrder reservation_order(const UtilityModel& model, const SampleSet& samples) {
    const int S = samples.S();
    ReservationOrder r;
    Eigen::VectorXd vs(S);
    for (int s = 0; s < S; ++s) vs[s] = model.reservation_price(samples.draw(s));
    r.order.resize(static_cast<std::size_t>(S));
    std::iota(r.order.begin(), r.order.end(), 0);
    std::stable_sort(r.order.begin(), r.order.end(), [&](int a, int b) { return vs[a] < vs[b]; });
    r.sorted.resize(S);
    for (int i = 0; i < S; ++i) r.sorted[i] = vs[r.order[static_cast<std::size_t>(i)]];
    for (int i = 1; i < S; ++i) r.ties = r.ties || r.sorted[i] == r.sorted[i - 1];
    r.star_index = r.order.back();
    r.varsigma_star = r.sorted[S - 1];
    return r;
}

}  // namespace bertrand
