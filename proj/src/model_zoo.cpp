#include "bertrand/model_zoo.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace bertrand {

std::shared_ptr<const DemandSystem> Scenario::demand(int S, std::uint64_t seed) const {
    SampleSet samples = fixed_draws ? *fixed_draws : sample(coefficients, S, seed);
    return std::make_shared<const DemandSystem>(market, model, std::move(samples));
}

double blp_income_logmean(IncomeLogMean choice) {
    return choice == IncomeLogMean::Table ? 10.0 : 10.0 - 3.0 * std::log(10.0);
}

std::vector<Coefficient> boyd80_coefficients() {
    return {{"alpha", Law::Lognormal, -7.96, 1.18},
            {"beta1", Law::Lognormal, 0.589, 0.622},
            {"beta2", Law::Lognormal, -1.75, 1.34},
            {"beta3", Law::Lognormal, -1.28, 0.001}};
}

std::vector<Coefficient> blp95_coefficients(IncomeLogMean choice) {
    return {{"phi", Law::Lognormal, blp_income_logmean(choice), 1.0},
            {"beta1", Law::Normal, -0.122, 1.05},
            {"beta2", Law::Normal, 3.460, 2.056},
            {"beta3", Law::Normal, 2.883, 4.628},
            {"beta0", Law::Normal, -8.582, 1.794}};
}

ModelDraws boyd80(int S, std::uint64_t seed, const Market& products) {
    if (products.K() != 3) throw std::invalid_argument("boyd80 needs three characteristics");
    return {std::make_shared<const LinearUtility>(std::vector<double>{1.0, 1.0, -1.0}), sample(boyd80_coefficients(), S, seed)};
}

ModelDraws blp95(int S, std::uint64_t seed, const Market& products, IncomeLogMean choice) {
    if (products.K() != 3) throw std::invalid_argument("blp95 needs three characteristics");
    return {std::make_shared<const LogIncomeUtility>(kBlpAlpha), sample(blp95_coefficients(choice), S, seed)};
}

Market synthetic_products(int J, int F, const ProductBox& box, std::uint64_t seed) {
    if (J <= 0 || F <= 0 || F > J) throw std::invalid_argument("need 0 < F <= J");
    std::mt19937_64 gen(seed);
    const auto K = static_cast<Eigen::Index>(box.characteristics.size());
    Eigen::MatrixXd x(J, K);
    Eigen::VectorXd c(J);
    std::vector<int> owner(static_cast<std::size_t>(J));
    std::vector<std::string> labels;
    for (int j = 0; j < J; ++j) {
        for (Eigen::Index k = 0; k < K; ++k) {
            const auto [lo, hi] = box.characteristics[static_cast<std::size_t>(k)];
            x(j, k) = lo + (hi - lo) * uniform01(gen);
        }
        c[j] = box.cost.first + (box.cost.second - box.cost.first) * uniform01(gen);
        owner[static_cast<std::size_t>(j)] = j % F;
        labels.push_back("product" + std::to_string(j + 1));
    }
    return Market(std::move(owner), std::move(c), std::move(x), std::move(labels));
}

ProductBox blp_desk_box() { return {{{1.0, 3.0}, {0.3, 0.6}, {1.0, 1.6}}, {5.0, 20.0}}; }

ProductBox boyd_desk_box() { return {{{1.0, 2.0}, {0.5, 1.5}, {2.0, 4.0}}, {4000.0, 9000.0}}; }

Scenario boyd80_scenario(int J, int F, int S, std::uint64_t market_seed) {
    Market m = synthetic_products(J, F, boyd_desk_box(), market_seed);
    auto md = boyd80(1, 1, m);
    Scenario sc{"boyd80", "Linear utility, lognormal coefficients, no outside good (1980 USD)", std::move(m), md.model,
                boyd80_coefficients(), std::nullopt, S, 1, {}};
    return sc;
}

Scenario blp95_scenario(int J, int F, int S, std::uint64_t market_seed, IncomeLogMean choice) {
    Market m = synthetic_products(J, F, blp_desk_box(), market_seed);
    auto md = blp95(1, 1, m, choice);
    Scenario sc{"blp95", "Log-income utility, lognormal income, normal tastes (thousands of 1983 USD)", std::move(m),
                md.model, blp95_coefficients(choice), std::nullopt, S, 1, {}};
    sc.metadata["fuel_price"] = kBlpFuelPrice;
    sc.metadata["init_box_high"] = kBlpInitBoxHigh;
    sc.metadata["income_logmean"] = blp_income_logmean(choice);
    return sc;
}

Scenario logit_monopoly_convexam(double alpha, const std::vector<double>& v, double theta, const std::vector<double>& costs) {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    if (v.empty() || v.size() != costs.size()) throw std::invalid_argument("need one cost per product");
    const auto J = static_cast<Eigen::Index>(v.size());
    Eigen::MatrixXd x(J, 1);
    Eigen::VectorXd c(J);
    for (Eigen::Index j = 0; j < J; ++j) {
        x(j, 0) = v[static_cast<std::size_t>(j)];
        c[j] = costs[static_cast<std::size_t>(j)];
    }
    SampleSet draws;
    draws.draws.resize(1, 2);
    draws.draws << alpha, 1.0;
    draws.names = {"alpha", "beta1"};
    Scenario sc{"convexam", "Single-draw Logit monopoly", Market(std::vector<int>(v.size(), 0), c, x),
                std::make_shared<const LinearUtility>(std::vector<double>{1.0}, theta), {}, draws, 1, 1, {}};
    sc.metadata["alpha"] = alpha;
    sc.metadata["theta"] = theta;
    return sc;
}

Scenario blp_vi_example(double varsigma, double c, double v1, double v2, double alpha, double theta) {
    Eigen::MatrixXd x(2, 1);
    x << v1, v2;
    SampleSet draws;
    draws.draws.resize(1, 3);
    draws.draws << varsigma, 1.0, theta - alpha * std::log(varsigma);
    draws.names = {"phi", "beta1", "beta0"};
    Scenario sc{"viexample", "Two-product monopoly with a finite reservation price",
                Market({0, 0}, Eigen::Vector2d(c, c), x), std::make_shared<const LogIncomeUtility>(alpha), {}, draws,
                1, 1, {}};
    sc.metadata["varsigma"] = varsigma;
    return sc;
}

namespace {

struct PresetEntry {
    std::string name;
    std::string description;
    Scenario (*build)();
};

const std::vector<PresetEntry>& presets() {
    static const std::vector<PresetEntry> t{
        {"boyd80", "10 synthetic products, 3 firms, linear utility with Boyd-Mellman coefficients",
         [] { return boyd80_scenario(); }},
        {"blp95", "10 synthetic products, 3 firms, log-income utility with BLP coefficients, S=500",
         [] { return blp95_scenario(); }},
        {"convexam-strong-outside", "two-product Logit monopoly whose eta iteration converges",
         [] { return logit_monopoly_convexam(1.0, {0.0, 0.5}, 1.0, {1.0, 1.0}); }},
        {"convexam-weak-outside", "two-product Logit monopoly whose eta iteration is locally divergent",
         [] { return logit_monopoly_convexam(1.0, {0.0, 0.5}, -4.0, {1.0, 1.0}); }},
        {"convexam-single", "single-product Logit monopoly",
         [] { return logit_monopoly_convexam(1.0, {0.0}, 0.0, {1.0}); }},
        {"viexample", "two-product log-income monopoly, varsigma=10, c=1, alpha=2",
         [] { return blp_vi_example(); }},
    };
    return t;
}

}  // namespace

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& p : presets()) n.push_back(p.name);
        return n;
    }();
    return names;
}

std::string preset_description(const std::string& name) {
    for (const auto& p : presets())
        if (p.name == name) return p.description;
    throw std::invalid_argument("unknown preset '" + name + "'");
}

Scenario preset(const std::string& name) {
    for (const auto& p : presets())
        if (p.name == name) {
            Scenario sc = p.build();
            sc.name = name;
            return sc;
        }
    throw std::invalid_argument("unknown preset '" + name + "'");
}

}  // namespace bertrand
