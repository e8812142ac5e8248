#include "bertrand/scenario_io.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bertrand {

using nlohmann::json;

namespace {

Law parse_law(const std::string& s) {
    if (s == "normal") return Law::Normal;
    if (s == "lognormal") return Law::Lognormal;
    throw std::invalid_argument("unknown law '" + s + "'");
}

std::shared_ptr<const UtilityModel> parse_model(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "linear") {
        const double outside = j.contains("outside_utility") && !j["outside_utility"].is_null()
                                   ? j["outside_utility"].get<double>()
                                   : -kInf;
        return std::make_shared<const LinearUtility>(j.at("signs").get<std::vector<double>>(), outside);
    }
    if (type == "log-income") return std::make_shared<const LogIncomeUtility>(j.at("alpha").get<double>());
    throw std::invalid_argument("unknown model type '" + type + "' (valid: linear, log-income)");
}

json model_json(const UtilityModel& model) {
    if (const auto* lin = dynamic_cast<const LinearUtility*>(&model)) {
        json j{{"type", "linear"}, {"signs", lin->signs()}};
        j["outside_utility"] = lin->has_outside_good() ? json(lin->outside()) : json(nullptr);
        return j;
    }
    if (const auto* li = dynamic_cast<const LogIncomeUtility*>(&model))
        return {{"type", "log-income"}, {"alpha", li->alpha()}};
    throw std::invalid_argument("model cannot be serialized");
}

}  // namespace

Scenario scenario_from_json_text(const std::string& text) {
    const json doc = json::parse(text);
    const auto& prods = doc.at("products");
    if (!prods.is_array() || prods.empty()) throw std::invalid_argument("scenario needs a non-empty products list");
    const auto J = static_cast<Eigen::Index>(prods.size());
    const auto K = static_cast<Eigen::Index>(prods[0].at("characteristics").size());
    std::vector<int> owner;
    std::vector<std::string> labels;
    Eigen::VectorXd c(J);
    Eigen::MatrixXd x(J, K);
    for (Eigen::Index j = 0; j < J; ++j) {
        const auto& p = prods[static_cast<std::size_t>(j)];
        const int firm = p.at("firm").get<int>();
        if (firm < 1) throw std::invalid_argument("firm indices start at 1");
        owner.push_back(firm - 1);
        labels.push_back(p.value("name", "product" + std::to_string(j + 1)));
        c[j] = p.at("cost").get<double>();
        const auto xs = p.at("characteristics").get<std::vector<double>>();
        if (static_cast<Eigen::Index>(xs.size()) != K)
            throw std::invalid_argument("products disagree on the number of characteristics");
        for (Eigen::Index k = 0; k < K; ++k) x(j, k) = xs[static_cast<std::size_t>(k)];
    }
    Market market(std::move(owner), c, x, std::move(labels));
    auto model = parse_model(doc.at("model"));
    if (const auto* lin = dynamic_cast<const LinearUtility*>(model.get()))
        if (static_cast<Eigen::Index>(lin->signs().size()) != K)
            throw std::invalid_argument("linear model needs one sign per characteristic");

    Scenario sc{doc.value("name", "scenario"), doc.value("description", ""), std::move(market), model, {}, std::nullopt,
                doc.value("S", 1), doc.value("seed", std::uint64_t{1}), {}};
    if (doc.contains("coefficients")) {
        for (const auto& cj : doc["coefficients"])
            sc.coefficients.push_back({cj.at("name").get<std::string>(), parse_law(cj.value("law", "normal")),
                                       cj.at("mean").get<double>(), cj.at("sd").get<double>()});
        if (sc.coefficients.size() != model->coefficient_names(static_cast<int>(K)).size())
            throw std::invalid_argument("coefficient count does not match the model");
    }
    if (doc.contains("draws")) {
        SampleSet s;
        const auto rows = doc["draws"].get<std::vector<std::vector<double>>>();
        s.names = model->coefficient_names(static_cast<int>(K));
        s.draws.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(s.names.size()));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r].size() != s.names.size()) throw std::invalid_argument("draw width does not match the model");
            for (std::size_t k = 0; k < rows[r].size(); ++k)
                s.draws(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = rows[r][k];
        }
        sc.fixed_draws = std::move(s);
    }
    if (sc.coefficients.empty() && !sc.fixed_draws)
        throw std::invalid_argument("scenario needs either coefficients or draws");
    if (doc.contains("metadata"))
        for (const auto& [k, v] : doc["metadata"].items()) sc.metadata[k] = v.get<double>();
    return sc;
}

std::string scenario_to_json_text(const Scenario& sc) {
    json doc;
    doc["name"] = sc.name;
    doc["description"] = sc.description;
    doc["model"] = model_json(*sc.model);
    doc["S"] = sc.default_S;
    doc["seed"] = sc.default_seed;
    const Market& m = sc.market;
    json prods = json::array();
    for (int j = 0; j < m.J(); ++j) {
        std::vector<double> xs(static_cast<std::size_t>(m.K()));
        for (int k = 0; k < m.K(); ++k) xs[static_cast<std::size_t>(k)] = m.characteristics()(j, k);
        prods.push_back({{"name", m.labels().empty() ? "product" + std::to_string(j + 1) : m.labels()[static_cast<std::size_t>(j)]},
                         {"firm", m.owner(j) + 1},
                         {"cost", m.costs()[j]},
                         {"characteristics", xs}});
    }
    doc["products"] = prods;
    if (!sc.coefficients.empty()) {
        json cs = json::array();
        for (const auto& c : sc.coefficients)
            cs.push_back({{"name", c.name}, {"law", c.law == Law::Lognormal ? "lognormal" : "normal"}, {"mean", c.mean}, {"sd", c.sd}});
        doc["coefficients"] = cs;
    }
    if (sc.fixed_draws) {
        json rows = json::array();
        for (int s = 0; s < sc.fixed_draws->S(); ++s) {
            std::vector<double> r(static_cast<std::size_t>(sc.fixed_draws->draws.cols()));
            for (Eigen::Index k = 0; k < sc.fixed_draws->draws.cols(); ++k) r[static_cast<std::size_t>(k)] = sc.fixed_draws->draws(s, k);
            rows.push_back(r);
        }
        doc["draws"] = rows;
    }
    if (!sc.metadata.empty()) doc["metadata"] = sc.metadata;
    return doc.dump(2);
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open scenario file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return scenario_from_json_text(ss.str());
}

Scenario resolve_scenario(const std::string& name_or_path) {
    for (const auto& n : preset_names())
        if (n == name_or_path) return preset(n);
    if (std::filesystem::exists(name_or_path)) return load_scenario(name_or_path);
    std::string valid;
    for (const auto& n : preset_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw std::invalid_argument("'" + name_or_path + "' is neither a preset (" + valid + ") nor a readable file");
}

ValidationReport validate_scenario(const std::string& name_or_path) {
    ValidationReport r;
    std::optional<Scenario> sc;
    try {
        sc = resolve_scenario(name_or_path);
    } catch (const std::exception& e) {
        r.errors.push_back(e.what());
        return r;
    }
    std::shared_ptr<const DemandSystem> demand;
    try {
        demand = sc->demand(std::min(sc->default_S, 200), sc->default_seed);
    } catch (const std::exception& e) {
        r.errors.push_back(e.what());
        return r;
    }
    const Market& m = sc->market;
    const double span = std::max(1.0, m.costs().maxCoeff());
    const double t_max = std::isfinite(demand->varsigma_star()) ? demand->varsigma_star() : 100.0 * span;
    r.bounds = diagnostics(*demand, ray_probes(m, t_max, 41));
    if (!demand->model().has_outside_good())
        r.warnings.push_back("no outside good: markups are unbounded as prices grow (sup ||Lambda^-1 P||_inf = " +
                             std::to_string(r.bounds.max_lambda_inv_P) + " on the probe grid)");
    else if (r.bounds.max_omega_norm >= 1.0)
        r.errors.push_back("||Omega~||_inf >= 1 with an outside good");
    if (r.bounds.last_inward)
        r.warnings.push_back("zeta map points inward up to probe price " + std::to_string(*r.bounds.last_inward));
    return r;
}

}  // namespace bertrand
