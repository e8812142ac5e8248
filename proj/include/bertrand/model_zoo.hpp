#pragma once

#include "bertrand/demand.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace bertrand {

/// A market plus the consumer population that prices it.
///
/// Draws come either from `coefficients` (resampled per S and seed) or are fixed.
struct Scenario {
    std::string name;
    std::string description;
    Market market;
    std::shared_ptr<const UtilityModel> model;
    std::vector<Coefficient> coefficients;
    std::optional<SampleSet> fixed_draws;
    int default_S = 1;
    std::uint64_t default_seed = 1;
    std::map<std::string, double> metadata;

    std::shared_ptr<const DemandSystem> demand(int S, std::uint64_t seed) const;
    std::shared_ptr<const DemandSystem> demand() const { return demand(default_S, default_seed); }
};

struct ModelDraws {
    std::shared_ptr<const UtilityModel> model;
    SampleSet samples;
};

enum class IncomeLogMean { Prose, Table };

/// Log-mean of the income distribution: 10 - 3 log 10 by default, 10 on request.
double blp_income_logmean(IncomeLogMean choice);

std::vector<Coefficient> boyd80_coefficients();
std::vector<Coefficient> blp95_coefficients(IncomeLogMean choice = IncomeLogMean::Prose);

inline constexpr double kBlpAlpha = 43.501;
inline constexpr double kBlpFuelPrice = 1.27;
inline constexpr double kBlpInitBoxHigh = 19.0;

/// Linear utility with signs (+, +, -) on (size, acceleration, fuel consumption) and no outside good.
ModelDraws boyd80(int S, std::uint64_t seed, const Market& products);
ModelDraws blp95(int S, std::uint64_t seed, const Market& products, IncomeLogMean choice = IncomeLogMean::Prose);

struct ProductBox {
    std::vector<std::pair<double, double>> characteristics;
    std::pair<double, double> cost;
};

/// J products assigned to F firms round-robin, characteristics and costs uniform in the box.
Market synthetic_products(int J, int F, const ProductBox& box, std::uint64_t seed);

ProductBox blp_desk_box();
ProductBox boyd_desk_box();

Scenario boyd80_scenario(int J = 10, int F = 3, int S = 500, std::uint64_t market_seed = 1980);
Scenario blp95_scenario(int J = 10, int F = 3, int S = 500, std::uint64_t market_seed = 1995,
                        IncomeLogMean choice = IncomeLogMean::Prose);

/// Single-draw Logit monopoly with u_j = -alpha p_j + v_j and outside utility theta.
Scenario logit_monopoly_convexam(double alpha, const std::vector<double>& v, double theta,
                                 const std::vector<double>& costs);

/// Two-product monopoly with u_j = alpha log(varsigma - p_j) + v_j and outside utility theta.
Scenario blp_vi_example(double varsigma = 10.0, double c = 1.0, double v1 = 0.0, double v2 = 0.0, double alpha = 2.0,
                        double theta = 0.0);

const std::vector<std::string>& preset_names();
std::string preset_description(const std::string& name);
Scenario preset(const std::string& name);

}  // namespace bertrand
