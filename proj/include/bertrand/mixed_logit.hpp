#pragma once

#include "bertrand/market.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace bertrand {

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using DrawRef = Eigen::Ref<const Eigen::RowVectorXd>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Consumer utility u_j = w(theta, p_j) + v_j(theta) against an outside option.
///
/// A draw is one row of model-specific coefficients.
class UtilityModel {
public:
    virtual ~UtilityModel() = default;

    virtual std::string name() const = 0;
    /// Column names of a draw for K product characteristics.
    virtual std::vector<std::string> coefficient_names(int K) const = 0;

    /// w(theta, p); -inf at or above the reservation price.
    virtual double price_utility(DrawRef draw, double p) const = 0;
    /// Dw(theta, p); zero at or above the reservation price.
    virtual double price_slope(DrawRef draw, double p) const = 0;
    /// D^2 w(theta, p); zero at or above the reservation price.
    virtual double price_curvature(DrawRef draw, double p) const = 0;
    virtual double non_price_utility(DrawRef draw, const Eigen::Ref<const Eigen::RowVectorXd>& x) const = 0;
    /// Outside-good utility; -inf when there is no outside good.
    virtual double outside_utility(DrawRef draw) const = 0;
    virtual double reservation_price(DrawRef draw) const = 0;
    virtual bool has_outside_good() const = 0;
    virtual bool finite_reservation() const = 0;
};

/// u = -alpha p + sum_k sign_k beta_k x_k, draw = [alpha, beta_1..beta_K].
class LinearUtility final : public UtilityModel {
public:
    explicit LinearUtility(std::vector<double> signs, double outside = -kInf);

    std::string name() const override { return "linear"; }
    std::vector<std::string> coefficient_names(int K) const override;
    double price_utility(DrawRef draw, double p) const override { return -draw[0] * p; }
    double price_slope(DrawRef draw, double) const override { return -draw[0]; }
    double price_curvature(DrawRef, double) const override { return 0.0; }
    double non_price_utility(DrawRef draw, const Eigen::Ref<const Eigen::RowVectorXd>& x) const override;
    double outside_utility(DrawRef) const override { return outside_; }
    double reservation_price(DrawRef) const override { return kInf; }
    bool has_outside_good() const override { return outside_ > -kInf; }
    bool finite_reservation() const override { return false; }

    const std::vector<double>& signs() const { return signs_; }
    double outside() const { return outside_; }

private:
    std::vector<double> signs_;
    double outside_;
};

/// u = alpha log(phi - p) + beta' x, outside alpha log(phi) + beta_0.
/// draw = [phi, beta_1..beta_K, beta_0].
class LogIncomeUtility final : public UtilityModel {
public:
    explicit LogIncomeUtility(double alpha);

    std::string name() const override { return "log-income"; }
    std::vector<std::string> coefficient_names(int K) const override;
    double price_utility(DrawRef draw, double p) const override;
    double price_slope(DrawRef draw, double p) const override;
    double price_curvature(DrawRef draw, double p) const override;
    double non_price_utility(DrawRef draw, const Eigen::Ref<const Eigen::RowVectorXd>& x) const override;
    double outside_utility(DrawRef draw) const override;
    double reservation_price(DrawRef draw) const override { return draw[0]; }
    bool has_outside_good() const override { return true; }
    bool finite_reservation() const override { return true; }

    double alpha() const { return alpha_; }

private:
    double alpha_;
};

enum class Law { Normal, Lognormal };

/// One independently drawn coefficient. For lognormal laws mean/sd are log-scale.
struct Coefficient {
    std::string name;
    Law law = Law::Normal;
    double mean = 0.0;
    double sd = 0.0;
};

struct SampleSet {
    RowMatrixXd draws;  // S x dim
    std::vector<std::string> names;
    std::uint64_t seed = 0;

    int S() const { return static_cast<int>(draws.rows()); }
    Eigen::Map<const Eigen::RowVectorXd> draw(int s) const {
        return {draws.row(s).data(), draws.cols()};
    }
};

/// Uniform draw on (0,1) from the top 53 bits of the generator.
inline double uniform01(std::mt19937_64& gen) { return (static_cast<double>(gen() >> 11) + 0.5) * 0x1.0p-53; }

/// Inverse of the standard normal CDF (Acklam's rational approximation, |rel err| < 1.2e-9).
double inverse_normal_cdf(double u);

/// Deterministic sampler: mt19937_64 uniforms mapped through the inverse normal CDF,
/// drawn draw-major then coefficient-major.
SampleSet sample(const std::vector<Coefficient>& coefficients, int S, std::uint64_t seed);

void write_samples_csv(std::ostream& os, const SampleSet& samples);
SampleSet read_samples_csv(std::istream& is);

struct LogitMatrix {
    Eigen::MatrixXd L;    // S x J choice probabilities
    Eigen::VectorXd out;  // S outside-good probabilities
    Eigen::MatrixXd D;    // S x J Dw, zero where p_j >= reservation price
    Eigen::MatrixXd E;    // S x J D^2 w, zero where p_j >= reservation price
    std::vector<int> dead_rows;  // draws with no live alternative at all
};

/// Non-price utilities, outside utilities and reservation prices for each draw.
struct DrawTables {
    Eigen::MatrixXd v;       // S x J
    Eigen::VectorXd theta;   // S
    Eigen::VectorXd varsigma;  // S
};

DrawTables tabulate(const UtilityModel& model, const SampleSet& samples, const Market& market);

LogitMatrix logit_eval(const UtilityModel& model, const SampleSet& samples, const DrawTables& tables,
                       const Eigen::VectorXd& p);
LogitMatrix logit_eval(const UtilityModel& model, const SampleSet& samples, const Market& market,
                       const Eigen::VectorXd& p);

struct ReservationOrder {
    Eigen::VectorXd sorted;  // ascending
    std::vector<int> order;  // draw indices, ties by index
    double varsigma_star = 0.0;
    int star_index = 0;
    bool ties = false;
};

ReservationOrder reservation_order(const UtilityModel& model, const SampleSet& samples);

}  // namespace bertrand
