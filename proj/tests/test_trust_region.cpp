#include "bertrand/pathology.hpp"
#include "bertrand/trust_region.hpp"

#include <doctest.h>

#include <random>

using namespace bertrand;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

namespace {

struct AffineProblem {
    Mat A;
    Vec b;
    Vec residual(const Vec& x) { return A * x - b; }
    double stationarity(const Vec&, const Vec& F) { return F.lpNorm<Eigen::Infinity>(); }
    Linearization<double> linearize(const Vec&, const Vec&) {
        return {[this](const Vec& v) -> Vec { return A * v; }, {}};
    }
};

}  // namespace

TEST_CASE("a linear residual is solved in one outer iteration") {
    AffineProblem prob{Mat::Identity(4, 4), Vec::LinSpaced(4, 1.0, 4.0)};
    TrustRegionConfig<double> cfg;
    cfg.delta0 = 100.0;
    cfg.gmres_tol = 1e-12;
    cfg.stop_tol = 1e-10;
    const auto r = trust_region_solve<double>(prob, Vec::Zero(4), cfg);
    CHECK(r.status == EngineStatus::Converged);
    CHECK(r.iterations == 1);
    CHECK(r.trace.size() == 2);
    CHECK((r.x - prob.b).norm() < 1e-12);
}

TEST_CASE("a stationary start takes no iterations") {
    AffineProblem prob{Mat::Identity(2, 2), Vec::Zero(2)};
    const auto r = trust_region_solve<double>(prob, Vec::Zero(2), {});
    CHECK(r.status == EngineStatus::Converged);
    CHECK(r.iterations == 0);
    CHECK(r.trace.size() == 1);
}

TEST_CASE("hookstep trust region on the simple field") {
    SUBCASE("converges inside the contraction ball") {
        pathology::FieldProblem<double> prob;
        TrustRegionConfig<double> cfg;
        cfg.gmres_tol = 0.0;
        cfg.stop_tol = 1e-12;
        const auto r = trust_region_solve<double>(prob, Vec(Eigen::Vector3d(0.3, 0.4, 0.0)), cfg);
        CHECK(r.status == EngineStatus::Converged);
        CHECK(r.x.norm() < 1e-11);
    }
    SUBCASE("walks away from the root from radius two") {
        pathology::FieldProblem<double> prob;
        TrustRegionConfig<double> cfg;
        cfg.gmres_tol = 0.0;
        cfg.max_iter = 8;
        const auto r = trust_region_solve<double>(prob, Vec(Eigen::Vector2d(2.0, 0.0)), cfg);
        REQUIRE(prob.iterates.size() >= 6);
        for (std::size_t i = 1; i < prob.iterates.size(); ++i) CHECK(prob.iterates[i].norm() > prob.iterates[i - 1].norm());
        CHECK(r.status != EngineStatus::Converged);
    }
}

TEST_CASE("trace records one entry per outer iteration") {
    pathology::FieldProblem<double> prob;
    TrustRegionConfig<double> cfg;
    cfg.gmres_tol = 0.0;
    cfg.stop_tol = 1e-12;
    const auto r = trust_region_solve<double>(prob, Vec(Eigen::Vector2d(0.5, 0.0)), cfg);
    REQUIRE(r.status == EngineStatus::Converged);
    CHECK(r.trace.size() == static_cast<std::size_t>(r.iterations) + 1);
    for (std::size_t i = 0; i < r.trace.size(); ++i) CHECK(r.trace[i].iteration == static_cast<int>(i));
    for (std::size_t i = 1; i < r.trace.size(); ++i) {
        CHECK(r.trace[i].accepted);
        CHECK(r.trace[i].residual_norm < r.trace[i - 1].residual_norm);
        CHECK(r.trace[i].krylov_dim >= 1);
    }
}

TEST_CASE("numerical failure in the residual ends the solve") {
    struct Failing {
        Vec residual(const Vec& x) {
            if (x.norm() > 0.5) throw NumericalFailure("blown up");
            return x - Vec::Ones(x.size());
        }
        double stationarity(const Vec&, const Vec& F) { return F.norm(); }
        Linearization<double> linearize(const Vec&, const Vec&) { return {[](const Vec& v) { return v; }, {}}; }
    } prob;
    TrustRegionConfig<double> cfg;
    cfg.delta0 = 10.0;
    const auto r = trust_region_solve<double>(prob, Vec::Zero(2), cfg);
    CHECK(r.status == EngineStatus::NumericalFailure);
    CHECK(r.message == "blown up");
}

TEST_CASE("non-finite trial residuals shrink the radius") {
    struct Cliff {
        Vec residual(const Vec& x) {
            Vec F = x - Vec::Constant(x.size(), 0.2);
            if (x.norm() > 1.0) F[0] = std::numeric_limits<double>::quiet_NaN();
            return F;
        }
        double stationarity(const Vec&, const Vec& F) { return F.norm(); }
        Linearization<double> linearize(const Vec&, const Vec&) { return {[](const Vec& v) { return v; }, {}}; }
    } prob;
    TrustRegionConfig<double> cfg;
    cfg.delta0 = 50.0;
    cfg.stop_tol = 1e-10;
    const Vec x0 = Vec::Constant(2, -3.0) / std::sqrt(2.0) * 0.3;
    const auto r = trust_region_solve<double>(prob, x0, cfg);
    CHECK(r.status == EngineStatus::Converged);
}

TEST_CASE("configuration checks") {
    TrustRegionConfig<double> cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.rho = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.alpha = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.beta2 = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.delta0 = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.delta_min = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("tolerance transfer for the left-scaled system") {
    const Vec F = Eigen::Vector3d(1.0, -2.0, 0.5);
    CHECK(transfer_tolerance<double>(F, Vec::Constant(3, 7.0), 1e-4) == doctest::Approx(1e-4).epsilon(1e-14));
    std::mt19937_64 g(9);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int t = 0; t < 100; ++t) {
        Vec f(4), m(4);
        for (int i = 0; i < 4; ++i) {
            f[i] = u(g);
            m[i] = u(g);
        }
        const double d = transfer_tolerance<double>(f, m, 1e-3);
        CHECK(d <= 1e-3 * (1 + 1e-14));
        // Meeting d on M F guarantees the unscaled inexact Newton condition for any residual r.
        Vec r(4);
        for (int i = 0; i < 4; ++i) r[i] = u(g);
        r *= d * m.cwiseProduct(f).norm() / m.cwiseProduct(r).norm();
        CHECK(r.norm() <= 1e-3 * f.norm() * (1 + 1e-12));
    }
}
