#include "instances.hpp"

#include "bertrand/model_zoo.hpp"
#include "bertrand/solvers.hpp"

#include <doctest.h>

using namespace bertrand;
using namespace testing_support;

TEST_CASE("Boyd coefficients") {
    auto c = boyd80_coefficients();
    for (auto& k : c) k.sd = 0.0;
    const SampleSet s = sample(c, 1, 5);
    CHECK(s.draws(0, 0) == std::exp(-7.96));

    const Scenario sc = boyd80_scenario(5, 2, 20);
    const auto ds = sc.demand();
    CHECK_FALSE(ds->model().has_outside_good());
    CHECK(ds->samples().draws.col(0).minCoeff() > 0.0);

    // Fuel consumption enters with a negative sign.
    const Eigen::RowVectorXd draw = ds->samples().draws.row(0);
    Eigen::RowVectorXd x = sc.market.characteristics().row(0);
    const double u0 = ds->model().non_price_utility(draw, x);
    x[2] += 1.0;
    CHECK(ds->model().non_price_utility(draw, x) == doctest::Approx(u0 - draw[3]).epsilon(1e-14));
    CHECK_THROWS(boyd80(3, 1, Market({0}, Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Ones(1, 2))));
}

TEST_CASE("BLP coefficients and metadata") {
    const Scenario sc = blp95_scenario();
    CHECK(sc.metadata.at("fuel_price") == 1.27);
    CHECK(sc.metadata.at("init_box_high") == 19.0);
    CHECK(sc.metadata.at("income_logmean") == doctest::Approx(3.0922447210178623).epsilon(1e-14));
    CHECK(blp_income_logmean(IncomeLogMean::Table) == 10.0);
    CHECK(sc.model->name() != "linear");
    const auto ds = sc.demand(300, 9);
    CHECK(ds->samples().draws.col(0).minCoeff() > 0.0);
    CHECK(ds->varsigma_star() == ds->samples().draws.col(0).maxCoeff());
    CHECK(ds->model().has_outside_good());
    CHECK(sc.market.J() == 10);
    CHECK(sc.market.F() == 3);
}

TEST_CASE("rebuilding a scenario reproduces its draws bit for bit") {
    for (const auto& name : preset_names()) {
        CAPTURE(name);
        const Scenario a = preset(name), b = preset(name);
        CHECK(a.market.costs() == b.market.costs());
        CHECK(a.market.characteristics() == b.market.characteristics());
        CHECK(a.demand(40, 3)->samples().draws == b.demand(40, 3)->samples().draws);
        CHECK_FALSE(preset_description(name).empty());
    }
    CHECK_THROWS(preset("nonesuch"));
}

TEST_CASE("synthetic products") {
    const ProductBox box = blp_desk_box();
    const Market m = synthetic_products(7, 3, box, 11);
    for (int j = 0; j < 7; ++j) {
        CHECK(m.owner(j) == j % 3);
        CHECK(m.costs()[j] >= box.cost.first);
        CHECK(m.costs()[j] <= box.cost.second);
        for (int k = 0; k < 3; ++k) {
            CHECK(m.characteristics()(j, k) >= box.characteristics[static_cast<std::size_t>(k)].first);
            CHECK(m.characteristics()(j, k) <= box.characteristics[static_cast<std::size_t>(k)].second);
        }
    }
    CHECK_THROWS(synthetic_products(2, 3, box, 1));
}

TEST_CASE("Logit monopoly spectral radii") {
    // At the equilibrium of a pure Logit monopoly the eta map has spectral radius sum P / P_0.
    for (const auto& [name, converges] :
         std::vector<std::pair<std::string, bool>>{{"convexam-strong-outside", true}, {"convexam-weak-outside", false}}) {
        const auto ds = preset(name).demand();
        const SolverRun r = solve(ds, Method::ZetaFPI, ds->market().costs());
        REQUIRE(r.status == RunStatus::Converged);
        const auto e = demand_eval(ds->logit(r.p_final), ds->market(), r.p_final);
        const double inside = e.P.sum();
        const double rho = inside / (1.0 - inside);
        CAPTURE(name);
        CHECK((rho < 1.0) == converges);

        const ResidualSystem eta(ds, ResidualKind::EtaMarkup);
        const Eigen::MatrixXd Dn = Eigen::MatrixXd::Identity(2, 2) - eta.jacobian(eta.evaluate(r.p_final));
        CHECK(Dn.eigenvalues().cwiseAbs().maxCoeff() == doctest::Approx(rho).epsilon(1e-6));

        const ResidualSystem zeta(ds, ResidualKind::ZetaMarkup);
        const Eigen::MatrixXd Dz = Eigen::MatrixXd::Identity(2, 2) - zeta.jacobian(zeta.evaluate(r.p_final));
        CHECK(Dz.cwiseAbs().maxCoeff() < 1e-6);
    }
}

namespace {

double golden_max(const std::function<double(double)>& f, double a, double b) {
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    while (b - a > 1e-11) {
        const double c = b - r * (b - a), d = a + r * (b - a);
        if (f(c) > f(d)) {
            b = d;
        } else {
            a = c;
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

TEST_CASE("two-product log-income monopoly") {
    const Scenario sc = preset("viexample");
    const auto ds = sc.demand();
    const double top = ds->varsigma_star();
    CHECK(top == 10.0);

    const SolverRun eq = solve(ds, Method::ZetaFPI, ds->market().costs());
    REQUIRE(eq.status == RunStatus::Converged);
    CHECK(eq.so_pass);
    CHECK(eq.p_final.maxCoeff() < top);
    CHECK(eq.p_final[0] == doctest::Approx(eq.p_final[1]).epsilon(1e-9));

    SUBCASE("one interior critical point on the symmetric slice") {
        const ResidualSystem g(ds, ResidualKind::CombinedGradient);
        int changes = 0;
        double last = 0.0;
        const int n = 10000;
        for (int i = 1; i < n; ++i) {
            const double t = top * i / n;
            const double d = g.residual(Eigen::VectorXd::Constant(2, t)).sum();
            if (i > 1 && d * last < 0.0) ++changes;
            if (d != 0.0) last = d;
        }
        CHECK(changes == 1);
    }

    SUBCASE("single-product optima are not fixed points of the extended map") {
        for (int k = 0; k < 2; ++k) {
            auto profit = [&](double q) {
                Eigen::VectorXd p = Eigen::VectorXd::Constant(2, top);
                p[k] = q;
                return profits(demand_eval(ds->logit(p), ds->market(), p), ds->market(), p)[0];
            };
            const double q = golden_max(profit, ds->market().costs()[k], top);
            Eigen::VectorXd p = Eigen::VectorXd::Constant(2, top);
            p[k] = q;
            // The live product is at its own optimum.
            const ResidualSystem zeta(ds, ResidualKind::ZetaMarkup, {1e-10, true});
            const PointState st = zeta.evaluate(p);
            const Eigen::VectorXd res = zeta.residual(st);
            CAPTURE(k);
            CHECK(std::abs(res[k]) < 1e-6);
            CHECK(st.extended[static_cast<std::size_t>(1 - k)]);
            CHECK(res.lpNorm<Eigen::Infinity>() > 1e-3);
        }
    }
}
