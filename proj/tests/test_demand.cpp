#include "instances.hpp"

#include "bertrand/model_zoo.hpp"

#include <doctest.h>

#include <sstream>

using namespace bertrand;
using namespace testing_support;

TEST_CASE("single-product Logit derivatives") {
    auto lin = std::make_shared<LinearUtility>(std::vector<double>{1.0}, 0.0);
    RowMatrixXd d(1, 2);
    d << 2.0, 0.0;
    const auto ds = fixed_draws(lin, {0}, Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Zero(1, 1), d);
    const Eigen::VectorXd p = Eigen::VectorXd::Constant(1, 0.3);
    const auto e = demand_eval(ds->logit(p), ds->market(), p, true);
    const double P = 1.0 / (1.0 + std::exp(0.6));
    CHECK(e.P[0] == doctest::Approx(P).epsilon(1e-15));
    CHECK(e.lambda[0] == doctest::Approx(-2.0 * P).epsilon(1e-15));
    CHECK((*e.gamma_full)(0, 0) == doctest::Approx(-2.0 * P * P).epsilon(1e-15));
    CHECK(e.dP()(0, 0) == doctest::Approx(-2.0 * P * (1.0 - P)).epsilon(1e-14));
}

TEST_CASE("dead market has no demand, sensitivity or profit") {
    const Scenario sc = blp95_scenario();
    const auto ds = sc.demand(50, 3);
    const Eigen::VectorXd p = Eigen::VectorXd::Constant(ds->J(), ds->varsigma_star() + 1.0);
    const auto e = demand_eval(ds->logit(p), ds->market(), p, true);
    CHECK(e.P.isZero(0.0));
    CHECK(e.lambda.isZero(0.0));
    CHECK(e.gamma_full->isZero(0.0));
    CHECK(profits(e, ds->market(), p).isZero(0.0));
}

TEST_CASE("profits") {
    Instance inst = random_instance(4, 4, 2, 30, ModelKind::Linear);
    const Market& m = inst.market();
    const auto e = demand_eval(inst.demand->logit(m.costs()), m, m.costs());
    CHECK(profits(e, m, m.costs()).isZero(0.0));

    auto lin = std::make_shared<LinearUtility>(std::vector<double>{1.0}, 0.0);
    RowMatrixXd d(1, 2);
    d << 1.0, 1.0;
    const auto ds = fixed_draws(lin, {0}, Eigen::VectorXd::Constant(1, 1.0), Eigen::MatrixXd::Constant(1, 1, 3.0), d);
    const Eigen::VectorXd p = Eigen::VectorXd::Constant(1, 3.0);
    const auto e1 = demand_eval(ds->logit(p), ds->market(), p);
    CHECK(e1.P[0] == 0.5);
    CHECK(profits(e1, ds->market(), p)[0] == 1.0);
}

TEST_CASE("choice probability Jacobian against central differences") {
    Instance inst = random_instance(7, 3, 2, 50, ModelKind::LogIncome);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        if (seed > 1) inst = random_instance(seed);
        const Market& m = inst.market();
        const Eigen::VectorXd p = inst.price();
        const auto e = demand_eval(inst.demand->logit(p), m, p, true);
        auto P = [&](const Eigen::VectorXd& q) { return demand_eval(inst.demand->logit(q), m, q).P; };
        const Eigen::MatrixXd fd = central_jacobian(P, p);
        CAPTURE(seed);
        CHECK(relative_error(e.dP(), fd) < 1e-6);
        Eigen::MatrixXd masked = -e.gamma_tilde(m);
        masked.diagonal() += e.lambda;
        CHECK(relative_error(masked, mask_intra_firm(m, fd)) < 1e-6);
    }
}

TEST_CASE("combined gradient against differences of firm profits") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Instance inst = random_instance(seed);
        const Market& m = inst.market();
        const Eigen::VectorXd p = inst.price();
        const auto e = demand_eval(inst.demand->logit(p), m, p);
        const Eigen::VectorXd g = combined_gradient(e, m, p);
        auto pi = [&](const Eigen::VectorXd& q) { return profits(demand_eval(inst.demand->logit(q), m, q), m, q); };
        const Eigen::MatrixXd fd = central_jacobian(pi, p);
        Eigen::VectorXd own(m.J());
        for (int j = 0; j < m.J(); ++j) own[j] = fd(m.owner(j), j);
        CAPTURE(seed);
        CHECK(relative_error(g, own) < 1e-6);
    }
}

TEST_CASE("combined gradient at cost equals demand") {
    Instance inst = random_instance(12);
    const Market& m = inst.market();
    const auto e = demand_eval(inst.demand->logit(m.costs()), m, m.costs());
    const Eigen::VectorXd g = combined_gradient(e, m, m.costs());
    CHECK(g == e.P);
    CHECK(g.minCoeff() > 0.0);
}

TEST_CASE("Hessian of the combined gradient against central differences") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Instance inst = random_instance(seed);
        const Market& m = inst.market();
        const Eigen::VectorXd p = inst.price();
        const auto L = inst.demand->logit(p);
        const auto e = demand_eval(L, m, p, true);
        const HessianParts h = hessian_parts(L, e, m, p);
        auto g = [&](const Eigen::VectorXd& q) {
            return combined_gradient(demand_eval(inst.demand->logit(q), m, q), m, q);
        };
        CAPTURE(seed);
        CHECK(relative_error(h.combined_jacobian(), central_jacobian(g, p)) < 1e-5);

        for (const auto& H : firm_hessians(h, m)) CHECK(H == H.transpose());
    }
}

TEST_CASE("Hessian pieces in special cases") {
    SUBCASE("linear utility: chi keeps only the squared slope term") {
        Instance inst = random_instance(8, 3, 2, 40, ModelKind::Linear);
        const Market& m = inst.market();
        const Eigen::VectorXd p = inst.price();
        const auto L = inst.demand->logit(p);
        const auto e = demand_eval(L, m, p, true);
        const HessianParts h = hessian_parts(L, e, m, p);
        const Eigen::MatrixXd piL = sample_profits(L, m, p);
        const auto& a = inst.demand->samples().draws;
        for (int k = 0; k < m.J(); ++k) {
            double acc = 0.0;
            for (int s = 0; s < inst.demand->S(); ++s)
                acc += a(s, 0) * a(s, 0) * L.L(s, k) * ((p[k] - m.costs()[k]) - piL(s, m.owner(k)));
            CHECK(h.chi[k] == doctest::Approx(0.5 * acc / inst.demand->S()).epsilon(1e-12));
        }
    }
    SUBCASE("symmetric monopoly gives symmetric Phi and Psi") {
        const Scenario sc = logit_monopoly_convexam(1.0, {0.3, 0.3}, 0.0, {1.0, 1.0});
        const auto ds = sc.demand();
        const Eigen::VectorXd p = Eigen::VectorXd::Constant(2, 2.0);
        const auto L = ds->logit(p);
        const auto e = demand_eval(L, ds->market(), p, true);
        const HessianParts h = hessian_parts(L, e, ds->market(), p);
        CHECK(h.phi == h.phi.transpose());
        CHECK(h.psi == h.psi.transpose());
        CHECK(h.phi(0, 0) == h.phi(1, 1));
    }
    SUBCASE("one-product firm Hessian is the scalar 2 xi + 2 psi") {
        Instance inst = random_instance(9, 3, 3, 25, ModelKind::LogIncome);
        const Market& m = inst.market();
        const Eigen::VectorXd p = inst.price();
        const auto L = inst.demand->logit(p);
        const auto e = demand_eval(L, m, p, true);
        const HessianParts h = hessian_parts(L, e, m, p);
        const auto Hs = firm_hessians(h, m);
        for (int j = 0; j < 3; ++j) {
            REQUIRE(Hs[static_cast<std::size_t>(j)].size() == 1);
            CHECK(Hs[static_cast<std::size_t>(j)](0, 0) == doctest::Approx(2.0 * h.xi(j, j) + 2.0 * h.psi(j, j)));
        }
    }
}

TEST_CASE("second-order check") {
    CHECK(second_order_check({-Eigen::MatrixXd::Identity(2, 2)}).pass);
    const Eigen::MatrixXd saddle = Eigen::Vector2d(-1.0, 1.0).asDiagonal();
    const auto r = second_order_check({-Eigen::MatrixXd::Identity(1, 1), saddle});
    CHECK_FALSE(r.pass);
    CHECK(r.firms[0] == DefiniteStatus::Pass);
    CHECK(r.firms[1] == DefiniteStatus::Fail);
    const auto z = second_order_check({Eigen::MatrixXd::Zero(2, 2)});
    CHECK_FALSE(z.pass);
    CHECK(z.firms[0] == DefiniteStatus::Degenerate);
    CHECK_FALSE(second_order_check({}).pass);
}

TEST_CASE("boundedness diagnostics") {
    SUBCASE("log-income markups stay bounded below the top income") {
        const Scenario sc = blp95_scenario();
        const auto ds = sc.demand(100, 2);
        const double top = ds->varsigma_star();
        const auto r = diagnostics(*ds, ray_probes(ds->market(), top - ds->market().costs().maxCoeff() - 1e-6, 40));
        CHECK(r.probes > 0);
        CHECK(std::isfinite(r.max_lambda_inv_P));
        CHECK(r.max_omega_norm < 1.0);
    }
    SUBCASE("linear utility without an outside good approaches the largest 1/alpha") {
        const Scenario sc = boyd80_scenario(4, 2, 5);
        const auto ds = sc.demand(5, 1);
        const double bound = (1.0 / ds->samples().draws.col(0).array()).maxCoeff();
        double last = 0.0;
        for (double t : {1e5, 1e6, 1e7}) {
            const auto r = diagnostics(*ds, {ds->market().costs().array() + t * Eigen::ArrayXd::LinSpaced(4, 1.0, 1.5)});
            last = r.max_lambda_inv_P;
        }
        CHECK(last == doctest::Approx(bound).epsilon(1e-6));
    }
    SUBCASE("Omega is a contraction with an outside good") {
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            Instance inst = random_instance(seed);
            std::vector<Eigen::VectorXd> probes;
            for (int i = 0; i < 10; ++i) probes.push_back(inst.price(0.0, 4.0));
            CHECK(diagnostics(*inst.demand, probes).max_omega_norm < 1.0);
        }
    }
}

TEST_CASE("debug CSV writers emit one row per entry") {
    Instance inst = random_instance(3, 3, 2, 20, ModelKind::Linear);
    const Eigen::VectorXd p = inst.price();
    const auto L = inst.demand->logit(p);
    const auto e = demand_eval(L, inst.market(), p, true);
    std::ostringstream a, b;
    write_eval_csv(a, e, inst.market());
    write_hessian_csv(b, hessian_parts(L, e, inst.market(), p));
    const std::string sa = a.str(), sb = b.str();
    CHECK(std::count(sa.begin(), sa.end(), '\n') == 1 + 3 * 3 + 2 * 9);
    CHECK(std::count(sb.begin(), sb.end(), '\n') == 1 + 9 + 9 + 3 + 9);
}
