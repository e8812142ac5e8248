#include "bertrand/market.hpp"

#include <doctest.h>

using namespace bertrand;

namespace {

Market make(std::vector<int> owner) {
    const auto J = static_cast<Eigen::Index>(owner.size());
    return Market(std::move(owner), Eigen::VectorXd::Ones(J), Eigen::MatrixXd::Zero(J, 1));
}

}  // namespace

TEST_CASE("firm blocks list products in ascending order") {
    SUBCASE("single firm") {
        const auto b = firm_blocks(make({0, 0}));
        REQUIRE(b.size() == 1);
        CHECK(b[0].products == std::vector<int>{0, 1});
    }
    SUBCASE("interleaved owners") {
        const auto b = firm_blocks(make({0, 1, 0}));
        REQUIRE(b.size() == 2);
        CHECK(b[0].firm == 0);
        CHECK(b[0].products == std::vector<int>{0, 2});
        CHECK(b[1].products == std::vector<int>{1});
    }
    SUBCASE("one product") {
        const auto b = firm_blocks(make({0}));
        REQUIRE(b.size() == 1);
        CHECK(b[0].products == std::vector<int>{0});
    }
}

TEST_CASE("intra-firm mask") {
    CHECK(intra_firm_mask(make({0, 1})) == BoolMatrix::Identity(2, 2));
    CHECK(intra_firm_mask(make({0, 0})).all());
    const BoolMatrix m = intra_firm_mask(make({0, 1, 0}));
    BoolMatrix expect(3, 3);
    expect << true, false, true, false, true, false, true, false, true;
    CHECK(m == expect);

    Eigen::MatrixXd a = Eigen::MatrixXd::Constant(3, 3, 2.0);
    const Eigen::MatrixXd masked = mask_intra_firm(make({0, 1, 0}), a);
    CHECK(masked(0, 1) == 0.0);
    CHECK(masked(0, 2) == 2.0);
}

TEST_CASE("ownership indicator has one entry per product") {
    const Market m = make({1, 0, 1, 2});
    CHECK(m.F() == 3);
    CHECK(m.ownership().rowwise().sum().isOnes());
    CHECK(m.ownership()(2, 1) == 1.0);
    CHECK(m.same_firm(0, 2));
    CHECK_FALSE(m.same_firm(0, 1));
}

TEST_CASE("market invariants are enforced") {
    CHECK_THROWS_AS(make({}), std::invalid_argument);
    CHECK_THROWS_AS(make({0, 2}), std::invalid_argument);
    CHECK_THROWS_AS(make({-1}), std::invalid_argument);
    CHECK_THROWS_AS(Market({0}, Eigen::VectorXd::Constant(1, -1.0), Eigen::MatrixXd::Zero(1, 1)), std::invalid_argument);
    CHECK_THROWS_AS(Market({0, 0}, Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Zero(2, 1)), std::invalid_argument);
    CHECK_THROWS_AS(Market({0}, Eigen::VectorXd::Ones(1), Eigen::MatrixXd::Zero(1, 1), {"a", "b"}), std::invalid_argument);
}
