#include "bertrand/market.hpp"

#include <stdexcept>

namespace bertrand {

Market::Market(std::vector<int> owner, Eigen::VectorXd costs, Eigen::MatrixXd characteristics,
               std::vector<std::string> labels)
    : owner_(std::move(owner)),
      costs_(std::move(costs)),
      characteristics_(std::move(characteristics)),
      labels_(std::move(labels)) {
    const int J = static_cast<int>(owner_.size());
    if (J == 0) throw std::invalid_argument("market has no products");
    if (costs_.size() != J) throw std::invalid_argument("cost vector length differs from product count");
    if (characteristics_.rows() != J)
        throw std::invalid_argument("characteristics row count differs from product count");
    if (!labels_.empty() && static_cast<int>(labels_.size()) != J)
        throw std::invalid_argument("label count differs from product count");
    if (!costs_.allFinite() || (costs_.array() < 0.0).any())
        throw std::invalid_argument("costs must be finite and non-negative");
    if (!characteristics_.allFinite()) throw std::invalid_argument("characteristics must be finite");

    int F = 0;
    for (int f : owner_) {
        if (f < 0) throw std::invalid_argument("negative firm index");
        F = std::max(F, f + 1);
    }
    blocks_.resize(static_cast<std::size_t>(F));
    for (int f = 0; f < F; ++f) blocks_[static_cast<std::size_t>(f)].firm = f;
    for (int j = 0; j < J; ++j) blocks_[static_cast<std::size_t>(owner_[static_cast<std::size_t>(j)])].products.push_back(j);
    for (const auto& b : blocks_)
        if (b.products.empty())
            throw std::invalid_argument("firm " + std::to_string(b.firm + 1) + " owns no products");

    mask_.resize(J, J);
    ownership_ = Eigen::MatrixXd::Zero(J, F);
    for (int j = 0; j < J; ++j) {
        ownership_(j, owner_[static_cast<std::size_t>(j)]) = 1.0;
        for (int k = 0; k < J; ++k) mask_(j, k) = owner_[static_cast<std::size_t>(j)] == owner_[static_cast<std::size_t>(k)];
    }
}

std::vector<FirmBlock> firm_blocks(const Market& market) { return market.blocks(); }

BoolMatrix intra_firm_mask(const Market& market) { return market.mask(); }

Eigen::MatrixXd mask_intra_firm(const Market& market, const Eigen::MatrixXd& m) {
    return market.mask().select(m, Eigen::MatrixXd::Zero(m.rows(), m.cols()));
}

}  // namespace bertrand
