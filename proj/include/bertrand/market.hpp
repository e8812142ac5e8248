#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace bertrand {

using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Products of a firm, in ascending product order.
struct FirmBlock {
    int firm = 0;
    std::vector<int> products;
};

/// Products, owners, unit costs and non-price characteristics.
///
/// Indices are 0-based. Firms are numbered 0..F-1 and each owns at least one product.
class Market {
public:
    Market(std::vector<int> owner, Eigen::VectorXd costs, Eigen::MatrixXd characteristics,
           std::vector<std::string> labels = {});

    int J() const { return static_cast<int>(owner_.size()); }
    int F() const { return static_cast<int>(blocks_.size()); }
    int K() const { return static_cast<int>(characteristics_.cols()); }

    int owner(int j) const { return owner_[static_cast<std::size_t>(j)]; }
    const std::vector<int>& owners() const { return owner_; }
    const Eigen::VectorXd& costs() const { return costs_; }
    const Eigen::MatrixXd& characteristics() const { return characteristics_; }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::vector<FirmBlock>& blocks() const { return blocks_; }
    const BoolMatrix& mask() const { return mask_; }

    /// J x F indicator, entry (j,f) = 1 iff firm f owns product j.
    const Eigen::MatrixXd& ownership() const { return ownership_; }

    bool same_firm(int j, int k) const { return owner(j) == owner(k); }

private:
    std::vector<int> owner_;
    Eigen::VectorXd costs_;
    Eigen::MatrixXd characteristics_;
    std::vector<std::string> labels_;
    std::vector<FirmBlock> blocks_;
    BoolMatrix mask_;
    Eigen::MatrixXd ownership_;
};

std::vector<FirmBlock> firm_blocks(const Market& market);

BoolMatrix intra_firm_mask(const Market& market);

/// Zeroes entries of `m` that couple products of different firms.
Eigen::MatrixXd mask_intra_firm(const Market& market, const Eigen::MatrixXd& m);

}  // namespace bertrand
