#pragma once

#include <Eigen/Dense>
#include <vector>

namespace gscp {

using FactorMatrix = Eigen::MatrixXd;

// Dense N-way tensor. Entries are linearized first-index-fastest, i.e. the
// generalization of column-major storage; all unfolding/Khatri-Rao identities
// in this library assume that order.
class DenseTensor {
public:
  DenseTensor() = default;
  explicit DenseTensor(std::vector<Eigen::Index> shape);

  const std::vector<Eigen::Index>& shape() const { return shape_; }
  int order() const { return static_cast<int>(shape_.size()); }
  Eigen::Index dim(int mode) const { return shape_.at(mode); }
  Eigen::Index size() const { return data_.size(); }

  Eigen::VectorXd& vec() { return data_; }
  const Eigen::VectorXd& vec() const { return data_; }

  double& at(const std::vector<Eigen::Index>& idx) { return data_[linear_index(idx)]; }
  double at(const std::vector<Eigen::Index>& idx) const { return data_[linear_index(idx)]; }

  Eigen::Index linear_index(const std::vector<Eigen::Index>& idx) const;

  double norm() const { return data_.norm(); }

private:
  std::vector<Eigen::Index> shape_;
  Eigen::VectorXd data_;
};

// Ordered list of factor matrices, one per mode, all with the same column count.
struct FactorSet {
  std::vector<FactorMatrix> factors;

  int order() const { return static_cast<int>(factors.size()); }
  Eigen::Index rank() const { return factors.empty() ? 0 : factors.front().cols(); }
  std::vector<Eigen::Index> shape() const;
};

// Mode-n unfolding: element (i_0,..,i_{N-1}) lands at row i_mode and the column
// obtained by linearizing the remaining indices in ascending mode order.
Eigen::MatrixXd unfold(const DenseTensor& t, int mode);

// Inverse of unfold for the same mode and shape.
DenseTensor fold(const Eigen::MatrixXd& m, int mode, const std::vector<Eigen::Index>& shape);

// Columnwise Kronecker product; the second argument's index runs fastest.
Eigen::MatrixXd khatri_rao(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// Khatri-Rao product of all factors except `mode`, folded in descending mode
// order, so that unfold(reconstruct(fs), mode) == fs.factors[mode] * D^T.
Eigen::MatrixXd kr_complement(const FactorSet& fs, int mode);

// Sum of rank-one components described by fs.
DenseTensor reconstruct(const FactorSet& fs);

// f = 1/2 ||t - reconstruct(fs)||^2.
double objective_smooth(const DenseTensor& t, const FactorSet& fs);

// Gradient of f with respect to column j of factor `mode`, along with the
// curvature weight d_j^T d_j used as that column's Lipschitz constant.
// x_unf must be unfold(t, mode) and d must be kr_complement(fs, mode).
std::pair<Eigen::VectorXd, double> column_gradient(const Eigen::MatrixXd& x_unf,
                                                   const FactorSet& fs, int mode,
                                                   Eigen::Index col,
                                                   const Eigen::MatrixXd& d);

}  // namespace gscp
