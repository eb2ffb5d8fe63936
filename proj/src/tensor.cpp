#include "gscp/tensor.hpp"

#include <stdexcept>

namespace gscp {

namespace {

Eigen::Index checked_product(const std::vector<Eigen::Index>& shape) {
  Eigen::Index n = 1;
  for (Eigen::Index d : shape) {
    if (d <= 0) throw std::invalid_argument("tensor dimensions must be positive");
    n *= d;
  }
  return n;
}

}  // namespace

DenseTensor::DenseTensor(std::vector<Eigen::Index> shape) : shape_(std::move(shape)) {
  data_ = Eigen::VectorXd::Zero(checked_product(shape_));
}

Eigen::Index DenseTensor::linear_index(const std::vector<Eigen::Index>& idx) const {
  Eigen::Index lin = 0;
  Eigen::Index stride = 1;
  for (std::size_t p = 0; p < shape_.size(); ++p) {
    lin += idx[p] * stride;
    stride *= shape_[p];
  }
  return lin;
}

std::vector<Eigen::Index> FactorSet::shape() const {
  std::vector<Eigen::Index> s(factors.size());
  for (std::size_t i = 0; i < factors.size(); ++i) s[i] = factors[i].rows();
  return s;
}

Eigen::MatrixXd unfold(const DenseTensor& t, int mode) {
  const auto& shape = t.shape();
  const int n = t.order();
  if (mode < 0 || mode >= n) throw std::out_of_range("unfold: bad mode");

  Eigen::MatrixXd out(shape[mode], t.size() / shape[mode]);
  // Walk entries in storage order; the column index advances by stride_p each
  // time index p != mode increments, where stride_p is the product of the
  // dimensions of the earlier non-mode modes.
  std::vector<Eigen::Index> idx(n, 0);
  std::vector<Eigen::Index> col_stride(n, 0);
  Eigen::Index s = 1;
  for (int p = 0; p < n; ++p) {
    if (p == mode) continue;
    col_stride[p] = s;
    s *= shape[p];
  }
  Eigen::Index col = 0;
  const double* src = t.vec().data();
  for (Eigen::Index lin = 0; lin < t.size(); ++lin) {
    out(idx[mode], col) = src[lin];
    for (int p = 0; p < n; ++p) {
      if (++idx[p] < shape[p]) {
        col += col_stride[p];
        break;
      }
      idx[p] = 0;
      col -= col_stride[p] * (shape[p] - 1);
    }
  }
  return out;
}

DenseTensor fold(const Eigen::MatrixXd& m, int mode, const std::vector<Eigen::Index>& shape) {
  DenseTensor t(shape);
  const int n = t.order();
  if (mode < 0 || mode >= n) throw std::out_of_range("fold: bad mode");
  if (m.rows() != shape[mode] || m.cols() != t.size() / shape[mode])
    throw std::invalid_argument("fold: matrix does not match shape");

  std::vector<Eigen::Index> idx(n, 0);
  std::vector<Eigen::Index> col_stride(n, 0);
  Eigen::Index s = 1;
  for (int p = 0; p < n; ++p) {
    if (p == mode) continue;
    col_stride[p] = s;
    s *= shape[p];
  }
  Eigen::Index col = 0;
  double* dst = t.vec().data();
  for (Eigen::Index lin = 0; lin < t.size(); ++lin) {
    dst[lin] = m(idx[mode], col);
    for (int p = 0; p < n; ++p) {
      if (++idx[p] < shape[p]) {
        col += col_stride[p];
        break;
      }
      idx[p] = 0;
      col -= col_stride[p] * (shape[p] - 1);
    }
  }
  return t;
}

Eigen::MatrixXd khatri_rao(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("khatri_rao: column mismatch");
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols());
  for (Eigen::Index r = 0; r < a.cols(); ++r)
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      out.col(r).segment(i * b.rows(), b.rows()) = a(i, r) * b.col(r);
  return out;
}

Eigen::MatrixXd kr_complement(const FactorSet& fs, int mode) {
  const int n = fs.order();
  if (mode < 0 || mode >= n) throw std::out_of_range("kr_complement: bad mode");
  Eigen::MatrixXd d;
  bool first = true;
  for (int p = n - 1; p >= 0; --p) {
    if (p == mode) continue;
    d = first ? fs.factors[p] : khatri_rao(d, fs.factors[p]);
    first = false;
  }
  if (first) throw std::invalid_argument("kr_complement: need at least two modes");
  return d;
}

DenseTensor reconstruct(const FactorSet& fs) {
  if (fs.order() < 2) throw std::invalid_argument("reconstruct: need at least two modes");
  Eigen::MatrixXd unf0 = fs.factors[0] * kr_complement(fs, 0).transpose();
  return fold(unf0, 0, fs.shape());
}

double objective_smooth(const DenseTensor& t, const FactorSet& fs) {
  DenseTensor rec = reconstruct(fs);
  return 0.5 * (t.vec() - rec.vec()).squaredNorm();
}

std::pair<Eigen::VectorXd, double> column_gradient(const Eigen::MatrixXd& x_unf,
                                                   const FactorSet& fs, int mode,
                                                   Eigen::Index col,
                                                   const Eigen::MatrixXd& d) {
  const Eigen::MatrixXd& a = fs.factors[mode];
  Eigen::VectorXd dj = d.col(col);
  // grad_j f = A (D^T d_j) - X_(mode) d_j; curvature is ||d_j||^2.
  Eigen::VectorXd g = a * (d.transpose() * dj) - x_unf * dj;
  return {std::move(g), dj.squaredNorm()};
}

}  // namespace gscp
