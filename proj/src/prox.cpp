#include "gscp/prox.hpp"

#include <stdexcept>

namespace gscp {

Eigen::VectorXd prox_unit_sphere(const Eigen::VectorXd& v) {
  double n = v.norm();
  if (n == 0.0) {
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(v.size());
    if (e1.size() > 0) e1[0] = 1.0;
    return e1;
  }
  return v / n;
}

Eigen::VectorXd prox_group_l0(const Eigen::VectorXd& v, double lambda, double step) {
  if (lambda < 0.0) throw std::invalid_argument("prox_group_l0: lambda must be >= 0");
  if (!(step > 0.0)) throw std::invalid_argument("prox_group_l0: step must be > 0");
  if (lambda == 0.0) return v;
  // Zeroing the column costs ||v||^2 / (2*step); keeping it costs lambda.
  if (v.squaredNorm() >= 2.0 * lambda * step) return v;
  return Eigen::VectorXd::Zero(v.size());
}

Eigen::VectorXd apply_prox(const ProxKind& kind, const Eigen::VectorXd& v, double step) {
  switch (kind.tag) {
    case ProxKind::Tag::UnitSphere:
      return prox_unit_sphere(v);
    case ProxKind::Tag::GroupL0:
      return prox_group_l0(v, kind.lambda, step);
    case ProxKind::Tag::None:
      return v;
  }
  throw std::logic_error("apply_prox: unreachable");
}

}  // namespace gscp
