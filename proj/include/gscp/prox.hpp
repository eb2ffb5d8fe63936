#pragma once

#include <Eigen/Dense>

namespace gscp {

// Constraint or penalty attached to a factor block during the inner sweeps.
struct ProxKind {
  enum class Tag { UnitSphere, GroupL0, None };

  Tag tag = Tag::None;
  double lambda = 0.0;

  static ProxKind unit_sphere() { return {Tag::UnitSphere, 0.0}; }
  static ProxKind group_l0(double lambda) { return {Tag::GroupL0, lambda}; }
  static ProxKind none() { return {Tag::None, 0.0}; }
};

// Euclidean projection onto the unit sphere. The zero vector has no nearest
// point, so it maps to the first canonical basis vector.
Eigen::VectorXd prox_unit_sphere(const Eigen::VectorXd& v);

// Proximal map of the column-counting penalty lambda * 1{x != 0} at step size
// `step`: keep v when ||v||^2 >= 2*lambda*step, zero it otherwise. Ties keep
// the nonzero candidate. lambda == 0 is the identity. Throws
// std::invalid_argument for lambda < 0 or step <= 0.
Eigen::VectorXd prox_group_l0(const Eigen::VectorXd& v, double lambda, double step);

// Dispatch on kind; None is the identity.
Eigen::VectorXd apply_prox(const ProxKind& kind, const Eigen::VectorXd& v, double step);

}  // namespace gscp
