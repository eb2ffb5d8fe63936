#include "gscp/solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "engine.hpp"
#include "gscp/rank_reduce.hpp"
#include "gscp/rng.hpp"

namespace gscp {

void SolverConfig::validate() const {
  if (rank_init < 1) throw std::invalid_argument("rank_init must be >= 1");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  if (inner_iters < 0) throw std::invalid_argument("inner_iters must be >= 0");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must be in [0, 1)");
  if (!(lambda_min >= 0.0)) throw std::invalid_argument("lambda_min must be >= 0");
  if (!(lambda_max >= lambda_min)) throw std::invalid_argument("lambda_max must be >= lambda_min");
  if (!(kappa > 0.0 && kappa < 1.0)) throw std::invalid_argument("kappa must be in (0, 1)");
  if (!(stop_tol > 0.0)) throw std::invalid_argument("stop_tol must be > 0");
  if (max_outer < 1) throw std::invalid_argument("max_outer must be >= 1");
}

std::string to_string(SolveStatus s) {
  return s == SolveStatus::Converged ? "converged" : "max_iters";
}

double ExtrapolationSchedule::next(double gamma) {
  // w_k = min((t_{k-1} - 1) / t_k, gamma) with t_{-1} = t_0 = 1; the first two
  // weights are 0 and the sequence then climbs monotonically toward the cap.
  double w = std::min((t_prev_ - 1.0) / t_curr_, gamma);
  t_prev_ = t_curr_;
  t_curr_ = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_curr_ * t_curr_));
  return w;
}

double lambda_step(double lambda, double kappa, double lambda_min) {
  return std::max(lambda_min, kappa * lambda);
}

std::vector<Eigen::Index> support(const FactorMatrix& last_mode) {
  std::vector<Eigen::Index> s;
  for (Eigen::Index j = 0; j < last_mode.cols(); ++j)
    if (!last_mode.col(j).isZero(0.0)) s.push_back(j);
  return s;
}

FactorMatrix sub_bc_pgd(const Eigen::MatrixXd& x_unf, const FactorSet& eval, int mode,
                        int inner_iters, double epsilon, const ProxKind& prox) {
  Eigen::MatrixXd d = kr_complement(eval, mode);
  // Everything the column updates need from the data and the other blocks is
  // captured by these two products, so they are formed once per call.
  Eigen::MatrixXd gram = d.transpose() * d;
  Eigen::MatrixXd mttkrp = x_unf * d;

  FactorMatrix a = eval.factors[mode];
  const Eigen::Index r = a.cols();
  for (int cycle = 0; cycle <= inner_iters; ++cycle) {
    for (Eigen::Index j = 0; j < r; ++j) {
      double step = 1.0 / (epsilon + gram(j, j));
      Eigen::VectorXd g = a * gram.col(j) - mttkrp.col(j);
      Eigen::VectorXd v = a.col(j) - step * g;
      a.col(j) = apply_prox(prox, v, step);
    }
  }
  return a;
}

namespace detail {

FactorMatrix random_factor(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  FactorMatrix a(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) a(i, j) = rng.normal();
  return a;
}

namespace {

double frobenius_sq_diff(const FactorSet& a, const FactorSet& b) {
  double s = 0.0;
  for (int i = 0; i < a.order(); ++i) s += (a.factors[i] - b.factors[i]).squaredNorm();
  return s;
}

double max_unit_deviation(const FactorSet& fs) {
  double dev = 0.0;
  for (int i = 0; i + 1 < fs.order(); ++i)
    for (Eigen::Index j = 0; j < fs.factors[i].cols(); ++j)
      dev = std::max(dev, std::abs(fs.factors[i].col(j).norm() - 1.0));
  return dev;
}

}  // namespace

SolveResult run_engine(const DenseTensor& t, const SolverConfig& cfg, bool rank_reduce,
                       int stability_window) {
  cfg.validate();
  if (t.order() < 2) throw std::invalid_argument("solver needs an order >= 2 tensor");
  if (rank_reduce && stability_window < 1)
    throw std::invalid_argument("stability_window must be >= 1");

  const auto start_time = std::chrono::steady_clock::now();
  const int n = t.order();
  const int r0 = cfg.rank_init;
  const double x_norm = t.norm();

  std::vector<Eigen::MatrixXd> unf(n);
  for (int i = 0; i < n; ++i) unf[i] = unfold(t, i);

  // Gaussian start; the sphere-constrained modes begin feasible, the last mode
  // keeps its raw scale so the penalty sees honest column energies.
  Rng rng(cfg.seed);
  FactorSet factors;
  factors.factors.reserve(n);
  for (int i = 0; i < n; ++i) {
    FactorMatrix a = random_factor(rng, t.dim(i), r0);
    if (i + 1 < n)
      for (Eigen::Index j = 0; j < a.cols(); ++j) a.col(j) = prox_unit_sphere(a.col(j));
    factors.factors.push_back(std::move(a));
  }
  FactorSet bar = factors;

  // Residual fit as (f, ||t - reconstruct||).
  auto eval_fit = [&](const FactorSet& fs) {
    DenseTensor rec = reconstruct(fs);
    double rn = (t.vec() - rec.vec()).norm();
    return std::pair<double, double>{0.5 * rn * rn, rn};
  };
  // RelErr falls back to the absolute residual norm for all-zero data.
  auto to_rel = [&](double resid_norm) { return x_norm > 0.0 ? resid_norm / x_norm : resid_norm; };

  auto [f_curr, resid_curr] = eval_fit(factors);
  const double tau = cfg.epsilon / std::max(1, cfg.inner_iters);

  SolveTrace trace;
  ExtrapolationSchedule extrap;
  SupportTracker tracker(rank_reduce ? stability_window : 1);
  double lambda_curr = cfg.lambda_max;
  bool pruned = false;
  double rel_prev = std::numeric_limits<double>::infinity();
  std::vector<Eigen::Index> prev_supp = support(factors.factors[n - 1]);

  auto prox_for = [&](int mode, double lam) {
    if (mode + 1 < n) return ProxKind::unit_sphere();
    if (pruned) return ProxKind::none();
    return ProxKind::group_l0(lam);
  };

  for (int k = 0; k < cfg.max_outer; ++k) {
    if (!pruned) lambda_curr = lambda_step(lambda_curr, cfg.kappa, cfg.lambda_min);
    const double lam = pruned ? 0.0 : lambda_curr;
    const double w = extrap.next(cfg.gamma);

    const FactorSet old = factors;
    const FactorSet bar_old = bar;
    const double f_old_total =
        f_curr + lam * static_cast<double>(support(old.factors[n - 1]).size());

    // Extrapolated sweep: each block is updated at the point made of the fresh
    // extrapolated blocks before it, its own previous value, and the anchors
    // after it.
    FactorSet fresh = old;
    FactorSet tilde = old;
    bool safeguard_used = false;
    {
      FactorSet eval = bar;
      for (int i = 0; i < n; ++i) {
        eval.factors[i] = old.factors[i];
        fresh.factors[i] = sub_bc_pgd(unf[i], eval, i, cfg.inner_iters, cfg.epsilon,
                                      prox_for(i, lam));
        tilde.factors[i] = fresh.factors[i] + w * (fresh.factors[i] - bar.factors[i]);
        eval.factors[i] = tilde.factors[i];
      }
    }

    auto [f_new, resid_new] = eval_fit(fresh);
    double dx2 = frobenius_sq_diff(fresh, old);
    double f_new_total =
        f_new + lam * static_cast<double>(support(fresh.factors[n - 1]).size());

    if (f_new_total > f_old_total - 0.5 * tau * dx2) {
      // The extrapolated point overshot; redo the sweep from the accepted
      // blocks and re-anchor on the redone values instead of keeping tilde.
      safeguard_used = true;
      FactorSet eval = old;
      for (int i = 0; i < n; ++i) {
        fresh.factors[i] = sub_bc_pgd(unf[i], eval, i, cfg.inner_iters, cfg.epsilon,
                                      prox_for(i, lam));
        eval.factors[i] = fresh.factors[i];
        bar.factors[i] =
            fresh.factors[i] + w * (fresh.factors[i] - bar_old.factors[i]);
      }
      std::tie(f_new, resid_new) = eval_fit(fresh);
      dx2 = frobenius_sq_diff(fresh, old);
      f_new_total =
          f_new + lam * static_cast<double>(support(fresh.factors[n - 1]).size());
    } else {
      bar = tilde;
    }

    // Sufficient decrease must hold for whichever sweep was accepted; allow
    // rounding slack proportional to the objective scale.
    if (f_new_total + 0.5 * tau * dx2 > f_old_total + 1e-10 * std::abs(f_old_total))
      ++trace.descent_violations;

    factors = std::move(fresh);
    f_curr = f_new;
    resid_curr = resid_new;
    const double rel = to_rel(resid_curr);

    std::vector<Eigen::Index> supp = support(factors.factors[n - 1]);
    if (supp != prev_supp) {
      trace.last_support_change_k = k;
      prev_supp = supp;
    }
    trace.max_unit_deviation = std::max(trace.max_unit_deviation, max_unit_deviation(factors));
    trace.step_norms.push_back(std::sqrt(dx2));
    trace.rows.push_back({k, f_new_total, rel, lam, w, static_cast<int>(supp.size()),
                          safeguard_used});

    if (rank_reduce && !pruned && tracker.observe(supp)) {
      trace.prune_rel_err_before = rel;
      factors = prune(factors, supp);
      bar = prune(bar, supp);
      std::tie(f_curr, resid_curr) = eval_fit(factors);
      trace.prune_rel_err_after = to_rel(resid_curr);
      trace.prune_k = k;
      pruned = true;
      prev_supp = support(factors.factors[n - 1]);
    }

    const bool at_floor = pruned || lambda_curr <= cfg.lambda_min;
    if (at_floor && std::abs(rel_prev - rel) < cfg.stop_tol) {
      trace.status = SolveStatus::Converged;
      break;
    }
    rel_prev = rel;
  }

  trace.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
  return {std::move(factors), std::move(trace)};
}

}  // namespace detail

SolveResult outer_solve(const DenseTensor& t, const SolverConfig& cfg) {
  return detail::run_engine(t, cfg, false, 1);
}

}  // namespace gscp
