#include "lef/annulus.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "lef/errors.hpp"

namespace lef {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

AnnulusGrid::AnnulusGrid(double r_inner, double r_outer, Index n_r, Index n_theta)
    : r_inner_(r_inner), r_outer_(r_outer), n_r_(n_r), n_theta_(n_theta) {
  if (!(r_inner > 0.0) || !std::isfinite(r_outer) || !(r_outer > r_inner)) {
    throw ContractViolation("annulus needs 0 < r_inner < r_outer");
  }
  if (n_r < 3) throw ContractViolation("annulus needs n_r >= 3");
  if (n_theta < 4 || n_theta % 2 != 0) throw ContractViolation("annulus needs even n_theta >= 4");
  s0_ = std::log(r_inner);
  h_s_ = (std::log(r_outer) - s0_) / static_cast<double>(n_r - 1);
  h_theta_ = 2.0 * std::numbers::pi / static_cast<double>(n_theta);
}

double AnnulusGrid::r(Index i) const {
  if (i == 0) return r_inner_;
  if (i == n_r_ - 1) return r_outer_;
  return std::exp(s(i));
}

AnnulusGrid build_annulus_grid(double B_c, double r_outer, Index n_r, Index n_theta) {
  return AnnulusGrid(B_c, r_outer, n_r, n_theta);
}

MatrixXd sample_on_grid(const CoefficientField& field, const AnnulusGrid& grid) {
  MatrixXd out(grid.n_r(), grid.n_theta());
  for (Index j = 0; j < grid.n_theta(); ++j) {
    for (Index i = 0; i < grid.n_r(); ++i) out(i, j) = eval_coeff(field, grid.r(i), grid.theta(j));
  }
  return out;
}

double angular_spread(const MatrixXd& w) {
  double worst = 0.0;
  for (Index i = 0; i < w.rows(); ++i) {
    const double mean = w.row(i).mean();
    const double var = (w.row(i).array() - mean).square().mean();
    worst = std::max(worst, std::sqrt(var));
  }
  return worst;
}

namespace {

// Interior system of the five-point operator scaled by h_s^2:
//   (2 + 2k) w_ij - w_{i-1,j} - w_{i+1,j} - k (w_{i,j-1} + w_{i,j+1}),  k = h_s^2 / h_theta^2
class ScaledLaplacian {
 public:
  ScaledLaplacian(Index rows, Index cols, double kappa)
      : rows_(rows), cols_(cols), kappa_(kappa), diag_(2.0 + 2.0 * kappa) {
    // Thomas factors for tridiag(-1, diag, -1) along each ray
    upper_.resize(rows_);
    inv_pivot_.resize(rows_);
    double prev_upper = 0.0;
    for (Index i = 0; i < rows_; ++i) {
      const double pivot = diag_ + prev_upper;
      inv_pivot_[i] = 1.0 / pivot;
      upper_[i] = -inv_pivot_[i];
      prev_upper = upper_[i];
    }
  }

  MatrixXd apply(const MatrixXd& x) const {
    MatrixXd y = diag_ * x;
    if (rows_ > 1) {
      y.topRows(rows_ - 1) -= x.bottomRows(rows_ - 1);
      y.bottomRows(rows_ - 1) -= x.topRows(rows_ - 1);
    }
    for (Index j = 0; j < cols_; ++j) {
      const Index left = (j + cols_ - 1) % cols_;
      const Index right = (j + 1) % cols_;
      y.col(j) -= kappa_ * (x.col(left) + x.col(right));
    }
    return y;
  }

  // Exact solve of the ray-wise tridiagonal part (line relaxation).
  MatrixXd precondition(const MatrixXd& r) const {
    MatrixXd z(rows_, cols_);
    for (Index j = 0; j < cols_; ++j) {
      double carry = 0.0;
      for (Index i = 0; i < rows_; ++i) {
        carry = (r(i, j) + carry) * inv_pivot_[i];
        z(i, j) = carry;
      }
      for (Index i = rows_ - 2; i >= 0; --i) z(i, j) -= upper_[i] * z(i + 1, j);
    }
    return z;
  }

 private:
  Index rows_, cols_;
  double kappa_, diag_;
  VectorXd upper_, inv_pivot_;
};

double frob_dot(const MatrixXd& a, const MatrixXd& b) { return a.cwiseProduct(b).sum(); }

}  // namespace

PoissonResult poisson_solve(const AnnulusGrid& grid, const MatrixXd& rhs, const VectorXd& inner_bc,
                            const VectorXd& outer_bc, double lin_tol) {
  const Index nr = grid.n_r();
  const Index nt = grid.n_theta();
  if (rhs.rows() != nr || rhs.cols() != nt || inner_bc.size() != nt || outer_bc.size() != nt) {
    throw ContractViolation("poisson_solve: data does not match the grid");
  }
  if (!(lin_tol > 1e-14 && lin_tol < 1e-4)) {
    throw ContractViolation("poisson_solve: lin_tol must lie in (1e-14, 1e-4)");
  }
  if (!rhs.allFinite() || !inner_bc.allFinite() || !outer_bc.allFinite()) {
    throw ContractViolation("poisson_solve: non-finite data");
  }

  PoissonResult out;
  out.w = MatrixXd::Zero(nr, nt);
  out.w.row(0) = inner_bc.transpose();
  out.w.row(nr - 1) = outer_bc.transpose();
  const Index m = nr - 2;
  if (m == 0) return out;

  const double hs2 = grid.h_s() * grid.h_s();
  const ScaledLaplacian A(m, nt, hs2 / (grid.h_theta() * grid.h_theta()));

  MatrixXd b(m, nt);
  for (Index i = 0; i < m; ++i) {
    b.row(i) = hs2 * std::exp(2.0 * grid.s(i + 1)) * rhs.row(i + 1);
  }
  b.row(0) += inner_bc.transpose();
  b.row(m - 1) += outer_bc.transpose();

  const double b_norm = b.norm();
  if (b_norm == 0.0) return out;

  MatrixXd x = MatrixXd::Zero(m, nt);
  MatrixXd r = b;
  MatrixXd z = A.precondition(r);
  MatrixXd p = z;
  double rz = frob_dot(r, z);
  const int max_iter = static_cast<int>(std::max<Index>(1000, 10 * (m + nt)));
  int it = 0;
  for (; it < max_iter; ++it) {
    if (r.norm() <= lin_tol * b_norm) break;
    const MatrixXd Ap = A.apply(p);
    const double step = rz / frob_dot(p, Ap);
    x += step * p;
    r -= step * Ap;
    z = A.precondition(r);
    const double rz_next = frob_dot(r, z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  out.relative_residual = (b - A.apply(x)).norm() / b_norm;
  out.iterations = it;
  if (it == max_iter && out.relative_residual > lin_tol) {
    throw LinearSolveFailure("CG stopped at relative residual " +
                             std::to_string(out.relative_residual) + " after " +
                             std::to_string(it) + " iterations");
  }
  out.w.middleRows(1, m) = x;
  return out;
}

namespace {

// -Lap_h w in physical units on interior rows (row 0 and n_r-1 left zero).
MatrixXd neg_laplacian(const AnnulusGrid& grid, const MatrixXd& w) {
  const Index nr = grid.n_r();
  const Index nt = grid.n_theta();
  const double hs2 = grid.h_s() * grid.h_s();
  const double ht2 = grid.h_theta() * grid.h_theta();
  MatrixXd out = MatrixXd::Zero(nr, nt);
  for (Index j = 0; j < nt; ++j) {
    const Index l = (j + nt - 1) % nt;
    const Index rgt = (j + 1) % nt;
    for (Index i = 1; i + 1 < nr; ++i) {
      const double wss = (w(i - 1, j) - 2.0 * w(i, j) + w(i + 1, j)) / hs2;
      const double wtt = (w(i, l) - 2.0 * w(i, j) + w(i, rgt)) / ht2;
      out(i, j) = -std::exp(-2.0 * grid.s(i)) * (wss + wtt);
    }
  }
  return out;
}

MatrixXd powm(const MatrixXd& w, double e) { return w.array().max(0.0).pow(e).matrix(); }

// Discrete radial majorant system on the annulus s-nodes,
//   -(u_{i-1} - 2 u_i + u_{i+1}) / h^2 = e^{2s} pbar v_i^alpha  (and for v),
// ends fixed, interior by fixed-point iteration over exact tridiagonal solves.
void refine_radial_profile(const AnnulusGrid& grid, const VectorXd& wp, const VectorXd& wq,
                           double alpha, double beta, VectorXd& u, VectorXd& v) {
  const Index n = grid.n_r();
  const double h2 = grid.h_s() * grid.h_s();
  auto dirichlet_solve = [&](const VectorXd& f, double left, double right) {
    // -(x_{i-1} - 2 x_i + x_{i+1}) = h^2 f_i, i = 1..n-2
    const Index m = n - 2;
    VectorXd rhs = h2 * f.segment(1, m);
    rhs[0] += left;
    rhs[m - 1] += right;
    VectorXd cp(m), x(m);
    double prev = 0.0;
    for (Index i = 0; i < m; ++i) {
      const double pivot = 2.0 + prev;
      cp[i] = -1.0 / pivot;
      x[i] = (rhs[i] + (i > 0 ? x[i - 1] : 0.0)) / pivot;
      prev = cp[i];
    }
    for (Index i = m - 2; i >= 0; --i) x[i] -= cp[i] * x[i + 1];
    VectorXd full(n);
    full[0] = left;
    full.segment(1, m) = x;
    full[n - 1] = right;
    return full;
  };
  const double scale = std::max({1.0, u.cwiseAbs().maxCoeff(), v.cwiseAbs().maxCoeff()});
  for (int it = 0; it < 500; ++it) {
    const VectorXd fu = wp.array() * v.array().max(0.0).pow(alpha);
    const VectorXd fv = wq.array() * u.array().max(0.0).pow(beta);
    VectorXd u_next = dirichlet_solve(fu, u[0], u[n - 1]);
    VectorXd v_next = dirichlet_solve(fv, v[0], v[n - 1]);
    const double change = std::max((u_next - u).cwiseAbs().maxCoeff(),
                                   (v_next - v).cwiseAbs().maxCoeff());
    u = std::move(u_next);
    v = std::move(v_next);
    if (change <= 1e-15 * scale) return;
  }
}

}  // namespace

std::pair<double, double> supersolution_defect(const ProblemSpec& spec, const AnnulusGrid& grid,
                                               const MatrixXd& u, const MatrixXd& v) {
  const MatrixXd P = sample_on_grid(spec.p, grid);
  const MatrixXd Q = sample_on_grid(spec.q, grid);
  const Index nr = grid.n_r();
  const MatrixXd du = neg_laplacian(grid, u) - P.cwiseProduct(powm(v, spec.alpha));
  const MatrixXd dv = neg_laplacian(grid, v) - Q.cwiseProduct(powm(u, spec.beta));
  if (nr < 3) return {0.0, 0.0};
  return {du.middleRows(1, nr - 2).minCoeff(), dv.middleRows(1, nr - 2).minCoeff()};
}

Supersolution radial_supersolution(const ProblemSpec& spec, const AnnulusGrid& grid,
                                   const LogGridSolution& majorant_solution, int majorant_samples) {
  const ProblemSpec major = spec.majorized(majorant_samples);
  const LogGrid& lg = majorant_solution.grid;
  const Index nr = grid.n_r();
  const double s_lo = grid.s(0);
  const double s_hi = std::log(grid.r_outer());
  if (s_lo < lg.T() - 1e-9 || s_hi > lg.S_max() + 1e-9) {
    throw ContractViolation("annulus extends beyond the radial solution domain");
  }
  auto clamp_s = [&](double s) { return std::clamp(s, lg.T(), lg.S_max()); };

  VectorXd u(nr), v(nr), wp(nr), wq(nr);
  for (Index i = 0; i < nr; ++i) {
    const double s = clamp_s(i + 1 == nr ? s_hi : grid.s(i));
    u[i] = interpolate(lg, majorant_solution.y, s);
    v[i] = interpolate(lg, majorant_solution.z, s);
    wp[i] = major.p.log_density(grid.s(i));
    wq[i] = major.q.log_density(grid.s(i));
  }
  if (nr > 2) refine_radial_profile(grid, wp, wq, spec.alpha, spec.beta, u, v);

  Supersolution out;
  out.u = u.replicate(1, grid.n_theta());
  out.v = v.replicate(1, grid.n_theta());
  std::tie(out.min_defect_u, out.min_defect_v) = supersolution_defect(spec, grid, out.u, out.v);
  return out;
}

AnnulusSolution monotone_iterate(const ProblemSpec& spec, const AnnulusGrid& grid,
                                 const MatrixXd& super_u, const MatrixXd& super_v,
                                 const AnnulusOptions& opt) {
  spec.validate();
  const Index nr = grid.n_r();
  const Index nt = grid.n_theta();
  if (super_u.rows() != nr || super_u.cols() != nt || super_v.rows() != nr ||
      super_v.cols() != nt) {
    throw ContractViolation("monotone_iterate: supersolution does not match the grid");
  }
  if (!(opt.outer_tol > 0.0) || opt.max_outer < 1) {
    throw ContractViolation("monotone_iterate: invalid outer tolerance or iteration cap");
  }
  if (super_u.minCoeff() < 0.0 || super_v.minCoeff() < 0.0) {
    throw ContractViolation("monotone_iterate: supersolution must be nonnegative");
  }

  const MatrixXd P = sample_on_grid(spec.p, grid);
  const MatrixXd Q = sample_on_grid(spec.q, grid);
  {
    const double scale =
        std::max({1.0, P.cwiseProduct(powm(super_v, spec.alpha)).maxCoeff(),
                  Q.cwiseProduct(powm(super_u, spec.beta)).maxCoeff()});
    const double tol_super = 1e-8 * scale;
    const auto [du, dv] = supersolution_defect(spec, grid, super_u, super_v);
    if (du < -tol_super || dv < -tol_super) {
      throw ContractViolation("monotone_iterate: supplied pair is not a discrete supersolution "
                              "(defects " + std::to_string(du) + ", " + std::to_string(dv) + ")");
    }
  }

  const VectorXd u_in = super_u.row(0).transpose();
  const VectorXd u_out = super_u.row(nr - 1).transpose();
  const VectorXd v_in = super_v.row(0).transpose();
  const VectorXd v_out = super_v.row(nr - 1).transpose();
  const VectorXd zero_bc = VectorXd::Zero(nt);

  AnnulusSolution sol{grid, MatrixXd::Zero(nr, nt), MatrixXd::Zero(nr, nt), 0, 0.0, 0.0, {}, {}};
  auto track = [&](const MatrixXd& du, const MatrixXd& dv, double lin_res) {
    sol.monotonicity_defect =
        std::min({sol.monotonicity_defect, du.minCoeff(), dv.minCoeff()});
    sol.supersolution_gap = std::min({sol.supersolution_gap, (super_u - sol.u).minCoeff(),
                                      (super_v - sol.v).minCoeff()});
    sol.linear_residuals.push_back(lin_res);
    const double update = std::max(du.cwiseAbs().maxCoeff(), dv.cwiseAbs().maxCoeff());
    sol.update_history.push_back(update);
    ++sol.outer_iterations;
    if (sol.monotonicity_defect < -1e-8) {
      throw MaxPrincipleViolation("iterates decreased by " +
                                  std::to_string(-sol.monotonicity_defect) +
                                  "; refine the annulus grid");
    }
    return update;
  };

  // Step 1 from (u0, v0) = (0, 0): the sources vanish.
  const MatrixXd zero_rhs = MatrixXd::Zero(nr, nt);
  PoissonResult u1 = poisson_solve(grid, zero_rhs, u_in, u_out, opt.lin_tol);
  PoissonResult v1 = poisson_solve(grid, zero_rhs, v_in, v_out, opt.lin_tol);
  sol.u = u1.w;
  sol.v = v1.w;
  double update = track(sol.u, sol.v,
                        std::max(u1.relative_residual, v1.relative_residual));
  if (spec.trivial()) return sol;

  // Later steps solve for the increment, whose data are homogeneous on both
  // circles: -Lap_h(u_{n+1} - u_n) = p v_n^alpha + Lap_h u_n.  Taking the full
  // residual also removes the algebraic error left by earlier solves.
  auto interior = [&](MatrixXd m) {
    m.row(0).setZero();
    m.row(nr - 1).setZero();
    return m;
  };
  while (update > opt.outer_tol) {
    if (sol.outer_iterations >= opt.max_outer) {
      throw NoConvergence("monotone iteration: update " + std::to_string(update) +
                          " after " + std::to_string(opt.max_outer) + " outer steps");
    }
    const MatrixXd rhs_u =
        interior(P.cwiseProduct(powm(sol.v, spec.alpha)) - neg_laplacian(grid, sol.u));
    const MatrixXd rhs_v =
        interior(Q.cwiseProduct(powm(sol.u, spec.beta)) - neg_laplacian(grid, sol.v));
    const PoissonResult du = poisson_solve(grid, rhs_u, zero_bc, zero_bc, opt.lin_tol);
    const PoissonResult dv = poisson_solve(grid, rhs_v, zero_bc, zero_bc, opt.lin_tol);
    sol.u += du.w;
    sol.v += dv.w;
    update = track(du.w, dv.w, std::max(du.relative_residual, dv.relative_residual));
  }
  return sol;
}

std::pair<double, double> residual_annulus(const AnnulusSolution& sol, const ProblemSpec& spec) {
  const AnnulusGrid& g = sol.grid;
  const Index nr = g.n_r();
  const Index nt = g.n_theta();
  if (nr < 5) throw ContractViolation("residual_annulus needs n_r >= 5");
  const MatrixXd P = sample_on_grid(spec.p, g);
  const MatrixXd Q = sample_on_grid(spec.q, g);
  const double hs2 = 12.0 * g.h_s() * g.h_s();
  const double ht2 = 12.0 * g.h_theta() * g.h_theta();
  auto lap4 = [&](const MatrixXd& w, Index i, Index j) {
    const Index jm2 = (j + nt - 2) % nt, jm1 = (j + nt - 1) % nt;
    const Index jp1 = (j + 1) % nt, jp2 = (j + 2) % nt;
    const double wss = (-w(i - 2, j) + 16.0 * w(i - 1, j) - 30.0 * w(i, j) + 16.0 * w(i + 1, j) -
                        w(i + 2, j)) / hs2;
    const double wtt = (-w(i, jm2) + 16.0 * w(i, jm1) - 30.0 * w(i, j) + 16.0 * w(i, jp1) -
                        w(i, jp2)) / ht2;
    return std::exp(-2.0 * g.s(i)) * (wss + wtt);
  };
  double res_u = 0.0;
  double res_v = 0.0;
  for (Index j = 0; j < nt; ++j) {
    for (Index i = 2; i + 2 < nr; ++i) {
      res_u = std::max(res_u, std::abs(lap4(sol.u, i, j) +
                                       P(i, j) * std::pow(std::max(sol.v(i, j), 0.0), spec.alpha)));
      res_v = std::max(res_v, std::abs(lap4(sol.v, i, j) +
                                       Q(i, j) * std::pow(std::max(sol.u(i, j), 0.0), spec.beta)));
    }
  }
  return {res_u, res_v};
}

}  // namespace lef
