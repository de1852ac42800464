#pragma once

#include <vector>

#include <Eigen/Core>

#include "lef/problem.hpp"
#include "lef/radial.hpp"

namespace lef {

/// Truncated annulus r_inner <= r <= r_outer, uniform in s = ln r and in theta.
/// Grid functions are n_r x n_theta matrices: row i is the circle r_i,
/// column j the ray theta_j = 2 pi j / n_theta (periodic).
class AnnulusGrid {
 public:
  AnnulusGrid(double r_inner, double r_outer, Eigen::Index n_r, Eigen::Index n_theta);

  double r_inner() const { return r_inner_; }
  double r_outer() const { return r_outer_; }
  Eigen::Index n_r() const { return n_r_; }
  Eigen::Index n_theta() const { return n_theta_; }
  double h_s() const { return h_s_; }
  double h_theta() const { return h_theta_; }
  double s(Eigen::Index i) const { return s0_ + i * h_s_; }
  double r(Eigen::Index i) const;
  double theta(Eigen::Index j) const { return j * h_theta_; }

 private:
  double r_inner_, r_outer_;
  Eigen::Index n_r_, n_theta_;
  double s0_, h_s_, h_theta_;
};

AnnulusGrid build_annulus_grid(double B_c, double r_outer, Eigen::Index n_r, Eigen::Index n_theta);

struct PoissonResult {
  Eigen::MatrixXd w;
  double relative_residual = 0.0;
  int iterations = 0;
};

/// -Lap w = rhs with Dirichlet data on both circles, five-point stencil in
/// (s, theta).  In the log variable the operator is e^{-2s}(w_ss + w_thth);
/// the scaled system is symmetric positive definite and an M-matrix.
///
/// Conjugate gradients preconditioned by exact tridiagonal relaxation along
/// each ray, stopped at relative residual <= lin_tol.  Every operation is
/// rotation-equivariant, so angle-independent data give angle-independent
/// iterates.
PoissonResult poisson_solve(const AnnulusGrid& grid, const Eigen::MatrixXd& rhs,
                            const Eigen::VectorXd& inner_bc, const Eigen::VectorXd& outer_bc,
                            double lin_tol);

struct Supersolution {
  Eigen::MatrixXd u, v;
  double min_defect_u = 0.0;  // min over interior of -Lap_h u - p v^alpha
  double min_defect_v = 0.0;
};

/// Radial supersolution on the annulus built from a radial solution of the
/// majorant problem.  The radial profile is re-solved on the annulus s-nodes
/// so that it satisfies the discrete majorant equation, with the boundary
/// circles pinned to the radial solution.
Supersolution radial_supersolution(const ProblemSpec& spec, const AnnulusGrid& grid,
                                   const LogGridSolution& majorant_solution,
                                   int majorant_samples = kDefaultMajorantSamples);

/// Discrete -Lap_h u - p v^alpha (and the v counterpart) at interior nodes.
std::pair<double, double> supersolution_defect(const ProblemSpec& spec, const AnnulusGrid& grid,
                                               const Eigen::MatrixXd& u, const Eigen::MatrixXd& v);

struct AnnulusOptions {
  double outer_tol = 1e-8;
  int max_outer = 500;
  double lin_tol = 1e-10;
};

struct AnnulusSolution {
  AnnulusGrid grid;
  Eigen::MatrixXd u, v;
  int outer_iterations = 0;
  double monotonicity_defect = 0.0;  // min over steps/nodes of u_{n+1}-u_n, v_{n+1}-v_n
  double supersolution_gap = 0.0;    // min over steps/nodes of ubar - u_n, vbar - v_n
  std::vector<double> linear_residuals;
  std::vector<double> update_history;
};

/// Monotone iteration from the subsolution (0, 0):
///   -Lap u_{n+1} = p v_n^alpha,  -Lap v_{n+1} = q u_n^beta,
/// with both circles held at the supersolution values.
AnnulusSolution monotone_iterate(const ProblemSpec& spec, const AnnulusGrid& grid,
                                 const Eigen::MatrixXd& super_u, const Eigen::MatrixXd& super_v,
                                 const AnnulusOptions& options = {});

/// sup over nodes at least two rows from the boundary of |Lap u + p v^alpha|
/// and |Lap v + q u^beta|, using the fourth-order (s, theta) Laplacian.  The
/// five-point residual of a converged iterate is only the algebraic error, so
/// the wider stencil is what exposes discretisation error.
std::pair<double, double> residual_annulus(const AnnulusSolution& sol, const ProblemSpec& spec);

/// Largest angular standard deviation over the circles, for radial checks.
double angular_spread(const Eigen::MatrixXd& w);

/// p(r_i, theta_j) on the grid.
Eigen::MatrixXd sample_on_grid(const CoefficientField& field, const AnnulusGrid& grid);

}  // namespace lef
