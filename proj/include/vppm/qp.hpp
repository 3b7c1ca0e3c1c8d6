#pragma once

#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vppm/model.hpp"

namespace vppm {

// min 1/2 x'Qx + q'x + constant
// s.t. eq_A x = eq_b
//      ineq_A x <= ineq_b
//      lb <= x <= ub          (+-inf entries mean unbounded)
struct QuadraticProgram {
  int n = 0;
  Eigen::MatrixXd Q;       // symmetric PSD, n x n
  Eigen::VectorXd q;       // n
  Eigen::MatrixXd eq_A;    // me x n
  Eigen::VectorXd eq_b;    // me
  Eigen::MatrixXd ineq_A;  // mi x n
  Eigen::VectorXd ineq_b;  // mi
  Eigen::VectorXd lb;      // n (empty means -inf)
  Eigen::VectorXd ub;      // n (empty means +inf)
  std::vector<std::string> names;  // optional variable labels
  double constant = 0.0;   // added to reported objectives
};

enum class QpStatus { Optimal, Infeasible, IterLimit };

struct QpSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd mu_eq;    // multipliers of eq rows (stationarity sign: Qx+q+Ae'mu_eq+Ai'mu_in-mu_lb+mu_ub=0)
  Eigen::VectorXd mu_ineq;  // >= 0
  Eigen::VectorXd mu_lb;    // >= 0, per variable (0 where lb = -inf)
  Eigen::VectorXd mu_ub;    // >= 0
  double objective = 0.0;   // evaluated with the original Q (regularization excluded)
  QpStatus status = QpStatus::IterLimit;
  int iterations = 0;
};

struct KktResiduals {
  double stationarity_inf = 0.0;
  double primal_inf = 0.0;
  double dual_inf = 0.0;
  double comp_inf = 0.0;

  bool within(double feas_tol, double comp_tol) const {
    return stationarity_inf <= feas_tol && primal_inf <= feas_tol &&
           dual_inf <= feas_tol && comp_inf <= comp_tol;
  }
};

// True if Q is symmetric (within 1e-12) and an LDLT factorization
// certifies positive semidefiniteness.
bool is_valid_cost_matrix(const Eigen::MatrixXd& Q);

// Deterministic dense convex QP solve. Zero diagonal entries of Q get a
// tiny regularization eps=1e-9 so ties break toward small magnitudes;
// reported objectives use the original Q. Pure and reentrant.
QpSolution solve_qp(const QuadraticProgram& p, const SolverConfig& cfg);

// Max-norm residuals of the four KKT families; bounds count as
// inequalities. Pure. Throws DimensionMismatch.
KktResiduals qp_kkt_residuals(const QuadraticProgram& p, const QpSolution& s);

inline double qp_infinity() { return std::numeric_limits<double>::infinity(); }

}  // namespace vppm
