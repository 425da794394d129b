#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "crnsim/network.hpp"

namespace crnsim {

/// Closed linear moment equations of a network whose intensities are affine
/// in the state, lambda_k(x) = c_k + g_k . x:
///
///   dm/dt = A m + b
///   dM/dt = A M + M A^T + b m^T + m b^T + Q0 + sum_l m_l Q_l
///
/// with m = E[X], M = E[X X^T], A = sum_k zeta_k g_k^T, b = sum_k zeta_k c_k,
/// Q0 = sum_k c_k zeta_k zeta_k^T and Q_l = sum_k g_kl zeta_k zeta_k^T.
struct MomentSystem {
  std::size_t dimension = 0;
  Eigen::MatrixXd drift;           ///< A
  Eigen::VectorXd constant;        ///< b
  Eigen::MatrixXd noise_constant;  ///< Q0
  std::vector<Eigen::MatrixXd> noise_linear;  ///< Q_l, one per species
};

struct MomentSolution {
  double time = 0.0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd second_moment;  ///< E[X X^T], symmetric

  double variance(std::size_t i) const {
    return second_moment(i, i) - mean(i) * mean(i);
  }
};

/// True iff every reaction has total input multiplicity at most one.
bool is_first_order(const ReactionNetwork& network);

/// Throws UnsupportedError for networks that are not first order.
MomentSystem build_moment_system(const ReactionNetwork& network);

/// Classical RK4 from the deterministic initial state x0 (M(0) = x0 x0^T).
/// dt <= 0 selects T / 10^4; the last step is shortened to land on T.
MomentSolution solve_moments(const MomentSystem& system,
                             std::span<const Count> x0, double T,
                             double dt = 0.0);

/// Solutions at each of the (nondecreasing, nonnegative) `times`, integrated
/// in one sweep with step dt (dt <= 0 selects max(times) / 10^4).
std::vector<MomentSolution> solve_moments_at(const MomentSystem& system,
                                             std::span<const Count> x0,
                                             std::span<const double> times,
                                             double dt = 0.0);

/// Largest relative change of any mean or second-moment entry at T when dt
/// is halved.
double halving_change(const MomentSystem& system, std::span<const Count> x0,
                      double T, double dt = 0.0);

}  // namespace crnsim
