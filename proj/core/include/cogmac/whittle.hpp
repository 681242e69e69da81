#pragma once

#include <cstddef>
#include <cstdint>

#include "cogmac/belief.hpp"

namespace cogmac {

/// How the grid value function of the subsidy problem is obtained.
enum class WhittleSolver : std::uint8_t {
  policy_iteration,  ///< exact grid fixed point, policy evaluation by direct solve
  value_iteration,   ///< relative value iteration with span stopping rule
};

/// Parameters of the single-arm subsidy problem behind the Whittle index.
struct WhittleConfig {
  double discount = 0.9999;   ///< beta in [0, 1)
  int grid_points = 2001;     ///< uniform belief grid, >= 101
  double value_tol = 1e-9;    ///< sup-norm tolerance on the value function
  double subsidy_tol = 1e-6;  ///< width of the final subsidy bracket
  WhittleSolver solver = WhittleSolver::policy_iteration;

  void validate() const;
  /// Iteration cap for value iteration: 10 * ceil(1 / (1 - beta)).
  std::size_t iteration_cap() const;
};

/// Whittle index of a Gilbert-Elliott arm at belief `omega`, computed from
/// its definition: bisection on the passivity subsidy m in [0, 1], where for
/// each m the value function of the single-arm problem
///
///   V(x) = max( m + beta V(tau(x)),  x + beta [x V(p11) + (1-x) V(p01)] ),
///   tau(x) = x p11 + (1-x) p01,
///
/// is computed on a uniform belief grid with linear interpolation. The
/// default solver is policy iteration with exact policy evaluation, giving the
/// grid fixed point itself; value iteration is available for comparison and
/// stops on the MacQueen span bound (value_tol) or throws ConvergenceError at
/// iteration_cap().
double whittle_index(double omega, const TransitionEstimate& p, const WhittleConfig& cfg);

/// Same index evaluated in closed loop: the arm is indexable with a
/// threshold-type optimal policy, so at m = W(omega) the policy "activate iff
/// belief >= omega" is optimal and every value in the indifference equation
/// is affine in m. Orbits of the passive map are followed exactly, no grid.
/// Costs O(hitting time) and agrees with whittle_index to grid accuracy.
double threshold_whittle_index(double omega, const TransitionEstimate& p, double discount);

}  // namespace cogmac
