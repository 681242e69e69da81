#include "cogmac/whittle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "cogmac/errors.hpp"

namespace cogmac {

void WhittleConfig::validate() const {
  if (!(discount >= 0.0 && discount < 1.0)) throw ConfigError("whittle: discount must lie in [0, 1)");
  if (grid_points < 101) throw ConfigError("whittle: grid_points must be at least 101");
  if (!(value_tol > 0.0) || !(subsidy_tol > 0.0)) throw ConfigError("whittle: tolerances must be positive");
}

std::size_t WhittleConfig::iteration_cap() const {
  return 10 * static_cast<std::size_t>(std::ceil(1.0 / (1.0 - discount)));
}

namespace {

// Linear interpolation node on the uniform grid [0, 1].
struct Node {
  std::size_t index;
  double weight;
};

Node locate(double x, std::size_t points) {
  const double scaled = std::clamp(x, 0.0, 1.0) * static_cast<double>(points - 1);
  const auto index = std::min(static_cast<std::size_t>(scaled), points - 2);
  return {index, scaled - static_cast<double>(index)};
}

double interpolate(const std::vector<double>& v, Node n) {
  return v[n.index] + n.weight * (v[n.index + 1] - v[n.index]);
}

class SubsidyProblem {
 public:
  SubsidyProblem(const TransitionEstimate& p, const WhittleConfig& cfg)
      : cfg_(cfg), points_(static_cast<std::size_t>(cfg.grid_points)), p11_(locate(p.p11, points_)),
        p01_(locate(p.p01, points_)), belief_(points_), passive_next_(points_), value_(points_, 0.0),
        scratch_(points_) {
    for (std::size_t k = 0; k < points_; ++k) {
      belief_[k] = static_cast<double>(k) / static_cast<double>(points_ - 1);
      passive_next_[k] = locate(propagate_belief(belief_[k], p), points_);
    }
    prepare_ordering(p);
  }

  void solve(double m) {
    if (cfg_.solver == WhittleSolver::policy_iteration) {
      solve_policy_iteration(m);
    } else {
      solve_value_iteration(m);
    }
  }

  // Solves the subsidy-m problem in place, warm-started from the previous m.
  //
  // Relative value iteration: the stored function is V minus V(0). The
  // indifference gap only involves differences of V, and keeping magnitudes
  // O(1) instead of O(1/(1-beta)) leaves the span test above rounding noise.
  //
  // Negatively correlated arms can cycle (active -> p11 -> passive -> active),
  // and span bounds do not contract on periodic chains. Iterating the
  // equivalent operator  beta'(1-s) V + (beta' s / beta) T V  with
  // beta' = beta / (beta (1-s) + s) adds a self-loop of weight 1-s without
  // moving the fixed point.
  void solve_value_iteration(double m) {
    constexpr double step = 0.5;
    const double beta = cfg_.discount;
    const double beta_eff = beta / (beta * (1.0 - step) + step);
    const double keep = beta_eff * (1.0 - step);
    const double apply = beta_eff * step / beta;
    const double bound_scale = beta_eff / (1.0 - beta_eff);
    const std::size_t cap = cfg_.iteration_cap();
    for (std::size_t iter = 0; iter < cap; ++iter) {
      const double v11 = interpolate(value_, p11_);
      const double v01 = interpolate(value_, p01_);
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (std::size_t k = 0; k < points_; ++k) {
        const double x = belief_[k];
        const double passive = m + beta * interpolate(value_, passive_next_[k]);
        const double active = x + beta * (x * v11 + (1.0 - x) * v01);
        scratch_[k] = keep * value_[k] + apply * std::max(passive, active);
        const double diff = scratch_[k] - value_[k];
        lo = std::min(lo, diff);
        hi = std::max(hi, diff);
      }
      const double anchor = scratch_[0];
      for (auto& v : scratch_) v -= anchor;
      value_.swap(scratch_);
      // MacQueen-Porteus: the span of successive differences bounds the
      // distance of the relative values from the fixed point.
      if (bound_scale * (hi - lo) < cfg_.value_tol) return;
    }
    throw ConvergenceError("whittle_index: value iteration did not converge within the iteration cap");
  }

  // Howard policy iteration. Policy evaluation is exact: every value is kept
  // as an affine form in A = V(p11), B = V(p01). Passive nodes far from the
  // fixed point pi of tau only depend on nodes strictly closer to pi, so they
  // are filled in by distance; the few nodes around pi form a small dense
  // system. A final 2x2 solve closes A and B.
  void solve_policy_iteration(double m) {
    const double beta = cfg_.discount;
    if (policy_.empty()) {
      policy_.resize(points_);
      for (std::size_t k = 0; k < points_; ++k) policy_[k] = belief_[k] >= m ? 1 : 0;
    }
    const std::size_t cap = std::max<std::size_t>(1000, points_);
    for (std::size_t iter = 0; iter < cap; ++iter) {
      evaluate_policy(m);
      const double v11 = interpolate(value_, p11_);
      const double v01 = interpolate(value_, p01_);
      bool changed = false;
      for (std::size_t k = 0; k < points_; ++k) {
        const double x = belief_[k];
        const double passive = m + beta * interpolate(value_, passive_next_[k]);
        const double active = x + beta * (x * v11 + (1.0 - x) * v01);
        // switch only on a strict improvement; ties keep the current action
        if (policy_[k] && passive > active + cfg_.value_tol) {
          policy_[k] = 0;
          changed = true;
        } else if (!policy_[k] && active > passive + cfg_.value_tol) {
          policy_[k] = 1;
          changed = true;
        }
      }
      if (!changed) return;
    }
    throw ConvergenceError("whittle_index: policy iteration did not settle");
  }

  // Passive minus active value at belief omega under the current solution.
  double gap(double omega, double m, const TransitionEstimate& p) const {
    const double beta = cfg_.discount;
    const double passive = m + beta * interpolate(value_, locate(propagate_belief(omega, p), points_));
    const double active =
        omega + beta * (omega * interpolate(value_, p11_) + (1.0 - omega) * interpolate(value_, p01_));
    return passive - active;
  }

 private:
  struct Form {
    double c = 0.0;
    double a = 0.0;
    double b = 0.0;
  };

  void prepare_ordering(const TransitionEstimate& p) {
    const double d = p.p11 - p.p01;
    const double h = 1.0 / static_cast<double>(points_ - 1);
    order_.resize(points_);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    if (std::abs(d) >= 1.0 - 1e-12) {
      core_size_ = points_;
      return;
    }
    const double pi = p.p01 / (1.0 - d);
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t i, std::size_t j) {
      return std::abs(belief_[i] - pi) < std::abs(belief_[j] - pi);
    });
    const double radius = h / (1.0 - std::abs(d)) + 3.0 * h;
    core_size_ = 0;
    while (core_size_ < points_ && std::abs(belief_[order_[core_size_]] - pi) <= radius) ++core_size_;
  }

  void evaluate_policy(double m) {
    const double beta = cfg_.discount;
    std::vector<Form> form(points_);
    std::vector<char> known(points_, 0);
    for (std::size_t k = 0; k < points_; ++k) {
      if (policy_[k]) {
        const double x = belief_[k];
        form[k] = {x, beta * x, beta * (1.0 - x)};
        known[k] = 1;
      }
    }

    // dense block around pi
    std::vector<std::size_t> slot(points_, points_);
    std::vector<std::size_t> members;
    for (std::size_t r = 0; r < core_size_; ++r) {
      const std::size_t k = order_[r];
      if (!policy_[k]) {
        slot[k] = members.size();
        members.push_back(k);
      }
    }
    const std::size_t n = members.size();
    if (n > 0) {
      std::vector<double> mat(n * n, 0.0);
      std::vector<Form> rhs(n);
      for (std::size_t r = 0; r < n; ++r) {
        const std::size_t k = members[r];
        mat[r * n + r] += 1.0;
        rhs[r].c = m;
        const Node nd = passive_next_[k];
        const double weights[2] = {1.0 - nd.weight, nd.weight};
        for (int e = 0; e < 2; ++e) {
          if (weights[e] == 0.0) continue;
          const std::size_t j = nd.index + static_cast<std::size_t>(e);
          const double w = beta * weights[e];
          if (known[j]) {
            rhs[r].c += w * form[j].c;
            rhs[r].a += w * form[j].a;
            rhs[r].b += w * form[j].b;
          } else if (slot[j] < n) {
            mat[r * n + slot[j]] -= w;
          } else {
            throw std::logic_error("whittle_index: passive block is not closed");
          }
        }
      }
      // Gaussian elimination with partial pivoting.
      for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r) {
          if (std::abs(mat[r * n + col]) > std::abs(mat[piv * n + col])) piv = r;
        }
        if (piv != col) {
          for (std::size_t c = 0; c < n; ++c) std::swap(mat[col * n + c], mat[piv * n + c]);
          std::swap(rhs[col], rhs[piv]);
        }
        const double diag = mat[col * n + col];
        for (std::size_t r = col + 1; r < n; ++r) {
          const double f = mat[r * n + col] / diag;
          if (f == 0.0) continue;
          for (std::size_t c = col; c < n; ++c) mat[r * n + c] -= f * mat[col * n + c];
          rhs[r].c -= f * rhs[col].c;
          rhs[r].a -= f * rhs[col].a;
          rhs[r].b -= f * rhs[col].b;
        }
      }
      for (std::size_t r = n; r-- > 0;) {
        Form acc = rhs[r];
        for (std::size_t c = r + 1; c < n; ++c) {
          const double f = mat[r * n + c];
          acc.c -= f * rhs[c].c;
          acc.a -= f * rhs[c].a;
          acc.b -= f * rhs[c].b;
        }
        const double diag = mat[r * n + r];
        rhs[r] = {acc.c / diag, acc.a / diag, acc.b / diag};
      }
      for (std::size_t r = 0; r < n; ++r) {
        form[members[r]] = rhs[r];
        known[members[r]] = 1;
      }
    }

    for (std::size_t r = core_size_; r < points_; ++r) {
      const std::size_t k = order_[r];
      if (known[k]) continue;
      const Node nd = passive_next_[k];
      Form f{m, 0.0, 0.0};
      const double weights[2] = {1.0 - nd.weight, nd.weight};
      for (int e = 0; e < 2; ++e) {
        if (weights[e] == 0.0) continue;
        const std::size_t j = nd.index + static_cast<std::size_t>(e);
        if (!known[j]) throw std::logic_error("whittle_index: passive ordering broken");
        const double w = beta * weights[e];
        f.c += w * form[j].c;
        f.a += w * form[j].a;
        f.b += w * form[j].b;
      }
      form[k] = f;
      known[k] = 1;
    }

    auto at = [&](Node nd) {
      const Form& lo = form[nd.index];
      const Form& hi = form[nd.index + 1];
      const double w = nd.weight;
      return Form{lo.c + w * (hi.c - lo.c), lo.a + w * (hi.a - lo.a), lo.b + w * (hi.b - lo.b)};
    };
    const Form fa = at(p11_);
    const Form fb = at(p01_);
    // A = fa.c + fa.a A + fa.b B,  B = fb.c + fb.a A + fb.b B
    const double m11 = 1.0 - fa.a;
    const double m12 = -fa.b;
    const double m21 = -fb.a;
    const double m22 = 1.0 - fb.b;
    const double det = m11 * m22 - m12 * m21;
    const double va = (fa.c * m22 - m12 * fb.c) / det;
    const double vb = (m11 * fb.c - m21 * fa.c) / det;
    for (std::size_t k = 0; k < points_; ++k) value_[k] = form[k].c + form[k].a * va + form[k].b * vb;
  }

  const WhittleConfig& cfg_;
  std::size_t points_;
  Node p11_;
  Node p01_;
  std::vector<double> belief_;
  std::vector<Node> passive_next_;
  std::vector<double> value_;
  std::vector<double> scratch_;
  std::vector<std::size_t> order_;
  std::size_t core_size_ = 0;
  std::vector<char> policy_;
};

}  // namespace

double whittle_index(double omega, const TransitionEstimate& p, const WhittleConfig& cfg) {
  cfg.validate();
  if (!(omega >= 0.0 && omega <= 1.0)) throw DomainError("whittle_index: belief must lie in [0, 1]");
  if (cfg.discount == 0.0) return omega;

  SubsidyProblem problem(p, cfg);
  auto gap_at = [&](double m) {
    problem.solve(m);
    return problem.gap(omega, m, p);
  };

  // Rewards lie in [0, 1], so subsidy 0 favours activity and 1 favours
  // passivity; widen only if interpolation error breaks the bracket.
  double lo = 0.0;
  double hi = 1.0;
  while (gap_at(lo) > 0.0) {
    lo -= 1.0;
    if (lo < -1.0 / (1.0 - cfg.discount)) throw ConvergenceError("whittle_index: invalid subsidy bracket");
  }
  while (gap_at(hi) < 0.0) {
    hi += 1.0;
    if (hi > 1.0 / (1.0 - cfg.discount)) throw ConvergenceError("whittle_index: invalid subsidy bracket");
  }
  while (hi - lo > cfg.subsidy_tol) {
    const double mid = 0.5 * (lo + hi);
    (gap_at(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

// Value of following "passive until the belief reaches the threshold, then
// active" from belief x, as an affine form c + cm*m + ca*V(p11) + cb*V(p01).
struct Affine {
  double c = 0.0;
  double cm = 0.0;
  double ca = 0.0;
  double cb = 0.0;
};

Affine threshold_value(double x, double threshold, const TransitionEstimate& p, double beta) {
  constexpr std::size_t max_steps = 1'000'000;
  const double d = p.p11 - p.p01;
  // tau contracts toward pi at rate |d|; once even the farthest point the
  // orbit can still reach lies below the threshold, it stays passive forever.
  const bool contracting = std::abs(d) < 1.0;
  const double pi = contracting ? p.p01 / (1.0 - d) : 0.0;
  double discount = 1.0;        // beta^k
  double passive_weight = 0.0;  // sum_{t<k} beta^t
  for (std::size_t k = 0; k < max_steps; ++k) {
    if (x >= threshold) {
      return {discount * x, passive_weight, discount * beta * x, discount * beta * (1.0 - x)};
    }
    if (contracting && pi + std::abs(x - pi) < threshold) break;
    const double next = propagate_belief(x, p);
    passive_weight += discount;
    discount *= beta;
    if (next == x || discount < 1e-300) break;
    x = next;
  }
  return {0.0, 1.0 / (1.0 - beta), 0.0, 0.0};
}

}  // namespace

double threshold_whittle_index(double omega, const TransitionEstimate& p, double discount) {
  if (!(omega >= 0.0 && omega <= 1.0)) throw DomainError("threshold_whittle_index: belief must lie in [0, 1]");
  if (!(discount >= 0.0 && discount < 1.0)) throw DomainError("threshold_whittle_index: discount must lie in [0, 1)");
  if (discount == 0.0 || p.p01 == p.p11) return omega;
  const double beta = discount;

  const Affine from11 = threshold_value(p.p11, omega, p, beta);
  const Affine from01 = threshold_value(p.p01, omega, p, beta);

  // Solve  a = from11(m, a, b),  b = from01(m, a, b)  for a, b affine in m.
  const double m11 = 1.0 - from11.ca;
  const double m12 = -from11.cb;
  const double m21 = -from01.ca;
  const double m22 = 1.0 - from01.cb;
  const double det = m11 * m22 - m12 * m21;
  const double a0 = (from11.c * m22 - m12 * from01.c) / det;
  const double a1 = (from11.cm * m22 - m12 * from01.cm) / det;
  const double b0 = (m11 * from01.c - m21 * from11.c) / det;
  const double b1 = (m11 * from01.cm - m21 * from11.cm) / det;

  // Indifference at omega: m + beta V(tau(omega)) = omega + beta [omega a + (1-omega) b].
  const Affine next = threshold_value(propagate_belief(omega, p), omega, p, beta);
  const double passive_c = beta * (next.c + next.ca * a0 + next.cb * b0);
  const double passive_m = 1.0 + beta * (next.cm + next.ca * a1 + next.cb * b1);
  const double active_c = omega + beta * (omega * a0 + (1.0 - omega) * b0);
  const double active_m = beta * (omega * a1 + (1.0 - omega) * b1);
  const double slope = passive_m - active_m;
  if (slope == 0.0) return omega;
  return (active_c - passive_c) / slope;
}

}  // namespace cogmac
