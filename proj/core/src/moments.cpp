#include "crnsim/moments.hpp"

#include <algorithm>
#include <cmath>

#include "crnsim/error.hpp"

namespace crnsim {

namespace {

constexpr double kDefaultSubdivisions = 1e4;

struct Moments {
  Eigen::VectorXd m;
  Eigen::MatrixXd M;
};

Moments derivative(const MomentSystem& sys, const Moments& y) {
  Moments dy;
  dy.m = sys.drift * y.m + sys.constant;
  Eigen::MatrixXd AM = sys.drift * y.M;
  Eigen::MatrixXd bm = sys.constant * y.m.transpose();
  dy.M = AM + AM.transpose() + bm + bm.transpose() + sys.noise_constant;
  for (std::size_t l = 0; l < sys.dimension; ++l) {
    if (y.m(l) != 0.0) dy.M += y.m(l) * sys.noise_linear[l];
  }
  return dy;
}

void rk4_step(const MomentSystem& sys, Moments& y, double dt) {
  const Moments k1 = derivative(sys, y);
  const Moments k2 =
      derivative(sys, {y.m + 0.5 * dt * k1.m, y.M + 0.5 * dt * k1.M});
  const Moments k3 =
      derivative(sys, {y.m + 0.5 * dt * k2.m, y.M + 0.5 * dt * k2.M});
  const Moments k4 = derivative(sys, {y.m + dt * k3.m, y.M + dt * k3.M});
  y.m += dt / 6.0 * (k1.m + 2.0 * k2.m + 2.0 * k3.m + k4.m);
  y.M += dt / 6.0 * (k1.M + 2.0 * k2.M + 2.0 * k3.M + k4.M);
  y.M = 0.5 * (y.M + y.M.transpose()).eval();
}

Moments initial_moments(const MomentSystem& sys, std::span<const Count> x0) {
  if (x0.size() != sys.dimension) {
    throw StructuralError("initial state dimension mismatch");
  }
  Moments y;
  y.m.resize(static_cast<Eigen::Index>(sys.dimension));
  for (std::size_t i = 0; i < sys.dimension; ++i) {
    y.m(static_cast<Eigen::Index>(i)) = static_cast<double>(x0[i]);
  }
  y.M = y.m * y.m.transpose();
  return y;
}

}  // namespace

bool is_first_order(const ReactionNetwork& network) {
  return std::all_of(network.reactions().begin(), network.reactions().end(),
                     [](const Reaction& r) { return r.order() <= 1; });
}

MomentSystem build_moment_system(const ReactionNetwork& network) {
  if (!is_first_order(network)) {
    throw UnsupportedError(
        "moment equations close only for first-order networks (every reaction "
        "consumes at most one molecule)");
  }
  const auto d = static_cast<Eigen::Index>(network.n_species());
  MomentSystem sys;
  sys.dimension = network.n_species();
  sys.drift = Eigen::MatrixXd::Zero(d, d);
  sys.constant = Eigen::VectorXd::Zero(d);
  sys.noise_constant = Eigen::MatrixXd::Zero(d, d);
  sys.noise_linear.assign(sys.dimension, Eigen::MatrixXd::Zero(d, d));

  for (std::size_t k = 0; k < network.n_reactions(); ++k) {
    const Reaction& r = network.reaction(k);
    Eigen::VectorXd zeta(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      zeta(i) = static_cast<double>(network.jump(k)[static_cast<std::size_t>(i)]);
    }
    const Eigen::MatrixXd outer = zeta * zeta.transpose();
    if (r.inputs.empty()) {
      sys.constant += r.rate_constant * zeta;
      sys.noise_constant += r.rate_constant * outer;
    } else {
      // Single input molecule: lambda_k(x) = kappa_k x_l.
      const auto l = r.inputs.front().species;
      sys.drift.col(static_cast<Eigen::Index>(l)) += r.rate_constant * zeta;
      sys.noise_linear[l] += r.rate_constant * outer;
    }
  }
  return sys;
}

std::vector<MomentSolution> solve_moments_at(const MomentSystem& system,
                                             std::span<const Count> x0,
                                             std::span<const double> times,
                                             double dt) {
  if (times.empty()) return {};
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0) || (i > 0 && times[i] < times[i - 1])) {
      throw DomainError("output times must be nonnegative and nondecreasing");
    }
  }
  const double horizon = times.back();
  if (!(dt > 0.0)) dt = horizon > 0.0 ? horizon / kDefaultSubdivisions : 1.0;

  Moments y = initial_moments(system, x0);
  std::vector<MomentSolution> out;
  out.reserve(times.size());
  double t = 0.0;
  for (const double target : times) {
    while (t < target) {
      double step = std::min(dt, target - t);
      // Fold a sliver left over from rounding into this step.
      if (target - (t + step) < 1e-12 * dt) step = target - t;
      rk4_step(system, y, step);
      t = (step == target - t) ? target : t + step;
    }
    out.push_back({target, y.m, y.M});
  }
  return out;
}

MomentSolution solve_moments(const MomentSystem& system,
                             std::span<const Count> x0, double T, double dt) {
  if (!(T > 0.0) || !std::isfinite(T)) {
    throw DomainError("final time must be positive and finite");
  }
  const double times[] = {T};
  return solve_moments_at(system, x0, times, dt).front();
}

double halving_change(const MomentSystem& system, std::span<const Count> x0,
                      double T, double dt) {
  if (!(dt > 0.0)) dt = T / kDefaultSubdivisions;
  const MomentSolution coarse = solve_moments(system, x0, T, dt);
  const MomentSolution fine = solve_moments(system, x0, T, dt / 2.0);
  double worst = 0.0;
  auto update = [&](double a, double b) {
    const double scale = std::max({std::fabs(a), std::fabs(b), 1.0});
    worst = std::max(worst, std::fabs(a - b) / scale);
  };
  for (Eigen::Index i = 0; i < coarse.mean.size(); ++i) {
    update(coarse.mean(i), fine.mean(i));
    for (Eigen::Index j = 0; j < coarse.mean.size(); ++j) {
      update(coarse.second_moment(i, j), fine.second_moment(i, j));
    }
  }
  return worst;
}

}  // namespace crnsim
