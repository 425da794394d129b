#pragma once

// Exact first and second moments of the tau-leap schemes on first-order
// networks, obtained by pushing moments through one step at a time. Each
// step is affine in the state plus Poisson noise whose covariance is affine in
// the state, so the recursion closes. Valid while no clamp ([x]^+ or the
// zero floor) is active, i.e. for abundant species. Test-only reference.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "crnsim/network.hpp"

namespace crnsim::testing {

enum class LeapScheme { Euler, Midpoint, WeakTrap };

struct AffineNetwork {
  // lambda_k(x) = c[k] + a[k] . x
  std::vector<double> c;
  std::vector<Eigen::VectorXd> a;
  std::vector<Eigen::VectorXd> zeta;
  Eigen::MatrixXd A;  // sum_k zeta_k a_k^T
  Eigen::VectorXd b;  // sum_k zeta_k c_k
};

inline AffineNetwork affine_form(const ReactionNetwork& net) {
  const auto d = static_cast<Eigen::Index>(net.n_species());
  AffineNetwork out;
  out.A = Eigen::MatrixXd::Zero(d, d);
  out.b = Eigen::VectorXd::Zero(d);
  for (std::size_t k = 0; k < net.n_reactions(); ++k) {
    const Reaction& r = net.reaction(k);
    Eigen::VectorXd a = Eigen::VectorXd::Zero(d);
    double c = 0.0;
    if (r.inputs.empty()) {
      c = r.rate_constant;
    } else {
      a(static_cast<Eigen::Index>(r.inputs.front().species)) = r.rate_constant;
    }
    Eigen::VectorXd z(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      z(i) = static_cast<double>(net.jump(k)[static_cast<std::size_t>(i)]);
    }
    out.A += z * a.transpose();
    out.b += c * z;
    out.c.push_back(c);
    out.a.push_back(a);
    out.zeta.push_back(z);
  }
  return out;
}

struct Moments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd second;  // E[W W^T]
};

// X' = G W + g + eps with E[eps eps^T | W] = sum_k zeta_k zeta_k^T (alpha_k +
// beta_k . W) and E[eps | W] = 0.
inline Moments push(const Moments& w, const Eigen::MatrixXd& G,
                    const Eigen::VectorXd& g, const AffineNetwork& net,
                    const std::vector<double>& alpha,
                    const std::vector<Eigen::VectorXd>& beta) {
  Moments x;
  x.mean = G * w.mean + g;
  x.second = G * w.second * G.transpose() + G * w.mean * g.transpose() +
             g * w.mean.transpose() * G.transpose() + g * g.transpose();
  for (std::size_t k = 0; k < net.zeta.size(); ++k) {
    const double rate = alpha[k] + beta[k].dot(w.mean);
    x.second += rate * net.zeta[k] * net.zeta[k].transpose();
  }
  return x;
}

inline Moments leap_step(const Moments& z, const AffineNetwork& net,
                         LeapScheme scheme, double s, double theta) {
  const auto d = z.mean.size();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(d, d);
  const std::size_t R = net.zeta.size();
  std::vector<double> alpha(R);
  std::vector<Eigen::VectorXd> beta(R);
  switch (scheme) {
    case LeapScheme::Euler: {
      for (std::size_t k = 0; k < R; ++k) {
        alpha[k] = s * net.c[k];
        beta[k] = s * net.a[k];
      }
      return push(z, I + s * net.A, s * net.b, net, alpha, beta);
    }
    case LeapScheme::Midpoint: {
      // rho(Z) = S Z + sv
      const Eigen::MatrixXd S = I + 0.5 * s * net.A;
      const Eigen::VectorXd sv = 0.5 * s * net.b;
      for (std::size_t k = 0; k < R; ++k) {
        alpha[k] = s * (net.c[k] + net.a[k].dot(sv));
        beta[k] = s * S.transpose() * net.a[k];
      }
      return push(z, I + s * net.A * S, s * (net.A * sv + net.b), net, alpha, beta);
    }
    case LeapScheme::WeakTrap: {
      const double xi1 = 0.5 / (theta * (1.0 - theta));
      const double xi2 = xi1 - 1.0;
      // Stage 1: Y = P1 Z + q1 + eps1; carry the joint moments of (Z, Y).
      const Eigen::MatrixXd P1 = I + theta * s * net.A;
      const Eigen::VectorXd q1 = theta * s * net.b;
      for (std::size_t k = 0; k < R; ++k) {
        alpha[k] = theta * s * net.c[k];
        beta[k] = theta * s * net.a[k];
      }
      const Moments y = push(z, P1, q1, net, alpha, beta);
      const Eigen::MatrixXd yz = P1 * z.second + q1 * z.mean.transpose();
      Moments w;
      w.mean.resize(2 * d);
      w.mean << z.mean, y.mean;
      w.second.resize(2 * d, 2 * d);
      w.second << z.second, yz.transpose(), yz, y.second;
      // Stage 2: rates xi1 lambda(Y) - xi2 lambda(Z) over (1 - theta) s.
      const double s2 = (1.0 - theta) * s;
      Eigen::MatrixXd G(d, 2 * d);
      G << -s2 * xi2 * net.A, I + s2 * xi1 * net.A;
      for (std::size_t k = 0; k < R; ++k) {
        alpha[k] = s2 * net.c[k];
        beta[k].resize(2 * d);
        beta[k] << -s2 * xi2 * net.a[k], s2 * xi1 * net.a[k];
      }
      return push(w, G, s2 * net.b, net, alpha, beta);
    }
  }
  return z;
}

/// Moments of Z(T) for the scheme started at x0 with step h (last step
/// truncated to land on T).
inline Moments leap_moments(const ReactionNetwork& network, const State& x0,
                            double T, double h, LeapScheme scheme,
                            double theta = 0.5) {
  const AffineNetwork net = affine_form(network);
  Moments z;
  z.mean.resize(static_cast<Eigen::Index>(x0.size()));
  for (std::size_t i = 0; i < x0.size(); ++i) {
    z.mean(static_cast<Eigen::Index>(i)) = static_cast<double>(x0[i]);
  }
  z.second = z.mean * z.mean.transpose();
  const auto n = static_cast<long>(std::ceil(T / h * (1.0 - 1e-10)));
  for (long i = 0; i < n; ++i) {
    const double s = (i + 1 == n) ? T - static_cast<double>(i) * h : h;
    z = leap_step(z, net, scheme, s, theta);
  }
  return z;
}

}  // namespace crnsim::testing
