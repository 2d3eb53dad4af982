#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <vector>

#include "faultloc/errors.hpp"
#include "faultloc/rng.hpp"
#include "faultloc/solvers.hpp"

namespace faultloc {

namespace {

// Direct summation of ||B theta - y||_1 + lambda ||theta||_1; the oracle
// carries its own evaluator so it shares nothing with the solvers it checks.
double direct_objective(const RMatrix& B, const RVector& y, const RVector& theta,
                        double lambda) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < B.rows(); ++i) {
    double r = -y(i);
    for (Eigen::Index j = 0; j < B.cols(); ++j) {
      r += B(i, j) * theta(j);
    }
    acc += std::abs(r);
  }
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    acc += lambda * std::abs(theta(j));
  }
  return acc;
}

// 1-D restriction t -> f(theta + t*dir) given the cached residual r = B theta - y
// and the direction image bd = B dir.
double line_objective(const RVector& r, const RVector& bd, const RVector& theta,
                      const RVector& dir, double lambda, double t) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    acc += std::abs(r(i) + t * bd(i));
  }
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    acc += lambda * std::abs(theta(j) + t * dir(j));
  }
  return acc;
}

// Golden-section minimization of a convex 1-D function over [lo, hi].
template <typename F>
double golden_section(F&& g, double lo, double hi) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = g(c);
  double fd = g(d);
  for (int i = 0; i < 90 && (b - a) > 1e-14 * (std::abs(a) + std::abs(b) + 1.0); ++i) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = g(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = g(d);
    }
  }
  return fc <= fd ? c : d;
}

std::vector<RVector> search_directions(Eigen::Index n) {
  std::vector<RVector> directions;
  for (Eigen::Index j = 0; j < n; ++j) {
    RVector e = RVector::Zero(n);
    e(j) = 1.0;
    directions.push_back(e);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      RVector e = RVector::Zero(n);
      e(i) = M_SQRT1_2;
      e(j) = M_SQRT1_2;
      directions.push_back(e);
      e(j) = -M_SQRT1_2;
      directions.push_back(e);
    }
  }
  if (n >= 3) {
    // Full sign diagonals (one representative per +-pair) and a few fixed
    // pseudo-random directions; the minimum sits where several kink planes
    // meet, and escaping such a corner can need an oblique move.
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::uint64_t mask = 0; mask < (1ULL << (n - 1)); ++mask) {
      RVector e(n);
      e(0) = scale;
      for (Eigen::Index j = 1; j < n; ++j) {
        e(j) = ((mask >> (j - 1)) & 1u) ? -scale : scale;
      }
      directions.push_back(e);
    }
    Rng rng(0xbb67ae8584caa73bULL);
    for (int extra = 0; extra < 16; ++extra) {
      RVector e(n);
      for (Eigen::Index j = 0; j < n; ++j) {
        e(j) = rng.next_uniform(-1.0, 1.0);
      }
      const double norm = e.norm();
      if (norm > 0.0) {
        directions.push_back(e / norm);
      }
    }
  }
  return directions;
}

// Golden-section sweeps over the direction set until no direction improves.
void sweep_until_stalled(const RMatrix& B, const RVector& y, double lambda, double span,
                         const std::vector<RVector>& directions, RVector& theta,
                         double& best_value) {
  RVector residual(B.rows());
  RVector bd(B.rows());
  for (int round = 0; round < 200; ++round) {
    residual.noalias() = B * theta;
    residual -= y;
    bool improved = false;
    for (const RVector& dir : directions) {
      bd.noalias() = B * dir;
      const auto g = [&](double t) {
        return line_objective(residual, bd, theta, dir, lambda, t);
      };
      const double t_star = golden_section(g, -span, span);
      const double candidate = g(t_star);
      if (candidate < best_value - 1e-13 * (1.0 + best_value)) {
        theta += t_star * dir;
        residual += t_star * bd;
        best_value = candidate;
        improved = true;
      }
    }
    if (!improved) {
      break;
    }
  }
}

// The objective is piecewise linear, so refinement can stall on a kink
// vertex whose descent cone misses every fixed direction. The escape walks
// the vertex's incident edges: null directions of (n-1)-subsets of the
// hyperplanes active there. A vertex with no descending edge is the global
// minimum of a convex piecewise-linear function.
bool edge_descent_step(const RMatrix& B, const RVector& y, double lambda, double span,
                       RVector& theta, double& best_value) {
  const Eigen::Index n = theta.size();
  if (n < 2) {
    return false;
  }
  const RVector residual = B * theta - y;
  const double r_scale = std::max(residual.cwiseAbs().maxCoeff(), 1.0);
  const double t_scale = std::max(theta.cwiseAbs().maxCoeff(), 1.0);

  // Gather active hyperplane normals: measurement rows with near-zero
  // residual and near-zero coordinates, most active first.
  std::vector<std::pair<double, int>> activity;  // (measure, id); id < m: row, else coord
  for (Eigen::Index i = 0; i < B.rows(); ++i) {
    activity.emplace_back(std::abs(residual(i)) / r_scale, static_cast<int>(i));
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    activity.emplace_back(std::abs(theta(j)) / t_scale, static_cast<int>(B.rows() + j));
  }
  std::sort(activity.begin(), activity.end());
  std::vector<int> actives;
  for (const auto& [measure, id] : activity) {
    if (measure > 1e-6 && actives.size() >= static_cast<std::size_t>(n - 1)) {
      break;
    }
    actives.push_back(id);
    if (actives.size() >= static_cast<std::size_t>(n + 4)) {
      break;
    }
  }
  if (actives.size() < static_cast<std::size_t>(n - 1)) {
    return false;
  }

  RVector bd(B.rows());
  std::vector<int> subset(n - 1);
  std::vector<int> idx(n - 1);
  for (Eigen::Index i = 0; i < n - 1; ++i) idx[i] = static_cast<int>(i);

  bool improved = false;
  for (;;) {
    RMatrix normals(n - 1, n);
    for (Eigen::Index row = 0; row < n - 1; ++row) {
      const int id = actives[idx[row]];
      if (id < B.rows()) {
        normals.row(row) = B.row(id);
      } else {
        normals.row(row).setZero();
        normals(row, id - B.rows()) = 1.0;
      }
    }
    const Eigen::FullPivLU<RMatrix> lu(normals);
    if (lu.dimensionOfKernel() == 1) {
      RVector dir = lu.kernel().col(0);
      dir.normalize();
      bd.noalias() = B * dir;
      const RVector base = B * theta - y;
      const auto g = [&](double t) {
        return line_objective(base, bd, theta, dir, lambda, t);
      };
      const double t_star = golden_section(g, -span, span);
      const double candidate = g(t_star);
      if (candidate < best_value - 1e-13 * (1.0 + best_value)) {
        theta += t_star * dir;
        best_value = candidate;
        improved = true;
      }
    }

    int pos = static_cast<int>(n) - 2;
    const int total = static_cast<int>(actives.size());
    while (pos >= 0 && idx[pos] == total - (static_cast<int>(n) - 1) + pos) --pos;
    if (pos < 0) break;
    ++idx[pos];
    for (int j = pos + 1; j < static_cast<int>(n) - 1; ++j) idx[j] = idx[j - 1] + 1;
  }
  return improved;
}

// Line-search refinement with edge-descent escapes.
void refine(const RMatrix& B, const RVector& y, double lambda, double radius,
            RVector& theta, double& best_value) {
  const std::vector<RVector> directions = search_directions(theta.size());
  const double span = 2.0 * radius;
  for (int outer = 0; outer < 100; ++outer) {
    sweep_until_stalled(B, y, lambda, span, directions, theta, best_value);
    if (!edge_descent_step(B, y, lambda, span, theta, best_value)) {
      break;
    }
  }
}

}  // namespace

RVector oracle_solve_small(const RMatrix& B, const RVector& y, double lambda) {
  const Eigen::Index n = B.cols();
  if (n > 6) {
    throw ValidationError("oracle supports dimension <= 6, got " + std::to_string(n));
  }
  if (!(lambda > 0.0)) {
    throw ValidationError("oracle requires lambda > 0");
  }
  if (B.rows() != y.size()) {
    throw ValidationError("oracle: dimension mismatch");
  }

  // Every minimizer theta* obeys lambda ||theta*||_1 <= f(theta*) <= f(0),
  // so the box [-radius, radius]^n contains the whole solution set.
  const double radius = y.lpNorm<1>() / lambda;
  if (radius == 0.0) {
    return RVector::Zero(n);
  }

  const int per_axis = n <= 2 ? 33 : n == 3 ? 21 : n == 4 ? 15 : n == 5 ? 11 : 9;
  const double spacing = 2.0 * radius / (per_axis - 1);

  struct Candidate {
    RVector theta;
    double value;
  };
  constexpr std::size_t kStarts = 6;
  std::vector<Candidate> starts;
  starts.push_back({RVector::Zero(n), direct_objective(B, y, RVector::Zero(n), lambda)});

  RVector point(n);
  std::vector<int> idx(n, 0);
  for (;;) {
    for (Eigen::Index j = 0; j < n; ++j) {
      point(j) = -radius + spacing * idx[j];
    }
    const double value = direct_objective(B, y, point, lambda);
    if (starts.size() < kStarts) {
      starts.push_back({point, value});
      std::sort(starts.begin(), starts.end(),
                [](const Candidate& a, const Candidate& b) { return a.value < b.value; });
    } else if (value < starts.back().value) {
      starts.back() = {point, value};
      std::sort(starts.begin(), starts.end(),
                [](const Candidate& a, const Candidate& b) { return a.value < b.value; });
    }

    Eigen::Index carry = 0;
    while (carry < n && ++idx[carry] == per_axis) {
      idx[carry] = 0;
      ++carry;
    }
    if (carry == n) {
      break;
    }
  }

  for (Candidate& start : starts) {
    refine(B, y, lambda, radius, start.theta, start.value);
  }
  const auto best = std::min_element(
      starts.begin(), starts.end(),
      [](const Candidate& a, const Candidate& b) { return a.value < b.value; });
  return best->theta;
}

}  // namespace faultloc
