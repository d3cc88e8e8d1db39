#include "sgcn/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sgcn/errors.hpp"
#include "sgcn/kernels.hpp"
#include "sgcn/rng.hpp"

namespace sgcn {

std::vector<std::pair<Index, Index>> SpectralDecomposition::ties(double tol) const {
  std::vector<std::pair<Index, Index>> runs;
  Index start = 0;
  for (Index c = 1; c <= count(); ++c) {
    if (c < count() && std::abs(values[c - 1] - values[c]) <= tol) continue;
    if (c - start >= 2) runs.emplace_back(first_index + start, first_index + c - 1);
    start = c;
  }
  return runs;
}

SpectralDecomposition eig_full(const PropagationOperator& op) {
  if (!op.has_dense()) {
    throw CapabilityError("eig_full: N = " + std::to_string(op.size()) +
                          " exceeds the dense threshold; use eig_truncated");
  }
  Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(op.dense());
  if (solver.info() != Eigen::Success) throw ConvergenceError("eig_full: solver failed", -1.0);

  const Index n = op.size();
  SpectralDecomposition d;
  d.dimension = n;
  d.first_index = 0;
  d.values = solver.eigenvalues().reverse();
  d.vectors = solver.eigenvectors().rowwise().reverse();
  return d;
}

namespace {

Vector apply_vector(const LinearOperator& op, const Vector& v) {
  Matrix x = Eigen::Map<const Matrix>(v.data(), v.size(), 1);
  Matrix y = op.apply(x);
  return Eigen::Map<const Vector>(y.data(), y.size());
}

Vector random_unit(Index n, Rng& rng) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = rng.normal();
  return v / v.norm();
}

// Residual of the Ritz pair, estimated as |beta_m * s_{m-1,i}|.
double ritz_residual_estimate(double beta_last, const DenseMatrix& s, Index col) {
  return std::abs(beta_last * s(s.rows() - 1, col));
}

}  // namespace

SpectralDecomposition eig_truncated(const LinearOperator& op, Index k, SpectrumSide side,
                                    const LanczosOptions& options) {
  const Index n = op.size();
  if (k < 1 || k >= n) {
    throw InputError("eig_truncated: need 1 <= k < N (k = " + std::to_string(k) +
                     ", N = " + std::to_string(n) + ")");
  }
  const bool bottom = side == SpectrumSide::Bottom;
  const auto iterate = [&](const Vector& v) {
    Vector y = apply_vector(op, v);
    if (bottom) y = v - y;
    return y;
  };

  const Index budget = std::min(n, options.budget_per_pair * k + options.budget_base);
  DenseMatrix q(n, budget);
  std::vector<double> alpha;
  std::vector<double> beta;
  alpha.reserve(static_cast<std::size_t>(budget));
  beta.reserve(static_cast<std::size_t>(budget));

  Rng rng(options.seed);
  q.col(0) = random_unit(n, rng);

  // Ritz pairs from the current Krylov basis, largest first.
  struct Ritz {
    Vector theta;
    DenseMatrix s;
  };
  const auto solve_tridiagonal = [&](Index m) {
    Vector diag = Eigen::Map<const Vector>(alpha.data(), m);
    Vector sub = m > 1 ? Vector(Eigen::Map<const Vector>(beta.data(), m - 1)) : Vector(0);
    Eigen::SelfAdjointEigenSolver<DenseMatrix> tri;
    tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    return Ritz{tri.eigenvalues().reverse(), tri.eigenvectors().rowwise().reverse()};
  };

  const auto assemble = [&](Index m, const Ritz& ritz, double& worst) {
    SpectralDecomposition d;
    d.dimension = n;
    d.vectors = q.leftCols(m) * ritz.s.leftCols(k);
    d.values = ritz.theta.head(k);
    worst = 0.0;
    for (Index c = 0; c < k; ++c) {
      d.vectors.col(c).normalize();
      const Vector r = apply_vector(op, d.vectors.col(c));
      const double lambda = bottom ? 1.0 - d.values[c] : d.values[c];
      worst = std::max(worst, (r - lambda * d.vectors.col(c)).norm());
    }
    if (bottom) {
      d.values = (1.0 - d.values.array()).reverse().matrix().eval();
      d.vectors = d.vectors.rowwise().reverse().eval();
      d.first_index = n - k;
    }
    return d;
  };

  constexpr Index kCheckEvery = 10;
  constexpr double kBreakdown = 1e-12;
  double best_residual = std::numeric_limits<double>::infinity();

  for (Index j = 0; j < budget; ++j) {
    Vector w = iterate(q.col(j));
    const double a = q.col(j).dot(w);
    alpha.push_back(a);
    w -= a * q.col(j);
    if (j > 0) w -= beta[j - 1] * q.col(j - 1);
    kernels::project_out(q, j + 1, w);
    kernels::project_out(q, j + 1, w);
    double b = w.norm();

    const Index m = j + 1;
    const bool last = m == budget;
    bool restart = false;
    if (b < kBreakdown) {
      b = 0.0;
      restart = !last;
    }
    beta.push_back(b);

    if (!restart && m >= k && (last || m % kCheckEvery == 0)) {
      const Ritz ritz = solve_tridiagonal(m);
      double est = 0.0;
      for (Index c = 0; c < k; ++c) est = std::max(est, ritz_residual_estimate(b, ritz.s, c));
      if (est < options.tol || last) {
        double worst = 0.0;
        SpectralDecomposition d = assemble(m, ritz, worst);
        best_residual = std::min(best_residual, worst);
        if (worst < options.tol) return d;
        if (last) break;
      }
    }

    if (last) break;
    if (restart) {
      // Invariant subspace found; continue from a fresh direction.
      Vector fresh = random_unit(n, rng);
      kernels::project_out(q, m, fresh);
      kernels::project_out(q, m, fresh);
      const double norm = fresh.norm();
      if (norm < kBreakdown) break;
      q.col(m) = fresh / norm;
    } else {
      q.col(m) = w / b;
    }
  }

  throw ConvergenceError("eig_truncated: " + std::to_string(k) +
                             " eigenpairs did not reach residual " + std::to_string(options.tol) +
                             " within " + std::to_string(budget) + " iterations",
                         best_residual);
}

BandOperator::BandOperator(Index first, Index last, Vector values, DenseMatrix vectors,
                           bool splits_tie)
    : first_(first),
      last_(last),
      values_(std::move(values)),
      vectors_(std::move(vectors)),
      splits_tie_(splits_tie) {}

Matrix BandOperator::apply(const Matrix& x) const {
  Matrix out;
  kernels::band_apply(vectors_, values_, x, out);
  return out;
}

DenseMatrix BandOperator::to_dense() const {
  return vectors_ * values_.asDiagonal() * vectors_.transpose();
}

BandOperator band_project(const SpectralDecomposition& d, Index k1, Index k2) {
  if (k1 > k2 || !d.covers(k1, k2)) {
    throw RangeError("band_project: band [" + std::to_string(k1) + ", " + std::to_string(k2) +
                     "] is not covered by stored eigenpairs [" + std::to_string(d.first_index) +
                     ", " + std::to_string(d.last_index()) + "]");
  }
  bool splits = false;
  for (const auto& [lo, hi] : d.ties()) {
    if ((lo < k1 && k1 <= hi) || (lo <= k2 && k2 < hi)) splits = true;
  }
  const Index c1 = k1 - d.first_index;
  const Index width = k2 - k1 + 1;
  return BandOperator(k1, k2, d.values.segment(c1, width), d.vectors.middleCols(c1, width),
                      splits);
}

std::vector<SpectrumEntry> spectrum_report(const SpectralDecomposition& d) {
  std::vector<SpectrumEntry> table;
  table.reserve(static_cast<std::size_t>(d.count()));
  for (Index c = 0; c < d.count(); ++c) table.push_back({d.first_index + c, d.values[c]});
  return table;
}

}  // namespace sgcn
