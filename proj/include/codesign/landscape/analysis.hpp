#pragma once

// Gradient-covariance landscape analysis: sampled gradient matrices, the
// uncentered covariance C = G G^T, its eigendecomposition, cumulative
// explained variance, effective dimensionality (exponential of the Shannon
// entropy of the normalized eigenspectrum), and morphology/control alignment
// ratios.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "json.hpp"

#include "codesign/io/csv.hpp"
#include "codesign/parallel.hpp"
#include "codesign/rng.hpp"
#include "codesign/space.hpp"
#include "codesign/task.hpp"

namespace codesign::landscape {

struct GradientMatrix {
  Mat G;  // m x N, columns are gradients scaled by 1/sqrt(N)
  int n_samples = 0;
  CoDesign mean;
  double sigma = 0.0;

  static GradientMatrix from_gradients(const std::vector<Vec>& gradients, const CoDesign& mean,
                                       double sigma) {
    if (gradients.empty()) throw std::invalid_argument("GradientMatrix: no gradients");
    const Eigen::Index m = gradients.front().size();
    GradientMatrix gm;
    gm.n_samples = static_cast<int>(gradients.size());
    gm.mean = mean;
    gm.sigma = sigma;
    gm.G.resize(m, gm.n_samples);
    const double scale = 1.0 / std::sqrt(static_cast<double>(gm.n_samples));
    for (int k = 0; k < gm.n_samples; ++k) {
      if (gradients[static_cast<std::size_t>(k)].size() != m)
        throw std::invalid_argument("GradientMatrix: gradient length mismatch");
      gm.G.col(k) = scale * gradients[static_cast<std::size_t>(k)];
    }
    if (!gm.G.allFinite()) throw std::invalid_argument("GradientMatrix: non-finite gradient");
    return gm;
  }
};

// Uncentered covariance G G^T, symmetrized to kill accumulation roundoff.
inline Mat covariance(const GradientMatrix& gm) {
  Mat C = gm.G * gm.G.transpose();
  return 0.5 * (C + C.transpose());
}

struct EigenDecomposition {
  Mat V;       // eigenvectors in columns, matching lambda order
  Vec lambda;  // descending
};

// Real symmetric eigendecomposition with descending eigenvalues and a
// deterministic sign convention: the largest-magnitude entry of each
// eigenvector (first such index on ties) is made positive. Eigenvalues in
// [-1e-10, 0) clamp to zero; anything more negative signals a broken
// covariance and is an error.
inline EigenDecomposition eigendecompose(const Mat& C) {
  if (C.rows() != C.cols()) throw std::invalid_argument("eigendecompose: matrix not square");
  const double asym = (C - C.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-8 * std::max(1.0, C.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("eigendecompose: matrix not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> solver(0.5 * (C + C.transpose()));
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigendecompose: solver failed");
  const Eigen::Index m = C.rows();
  EigenDecomposition out;
  out.V.resize(m, m);
  out.lambda.resize(m);
  // Eigen returns ascending order
  for (Eigen::Index k = 0; k < m; ++k) {
    out.lambda[k] = solver.eigenvalues()[m - 1 - k];
    out.V.col(k) = solver.eigenvectors().col(m - 1 - k);
  }
  for (Eigen::Index k = 0; k < m; ++k) {
    if (out.lambda[k] < 0.0) {
      if (out.lambda[k] < -1e-10)
        throw std::runtime_error("eigendecompose: eigenvalue below PSD tolerance: " +
                                 io::format_double(out.lambda[k]));
      out.lambda[k] = 0.0;
    }
    Eigen::Index imax = 0;
    double vmax = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double a = std::abs(out.V(i, k));
      if (a > vmax) {
        vmax = a;
        imax = i;
      }
    }
    if (out.V(imax, k) < 0.0) out.V.col(k) = -out.V.col(k);
  }
  return out;
}

// Prefix sums of the spectrum normalized by its total. An all-zero spectrum
// is reported as all ones (degenerate region: nothing varies).
inline Vec cumulative_explained_variance(const Vec& lambda) {
  const Eigen::Index m = lambda.size();
  Vec out(m);
  const double total = lambda.sum();
  if (total <= 0.0) {
    out.setOnes();
    return out;
  }
  double acc = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    acc += lambda[k];
    out[k] = acc / total;
  }
  // guard against roundoff pushing past 1
  for (Eigen::Index k = 0; k < m; ++k) out[k] = std::min(out[k], 1.0);
  out[m - 1] = 1.0;
  return out;
}

struct DegenerateSpectrum : std::runtime_error {
  DegenerateSpectrum() : std::runtime_error("effective_dimensionality: all-zero spectrum") {}
};

// exp of the Shannon entropy of the normalized eigenspectrum; zero
// eigenvalues contribute nothing (0 ln 0 := 0).
inline double effective_dimensionality(const Vec& lambda) {
  const double total = lambda.sum();
  if (!(total > 0.0)) throw DegenerateSpectrum();
  double entropy = 0.0;
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    if (lambda[k] < 0.0) throw std::invalid_argument("effective_dimensionality: negative eigenvalue");
    if (lambda[k] == 0.0) continue;
    const double p = lambda[k] / total;
    entropy -= p * std::log(p);
  }
  return std::exp(entropy);
}

// Per gradient: norm of the morphology (control) part over sqrt of its
// dimensionality; averages normalized to sum to one.
inline std::pair<double, double> alignment_ratio(std::span<const Vec> gradients,
                                                 const ParameterSpace& space) {
  if (gradients.empty()) throw std::invalid_argument("alignment_ratio: no gradients");
  const double sm = std::sqrt(static_cast<double>(space.morph_dim()));
  const double sc = std::sqrt(static_cast<double>(space.ctrl_dim()));
  double am = 0.0, ac = 0.0;
  for (const Vec& g : gradients) {
    auto [gm, gc] = split(space, g);
    am += gm.norm() / sm;
    ac += gc.norm() / sc;
  }
  am /= static_cast<double>(gradients.size());
  ac /= static_cast<double>(gradients.size());
  const double total = am + ac;
  if (!(total > 0.0)) throw std::invalid_argument("alignment_ratio: all gradients zero");
  return {am / total, ac / total};
}

struct RegionStats {
  Mat C;
  Mat V;
  Vec lambda;
  Vec explained;
  double ed = 0.0;
  double align_m = 0.0;
  double align_c = 0.0;
  double best_loss = 0.0;
  CoDesign mean;
  double sigma = 0.0;
  int n_samples = 0;
  int diverged = 0;  // samples whose evaluation returned the sentinel
};

// Samples N perturbed points around `mean`, evaluates loss and gradient at
// each, and assembles the region statistics. Evaluations run across the
// worker pool; all reductions are in fixed sample order.
inline RegionStats analyze_region(const TaskHandle& task, const CoDesign& mean, double sigma,
                                  int n_samples, Rng& rng, int workers = 1) {
  if (n_samples < 1) throw std::invalid_argument("analyze_region: need at least one sample");
  std::vector<CoDesign> points = perturb_gaussian(task.space, mean, sigma, n_samples, rng);
  std::vector<Evaluation> evals(points.size());
  parallel_for(static_cast<int>(points.size()), workers, [&](int i) {
    evals[static_cast<std::size_t>(i)] =
        task.evaluate_with_gradient(points[static_cast<std::size_t>(i)]);
  });

  RegionStats rs;
  rs.mean = mean;
  rs.sigma = sigma;
  rs.n_samples = n_samples;
  rs.best_loss = std::numeric_limits<double>::infinity();
  std::vector<Vec> gradients;
  gradients.reserve(points.size());
  for (const auto& ev : evals) {
    if (ev.loss >= kDivergedLossSentinel) {
      ++rs.diverged;
      continue;
    }
    rs.best_loss = std::min(rs.best_loss, ev.loss);
    gradients.push_back(*ev.gradient);
  }
  if (gradients.empty()) throw std::runtime_error("analyze_region: every sample diverged");

  GradientMatrix gm = GradientMatrix::from_gradients(gradients, mean, sigma);
  rs.C = covariance(gm);
  EigenDecomposition ed = eigendecompose(rs.C);
  rs.V = std::move(ed.V);
  rs.lambda = std::move(ed.lambda);
  rs.explained = cumulative_explained_variance(rs.lambda);
  rs.ed = effective_dimensionality(rs.lambda);
  std::tie(rs.align_m, rs.align_c) = alignment_ratio(gradients, task.space);
  return rs;
}

inline nlohmann::json to_json(const RegionStats& rs, bool full_eigvecs = false) {
  nlohmann::json j;
  j["n_samples"] = rs.n_samples;
  j["sigma"] = rs.sigma;
  j["diverged"] = rs.diverged;
  j["best_loss"] = rs.best_loss;
  j["ed"] = rs.ed;
  j["align_m"] = rs.align_m;
  j["align_c"] = rs.align_c;
  j["mean"] = std::vector<double>(rs.mean.begin(), rs.mean.end());
  j["eigenvalues"] = std::vector<double>(rs.lambda.begin(), rs.lambda.end());
  j["explained"] = std::vector<double>(rs.explained.begin(), rs.explained.end());
  if (full_eigvecs) {
    // row k is eigenvector k, matching eigenvalue order
    std::vector<std::vector<double>> rows;
    rows.reserve(static_cast<std::size_t>(rs.V.cols()));
    for (Eigen::Index k = 0; k < rs.V.cols(); ++k)
      rows.emplace_back(rs.V.col(k).begin(), rs.V.col(k).end());
    j["eigenvectors"] = rows;
  }
  return j;
}

struct SliceGrid {
  std::vector<std::vector<double>> loss;  // [alpha index][beta index], NaN = diverged cell
  std::vector<double> alpha, beta;        // grid coordinates
};

// Losses on the regular grid center + alpha*dir_a + beta*dir_b. Default
// resolution 50 evaluates exactly 2500 points.
inline SliceGrid slice_grid(const TaskHandle& task, const CoDesign& center, const Vec& dir_a,
                            const Vec& dir_b, double half_extent, int resolution,
                            int workers = 1) {
  if (resolution < 2) throw std::invalid_argument("slice_grid: resolution must be >= 2");
  check_dim(task.space, center, "slice_grid");
  if (dir_a.size() != center.size() || dir_b.size() != center.size())
    throw std::invalid_argument("slice_grid: direction dimension mismatch");
  if (std::abs(dir_a.norm() - 1.0) > 1e-6 || std::abs(dir_b.norm() - 1.0) > 1e-6)
    throw std::invalid_argument("slice_grid: directions must be unit vectors");

  SliceGrid grid;
  grid.alpha.resize(static_cast<std::size_t>(resolution));
  grid.beta.resize(static_cast<std::size_t>(resolution));
  for (int i = 0; i < resolution; ++i) {
    const double t = -half_extent + 2.0 * half_extent * i / (resolution - 1);
    grid.alpha[static_cast<std::size_t>(i)] = t;
    grid.beta[static_cast<std::size_t>(i)] = t;
  }
  grid.loss.assign(static_cast<std::size_t>(resolution),
                   std::vector<double>(static_cast<std::size_t>(resolution), 0.0));
  parallel_for(resolution * resolution, workers, [&](int cell) {
    const int a = cell / resolution;
    const int b = cell % resolution;
    const CoDesign x = project(
        task.space, center + grid.alpha[static_cast<std::size_t>(a)] * dir_a +
                        grid.beta[static_cast<std::size_t>(b)] * dir_b);
    double loss;
    try {
      loss = task.evaluate(x).loss;
      if (loss >= kDivergedLossSentinel) loss = std::nan("");
    } catch (...) {
      loss = std::nan("");
    }
    grid.loss[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = loss;
  });
  return grid;
}

inline void write_slice_csv(const SliceGrid& grid, const std::string& path,
                            const std::vector<std::string>& comments = {}) {
  io::CsvWriter w(path);
  for (const auto& c : comments) w.comment(c);
  w.header({"alpha", "beta", "loss"});
  for (std::size_t a = 0; a < grid.alpha.size(); ++a)
    for (std::size_t b = 0; b < grid.beta.size(); ++b)
      w.row({io::format_double(grid.alpha[a]), io::format_double(grid.beta[b]),
             io::format_double(grid.loss[a][b])});
}

}  // namespace codesign::landscape
