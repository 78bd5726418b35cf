#pragma once

// Particle filter optimization and its gradient-covariance variant. Both
// share one code path: particles are resampled within each region by a
// softmax of negative loss under an annealed temperature, then moved by
// Gaussian noise. GC-PFO additionally evaluates gradients, builds the
// region's uncentered gradient covariance, and maps the move noise through
// the bias matrix built from its eigendecomposition, concentrating
// exploration on the directions along which quality actually varies.
//
// Random substreams are keyed by (iteration, region, particle), and the
// gradient-free path consumes draws identically, so GC-PFO with an identity
// bias reproduces PFO bit for bit under the same seed.

#include <algorithm>
#include <cmath>
#include <vector>

#include "codesign/landscape/analysis.hpp"
#include "codesign/opt/stepper.hpp"
#include "codesign/parallel.hpp"

namespace codesign::opt {

enum class BiasMode { TraceNormalized, Sqrt, Identity };

inline const char* to_string(BiasMode m) {
  switch (m) {
    case BiasMode::TraceNormalized: return "trace_normalized";
    case BiasMode::Sqrt: return "sqrt";
    case BiasMode::Identity: return "identity";
  }
  return "?";
}

inline BiasMode bias_mode_from_string(const std::string& s) {
  if (s == "trace_normalized") return BiasMode::TraceNormalized;
  if (s == "sqrt") return BiasMode::Sqrt;
  if (s == "identity") return BiasMode::Identity;
  throw std::invalid_argument("unknown bias mode '" + s + "'");
}

struct PfoConfig {
  int regions = 5;
  int particles = 50;  // per region
  double sigma = 0.2;  // step size in box coordinates
  double tau0 = 10.0;  // resampling temperature parameter
  int iterations = 50;
  double epsilon = 1e-8;                          // trace normalization epsilon
  BiasMode bias_mode = BiasMode::TraceNormalized; // GC-PFO only
  bool use_gradients = true;                      // false = plain PFO
  int workers = 1;
};

// tau_t = 1 / (1 + tau0 * (t / T))
inline double anneal_temperature(double tau0, int t, int T) {
  if (!(tau0 > 0.0)) throw std::invalid_argument("anneal_temperature: tau0 must be > 0");
  if (t < 0 || t > T) throw std::invalid_argument("anneal_temperature: t outside [0, T]");
  return 1.0 / (1.0 + tau0 * (static_cast<double>(t) / static_cast<double>(T)));
}

// P i.i.d. draws from softmax(-loss / tau). Losses are shifted by their
// minimum before exponentiation; softmax is shift-invariant so this is exact.
inline std::vector<int> resample(const std::vector<double>& losses, double tau, Rng& rng) {
  if (!(tau > 0.0)) throw std::invalid_argument("resample: tau must be > 0");
  if (losses.empty()) throw std::invalid_argument("resample: no particles");
  const double lmin = *std::min_element(losses.begin(), losses.end());
  std::vector<double> cdf(losses.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < losses.size(); ++i) {
    acc += std::exp(-(losses[i] - lmin) / tau);
    cdf[i] = acc;
  }
  std::vector<int> picks(losses.size());
  for (std::size_t k = 0; k < losses.size(); ++k) {
    const double u = rng.uniform01() * acc;
    picks[k] = static_cast<int>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    if (picks[k] >= static_cast<int>(losses.size())) picks[k] = static_cast<int>(losses.size()) - 1;
  }
  return picks;
}

// Eq. bias matrix. trace_normalized: beta = V diag(lambda / (tr + eps));
// sqrt: beta = V diag(sqrt(lambda / (tr + eps))); identity: the PFO
// reduction, beta = I.
inline Mat bias_matrix(const Mat& V, const Vec& lambda, double epsilon, BiasMode mode) {
  const Eigen::Index m = lambda.size();
  if (mode == BiasMode::Identity) return Mat::Identity(m, m);
  if (!(epsilon > 0.0)) throw std::invalid_argument("bias_matrix: epsilon must be > 0");
  for (Eigen::Index i = 0; i < m; ++i)
    if (lambda[i] < 0.0) throw std::invalid_argument("bias_matrix: negative eigenvalue");
  const double denom = lambda.sum() + epsilon;
  Vec scaled = lambda / denom;
  if (mode == BiasMode::Sqrt) scaled = scaled.cwiseSqrt();
  return V * scaled.asDiagonal();
}

class PfoStepper : public Stepper {
 public:
  PfoStepper(const TaskHandle& task, const PfoConfig& cfg, EvalLog* log)
      : task_(task), cfg_(cfg), log_(log) {}

  long long init(const Rng& rng) override {
    rng_ = std::make_unique<Rng>(rng);
    reset_best();
    t_ = 0;
    particles_.assign(static_cast<std::size_t>(cfg_.regions),
                      std::vector<CoDesign>(static_cast<std::size_t>(cfg_.particles)));
    for (int r = 0; r < cfg_.regions; ++r) {
      Rng mean_rng = rng.derive({0xA11Cu, static_cast<std::uint64_t>(r)});
      const CoDesign mean = sample_uniform(task_.space, mean_rng);
      for (int i = 0; i < cfg_.particles; ++i) {
        Rng prng = rng.derive({0xB22Du, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(i)});
        CoDesign x(task_.space.dim());
        for (int d = 0; d < task_.space.dim(); ++d) {
          const double width = task_.space.upper[d] - task_.space.lower[d];
          x[d] = mean[d] + cfg_.sigma * width * prng.gaussian();
        }
        particles_[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)] =
            project(task_.space, x);
      }
    }
    return 0;
  }

  long long iterate() override {
    begin_iteration();
    const int R = cfg_.regions, P = cfg_.particles;
    // past the nominal schedule (restart loop may run longer) tau stays final
    const double tau = anneal_temperature(cfg_.tau0, std::min(t_, cfg_.iterations), cfg_.iterations);

    std::vector<Evaluation> evals(static_cast<std::size_t>(R * P));
    parallel_for(R * P, cfg_.workers, [&](int idx) {
      const int r = idx / P, i = idx % P;
      const CoDesign& x = particles_[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)];
      evals[static_cast<std::size_t>(idx)] =
          cfg_.use_gradients ? task_.evaluate_with_gradient(x) : task_.evaluate(x);
    });
    for (int idx = 0; idx < R * P; ++idx) {
      const int r = idx / P, i = idx % P;
      note(evals[static_cast<std::size_t>(idx)].loss,
           particles_[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)]);
      if (log_)
        log_->log(evals[static_cast<std::size_t>(idx)].loss,
                  particles_[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)]);
    }

    for (int r = 0; r < R; ++r) {
      std::vector<double> losses(static_cast<std::size_t>(P));
      for (int i = 0; i < P; ++i) losses[static_cast<std::size_t>(i)] = evals[static_cast<std::size_t>(r * P + i)].loss;

      Mat beta;
      const bool biased = cfg_.use_gradients && cfg_.bias_mode != BiasMode::Identity;
      if (biased) {
        std::vector<Vec> grads;
        grads.reserve(static_cast<std::size_t>(P));
        for (int i = 0; i < P; ++i) {
          const auto& ev = evals[static_cast<std::size_t>(r * P + i)];
          grads.push_back(ev.gradient ? *ev.gradient : Vec::Zero(task_.space.dim()));
        }
        // region mean is immaterial for the covariance itself
        auto gm = landscape::GradientMatrix::from_gradients(
            grads, particles_[static_cast<std::size_t>(r)].front(), cfg_.sigma);
        auto eig = landscape::eigendecompose(landscape::covariance(gm));
        beta = bias_matrix(eig.V, eig.lambda, cfg_.epsilon, cfg_.bias_mode);
      }

      Rng rrng = rng_->derive({0xC33Eu, static_cast<std::uint64_t>(t_), static_cast<std::uint64_t>(r)});
      const std::vector<int> picks = resample(losses, tau, rrng);

      std::vector<CoDesign> next(static_cast<std::size_t>(P));
      for (int i = 0; i < P; ++i) {
        Rng urng = rng_->derive({0xD44Fu, static_cast<std::uint64_t>(t_),
                                 static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(i)});
        Vec eta(task_.space.dim());
        for (int d = 0; d < task_.space.dim(); ++d) eta[d] = cfg_.sigma * urng.gaussian();
        const CoDesign& base =
            particles_[static_cast<std::size_t>(r)][static_cast<std::size_t>(picks[static_cast<std::size_t>(i)])];
        CoDesign moved = biased ? CoDesign(base + beta * eta) : CoDesign(base + eta);
        next[static_cast<std::size_t>(i)] = project(task_.space, moved);
      }
      particles_[static_cast<std::size_t>(r)] = std::move(next);
    }
    ++t_;
    return static_cast<long long>(R) * P;
  }

  long long evals_per_iteration() const override {
    return static_cast<long long>(cfg_.regions) * cfg_.particles;
  }

 private:
  const TaskHandle& task_;
  PfoConfig cfg_;
  EvalLog* log_;
  std::unique_ptr<Rng> rng_;
  int t_ = 0;
  std::vector<std::vector<CoDesign>> particles_;  // [region][particle]
};

inline nlohmann::json pfo_config_json(const PfoConfig& cfg) {
  return {{"regions", cfg.regions},   {"particles", cfg.particles},
          {"sigma", cfg.sigma},       {"tau0", cfg.tau0},
          {"iterations", cfg.iterations}, {"epsilon", cfg.epsilon},
          {"bias_mode", to_string(cfg.bias_mode)}, {"use_gradients", cfg.use_gradients}};
}

inline RunRecord gcpfo_run(const TaskHandle& task, PfoConfig cfg, const Rng& rng,
                           bool log_points = false) {
  cfg.use_gradients = true;
  StepperFactory f = [&task, cfg](EvalLog* log) {
    return std::make_unique<PfoStepper>(task, cfg, log);
  };
  return run_stepper(f, rng, cfg.iterations, "gcpfo", pfo_config_json(cfg), log_points);
}

inline RunRecord pfo_run(const TaskHandle& task, PfoConfig cfg, const Rng& rng,
                         bool log_points = false) {
  cfg.use_gradients = false;
  cfg.bias_mode = BiasMode::Identity;
  StepperFactory f = [&task, cfg](EvalLog* log) {
    return std::make_unique<PfoStepper>(task, cfg, log);
  };
  return run_stepper(f, rng, cfg.iterations, "pfo", pfo_config_json(cfg), log_points);
}

}  // namespace codesign::opt
