#pragma once

// (mu/mu_w, lambda)-CMA-ES with rank-one and rank-mu covariance updates and
// cumulative step-size adaptation, following the standard parameterization.
// The search distribution lives in box coordinates; samples are projected
// into bounds for evaluation while updates use the raw samples.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "codesign/opt/stepper.hpp"
#include "codesign/parallel.hpp"

namespace codesign::opt {

struct CmaesConfig {
  double sigma0 = 0.3;      // initial step size in box coordinates
  int population = 50;      // lambda
  double elite_ratio = 0.25;
  int iterations = 100;
  int workers = 1;
};

class CmaesStepper : public Stepper {
 public:
  CmaesStepper(const TaskHandle& task, const CmaesConfig& cfg, EvalLog* log)
      : task_(task), cfg_(cfg), log_(log), n_(task.space.dim()) {
    if (cfg_.population < 4) throw std::invalid_argument("cmaes: population must be >= 4");
    lambda_ = cfg_.population;
    mu_ = static_cast<int>(std::ceil(cfg_.elite_ratio * lambda_));
    mu_ = std::max(1, std::min(mu_, lambda_));
    weights_.resize(static_cast<std::size_t>(mu_));
    for (int i = 0; i < mu_; ++i)
      weights_[static_cast<std::size_t>(i)] = std::log(mu_ + 0.5) - std::log(i + 1.0);
    const double wsum = std::accumulate(weights_.begin(), weights_.end(), 0.0);
    for (double& w : weights_) w /= wsum;
    double w2 = 0.0;
    for (double w : weights_) w2 += w * w;
    mueff_ = 1.0 / w2;
    const double n = static_cast<double>(n_);
    c_sigma_ = (mueff_ + 2.0) / (n + mueff_ + 5.0);
    d_sigma_ = 1.0 + 2.0 * std::max(0.0, std::sqrt((mueff_ - 1.0) / (n + 1.0)) - 1.0) + c_sigma_;
    c_c_ = (4.0 + mueff_ / n) / (n + 4.0 + 2.0 * mueff_ / n);
    c_1_ = 2.0 / ((n + 1.3) * (n + 1.3) + mueff_);
    c_mu_ = std::min(1.0 - c_1_, 2.0 * (mueff_ - 2.0 + 1.0 / mueff_) / ((n + 2.0) * (n + 2.0) + mueff_));
    chi_n_ = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
  }

  long long init(const Rng& rng) override {
    rng_ = std::make_unique<Rng>(rng);
    reset_best();
    t_ = 0;
    restarts_ = 0;
    Rng r = rng.derive({0xC3A5u});
    mean_ = sample_uniform(task_.space, r);
    reset_distribution();
    return 0;
  }

  long long iterate() override {
    begin_iteration();
    std::vector<Vec> z(static_cast<std::size_t>(lambda_)), y(static_cast<std::size_t>(lambda_));
    std::vector<CoDesign> x_raw(static_cast<std::size_t>(lambda_)),
        x_eval(static_cast<std::size_t>(lambda_));
    for (int k = 0; k < lambda_; ++k) {
      Rng kr = rng_->derive({0x5A3Du, static_cast<std::uint64_t>(t_), static_cast<std::uint64_t>(k)});
      Vec zk(n_);
      for (int d = 0; d < n_; ++d) zk[d] = kr.gaussian();
      z[static_cast<std::size_t>(k)] = zk;
      y[static_cast<std::size_t>(k)] = B_ * (D_.cwiseProduct(zk));
      x_raw[static_cast<std::size_t>(k)] = mean_ + sigma_ * y[static_cast<std::size_t>(k)];
      x_eval[static_cast<std::size_t>(k)] = project(task_.space, x_raw[static_cast<std::size_t>(k)]);
    }
    std::vector<double> losses(static_cast<std::size_t>(lambda_));
    parallel_for(lambda_, cfg_.workers, [&](int k) {
      losses[static_cast<std::size_t>(k)] = task_.evaluate(x_eval[static_cast<std::size_t>(k)]).loss;
    });
    for (int k = 0; k < lambda_; ++k) {
      note(losses[static_cast<std::size_t>(k)], x_eval[static_cast<std::size_t>(k)]);
      if (log_) log_->log(losses[static_cast<std::size_t>(k)], x_eval[static_cast<std::size_t>(k)]);
    }

    std::vector<int> order(static_cast<std::size_t>(lambda_));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return losses[static_cast<std::size_t>(a)] < losses[static_cast<std::size_t>(b)];
    });

    Vec y_w = Vec::Zero(n_);
    for (int i = 0; i < mu_; ++i)
      y_w += weights_[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    mean_ += sigma_ * y_w;

    // step-size path in the isotropic frame
    Vec z_w = Vec::Zero(n_);
    for (int i = 0; i < mu_; ++i)
      z_w += weights_[static_cast<std::size_t>(i)] * z[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    p_sigma_ = (1.0 - c_sigma_) * p_sigma_ +
               std::sqrt(c_sigma_ * (2.0 - c_sigma_) * mueff_) * (B_ * z_w);
    const double ps_norm = p_sigma_.norm();
    const double expected_decay =
        std::sqrt(1.0 - std::pow(1.0 - c_sigma_, 2.0 * (t_ + 1)));
    const bool hsig = ps_norm / expected_decay / chi_n_ < 1.4 + 2.0 / (n_ + 1.0);

    p_c_ = (1.0 - c_c_) * p_c_;
    if (hsig) p_c_ += std::sqrt(c_c_ * (2.0 - c_c_) * mueff_) * y_w;

    Mat rank_mu = Mat::Zero(n_, n_);
    for (int i = 0; i < mu_; ++i) {
      const Vec& yi = y[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
      rank_mu += weights_[static_cast<std::size_t>(i)] * (yi * yi.transpose());
    }
    const double hsig_corr = hsig ? 0.0 : c_c_ * (2.0 - c_c_);
    C_ = (1.0 - c_1_ - c_mu_) * C_ + c_1_ * (p_c_ * p_c_.transpose() + hsig_corr * C_) +
         c_mu_ * rank_mu;

    sigma_ *= std::exp((c_sigma_ / d_sigma_) * (ps_norm / chi_n_ - 1.0));

    ++t_;
    if (!update_eigensystem()) {
      // degenerate covariance: restart the distribution state around the
      // current mean and keep going
      ++restarts_;
      reset_distribution();
    }
    return lambda_;
  }

  long long evals_per_iteration() const override { return lambda_; }

  int internal_restarts() const { return restarts_; }

 private:
  void reset_distribution() {
    sigma_ = cfg_.sigma0;
    C_ = Mat::Identity(n_, n_);
    B_ = Mat::Identity(n_, n_);
    D_ = Vec::Ones(n_);
    p_sigma_ = Vec::Zero(n_);
    p_c_ = Vec::Zero(n_);
  }

  bool update_eigensystem() {
    if (!C_.allFinite() || !std::isfinite(sigma_) || sigma_ <= 0.0 || sigma_ > 1e6) return false;
    Eigen::SelfAdjointEigenSolver<Mat> solver(0.5 * (C_ + C_.transpose()));
    if (solver.info() != Eigen::Success) return false;
    const Vec& ev = solver.eigenvalues();
    if (!(ev.minCoeff() > 0.0)) return false;
    if (ev.maxCoeff() / ev.minCoeff() > 1e14) return false;
    B_ = solver.eigenvectors();
    D_ = ev.cwiseSqrt();
    return true;
  }

  const TaskHandle& task_;
  CmaesConfig cfg_;
  EvalLog* log_;
  int n_;
  int lambda_ = 0, mu_ = 0;
  std::vector<double> weights_;
  double mueff_ = 0, c_sigma_ = 0, d_sigma_ = 0, c_c_ = 0, c_1_ = 0, c_mu_ = 0, chi_n_ = 0;

  std::unique_ptr<Rng> rng_;
  int t_ = 0;
  int restarts_ = 0;
  CoDesign mean_;
  double sigma_ = 0.3;
  Mat C_, B_;
  Vec D_;
  Vec p_sigma_, p_c_;
};

inline RunRecord cmaes_run(const TaskHandle& task, const CmaesConfig& cfg, const Rng& rng,
                           bool log_points = false) {
  StepperFactory f = [&task, cfg](EvalLog* log) {
    return std::make_unique<CmaesStepper>(task, cfg, log);
  };
  nlohmann::json j = {{"sigma0", cfg.sigma0},
                      {"population", cfg.population},
                      {"elite_ratio", cfg.elite_ratio},
                      {"iterations", cfg.iterations}};
  return run_stepper(f, rng, cfg.iterations, "cmaes", j, log_points);
}

}  // namespace codesign::opt
