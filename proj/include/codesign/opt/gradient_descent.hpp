#pragma once

// Gradient-based baselines on the projected box: SGD with momentum and Adam.
// One gradient evaluation per iteration; a diverged evaluation yields a zero
// gradient, so the iterate simply stays put.

#include <cmath>

#include "codesign/opt/stepper.hpp"

namespace codesign::opt {

struct SgdConfig {
  double lr = 0.01;
  double momentum = 0.9;
  int iterations = 200;
};

class SgdStepper : public Stepper {
 public:
  SgdStepper(const TaskHandle& task, const SgdConfig& cfg, EvalLog* log)
      : task_(task), cfg_(cfg), log_(log) {}

  long long init(const Rng& rng) override {
    reset_best();
    Rng r = rng.derive({0x56Du});
    x_ = sample_uniform(task_.space, r);
    velocity_ = Vec::Zero(task_.space.dim());
    eval_current();
    return 1;
  }

  long long iterate() override {
    begin_iteration();
    velocity_ = cfg_.momentum * velocity_ - cfg_.lr * grad_;
    x_ = project(task_.space, x_ + velocity_);
    eval_current();
    return 1;
  }

  long long evals_per_iteration() const override { return 1; }
  long long init_evals() const override { return 1; }

 private:
  void eval_current() {
    Evaluation ev = task_.evaluate_with_gradient(x_);
    grad_ = ev.gradient ? *ev.gradient : Vec::Zero(task_.space.dim());
    note(ev.loss, x_);
    if (log_) log_->log(ev.loss, x_);
  }

  const TaskHandle& task_;
  SgdConfig cfg_;
  EvalLog* log_;
  CoDesign x_;
  Vec velocity_;
  Vec grad_;
};

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int iterations = 200;
};

class AdamStepper : public Stepper {
 public:
  AdamStepper(const TaskHandle& task, const AdamConfig& cfg, EvalLog* log)
      : task_(task), cfg_(cfg), log_(log) {}

  long long init(const Rng& rng) override {
    reset_best();
    Rng r = rng.derive({0xADA4u});
    x_ = sample_uniform(task_.space, r);
    m_ = Vec::Zero(task_.space.dim());
    v_ = Vec::Zero(task_.space.dim());
    t_ = 0;
    eval_current();
    return 1;
  }

  long long iterate() override {
    begin_iteration();
    ++t_;
    m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grad_;
    v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * grad_.cwiseProduct(grad_);
    const double c1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double c2 = 1.0 - std::pow(cfg_.beta2, t_);
    const Vec step =
        (m_ / c1).cwiseQuotient(((v_ / c2).cwiseSqrt().array() + cfg_.epsilon).matrix());
    x_ = project(task_.space, x_ - cfg_.lr * step);
    eval_current();
    return 1;
  }

  long long evals_per_iteration() const override { return 1; }
  long long init_evals() const override { return 1; }

 private:
  void eval_current() {
    Evaluation ev = task_.evaluate_with_gradient(x_);
    grad_ = ev.gradient ? *ev.gradient : Vec::Zero(task_.space.dim());
    note(ev.loss, x_);
    if (log_) log_->log(ev.loss, x_);
  }

  const TaskHandle& task_;
  AdamConfig cfg_;
  EvalLog* log_;
  CoDesign x_;
  Vec m_, v_, grad_;
  int t_ = 0;
};

inline RunRecord sgd_run(const TaskHandle& task, const SgdConfig& cfg, const Rng& rng,
                         bool log_points = false) {
  if (!(cfg.lr >= 0.0)) throw std::invalid_argument("sgd_run: lr must be nonnegative");
  StepperFactory f = [&task, cfg](EvalLog* log) { return std::make_unique<SgdStepper>(task, cfg, log); };
  nlohmann::json j = {{"lr", cfg.lr}, {"momentum", cfg.momentum}, {"iterations", cfg.iterations}};
  return run_stepper(f, rng, cfg.iterations, "sgd", j, log_points);
}

inline RunRecord adam_run(const TaskHandle& task, const AdamConfig& cfg, const Rng& rng,
                          bool log_points = false) {
  if (!(cfg.lr >= 0.0)) throw std::invalid_argument("adam_run: lr must be nonnegative");
  StepperFactory f = [&task, cfg](EvalLog* log) { return std::make_unique<AdamStepper>(task, cfg, log); };
  nlohmann::json j = {{"lr", cfg.lr},       {"beta1", cfg.beta1},
                      {"beta2", cfg.beta2}, {"epsilon", cfg.epsilon},
                      {"iterations", cfg.iterations}};
  return run_stepper(f, rng, cfg.iterations, "adam", j, log_points);
}

// 9 learning rates log-spaced across 3 orders of magnitude around the grid.
inline std::vector<double> learning_rate_grid(double lo = 1e-3, double hi = 1e-1, int count = 9) {
  std::vector<double> out;
  for (int k = 0; k < count; ++k)
    out.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / (count - 1)));
  return out;
}

}  // namespace codesign::opt
