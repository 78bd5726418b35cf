#pragma once

// Continuous genetic algorithm: truncation selection into an elite parent
// pool, uniform crossover between two random parents, Gaussian mutation
// scaled per component by the box width, and elitist survival of the best
// individual.

#include <algorithm>
#include <numeric>
#include <vector>

#include "codesign/opt/stepper.hpp"
#include "codesign/parallel.hpp"

namespace codesign::opt {

struct GaConfig {
  int population = 50;
  double elite_ratio = 0.25;    // fraction of the population used as parents
  double mutation_sigma = 0.1;  // in box coordinates
  int iterations = 100;
  int workers = 1;
};

class GaStepper : public Stepper {
 public:
  GaStepper(const TaskHandle& task, const GaConfig& cfg, EvalLog* log)
      : task_(task), cfg_(cfg), log_(log) {
    if (cfg_.population < 4) throw std::invalid_argument("ga: population must be >= 4");
  }

  long long init(const Rng& rng) override {
    rng_ = std::make_unique<Rng>(rng);
    reset_best();
    t_ = 0;
    pop_.resize(static_cast<std::size_t>(cfg_.population));
    losses_.assign(static_cast<std::size_t>(cfg_.population), 0.0);
    for (int i = 0; i < cfg_.population; ++i) {
      Rng r = rng.derive({0x6A1u, static_cast<std::uint64_t>(i)});
      pop_[static_cast<std::size_t>(i)] = sample_uniform(task_.space, r);
    }
    evaluate_all();
    return cfg_.population;
  }

  long long iterate() override {
    begin_iteration();
    const int pool = std::max(2, static_cast<int>(std::ceil(cfg_.elite_ratio * cfg_.population)));
    std::vector<int> order(static_cast<std::size_t>(cfg_.population));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return losses_[static_cast<std::size_t>(a)] < losses_[static_cast<std::size_t>(b)];
    });

    std::vector<CoDesign> next(static_cast<std::size_t>(cfg_.population));
    std::vector<double> next_losses(static_cast<std::size_t>(cfg_.population), 0.0);
    // the best survives unchanged and keeps its loss (no re-evaluation)
    next[0] = pop_[static_cast<std::size_t>(order[0])];
    next_losses[0] = losses_[static_cast<std::size_t>(order[0])];

    for (int i = 1; i < cfg_.population; ++i) {
      Rng r = rng_->derive({0x6A2u, static_cast<std::uint64_t>(t_), static_cast<std::uint64_t>(i)});
      const int pa = order[static_cast<std::size_t>(r.uniform_int(pool))];
      const int pb = order[static_cast<std::size_t>(r.uniform_int(pool))];
      CoDesign child(task_.space.dim());
      for (int d = 0; d < task_.space.dim(); ++d) {
        child[d] = (r.uniform01() < 0.5) ? pop_[static_cast<std::size_t>(pa)][d]
                                         : pop_[static_cast<std::size_t>(pb)][d];
        const double width = task_.space.upper[d] - task_.space.lower[d];
        child[d] += cfg_.mutation_sigma * width * r.gaussian();
      }
      next[static_cast<std::size_t>(i)] = project(task_.space, child);
    }

    std::vector<double> fresh(static_cast<std::size_t>(cfg_.population - 1));
    parallel_for(cfg_.population - 1, cfg_.workers, [&](int k) {
      fresh[static_cast<std::size_t>(k)] =
          task_.evaluate(next[static_cast<std::size_t>(k + 1)]).loss;
    });
    for (int k = 1; k < cfg_.population; ++k)
      next_losses[static_cast<std::size_t>(k)] = fresh[static_cast<std::size_t>(k - 1)];

    pop_ = std::move(next);
    losses_ = std::move(next_losses);
    for (int i = 0; i < cfg_.population; ++i) {
      note(losses_[static_cast<std::size_t>(i)], pop_[static_cast<std::size_t>(i)]);
      if (log_ && i > 0) log_->log(losses_[static_cast<std::size_t>(i)], pop_[static_cast<std::size_t>(i)]);
    }
    ++t_;
    return cfg_.population - 1;
  }

  long long evals_per_iteration() const override { return cfg_.population - 1; }
  long long init_evals() const override { return cfg_.population; }

 private:
  void evaluate_all() {
    std::vector<double> fresh(static_cast<std::size_t>(cfg_.population));
    parallel_for(cfg_.population, cfg_.workers, [&](int k) {
      fresh[static_cast<std::size_t>(k)] = task_.evaluate(pop_[static_cast<std::size_t>(k)]).loss;
    });
    losses_ = fresh;
    for (int i = 0; i < cfg_.population; ++i) {
      note(losses_[static_cast<std::size_t>(i)], pop_[static_cast<std::size_t>(i)]);
      if (log_) log_->log(losses_[static_cast<std::size_t>(i)], pop_[static_cast<std::size_t>(i)]);
    }
  }

  const TaskHandle& task_;
  GaConfig cfg_;
  EvalLog* log_;
  std::unique_ptr<Rng> rng_;
  int t_ = 0;
  std::vector<CoDesign> pop_;
  std::vector<double> losses_;
};

inline RunRecord ga_run(const TaskHandle& task, const GaConfig& cfg, const Rng& rng,
                        bool log_points = false) {
  StepperFactory f = [&task, cfg](EvalLog* log) { return std::make_unique<GaStepper>(task, cfg, log); };
  nlohmann::json j = {{"population", cfg.population},
                      {"elite_ratio", cfg.elite_ratio},
                      {"mutation_sigma", cfg.mutation_sigma},
                      {"iterations", cfg.iterations}};
  return run_stepper(f, rng, cfg.iterations, "ga", j, log_points);
}

}  // namespace codesign::opt
