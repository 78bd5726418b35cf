#pragma once

// The restart protocol for the evaluation-budget study: run an optimizer
// from a fresh uniform initialization, terminate the restart when the best
// loss has not changed for `stagnation_iters` iterations or `max_iters` have
// elapsed, and repeat until the next restart no longer fits in the budget.
// The merged record carries the global running best against cumulative
// evaluations.

#include <limits>

#include "codesign/opt/stepper.hpp"

namespace codesign::opt {

struct RestartRule {
  int stagnation_iters = 10;
  int max_iters = 250;
};

inline RunRecord restart_loop(const StepperFactory& factory, long long eval_budget,
                              const Rng& rng, const RestartRule& rule,
                              const std::string& algorithm, const nlohmann::json& config,
                              bool log_points = false) {
  RunRecord rec;
  rec.algorithm = algorithm;
  rec.config = config;
  rec.seed = rng.seed();

  int restart = 0;
  while (true) {
    auto stepper = factory(log_points ? &rec.log : nullptr);
    // a restart must afford its initialization plus at least one iteration
    if (rec.total_evaluations + stepper->init_evals() + stepper->evals_per_iteration() >
        eval_budget)
      break;
    rec.total_evaluations += stepper->init(rng.derive({0x125u, static_cast<std::uint64_t>(restart)}));
    if (stepper->best() < rec.best) {
      rec.best = stepper->best();
      rec.best_x = stepper->best_x();
    }

    double last_best = stepper->best();  // +inf when init does not evaluate
    int stagnant = 0;
    int iters = 0;
    while (iters < rule.max_iters &&
           rec.total_evaluations + stepper->evals_per_iteration() <= eval_budget) {
      rec.total_evaluations += stepper->iterate();
      ++iters;
      rec.note_iteration(stepper->iter_best(), stepper->iter_best_x());
      if (stepper->best() < last_best) {
        stagnant = 0;
        last_best = stepper->best();
      } else {
        ++stagnant;
      }
      if (stagnant >= rule.stagnation_iters) break;
    }
    ++restart;
  }
  return rec;
}

}  // namespace codesign::opt
