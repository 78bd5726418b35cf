#pragma once

// The iteration interface every optimizer implements. A stepper owns one
// restart's state; runners and the restart loop drive it and do the
// bookkeeping. Random substreams are pre-assigned by (restart, iteration,
// member) keys so results are independent of scheduling.

#include <functional>
#include <limits>
#include <memory>

#include "codesign/opt/record.hpp"
#include "codesign/task.hpp"

namespace codesign::opt {

class Stepper {
 public:
  virtual ~Stepper() = default;

  // Fresh initialization from the given stream; returns evaluations spent.
  virtual long long init(const Rng& rng) = 0;
  // One iteration; returns evaluations spent.
  virtual long long iterate() = 0;
  virtual long long evals_per_iteration() const = 0;
  // Evaluations init() will spend, known before calling it.
  virtual long long init_evals() const { return 0; }

  double best() const { return best_; }
  const CoDesign& best_x() const { return best_x_; }
  double iter_best() const { return iter_best_; }
  const CoDesign& iter_best_x() const { return iter_best_x_; }

 protected:
  void note(double loss, const CoDesign& x) {
    if (loss < iter_best_) {
      iter_best_ = loss;
      iter_best_x_ = x;
    }
    if (loss < best_) {
      best_ = loss;
      best_x_ = x;
    }
  }

  void begin_iteration() { iter_best_ = std::numeric_limits<double>::infinity(); }

  void reset_best() {
    best_ = std::numeric_limits<double>::infinity();
    iter_best_ = best_;
  }

 private:
  double best_ = std::numeric_limits<double>::infinity();
  CoDesign best_x_;
  double iter_best_ = std::numeric_limits<double>::infinity();
  CoDesign iter_best_x_;
};

using StepperFactory = std::function<std::unique_ptr<Stepper>(EvalLog*)>;

// Runs init + `iterations` iterations and assembles the record.
inline RunRecord run_stepper(const StepperFactory& factory, const Rng& rng, int iterations,
                             const std::string& algorithm, const nlohmann::json& config,
                             bool log_points = false) {
  RunRecord rec;
  rec.algorithm = algorithm;
  rec.config = config;
  rec.seed = rng.seed();
  auto stepper = factory(log_points ? &rec.log : nullptr);
  rec.total_evaluations += stepper->init(rng);
  if (stepper->best() < rec.best) {
    rec.best = stepper->best();
    rec.best_x = stepper->best_x();
  }
  for (int t = 0; t < iterations; ++t) {
    rec.total_evaluations += stepper->iterate();
    rec.note_iteration(stepper->iter_best(), stepper->iter_best_x());
  }
  return rec;
}

}  // namespace codesign::opt
