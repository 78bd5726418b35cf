#pragma once

// The uniform task contract. A task owns a parameter space and two
// evaluators; both are pure given (input, build seed) and safe to call
// concurrently. Loss is minimized everywhere; quality is its negation.

#include <functional>
#include <optional>
#include <string>

#include "codesign/space.hpp"

namespace codesign {

struct Evaluation {
  double loss = 0.0;
  std::optional<Vec> gradient;  // same length as the space when present
};

struct TaskHandle {
  std::string name;
  ParameterSpace space;
  std::function<Evaluation(const CoDesign&)> evaluate;
  std::function<Evaluation(const CoDesign&)> evaluate_with_gradient;
};

// Loss reported in place of a diverged rollout so population methods can
// carry on; resampling weights send it to zero.
inline constexpr double kDivergedLossSentinel = 1e6;

}  // namespace codesign
