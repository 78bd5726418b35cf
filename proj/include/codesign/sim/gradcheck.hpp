#pragma once

// Central-difference gradient oracle over the task contract, used to verify
// the adjoint. Probes are evaluated without projection so the comparison is
// meaningful at the box boundary too.

#include <stdexcept>

#include "codesign/task.hpp"

namespace codesign::sim {

inline Vec finite_difference_gradient(const TaskHandle& task, const CoDesign& x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_difference_gradient: h must be > 0");
  check_dim(task.space, x, "finite_difference_gradient");
  const int m = task.space.dim();
  Vec g(m);
  CoDesign probe = x;
  for (int i = 0; i < m; ++i) {
    probe[i] = x[i] + h;
    const double fp = task.evaluate(probe).loss;
    probe[i] = x[i] - h;
    const double fm = task.evaluate(probe).loss;
    probe[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

struct GradCheckSummary {
  int total = 0;       // components with magnitude above the floor
  int matching = 0;    // of those, within tolerance
  double worst = 0.0;  // worst relative error among counted components

  double fraction() const { return total == 0 ? 1.0 : static_cast<double>(matching) / total; }
};

// Symmetric relative error on components above `floor`.
inline GradCheckSummary compare_gradients(const Vec& adjoint, const Vec& differences,
                                          double rel_tol = 1e-4, double floor = 1e-8) {
  GradCheckSummary s;
  for (Eigen::Index i = 0; i < adjoint.size(); ++i) {
    const double scale = std::max(std::abs(adjoint[i]), std::abs(differences[i]));
    if (scale <= floor) continue;
    const double rel = std::abs(adjoint[i] - differences[i]) / scale;
    ++s.total;
    if (rel <= rel_tol) ++s.matching;
    s.worst = std::max(s.worst, rel);
  }
  return s;
}

}  // namespace codesign::sim
