#pragma once

// Co-design vector space: dimensionality, bounds, morphology/control
// partition, and the elementary operations every other module builds on.
// The four shipped tasks use the normalized unit box [0,1]^m and decode to
// physical units internally; the operations here work for any box.

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "codesign/rng.hpp"

namespace codesign {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class ParamKind { Morphology, Control };

// A co-design point x in R^m, components in the owning space's units.
using CoDesign = Vec;

struct ParameterSpace {
  Vec lower;
  Vec upper;
  Vec baseline;
  std::vector<ParamKind> labels;

  int dim() const { return static_cast<int>(lower.size()); }

  int morph_dim() const {
    int n = 0;
    for (ParamKind k : labels) n += (k == ParamKind::Morphology) ? 1 : 0;
    return n;
  }

  int ctrl_dim() const { return dim() - morph_dim(); }

  void validate() const {
    const auto m = lower.size();
    if (upper.size() != m || baseline.size() != m ||
        static_cast<Eigen::Index>(labels.size()) != m)
      throw std::invalid_argument("ParameterSpace: field sizes disagree");
    for (Eigen::Index i = 0; i < m; ++i) {
      if (!(lower[i] < upper[i]))
        throw std::invalid_argument("ParameterSpace: lower[i] < upper[i] violated at " +
                                    std::to_string(i));
      if (baseline[i] < lower[i] || baseline[i] > upper[i])
        throw std::invalid_argument("ParameterSpace: baseline out of bounds at " +
                                    std::to_string(i));
    }
  }

  // Unit box with the first m_morph indices tagged morphology.
  static ParameterSpace unit_box(int m_morph, int m_ctrl) {
    ParameterSpace s;
    const int m = m_morph + m_ctrl;
    s.lower = Vec::Zero(m);
    s.upper = Vec::Ones(m);
    s.baseline = Vec::Constant(m, 0.5);
    s.labels.assign(m, ParamKind::Control);
    for (int i = 0; i < m_morph; ++i) s.labels[i] = ParamKind::Morphology;
    return s;
  }
};

inline void check_dim(const ParameterSpace& space, const Vec& v, const char* who) {
  if (v.size() != space.lower.size())
    throw std::invalid_argument(std::string(who) + ": dimension mismatch, got " +
                                std::to_string(v.size()) + ", space has " +
                                std::to_string(space.lower.size()));
}

// Componentwise clamp into [lower, upper]. Idempotent.
inline CoDesign project(const ParameterSpace& space, const CoDesign& x) {
  check_dim(space, x, "project");
  return x.cwiseMax(space.lower).cwiseMin(space.upper);
}

// Each component i.i.d. uniform on [lower_i, upper_i].
inline CoDesign sample_uniform(const ParameterSpace& space, Rng& rng) {
  CoDesign x(space.dim());
  for (int i = 0; i < space.dim(); ++i) x[i] = rng.uniform(space.lower[i], space.upper[i]);
  return x;
}

// Morphology-tagged and control-tagged entries, each in index order.
inline std::pair<Vec, Vec> split(const ParameterSpace& space, const Vec& v) {
  check_dim(space, v, "split");
  Vec morph(space.morph_dim()), ctrl(space.ctrl_dim());
  int im = 0, ic = 0;
  for (int i = 0; i < space.dim(); ++i) {
    if (space.labels[i] == ParamKind::Morphology)
      morph[im++] = v[i];
    else
      ctrl[ic++] = v[i];
  }
  return {std::move(morph), std::move(ctrl)};
}

// Inverse of split.
inline Vec merge(const ParameterSpace& space, const Vec& morph, const Vec& ctrl) {
  if (morph.size() != space.morph_dim() || ctrl.size() != space.ctrl_dim())
    throw std::invalid_argument("merge: part sizes do not match the space partition");
  Vec v(space.dim());
  int im = 0, ic = 0;
  for (int i = 0; i < space.dim(); ++i)
    v[i] = (space.labels[i] == ParamKind::Morphology) ? morph[im++] : ctrl[ic++];
  return v;
}

// n isotropic Gaussian draws around `mean`. Sigma is expressed in normalized
// [0,1] box coordinates and scaled per component by the box width, so one
// sigma means the same thing across parameters of different physical scales.
// Every draw is projected into bounds.
inline std::vector<CoDesign> perturb_gaussian(const ParameterSpace& space, const CoDesign& mean,
                                              double sigma, int n, Rng& rng) {
  check_dim(space, mean, "perturb_gaussian");
  if (!(sigma > 0.0)) throw std::invalid_argument("perturb_gaussian: sigma must be positive");
  if (n < 1) throw std::invalid_argument("perturb_gaussian: n must be at least 1");
  std::vector<CoDesign> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    CoDesign x(space.dim());
    for (int i = 0; i < space.dim(); ++i) {
      double width = space.upper[i] - space.lower[i];
      x[i] = mean[i] + sigma * width * rng.gaussian();
    }
    out.push_back(project(space, x));
  }
  return out;
}

inline nlohmann::json to_json(const ParameterSpace& space) {
  nlohmann::json j;
  j["m"] = space.dim();
  j["m_morph"] = space.morph_dim();
  j["m_ctrl"] = space.ctrl_dim();
  j["lower"] = std::vector<double>(space.lower.begin(), space.lower.end());
  j["upper"] = std::vector<double>(space.upper.begin(), space.upper.end());
  j["baseline"] = std::vector<double>(space.baseline.begin(), space.baseline.end());
  std::vector<std::string> labels;
  labels.reserve(space.labels.size());
  for (ParamKind k : space.labels)
    labels.push_back(k == ParamKind::Morphology ? "morphology" : "control");
  j["labels"] = labels;
  return j;
}

inline ParameterSpace space_from_json(const nlohmann::json& j) {
  ParameterSpace s;
  auto lower = j.at("lower").get<std::vector<double>>();
  auto upper = j.at("upper").get<std::vector<double>>();
  auto baseline = j.at("baseline").get<std::vector<double>>();
  s.lower = Eigen::Map<const Vec>(lower.data(), static_cast<Eigen::Index>(lower.size()));
  s.upper = Eigen::Map<const Vec>(upper.data(), static_cast<Eigen::Index>(upper.size()));
  s.baseline = Eigen::Map<const Vec>(baseline.data(), static_cast<Eigen::Index>(baseline.size()));
  for (const auto& l : j.at("labels")) {
    std::string tag = l.get<std::string>();
    if (tag == "morphology")
      s.labels.push_back(ParamKind::Morphology);
    else if (tag == "control")
      s.labels.push_back(ParamKind::Control);
    else
      throw std::invalid_argument("ParameterSpace: unknown label '" + tag + "'");
  }
  s.validate();
  return s;
}

}  // namespace codesign
