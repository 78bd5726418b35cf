#pragma once

// Run bookkeeping shared by every optimizer: the per-iteration best-loss
// series (a running minimum), exact cumulative evaluation counts (one task
// call = one evaluation, gradient or not), per-iteration incumbents for
// region harvesting, and an optional log of every evaluated point.

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

#include "codesign/io/csv.hpp"
#include "codesign/space.hpp"

namespace codesign::opt {

struct EvalLog {
  struct Point {
    long long eval_index;
    double loss;
    CoDesign x;
  };
  std::vector<Point> points;
  long long next_index = 0;

  void log(double loss, const CoDesign& x) { points.push_back({next_index++, loss, x}); }
};

struct RunRecord {
  std::string algorithm;
  std::uint64_t seed = 0;
  nlohmann::json config;

  std::vector<double> best_loss;       // running min after each iteration
  std::vector<long long> evaluations;  // cumulative after each iteration
  std::vector<double> iter_best_loss;  // each iteration's own best
  std::vector<CoDesign> iter_best_x;

  double best = std::numeric_limits<double>::infinity();
  CoDesign best_x;
  long long total_evaluations = 0;

  EvalLog log;  // populated only when point logging is on

  void note_iteration(double iteration_best, const CoDesign& iteration_best_x) {
    if (iteration_best < best) {
      best = iteration_best;
      best_x = iteration_best_x;
    }
    iter_best_loss.push_back(iteration_best);
    iter_best_x.push_back(iteration_best_x);
    best_loss.push_back(best);
    evaluations.push_back(total_evaluations);
  }

  int iterations() const { return static_cast<int>(best_loss.size()); }
};

inline void write_run_csv(const RunRecord& rec, const std::string& path,
                          const std::vector<std::string>& comments = {}) {
  io::CsvWriter w(path);
  for (const auto& c : comments) w.comment(c);
  w.header({"iteration", "evaluations", "best_loss"});
  for (int t = 0; t < rec.iterations(); ++t)
    w.row({std::to_string(t + 1), std::to_string(rec.evaluations[static_cast<std::size_t>(t)]),
           io::format_double(rec.best_loss[static_cast<std::size_t>(t)])});
}

inline void write_points_csv(const RunRecord& rec, const std::string& path,
                             const std::vector<std::string>& comments = {}) {
  io::CsvWriter w(path);
  for (const auto& c : comments) w.comment(c);
  std::vector<std::string> header = {"eval_index", "loss"};
  const int m = rec.log.points.empty() ? 0 : static_cast<int>(rec.log.points.front().x.size());
  for (int i = 1; i <= m; ++i) header.push_back("x" + std::to_string(i));
  w.header(header);
  for (const auto& p : rec.log.points) {
    std::vector<std::string> row = {std::to_string(p.eval_index), io::format_double(p.loss)};
    for (int i = 0; i < m; ++i) row.push_back(io::format_double(p.x[i]));
    w.row(row);
  }
}

inline void write_iteration_best_csv(const RunRecord& rec, const std::string& path,
                                     const std::vector<std::string>& comments = {}) {
  io::CsvWriter w(path);
  for (const auto& c : comments) w.comment(c);
  const int m = rec.iter_best_x.empty() ? 0 : static_cast<int>(rec.iter_best_x.front().size());
  std::vector<std::string> header = {"iteration", "loss"};
  for (int i = 1; i <= m; ++i) header.push_back("x" + std::to_string(i));
  w.header(header);
  for (int t = 0; t < rec.iterations(); ++t) {
    std::vector<std::string> row = {std::to_string(t + 1),
                                    io::format_double(rec.iter_best_loss[static_cast<std::size_t>(t)])};
    for (int i = 0; i < m; ++i)
      row.push_back(io::format_double(rec.iter_best_x[static_cast<std::size_t>(t)][i]));
    w.row(row);
  }
}

}  // namespace codesign::opt
