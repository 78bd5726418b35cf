#pragma once

// Task construction by name or from a task spec file. Options exist so tests
// and analyses can shorten horizons or thin manipulation environments without
// redefining a task.

#include <cstdint>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "codesign/tasks/locomotion.hpp"
#include "codesign/tasks/manipulation.hpp"

namespace codesign::tasks {

struct TaskOptions {
  int horizon = 0;  // 0 = task default
  int n_envs = 0;   // manipulation only, 0 = default
  int record_stride = 0;
};

inline std::vector<std::string> builtin_task_names() {
  return {"Loc84", "Loc155", "Mani212", "Mani320"};
}

inline TaskHandle build_task(const std::string& name, std::uint64_t master_seed,
                             const TaskOptions& opt = {}) {
  if (name == "Loc84" || name == "Loc155") {
    LocomotionTaskDef def = (name == "Loc84") ? make_loc84() : make_loc155();
    if (opt.horizon > 0) def.sim.steps = opt.horizon;
    def.sim.record_stride = opt.record_stride > 0 ? opt.record_stride : def.sim.steps;
    return make_locomotion_handle(std::make_shared<const LocomotionTaskDef>(std::move(def)));
  }
  if (name == "Mani212" || name == "Mani320") {
    ManipulationTaskDef def = (name == "Mani212") ? make_mani212() : make_mani320();
    if (opt.horizon > 0) def.sim.steps = opt.horizon;
    if (opt.n_envs > 0) def.n_envs = opt.n_envs;
    def.sim.record_stride = opt.record_stride > 0 ? opt.record_stride : def.sim.steps;
    return make_manipulation_handle(std::make_shared<const ManipulationTaskDef>(std::move(def)),
                                    master_seed);
  }
  throw std::invalid_argument("unknown task '" + name + "' (known: Loc84, Loc155, Mani212, Mani320)");
}

inline nlohmann::json task_spec_json(const std::string& name) {
  if (name == "Loc84") return to_json(make_loc84());
  if (name == "Loc155") return to_json(make_loc155());
  if (name == "Mani212") return to_json(make_mani212());
  if (name == "Mani320") return to_json(make_mani320());
  throw std::invalid_argument("unknown task '" + name + "'");
}

// Loads a task spec document (see data/tasks/) for custom variants.
inline TaskHandle load_task(const std::string& path, std::uint64_t master_seed,
                            const TaskOptions& opt = {}) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open task spec: " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "locomotion") {
    LocomotionTaskDef def = locomotion_from_json(j);
    if (opt.horizon > 0) def.sim.steps = opt.horizon;
    def.sim.record_stride = opt.record_stride > 0 ? opt.record_stride : def.sim.steps;
    return make_locomotion_handle(std::make_shared<const LocomotionTaskDef>(std::move(def)));
  }
  if (kind == "manipulation") {
    ManipulationTaskDef def = manipulation_from_json(j);
    if (opt.horizon > 0) def.sim.steps = opt.horizon;
    if (opt.n_envs > 0) def.n_envs = opt.n_envs;
    def.sim.record_stride = opt.record_stride > 0 ? opt.record_stride : def.sim.steps;
    return make_manipulation_handle(std::make_shared<const ManipulationTaskDef>(std::move(def)),
                                    master_seed);
  }
  throw std::invalid_argument(path + ": unknown task kind '" + kind + "'");
}

}  // namespace codesign::tasks
