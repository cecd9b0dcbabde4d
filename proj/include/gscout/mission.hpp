#pragma once

#include "gscout/layout.hpp"
#include "gscout/random.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace gscout::mission {

using spatial::Vec3;

/// Harvest scheduling instance: robots start at their depots, actions carry
/// per-robot durations and costs (infinity marks an unsupported pair), and
/// precedence pairs (a, b) demand that a finishes strictly before b starts.
struct MissionProblem {
  struct Action {
    Vec3 location = Vec3::Zero();
    std::vector<double> duration;  // per robot, s; +inf = unsupported
    std::vector<double> cost;      // per robot, dimensionless
  };

  std::vector<Vec3> depots;
  std::vector<double> speed;       // per robot, m/s
  std::vector<Action> actions;
  std::vector<std::pair<int, int>> precedence;
  double tie_epsilon = 1e-3;       // gap enforcing strict precedence
  double deadlock_penalty = 1e6;   // makespan assigned to deadlocked decodes

  int robots() const { return int(depots.size()); }
  bool supports(int robot, int action) const;
  double transition(int robot, const Vec3& from, const Vec3& to) const;

  /// Sizes consistent, acyclic precedence, every action supported somewhere.
  void validate() const;
};

/// Per-robot action sequences; together a partition of all actions.
struct Chromosome {
  std::vector<std::vector<int>> seq;

  /// Throws std::invalid_argument when the partition or support invariants
  /// are broken.
  void validate(const MissionProblem& prob) const;
};

Chromosome random_chromosome(const MissionProblem& prob, random::Rng& rng);

struct ScheduleEntry {
  int action = 0;
  double start = 0.0;
  double finish = 0.0;
};

struct Schedule {
  std::vector<std::vector<ScheduleEntry>> robot_schedules;
  double makespan = 0.0;
  double total_cost = 0.0;
  bool feasible = true;
};

/// Earliest-start decoding of the sequences. Cross-robot waits are resolved
/// by round-robin sweeps; a sweep without progress is a deadlock, which
/// yields feasible = false and the penalty makespan.
Schedule decode(const Chromosome& chrom, const MissionProblem& prob);

struct FitnessRecord {
  int pareto_rank = 0;
  double density = 0.0;  // crowding distance within the rank
  double fitness = 0.0;
};

/// Double-rank fitness over (makespan, total cost): non-dominated sorting
/// first, crowding distance as the tie-breaker. Lower rank always wins.
std::vector<FitnessRecord> evaluate(const std::vector<Chromosome>& population,
                                    const MissionProblem& prob);

/// Best-cost route crossover: drop one of p1's robot sequences from a copy
/// of p2, then greedily reinsert each dropped action at the (robot,
/// position) with the smallest decoded makespan.
Chromosome bcrc_crossover(const Chromosome& p1, const Chromosome& p2,
                          const MissionProblem& prob, random::Rng& rng);

enum class MutateOp { IntraSwap = 0, InterSwap = 1, Reroute = 2 };
inline constexpr int kMutateOps = 3;

struct MutationResult {
  Chromosome chrom;
  bool changed = false;
};

MutationResult mutate(const Chromosome& chrom, MutateOp op,
                      const MissionProblem& prob, random::Rng& rng);

/// Adaptive operator weights: exponentially-weighted improvement averages
/// with a 5% exploration floor on the selection probabilities.
struct OperatorStats {
  std::array<double, kMutateOps> weight{{0.0, 0.0, 0.0}};

  void record(MutateOp op, double improvement);
  std::array<double, kMutateOps> probabilities() const;
};

MutateOp select_operator(const OperatorStats& stats, random::Rng& rng);

struct SolveConfig {
  int agents = 4;
  int population = 64;
  int generations = 400;
  int exchange_period = 10;
  double crossover_rate = 0.9;
  double mutation_rate = 0.3;
  std::uint64_t seed = 0;
};

/// Distributed GA: independent populations with adaptive operators that
/// periodically share their best chromosome and blend operator weights.
/// Agents are stepped in a fixed round-robin order, so the result is
/// deterministic for a fixed seed.
Schedule solve(const MissionProblem& prob, const SolveConfig& config);

/// Exhaustive assignment + ordering enumeration, lexicographically best
/// (makespan, cost). Refuses instances beyond n = 8 actions or m = 3 robots.
Schedule brute_force_schedule(const MissionProblem& prob);

struct PlantYield {
  int row = 0;
  int slot = 0;
  Vec3 location = Vec3::Zero();
  int count = 0;
};

struct MissionGenParams {
  int robots = 2;
  double robot_speed = 0.5;     // m/s
  double time_per_fruit = 10.0; // s of harvesting per estimated fruit
  double depot_spacing = 0.5;   // robots line up along x at the workstation
};

/// One harvest action per fruiting plant, duration proportional to the
/// estimated count, uniform robot capabilities, depots at the workstation.
MissionProblem actions_from_counts(const std::vector<PlantYield>& yields,
                                   const worldsim::GreenhouseLayout& layout,
                                   const MissionGenParams& params);

std::string problem_to_json(const MissionProblem& prob);
MissionProblem problem_from_json(const std::string& text);

std::string schedule_to_json(const Schedule& schedule);
Schedule schedule_from_json(const std::string& text);

/// Gantt rows: robot,action,start,finish
std::string schedule_to_csv(const Schedule& schedule);

}  // namespace gscout::mission
