#include "gscout/mission.hpp"

#include "gscout/ioutil.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace gscout::mission {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::vector<int>> predecessor_lists(const MissionProblem& prob) {
  std::vector<std::vector<int>> preds(prob.actions.size());
  for (const auto& [a, b] : prob.precedence) preds[b].push_back(a);
  return preds;
}

/// Earliest-start decode that tolerates chromosomes covering only a subset
/// of the actions (used by the insertion scans while a child is being
/// rebuilt). Precedence predecessors absent from the chromosome are ignored.
Schedule decode_impl(const Chromosome& chrom, const MissionProblem& prob) {
  const int m = prob.robots();
  const int n = int(prob.actions.size());

  Schedule out;
  out.robot_schedules.resize(m);

  std::vector<char> present(n, 0);
  int remaining = 0;
  for (const auto& s : chrom.seq) {
    for (int a : s) {
      present[a] = 1;
      ++remaining;
    }
  }

  const auto preds = predecessor_lists(prob);
  std::vector<char> done(n, 0);
  std::vector<double> finish(n, 0.0);
  std::vector<std::size_t> ptr(m, 0);
  std::vector<double> avail(m, 0.0);
  std::vector<Vec3> loc = prob.depots;

  double makespan = 0.0;
  while (remaining > 0) {
    bool progress = false;
    for (int i = 0; i < m; ++i) {
      while (ptr[i] < chrom.seq[i].size()) {
        const int a = chrom.seq[i][ptr[i]];
        bool ready = true;
        for (int p : preds[a]) {
          if (present[p] && !done[p]) {
            ready = false;
            break;
          }
        }
        if (!ready) break;
        double start = avail[i] + prob.transition(i, loc[i], prob.actions[a].location);
        for (int p : preds[a]) {
          if (present[p]) start = std::max(start, finish[p] + prob.tie_epsilon);
        }
        const double fin = start + prob.actions[a].duration[i];
        out.robot_schedules[i].push_back({a, start, fin});
        out.total_cost += prob.actions[a].cost[i];
        done[a] = 1;
        finish[a] = fin;
        avail[i] = fin;
        loc[i] = prob.actions[a].location;
        makespan = std::max(makespan, fin);
        ++ptr[i];
        --remaining;
        progress = true;
      }
    }
    if (!progress) {
      out.feasible = false;
      break;
    }
  }
  out.makespan = out.feasible ? makespan : prob.deadlock_penalty;
  return out;
}

/// Inserts `action` at the (robot, position) with the smallest decoded
/// makespan; ties resolve to the lowest robot, then the lowest position.
void insert_best(Chromosome& chrom, int action, const MissionProblem& prob) {
  int best_robot = -1;
  std::size_t best_pos = 0;
  double best_make = kInf;
  for (int i = 0; i < prob.robots(); ++i) {
    if (!prob.supports(i, action)) continue;
    auto& s = chrom.seq[i];
    for (std::size_t pos = 0; pos <= s.size(); ++pos) {
      s.insert(s.begin() + pos, action);
      const double make = decode_impl(chrom, prob).makespan;
      s.erase(s.begin() + pos);
      if (make < best_make) {
        best_make = make;
        best_robot = i;
        best_pos = pos;
      }
    }
  }
  if (best_robot < 0) throw std::invalid_argument("mission: action supported by no robot");
  auto& s = chrom.seq[best_robot];
  s.insert(s.begin() + best_pos, action);
}

struct ObjectivePoint {
  double makespan = 0.0;
  double cost = 0.0;
};

bool dominates(const ObjectivePoint& a, const ObjectivePoint& b) {
  return a.makespan <= b.makespan && a.cost <= b.cost &&
         (a.makespan < b.makespan || a.cost < b.cost);
}

void shuffle(std::vector<int>& v, random::Rng& rng) {
  for (std::size_t k = v.size(); k > 1; --k) {
    const std::size_t j = std::size_t(rng.uniform_int(0, int(k) - 1));
    std::swap(v[k - 1], v[j]);
  }
}

}  // namespace

bool MissionProblem::supports(int robot, int action) const {
  return robot >= 0 && robot < robots() && action >= 0 &&
         action < int(actions.size()) &&
         std::isfinite(actions[action].duration[robot]);
}

double MissionProblem::transition(int robot, const Vec3& from, const Vec3& to) const {
  return (to - from).norm() / speed[robot];
}

void MissionProblem::validate() const {
  const int m = robots();
  const int n = int(actions.size());
  if (m < 1) throw std::invalid_argument("mission: need at least one robot");
  if (speed.size() != depots.size()) {
    throw std::invalid_argument("mission: speed/depot size mismatch");
  }
  for (double v : speed) {
    if (!(v > 0.0)) throw std::invalid_argument("mission: robot speed must be positive");
  }
  if (!(tie_epsilon >= 0.0) || !(deadlock_penalty > 0.0)) {
    throw std::invalid_argument("mission: bad epsilon or penalty");
  }
  for (const auto& a : actions) {
    if (int(a.duration.size()) != m || int(a.cost.size()) != m) {
      throw std::invalid_argument("mission: per-robot duration/cost size mismatch");
    }
    bool any = false;
    for (double d : a.duration) {
      if (std::isfinite(d) && d < 0.0) {
        throw std::invalid_argument("mission: negative duration");
      }
      any = any || std::isfinite(d);
    }
    if (!any) throw std::invalid_argument("mission: action supported by no robot");
  }
  std::vector<int> indegree(n, 0);
  for (const auto& [a, b] : precedence) {
    if (a < 0 || a >= n || b < 0 || b >= n || a == b) {
      throw std::invalid_argument("mission: bad precedence pair");
    }
    ++indegree[b];
  }
  // Kahn's algorithm; leftovers mean a cycle.
  std::vector<int> queue;
  for (int i = 0; i < n; ++i) {
    if (indegree[i] == 0) queue.push_back(i);
  }
  int seen = 0;
  while (!queue.empty()) {
    const int v = queue.back();
    queue.pop_back();
    ++seen;
    for (const auto& [a, b] : precedence) {
      if (a == v && --indegree[b] == 0) queue.push_back(b);
    }
  }
  if (seen != n) throw std::invalid_argument("mission: cyclic precedence");
}

void Chromosome::validate(const MissionProblem& prob) const {
  if (int(seq.size()) != prob.robots()) {
    throw std::invalid_argument("chromosome: robot count mismatch");
  }
  std::vector<int> hits(prob.actions.size(), 0);
  for (int i = 0; i < prob.robots(); ++i) {
    for (int a : seq[i]) {
      if (a < 0 || a >= int(prob.actions.size())) {
        throw std::invalid_argument("chromosome: action index out of range");
      }
      if (!prob.supports(i, a)) {
        throw std::invalid_argument("chromosome: unsupported assignment");
      }
      ++hits[a];
    }
  }
  for (int h : hits) {
    if (h != 1) throw std::invalid_argument("chromosome: actions must appear exactly once");
  }
}

Chromosome random_chromosome(const MissionProblem& prob, random::Rng& rng) {
  Chromosome chrom;
  chrom.seq.resize(prob.robots());
  for (int a = 0; a < int(prob.actions.size()); ++a) {
    std::vector<int> options;
    for (int i = 0; i < prob.robots(); ++i) {
      if (prob.supports(i, a)) options.push_back(i);
    }
    chrom.seq[options[std::size_t(rng.uniform_int(0, int(options.size()) - 1))]]
        .push_back(a);
  }
  for (auto& s : chrom.seq) shuffle(s, rng);
  return chrom;
}

Schedule decode(const Chromosome& chrom, const MissionProblem& prob) {
  chrom.validate(prob);
  return decode_impl(chrom, prob);
}

std::vector<FitnessRecord> evaluate(const std::vector<Chromosome>& population,
                                    const MissionProblem& prob) {
  if (population.empty()) throw std::invalid_argument("evaluate: empty population");
  const int n = int(population.size());

  std::vector<ObjectivePoint> obj(n);
  for (int i = 0; i < n; ++i) {
    const Schedule s = decode(population[i], prob);
    obj[i].makespan = s.makespan;
    obj[i].cost = s.total_cost + (s.feasible ? 0.0 : prob.deadlock_penalty);
  }

  std::vector<FitnessRecord> out(n);
  std::vector<char> assigned(n, 0);
  int rank = 0;
  int left = n;
  while (left > 0) {
    std::vector<int> front;
    for (int i = 0; i < n; ++i) {
      if (assigned[i]) continue;
      bool dominated = false;
      for (int j = 0; j < n; ++j) {
        if (j == i || assigned[j]) continue;
        if (dominates(obj[j], obj[i])) {
          dominated = true;
          break;
        }
      }
      if (!dominated) front.push_back(i);
    }
    // Crowding distance over both objectives inside this front.
    std::vector<double> crowd(front.size(), 0.0);
    for (int axis = 0; axis < 2; ++axis) {
      std::vector<int> order(front.size());
      for (std::size_t k = 0; k < front.size(); ++k) order[k] = int(k);
      std::sort(order.begin(), order.end(), [&](int x, int y) {
        const double vx = axis == 0 ? obj[front[x]].makespan : obj[front[x]].cost;
        const double vy = axis == 0 ? obj[front[y]].makespan : obj[front[y]].cost;
        return vx < vy;
      });
      auto value = [&](int k) {
        return axis == 0 ? obj[front[order[k]]].makespan : obj[front[order[k]]].cost;
      };
      const double range = value(int(front.size()) - 1) - value(0);
      crowd[order.front()] = kInf;
      crowd[order.back()] = kInf;
      if (range > 0.0) {
        for (std::size_t k = 1; k + 1 < front.size(); ++k) {
          crowd[order[k]] += (value(int(k) + 1) - value(int(k) - 1)) / range;
        }
      }
    }
    for (std::size_t k = 0; k < front.size(); ++k) {
      const int i = front[k];
      assigned[i] = 1;
      out[i].pareto_rank = rank;
      out[i].density = crowd[k];
      // Rank-major: the crowding term stays inside (0, 0.5], so any member
      // of a rank strictly beats every member of the next rank.
      out[i].fitness = 1.0 / (1.0 + rank + 0.5 / (1.0 + crowd[k]));
      --left;
    }
    ++rank;
  }
  return out;
}

Chromosome bcrc_crossover(const Chromosome& p1, const Chromosome& p2,
                          const MissionProblem& prob, random::Rng& rng) {
  p1.validate(prob);
  p2.validate(prob);
  const std::vector<int> removed = p1.seq[std::size_t(
      rng.uniform_int(0, prob.robots() - 1))];
  Chromosome child = p2;
  if (removed.empty()) return child;

  std::vector<char> drop(prob.actions.size(), 0);
  for (int a : removed) drop[a] = 1;
  for (auto& s : child.seq) {
    s.erase(std::remove_if(s.begin(), s.end(), [&](int a) { return drop[a] != 0; }),
            s.end());
  }
  for (int a : removed) insert_best(child, a, prob);
  return child;
}

MutationResult mutate(const Chromosome& chrom, MutateOp op,
                      const MissionProblem& prob, random::Rng& rng) {
  chrom.validate(prob);
  MutationResult out{chrom, false};
  auto& seq = out.chrom.seq;

  switch (op) {
    case MutateOp::IntraSwap: {
      std::vector<int> candidates;
      for (int i = 0; i < prob.robots(); ++i) {
        if (seq[i].size() >= 2) candidates.push_back(i);
      }
      if (candidates.empty()) return out;
      auto& s = seq[std::size_t(candidates[std::size_t(
          rng.uniform_int(0, int(candidates.size()) - 1))])];
      const int i = rng.uniform_int(0, int(s.size()) - 1);
      int j = rng.uniform_int(0, int(s.size()) - 2);
      if (j >= i) ++j;
      std::swap(s[std::size_t(i)], s[std::size_t(j)]);
      out.changed = true;
      return out;
    }
    case MutateOp::InterSwap: {
      struct Pair {
        int ra, ia, rb, ib;
      };
      std::vector<Pair> pairs;
      for (int ra = 0; ra < prob.robots(); ++ra) {
        for (int rb = ra + 1; rb < prob.robots(); ++rb) {
          for (int ia = 0; ia < int(seq[ra].size()); ++ia) {
            for (int ib = 0; ib < int(seq[rb].size()); ++ib) {
              if (prob.supports(ra, seq[rb][ib]) && prob.supports(rb, seq[ra][ia])) {
                pairs.push_back({ra, ia, rb, ib});
              }
            }
          }
        }
      }
      if (pairs.empty()) return out;
      const Pair p = pairs[std::size_t(rng.uniform_int(0, int(pairs.size()) - 1))];
      std::swap(seq[p.ra][std::size_t(p.ia)], seq[p.rb][std::size_t(p.ib)]);
      out.changed = true;
      return out;
    }
    case MutateOp::Reroute: {
      int total = 0;
      for (const auto& s : seq) total += int(s.size());
      if (total == 0) return out;
      int pick = rng.uniform_int(0, total - 1);
      int action = -1;
      for (auto& s : seq) {
        if (pick < int(s.size())) {
          action = s[std::size_t(pick)];
          s.erase(s.begin() + pick);
          break;
        }
        pick -= int(s.size());
      }
      insert_best(out.chrom, action, prob);
      out.changed = out.chrom.seq != chrom.seq;
      return out;
    }
  }
  return out;
}

void OperatorStats::record(MutateOp op, double improvement) {
  for (double& w : weight) w *= 0.9;
  weight[std::size_t(op)] += 0.1 * std::max(0.0, improvement);
}

std::array<double, kMutateOps> OperatorStats::probabilities() const {
  double sum = 0.0;
  for (double w : weight) sum += w;
  std::array<double, kMutateOps> p{};
  if (sum <= 1e-300) {
    p.fill(1.0 / kMutateOps);
    return p;
  }
  // 5% exploration floor per operator, remainder split by weight.
  const double floor = 0.05;
  const double spread = 1.0 - floor * kMutateOps;
  for (int i = 0; i < kMutateOps; ++i) p[std::size_t(i)] = floor + spread * weight[std::size_t(i)] / sum;
  return p;
}

MutateOp select_operator(const OperatorStats& stats, random::Rng& rng) {
  const auto p = stats.probabilities();
  const double u = rng.uniform();
  double acc = 0.0;
  for (int i = 0; i < kMutateOps; ++i) {
    acc += p[std::size_t(i)];
    if (u < acc) return MutateOp(i);
  }
  return MutateOp(kMutateOps - 1);
}

namespace {

struct ScheduleKey {
  bool feasible;
  double makespan;
  double cost;
};

ScheduleKey key_of(const Schedule& s) { return {s.feasible, s.makespan, s.total_cost}; }

bool better(const ScheduleKey& a, const ScheduleKey& b) {
  if (a.feasible != b.feasible) return a.feasible;
  if (a.makespan != b.makespan) return a.makespan < b.makespan;
  return a.cost < b.cost;
}

}  // namespace

Schedule solve(const MissionProblem& prob, const SolveConfig& config) {
  prob.validate();
  if (config.agents < 1 || config.population < 2 || config.generations < 0 ||
      config.exchange_period < 1) {
    throw std::invalid_argument("solve: bad GA configuration");
  }

  Chromosome empty;
  empty.seq.resize(prob.robots());
  if (prob.actions.empty()) return decode(empty, prob);

  random::Rng rng(config.seed);

  struct Agent {
    std::vector<Chromosome> pop;
    OperatorStats stats;
  };
  std::vector<Agent> agents(std::size_t(config.agents));
  for (auto& agent : agents) {
    agent.pop.reserve(std::size_t(config.population));
    for (int k = 0; k < config.population; ++k) {
      agent.pop.push_back(random_chromosome(prob, rng));
    }
  }

  for (int g = 0; g < config.generations; ++g) {
    for (auto& agent : agents) {
      const auto fit = evaluate(agent.pop, prob);
      int elite = 0;
      for (int i = 1; i < config.population; ++i) {
        if (fit[std::size_t(i)].fitness > fit[std::size_t(elite)].fitness) elite = i;
      }
      auto tournament = [&]() {
        const int i = rng.uniform_int(0, config.population - 1);
        const int j = rng.uniform_int(0, config.population - 1);
        if (fit[std::size_t(j)].fitness > fit[std::size_t(i)].fitness) return j;
        return i;
      };
      std::vector<Chromosome> next;
      next.reserve(std::size_t(config.population));
      next.push_back(agent.pop[std::size_t(elite)]);
      while (int(next.size()) < config.population) {
        const int p1 = tournament();
        const int p2 = tournament();
        Chromosome child =
            rng.uniform() < config.crossover_rate
                ? bcrc_crossover(agent.pop[std::size_t(p1)],
                                 agent.pop[std::size_t(p2)], prob, rng)
                : agent.pop[std::size_t(p1)];
        if (rng.uniform() < config.mutation_rate) {
          const MutateOp op = select_operator(agent.stats, rng);
          const double before = decode(child, prob).makespan;
          MutationResult mut = mutate(child, op, prob, rng);
          const double after = decode(mut.chrom, prob).makespan;
          agent.stats.record(op, (before - after) / std::max(before, 1e-9));
          child = std::move(mut.chrom);
        }
        next.push_back(std::move(child));
      }
      agent.pop = std::move(next);
    }

    if ((g + 1) % config.exchange_period == 0 && config.agents > 1) {
      // Each agent broadcasts its best individual; receivers replace their
      // worst with the best foreign one and adopt the mean operator weights.
      std::vector<int> best(agents.size(), 0);
      std::vector<int> worst(agents.size(), 0);
      std::vector<std::vector<ScheduleKey>> keys(agents.size());
      for (std::size_t a = 0; a < agents.size(); ++a) {
        keys[a].reserve(agents[a].pop.size());
        for (const auto& c : agents[a].pop) keys[a].push_back(key_of(decode(c, prob)));
        for (int i = 1; i < config.population; ++i) {
          if (better(keys[a][std::size_t(i)], keys[a][std::size_t(best[a])])) best[a] = i;
          if (better(keys[a][std::size_t(worst[a])], keys[a][std::size_t(i)])) worst[a] = i;
        }
      }
      std::array<double, kMutateOps> mean{};
      for (const auto& agent : agents) {
        for (int i = 0; i < kMutateOps; ++i) mean[std::size_t(i)] += agent.stats.weight[std::size_t(i)];
      }
      for (double& w : mean) w /= double(agents.size());

      std::vector<Chromosome> donors;
      donors.reserve(agents.size());
      for (std::size_t a = 0; a < agents.size(); ++a) {
        std::size_t donor = a == 0 ? 1 : 0;
        for (std::size_t b = 0; b < agents.size(); ++b) {
          if (b != a && better(keys[b][std::size_t(best[b])], keys[donor][std::size_t(best[donor])])) {
            donor = b;
          }
        }
        donors.push_back(agents[donor].pop[std::size_t(best[donor])]);
      }
      for (std::size_t a = 0; a < agents.size(); ++a) {
        agents[a].pop[std::size_t(worst[a])] = std::move(donors[a]);
        agents[a].stats.weight = mean;
      }
    }
  }

  Schedule out = decode(agents.front().pop.front(), prob);
  ScheduleKey out_key = key_of(out);
  for (const auto& agent : agents) {
    for (const auto& c : agent.pop) {
      Schedule s = decode(c, prob);
      const ScheduleKey k = key_of(s);
      if (better(k, out_key)) {
        out = std::move(s);
        out_key = k;
      }
    }
  }
  return out;
}

namespace {

void enumerate_orders(Chromosome& chrom, int robot, const MissionProblem& prob,
                      Schedule& best, ScheduleKey& best_key, bool& found) {
  if (robot == prob.robots()) {
    Schedule s = decode_impl(chrom, prob);
    const ScheduleKey k = key_of(s);
    if (!found || better(k, best_key)) {
      best = std::move(s);
      best_key = k;
      found = true;
    }
    return;
  }
  auto& s = chrom.seq[std::size_t(robot)];
  std::sort(s.begin(), s.end());
  if (s.empty()) {
    enumerate_orders(chrom, robot + 1, prob, best, best_key, found);
    return;
  }
  do {
    enumerate_orders(chrom, robot + 1, prob, best, best_key, found);
  } while (std::next_permutation(s.begin(), s.end()));
}

void enumerate_assignments(Chromosome& chrom, int action, const MissionProblem& prob,
                           Schedule& best, ScheduleKey& best_key, bool& found) {
  if (action == int(prob.actions.size())) {
    Chromosome work = chrom;
    enumerate_orders(work, 0, prob, best, best_key, found);
    return;
  }
  for (int i = 0; i < prob.robots(); ++i) {
    if (!prob.supports(i, action)) continue;
    chrom.seq[std::size_t(i)].push_back(action);
    enumerate_assignments(chrom, action + 1, prob, best, best_key, found);
    chrom.seq[std::size_t(i)].pop_back();
  }
}

}  // namespace

Schedule brute_force_schedule(const MissionProblem& prob) {
  prob.validate();
  if (prob.actions.size() > 8 || prob.robots() > 3) {
    throw std::invalid_argument("brute_force_schedule: instance too large (n <= 8, m <= 3)");
  }
  Chromosome chrom;
  chrom.seq.resize(prob.robots());
  Schedule best;
  ScheduleKey best_key{false, kInf, kInf};
  bool found = false;
  enumerate_assignments(chrom, 0, prob, best, best_key, found);
  if (!found) {
    best.robot_schedules.resize(prob.robots());
    best.feasible = prob.actions.empty();
    best.makespan = best.feasible ? 0.0 : prob.deadlock_penalty;
  }
  return best;
}

MissionProblem actions_from_counts(const std::vector<PlantYield>& yields,
                                   const worldsim::GreenhouseLayout& layout,
                                   const MissionGenParams& params) {
  if (params.robots < 1 || !(params.robot_speed > 0.0) ||
      !(params.time_per_fruit > 0.0)) {
    throw std::invalid_argument("actions_from_counts: bad parameters");
  }
  MissionProblem prob;
  Vec3 base = layout.workstation.center();
  base.z() = 0.0;
  for (int i = 0; i < params.robots; ++i) {
    const double offset = (i - 0.5 * (params.robots - 1)) * params.depot_spacing;
    prob.depots.push_back(base + Vec3(offset, 0.0, 0.0));
    prob.speed.push_back(params.robot_speed);
  }
  for (const auto& y : yields) {
    if (y.count <= 0) continue;
    MissionProblem::Action action;
    action.location = y.location;
    const double duration = y.count * params.time_per_fruit;
    for (int i = 0; i < params.robots; ++i) {
      action.duration.push_back(duration);
      // Effort proxy: harvest time plus the travel time from the depot.
      action.cost.push_back(duration + (y.location - prob.depots[std::size_t(i)]).norm() /
                                           params.robot_speed);
    }
    prob.actions.push_back(std::move(action));
  }
  return prob;
}

std::string problem_to_json(const MissionProblem& prob) {
  nlohmann::json j;
  j["depots"] = nlohmann::json::array();
  for (const auto& d : prob.depots) j["depots"].push_back({d.x(), d.y(), d.z()});
  j["speed"] = prob.speed;
  j["tie_epsilon"] = prob.tie_epsilon;
  j["deadlock_penalty"] = prob.deadlock_penalty;
  j["actions"] = nlohmann::json::array();
  for (const auto& a : prob.actions) {
    j["actions"].push_back({{"location", {a.location.x(), a.location.y(), a.location.z()}},
                            {"duration", a.duration},
                            {"cost", a.cost}});
  }
  j["precedence"] = nlohmann::json::array();
  for (const auto& [a, b] : prob.precedence) j["precedence"].push_back({a, b});
  return j.dump(2);
}

MissionProblem problem_from_json(const std::string& text) {
  MissionProblem prob;
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    for (const auto& d : j.at("depots")) {
      prob.depots.emplace_back(d.at(0).get<double>(), d.at(1).get<double>(),
                               d.at(2).get<double>());
    }
    prob.speed = j.at("speed").get<std::vector<double>>();
    prob.tie_epsilon = j.at("tie_epsilon").get<double>();
    prob.deadlock_penalty = j.at("deadlock_penalty").get<double>();
    for (const auto& ja : j.at("actions")) {
      MissionProblem::Action a;
      a.location = Vec3(ja.at("location").at(0).get<double>(),
                        ja.at("location").at(1).get<double>(),
                        ja.at("location").at(2).get<double>());
      a.duration = ja.at("duration").get<std::vector<double>>();
      for (double& d : a.duration) {
        if (d < 0.0) d = kInf;  // JSON has no infinity; negatives mark unsupported
      }
      a.cost = ja.at("cost").get<std::vector<double>>();
      prob.actions.push_back(std::move(a));
    }
    for (const auto& jp : j.at("precedence")) {
      prob.precedence.emplace_back(jp.at(0).get<int>(), jp.at(1).get<int>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw io::ParseError(e.what());
  }
  prob.validate();
  return prob;
}

std::string schedule_to_json(const Schedule& schedule) {
  nlohmann::json j;
  j["makespan"] = schedule.makespan;
  j["total_cost"] = schedule.total_cost;
  j["feasible"] = schedule.feasible;
  j["robots"] = nlohmann::json::array();
  for (const auto& robot : schedule.robot_schedules) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : robot) {
      entries.push_back({{"action", e.action}, {"start", e.start}, {"finish", e.finish}});
    }
    j["robots"].push_back(std::move(entries));
  }
  return j.dump(2);
}

Schedule schedule_from_json(const std::string& text) {
  Schedule s;
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    s.makespan = j.at("makespan").get<double>();
    s.total_cost = j.at("total_cost").get<double>();
    s.feasible = j.at("feasible").get<bool>();
    for (const auto& robot : j.at("robots")) {
      std::vector<ScheduleEntry> entries;
      for (const auto& e : robot) {
        entries.push_back({e.at("action").get<int>(), e.at("start").get<double>(),
                           e.at("finish").get<double>()});
      }
      s.robot_schedules.push_back(std::move(entries));
    }
  } catch (const nlohmann::json::exception& e) {
    throw io::ParseError(e.what());
  }
  return s;
}

std::string schedule_to_csv(const Schedule& schedule) {
  std::string out = "robot,action,start,finish\n";
  for (std::size_t i = 0; i < schedule.robot_schedules.size(); ++i) {
    for (const auto& e : schedule.robot_schedules[i]) {
      out += std::to_string(i) + ',' + std::to_string(e.action) + ',' +
             io::format_double(e.start) + ',' + io::format_double(e.finish) + '\n';
    }
  }
  return out;
}

}  // namespace gscout::mission
