#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "kcpath/nz.hpp"

namespace kcpath {

struct AgentTask {
  int source = -1;
  int goal = -1;
};

struct MapfConfig {
  int t_min = 1, t_max = 5;  // integer steps per edge traversal
  int horizon = 500;
  double congestion_weight = 5.0;
  std::vector<int> capacity;  // per vertex; filled with 1s when empty
};

// Gridworld MAPF dynamics: agents at a vertex pick an incident edge (or
// nop), traverse it over a uniformly drawn number of steps, and are
// absorbed on reaching their goal. Team reward each step is -1 per agent
// off goal minus a congestion penalty per unit of capacity excess.
class MapfEnv {
 public:
  static constexpr int kNop = -1;

  MapfEnv(const Graph* g, MapfConfig cfg, std::vector<AgentTask> tasks,
          uint64_t seed);
  void reset(uint64_t seed);

  int num_agents() const { return static_cast<int>(agents_.size()); }
  const Graph& graph() const { return *g_; }
  const MapfConfig& config() const { return cfg_; }
  const AgentTask& task(int i) const { return agents_[i].task; }

  // Decisions happen only at vertices; in-transit and absorbed agents
  // are skipped (their submitted action must be kNop).
  bool agent_decides(int i) const;
  bool agent_done(int i) const { return agents_[i].done; }
  int agent_vertex(int i) const { return agents_[i].vertex; }
  int time() const { return t_; }
  bool episode_done() const;

  struct StepResult {
    double reward = 0.0;
    bool done = false;
  };
  // actions[i] = edge variable incident to agent i's vertex, or kNop.
  StepResult step(const std::vector<int>& actions);

 private:
  struct Agent {
    AgentTask task;
    int vertex = -1;
    bool done = false;
    bool in_transit = false;
    int dest_vertex = -1;
    int remaining = 0;
  };
  const Graph* g_;
  MapfConfig cfg_;
  std::vector<Agent> agents_;
  std::mt19937_64 rng_;
  int t_ = 0;
};

// Tabular policy over feature keys (current vertex, goal). Scores are
// logits; action slot 0 is nop and slot 1+j is the j-th incident edge of
// the current vertex.
struct MaskedPolicy {
  std::unordered_map<uint64_t, std::vector<double>> theta;

  std::vector<double>& scores(uint64_t key, int num_actions);
};

inline uint64_t feature_key(int vertex, int goal) {
  return (static_cast<uint64_t>(vertex) << 32) | static_cast<uint32_t>(goal);
}

// Masked softmax: probability mass only on masked-in slots, zero
// elsewhere. Throws std::invalid_argument on an all-zero mask.
std::vector<double> masked_action_probs(const std::vector<double>& scores,
                                        const std::vector<char>& mask);

// One recorded agent decision inside an episode.
struct Decision {
  int t = 0;  // env step index of the decision
  uint64_t key = 0;
  int num_actions = 0;
  std::vector<char> mask;
  int action = 0;  // slot index
};

// REINFORCE ascent on the masked log-softmax with discounted returns
// computed from the shared per-step team rewards.
void reinforce_update(MaskedPolicy& pol, const std::vector<Decision>& decisions,
                      const std::vector<double>& rewards, double gamma,
                      double alpha);

// Gradient of log pi(action | scores, mask) with respect to the scores
// (zero on masked-out slots). Exposed for the finite-difference check.
std::vector<double> masked_logprob_grad(const std::vector<double>& scores,
                                        const std::vector<char>& mask,
                                        int action);

struct QTransition {
  uint64_t key = 0;
  int num_actions = 0;
  int action = 0;  // slot index
  double reward = 0.0;
  double discount = 0.0;  // gamma^elapsed; 0 at terminal
  uint64_t next_key = 0;
  int next_num_actions = 0;
  std::vector<int> next_feas;  // feasible slots at the next decision
  bool terminal = false;
};

// Independent per-agent tabular Q-learning with a replay buffer; the
// bootstrap maximizes only over the feasible slots stored with the
// transition, never recomputing them at replay time.
class QLearner {
 public:
  QLearner(double alpha, double gamma, double epsilon)
      : alpha_(alpha), gamma_(gamma), epsilon_(epsilon) {}

  std::vector<double>& values(uint64_t key, int num_actions);
  int act(uint64_t key, const std::vector<int>& feasible_slots,
          int num_actions, std::mt19937_64& rng);
  void qlearn_step(const QTransition& tr);
  // Applies the transition, stores it, and replays a minibatch.
  void observe(QTransition tr, std::mt19937_64& rng, int replay_batch = 8);

 private:
  std::unordered_map<uint64_t, std::vector<double>> q_;
  std::vector<QTransition> replay_;
  double alpha_, gamma_, epsilon_;
};

enum class Trainer {
  kReinforceMasked,
  kReinforceUnmasked,
  kQFeasible,
  kQFull,
};
Trainer parse_trainer(const std::string& name);

struct ExperimentConfig {
  const Graph* graph = nullptr;
  std::vector<AgentTask> tasks;
  Trainer trainer = Trainer::kReinforceMasked;
  int iterations = 200;
  uint64_t seed = 0;
  MapfConfig env;
  double gamma = 0.95;
  double alpha = 0.1;
  double epsilon = 0.1;
};

struct IterationRecord {
  int iteration = 0;
  double avg_objective = 0.0;        // episode team reward per agent
  double cum_samples_per_agent = 0;  // env steps accumulated so far
  int stranded = 0;                  // agents off goal at episode end
};

// One episode per iteration. Masked trainers compile a diagram + table
// per distinct (source, goal) pair and restrict moves to FEAS; unmasked
// baselines allow every incident edge plus nop.
std::vector<IterationRecord> run_experiment(const ExperimentConfig& cfg);

void write_metrics_csv(const std::vector<IterationRecord>& records,
                       std::ostream& os);

}  // namespace kcpath
