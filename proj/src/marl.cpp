#include "kcpath/marl.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <ostream>
#include <stdexcept>

namespace kcpath {

MapfEnv::MapfEnv(const Graph* g, MapfConfig cfg, std::vector<AgentTask> tasks,
                 uint64_t seed)
    : g_(g), cfg_(std::move(cfg)) {
  if (cfg_.t_min < 1 || cfg_.t_min > cfg_.t_max) {
    throw std::invalid_argument("transit bounds must satisfy 1 <= t_min <= t_max");
  }
  if (cfg_.capacity.empty()) {
    cfg_.capacity.assign(g_->num_vertices(), 1);
  }
  for (int c : cfg_.capacity) {
    if (c < 1) throw std::invalid_argument("capacities must be >= 1");
  }
  agents_.resize(tasks.size());
  for (size_t i = 0; i < tasks.size(); ++i) agents_[i].task = tasks[i];
  reset(seed);
}

void MapfEnv::reset(uint64_t seed) {
  rng_.seed(seed);
  t_ = 0;
  for (auto& a : agents_) {
    a.vertex = a.task.source;
    a.done = a.vertex == a.task.goal;
    a.in_transit = false;
    a.dest_vertex = -1;
    a.remaining = 0;
  }
}

bool MapfEnv::agent_decides(int i) const {
  const Agent& a = agents_[i];
  return !a.done && !a.in_transit;
}

bool MapfEnv::episode_done() const {
  if (t_ >= cfg_.horizon) return true;
  for (const auto& a : agents_) {
    if (!a.done) return false;
  }
  return true;
}

MapfEnv::StepResult MapfEnv::step(const std::vector<int>& actions) {
  if (episode_done()) throw std::logic_error("step after episode end");
  if (actions.size() != agents_.size()) {
    throw std::invalid_argument("one action per agent required");
  }
  for (size_t i = 0; i < agents_.size(); ++i) {
    Agent& a = agents_[i];
    if (!agent_decides(static_cast<int>(i))) {
      if (actions[i] != kNop) {
        throw std::invalid_argument("non-deciding agent must submit nop");
      }
      continue;
    }
    if (actions[i] == kNop) continue;
    const auto& [u, v] = g_->edge(actions[i]);
    if (u != a.vertex && v != a.vertex) {
      throw std::invalid_argument("move action is not an incident edge");
    }
    a.in_transit = true;
    a.dest_vertex = g_->other_end(actions[i], a.vertex);
    int spread = cfg_.t_max - cfg_.t_min + 1;
    a.remaining = cfg_.t_min + static_cast<int>(rng_() % spread);
  }
  for (auto& a : agents_) {
    if (!a.in_transit) continue;
    if (--a.remaining == 0) {
      a.vertex = a.dest_vertex;
      a.in_transit = false;
      if (a.vertex == a.task.goal) a.done = true;
    }
  }
  StepResult res;
  std::vector<int> occupancy(g_->num_vertices(), 0);
  for (const auto& a : agents_) {
    if (a.done) continue;
    res.reward -= 1.0;
    if (!a.in_transit) ++occupancy[a.vertex];
  }
  for (int v = 0; v < g_->num_vertices(); ++v) {
    int excess = occupancy[v] - cfg_.capacity[v];
    if (excess > 0) res.reward -= cfg_.congestion_weight * excess;
  }
  ++t_;
  res.done = episode_done();
  return res;
}

std::vector<double>& MaskedPolicy::scores(uint64_t key, int num_actions) {
  auto& v = theta[key];
  if (v.empty()) v.assign(num_actions, 0.0);
  return v;
}

std::vector<double> masked_action_probs(const std::vector<double>& scores,
                                        const std::vector<char>& mask) {
  double best = -1e300;
  bool any = false;
  for (size_t a = 0; a < scores.size(); ++a) {
    if (mask[a]) {
      best = std::max(best, scores[a]);
      any = true;
    }
  }
  if (!any) throw std::invalid_argument("empty feasible set");
  std::vector<double> probs(scores.size(), 0.0);
  double z = 0.0;
  for (size_t a = 0; a < scores.size(); ++a) {
    if (!mask[a]) continue;
    probs[a] = std::exp(scores[a] - best);
    z += probs[a];
  }
  for (double& p : probs) p /= z;
  return probs;
}

std::vector<double> masked_logprob_grad(const std::vector<double>& scores,
                                        const std::vector<char>& mask,
                                        int action) {
  std::vector<double> probs = masked_action_probs(scores, mask);
  std::vector<double> grad(scores.size(), 0.0);
  for (size_t a = 0; a < scores.size(); ++a) {
    if (mask[a]) grad[a] = (static_cast<int>(a) == action ? 1.0 : 0.0) - probs[a];
  }
  return grad;
}

void reinforce_update(MaskedPolicy& pol, const std::vector<Decision>& decisions,
                      const std::vector<double>& rewards, double gamma,
                      double alpha) {
  std::vector<double> returns(rewards.size() + 1, 0.0);
  for (int t = static_cast<int>(rewards.size()) - 1; t >= 0; --t) {
    returns[t] = rewards[t] + gamma * returns[t + 1];
  }
  for (const auto& d : decisions) {
    auto& sc = pol.scores(d.key, d.num_actions);
    std::vector<double> grad = masked_logprob_grad(sc, d.mask, d.action);
    for (int a = 0; a < d.num_actions; ++a) {
      sc[a] += alpha * returns[d.t] * grad[a];
    }
  }
}

std::vector<double>& QLearner::values(uint64_t key, int num_actions) {
  auto& v = q_[key];
  if (v.empty()) v.assign(num_actions, 0.0);
  return v;
}

int QLearner::act(uint64_t key, const std::vector<int>& feasible_slots,
                  int num_actions, std::mt19937_64& rng) {
  if (feasible_slots.empty()) throw std::invalid_argument("empty feasible set");
  if (uniform01(rng) < epsilon_) {
    return feasible_slots[rng() % feasible_slots.size()];
  }
  const auto& qv = values(key, num_actions);
  int best = feasible_slots[0];
  for (int s : feasible_slots) {
    if (qv[s] > qv[best]) best = s;
  }
  return best;
}

void QLearner::qlearn_step(const QTransition& tr) {
  double target = tr.reward;
  if (!tr.terminal) {
    if (tr.next_feas.empty()) {
      throw std::logic_error("non-terminal transition with empty feasible set");
    }
    const auto& nq = values(tr.next_key, tr.next_num_actions);
    double best = nq[tr.next_feas[0]];
    for (int s : tr.next_feas) best = std::max(best, nq[s]);
    target += tr.discount * best;
  }
  auto& qv = values(tr.key, tr.num_actions);
  qv[tr.action] += alpha_ * (target - qv[tr.action]);
}

void QLearner::observe(QTransition tr, std::mt19937_64& rng, int replay_batch) {
  qlearn_step(tr);
  replay_.push_back(std::move(tr));
  for (int k = 0; k < replay_batch; ++k) {
    qlearn_step(replay_[rng() % replay_.size()]);
  }
}

Trainer parse_trainer(const std::string& name) {
  if (name == "reinforce-masked") return Trainer::kReinforceMasked;
  if (name == "reinforce-unmasked") return Trainer::kReinforceUnmasked;
  if (name == "q-feasible") return Trainer::kQFeasible;
  if (name == "q-full") return Trainer::kQFull;
  throw std::invalid_argument("unknown trainer: " + name);
}

namespace {

struct CompiledTask {
  std::unique_ptr<DiagramManager> mgr;
  Psdd psdd;
  SubContextTable tbl;
};

struct PendingTransition {
  bool active = false;
  int t = 0;
  uint64_t key = 0;
  int num_actions = 0;
  int action = 0;
  double reward = 0.0;
  double discount = 1.0;
};

}  // namespace

std::vector<IterationRecord> run_experiment(const ExperimentConfig& cfg) {
  const Graph& g = *cfg.graph;
  int n = static_cast<int>(cfg.tasks.size());
  bool masked = cfg.trainer == Trainer::kReinforceMasked ||
                cfg.trainer == Trainer::kQFeasible;
  bool policy_gradient = cfg.trainer == Trainer::kReinforceMasked ||
                         cfg.trainer == Trainer::kReinforceUnmasked;
  for (const auto& t : cfg.tasks) {
    if (!prefix_extends_to_path(g, t.source, t.goal, {})) {
      throw std::runtime_error("infeasible instance: goal unreachable");
    }
  }
  // One compiled diagram per distinct (source, goal) pair.
  std::map<std::pair<int, int>, std::unique_ptr<CompiledTask>> compiled;
  if (masked) {
    for (const auto& t : cfg.tasks) {
      auto key = std::make_pair(t.source, t.goal);
      if (compiled.count(key)) continue;
      auto c = std::make_unique<CompiledTask>();
      c->mgr = std::make_unique<DiagramManager>(
          Vtree::right_linear(g.num_edges()));
      c->psdd = uniform_parameterize(compile_paths(*c->mgr, g, t.source, t.goal));
      c->tbl = build_table(c->psdd);
      compiled.emplace(key, std::move(c));
    }
  }
  auto table_of = [&](int i) -> const CompiledTask& {
    return *compiled.at({cfg.tasks[i].source, cfg.tasks[i].goal});
  };

  std::vector<MaskedPolicy> policies(policy_gradient ? n : 0);
  std::vector<QLearner> learners;
  if (!policy_gradient) {
    learners.assign(n, QLearner(cfg.alpha, cfg.gamma, cfg.epsilon));
  }

  std::mt19937_64 rng(cfg.seed);
  MapfEnv env(&g, cfg.env, cfg.tasks, rng());
  std::vector<IterationRecord> records;
  double cum_samples = 0.0;

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    env.reset(rng());
    std::vector<PathState> pstates;
    if (masked) {
      for (int i = 0; i < n; ++i) {
        pstates.push_back(init_state(g, cfg.tasks[i].source));
      }
    }
    std::vector<std::vector<Decision>> decisions(n);
    std::vector<double> rewards;
    std::vector<PendingTransition> pending(n);
    double total_reward = 0.0;

    while (!env.episode_done()) {
      std::vector<int> actions(n, MapfEnv::kNop);
      for (int i = 0; i < n; ++i) {
        if (!env.agent_decides(i)) continue;
        int v = env.agent_vertex(i);
        const auto& inc = g.incident_vars(v);
        int num_actions = static_cast<int>(inc.size()) + 1;
        std::vector<char> mask(num_actions, 0);
        mask[0] = 1;  // nop is always feasible
        if (masked) {
          for (int var : feas(pstates[i], g, table_of(i).tbl)) {
            auto it = std::find(inc.begin(), inc.end(), var);
            mask[1 + static_cast<int>(it - inc.begin())] = 1;
          }
        } else {
          std::fill(mask.begin() + 1, mask.end(), 1);
        }
        uint64_t key = feature_key(v, cfg.tasks[i].goal);
        int slot;
        if (policy_gradient) {
          auto probs = masked_action_probs(
              policies[i].scores(key, num_actions), mask);
          double u = uniform01(rng);
          slot = num_actions - 1;
          double acc = 0.0;
          for (int a = 0; a < num_actions; ++a) {
            acc += probs[a];
            if (u < acc) {
              slot = a;
              break;
            }
          }
          decisions[i].push_back({env.time(), key, num_actions, mask, slot});
        } else {
          std::vector<int> feasible_slots;
          for (int a = 0; a < num_actions; ++a) {
            if (mask[a]) feasible_slots.push_back(a);
          }
          slot = learners[i].act(key, feasible_slots, num_actions, rng);
          // Close the previous decision's transition at this one.
          PendingTransition& p = pending[i];
          if (p.active) {
            QTransition tr{p.key, p.num_actions, p.action, p.reward,
                           p.discount, key, num_actions, feasible_slots,
                           false};
            learners[i].observe(std::move(tr), rng);
          }
          p = {true, env.time(), key, num_actions, slot, 0.0, 1.0};
        }
        if (slot > 0) {
          actions[i] = inc[slot - 1];
          if (masked) advance(pstates[i], actions[i], g, table_of(i).tbl);
        }
      }
      auto res = env.step(actions);
      rewards.push_back(res.reward);
      total_reward += res.reward;
      cum_samples += 1.0;
      for (auto& p : pending) {
        if (p.active) {
          p.reward += p.discount * res.reward;
          p.discount *= cfg.gamma;
        }
      }
    }
    if (policy_gradient) {
      for (int i = 0; i < n; ++i) {
        reinforce_update(policies[i], decisions[i], rewards, cfg.gamma,
                         cfg.alpha);
      }
    } else {
      for (int i = 0; i < n; ++i) {
        PendingTransition& p = pending[i];
        if (!p.active) continue;
        QTransition tr{p.key, p.num_actions, p.action, p.reward, 0.0,
                       0, 0, {}, true};
        learners[i].observe(std::move(tr), rng);
      }
    }
    IterationRecord rec;
    rec.iteration = iter;
    rec.avg_objective = total_reward / n;
    rec.cum_samples_per_agent = cum_samples;
    for (int i = 0; i < n; ++i) {
      if (!env.agent_done(i)) ++rec.stranded;
    }
    records.push_back(rec);
  }
  return records;
}

void write_metrics_csv(const std::vector<IterationRecord>& records,
                       std::ostream& os) {
  os << "iteration,avg_objective,cum_samples_per_agent,stranded\n";
  for (const auto& r : records) {
    os << r.iteration << ',' << r.avg_objective << ','
       << r.cum_samples_per_agent << ',' << r.stranded << '\n';
  }
}

}  // namespace kcpath
