#include "gsched/greedy.hpp"

#include <algorithm>
#include <limits>
#include <thread>

#include "gsched/candidates.hpp"

namespace gsched::rg {

namespace {

constexpr double kZeroCostShift = 1e-9;

struct ViewJob {
    const JobState* job = nullptr;
    JobCandidates cands;
    Seconds pressure = 0;
    Seconds max_remaining = 0;  // M_j
};

// Everything construction iterations need, precomputed once per optimize call.
struct SolverView {
    const ProblemInstance* instance = nullptr;
    std::vector<ViewJob> jobs;        // instance order
    std::vector<std::size_t> base_order;  // pressure-desc, id-asc
};

SolverView build_view(const ProblemInstance& instance) {
    SolverView view;
    view.instance = &instance;
    view.jobs.reserve(instance.jobs.size());
    for (const auto& job : instance.jobs) {
        ViewJob vj;
        vj.job = &job;
        vj.cands = build_job_candidates(job, instance);
        if (vj.cands.all_by_time.empty())
            throw UnprofiledConfigurationError("job " + job.spec.id +
                                               ": no profiled configuration");
        vj.pressure = instance.now + vj.cands.all_by_time.front().time - job.spec.due_date;
        vj.max_remaining = vj.cands.all_by_time.back().time;
        view.jobs.push_back(std::move(vj));
    }
    view.base_order.resize(view.jobs.size());
    for (std::size_t i = 0; i < view.base_order.size(); ++i) view.base_order[i] = i;
    std::sort(view.base_order.begin(), view.base_order.end(),
              [&](std::size_t a, std::size_t b) {
                  if (view.jobs[a].pressure != view.jobs[b].pressure)
                      return view.jobs[a].pressure > view.jobs[b].pressure;
                  return view.jobs[a].job->spec.id < view.jobs[b].job->spec.id;
              });
    return view;
}

// Single adjacent-transposition sweep; the pair (j, k) swaps with probability
// swap_base * min(1, w_k / w_j), so heavy jobs resist demotion.
void swap_pass(std::vector<std::size_t>& order, const SolverView& view,
               const GreedyConfig& config, Rng& rng) {
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        const double wj = view.jobs[order[i]].job->spec.tardiness_weight;
        const double wk = view.jobs[order[i + 1]].job->spec.tardiness_weight;
        const double ratio = wj > 0 ? std::min(1.0, wk / wj) : 1.0;
        if (rng.bernoulli(config.swap_base_probability * ratio))
            std::swap(order[i], order[i + 1]);
    }
}

const Candidate& sample_candidate(const JobCandidates& cands, const GreedyConfig& config,
                                  Rng* rng, std::vector<double>& weight_scratch) {
    const bool feasible = cands.deadline_feasible();
    const auto& list = feasible ? cands.feasible_by_cost : cands.all_by_time;
    if (rng == nullptr) return list.front();
    const std::size_t pool =
        std::min(list.size(), static_cast<std::size_t>(config.candidate_pool_size));
    bool any_zero = false;
    for (std::size_t i = 0; i < pool; ++i) {
        const double key = feasible ? list[i].cost : list[i].time;
        if (key == 0) any_zero = true;
    }
    weight_scratch.resize(pool);
    for (std::size_t i = 0; i < pool; ++i) {
        double key = feasible ? list[i].cost : list[i].time;
        if (any_zero) key += kZeroCostShift;
        weight_scratch[i] = 1.0 / key;
    }
    return list[rng->weighted_index(weight_scratch)];
}

// Decision per view-job index; candidate index into all node slots.
using ViewDecisions = std::vector<std::optional<Candidate>>;

// per-iteration scratch buffers, reused to keep the hot path allocation-free
struct Workspace {
    std::vector<std::size_t> order;
    std::vector<int> free_gpus;
    std::vector<char> open;
    std::vector<double> weights;
    ViewDecisions decisions;
};

void construct_on_view(const SolverView& view, const GreedyConfig& config, Rng* rng,
                       Workspace& ws) {
    const ProblemInstance& instance = *view.instance;
    ws.order = view.base_order;
    std::vector<std::size_t>& order = ws.order;
    if (rng != nullptr) swap_pass(order, view, config, *rng);

    ws.free_gpus.resize(instance.nodes.size());
    for (std::size_t n = 0; n < instance.nodes.size(); ++n)
        ws.free_gpus[n] = instance.nodes[n].capacity;
    ws.open.assign(instance.nodes.size(), 0);  // nodes with >=1 assignment
    std::vector<int>& free_gpus = ws.free_gpus;
    std::vector<char>& open = ws.open;

    ws.decisions.assign(view.jobs.size(), std::nullopt);
    ViewDecisions& decisions = ws.decisions;
    for (std::size_t ji : order) {
        const ViewJob& vj = view.jobs[ji];
        const Candidate& cand = sample_candidate(vj.cands, config, rng, ws.weights);

        auto place = [&](const Candidate& c) {
            decisions[ji] = c;
            free_gpus[static_cast<std::size_t>(c.node_index)] -= c.gpus;
            open[static_cast<std::size_t>(c.node_index)] = 1;
        };

        if (free_gpus[static_cast<std::size_t>(cand.node_index)] >= cand.gpus) {
            place(cand);  // candidate node is opened on demand
            continue;
        }
        bool placed = false;
        // suboptimal fallback: deadline-feasible configurations on open nodes,
        // cheapest first
        for (const Candidate& c : vj.cands.feasible_by_cost) {
            const auto n = static_cast<std::size_t>(c.node_index);
            if (open[n] && free_gpus[n] >= c.gpus) {
                place(c);
                placed = true;
                break;
            }
        }
        // then any configuration on open nodes, fastest first
        if (!placed)
            for (const Candidate& c : vj.cands.all_by_time) {
                const auto n = static_cast<std::size_t>(c.node_index);
                if (open[n] && free_gpus[n] >= c.gpus) {
                    place(c);
                    placed = true;
                    break;
                }
            }
        // otherwise the job stays postponed
    }
}

// Mirrors evaluate_objective term by term (same accumulation order) on the
// precomputed view, so both paths produce bit-identical totals. The per-node
// argmin is computed in one pass over jobs; it is order-independent, and the
// final first-end sum runs over nodes in instance order exactly as
// evaluate_objective does.
ObjectiveBreakdown evaluate_on_view(const SolverView& view, const ViewDecisions& decisions,
                                    std::vector<std::size_t>& first_scratch) {
    const ProblemInstance& instance = *view.instance;
    ObjectiveBreakdown out;
    constexpr std::size_t kNone = static_cast<std::size_t>(-1);
    first_scratch.assign(instance.nodes.size(), kNone);
    for (std::size_t ji = 0; ji < view.jobs.size(); ++ji) {
        const ViewJob& vj = view.jobs[ji];
        const double w = vj.job->spec.tardiness_weight;
        if (decisions[ji]) {
            out.tardiness_cost +=
                w * std::max(0.0, instance.now + decisions[ji]->time - vj.job->spec.due_date);
            const auto n = static_cast<std::size_t>(decisions[ji]->node_index);
            std::size_t& cur = first_scratch[n];
            if (cur == kNone) {
                cur = ji;
            } else {
                const Candidate& a = *decisions[ji];
                const Candidate& b = *decisions[cur];
                if (a.time < b.time ||
                    (a.time == b.time &&
                     (a.gpus < b.gpus ||
                      (a.gpus == b.gpus &&
                       vj.job->spec.id < view.jobs[cur].job->spec.id))))
                    cur = ji;
            }
        } else {
            out.worst_case_cost +=
                instance.rho * w *
                std::max(0.0, instance.now + instance.horizon + vj.max_remaining -
                                  vj.job->spec.due_date);
        }
    }
    for (std::size_t n = 0; n < instance.nodes.size(); ++n) {
        const std::size_t ji = first_scratch[n];
        if (ji == kNone) continue;
        out.first_end_cost += decisions[ji]->time * instance.nodes[n].rate(decisions[ji]->gpus);
    }
    out.total = out.tardiness_cost + out.worst_case_cost + out.first_end_cost;
    return out;
}

Schedule materialize(const SolverView& view, const ViewDecisions& decisions) {
    const ProblemInstance& instance = *view.instance;
    Schedule schedule;
    schedule.timestamp = instance.now;
    for (std::size_t ji = 0; ji < view.jobs.size(); ++ji) {
        const std::string& id = view.jobs[ji].job->spec.id;
        if (decisions[ji])
            schedule.decisions[id] =
                Placement{instance.nodes[static_cast<std::size_t>(decisions[ji]->node_index)].id,
                          decisions[ji]->gpus};
        else
            schedule.decisions[id] = std::nullopt;
    }
    return schedule;
}

struct IterationBest {
    Currency total = std::numeric_limits<Currency>::infinity();
    int iteration = std::numeric_limits<int>::max();
    ViewDecisions decisions;

    bool beats(const IterationBest& other) const {
        if (total != other.total) return total < other.total;
        return iteration < other.iteration;
    }
};

IterationBest run_iterations(const SolverView& view, const GreedyConfig& config, int begin,
                             int end) {
    IterationBest best;
    Workspace ws;
    std::vector<std::size_t> first_scratch;
    for (int it = begin; it < end; ++it) {
        std::optional<Rng> rng;
        if (it > 0) rng.emplace(iteration_seed(config.seed, it));
        construct_on_view(view, config, rng ? &*rng : nullptr, ws);
        const ObjectiveBreakdown b = evaluate_on_view(view, ws.decisions, first_scratch);
        if (b.total < best.total) {
            best.total = b.total;
            best.iteration = it;
            best.decisions = ws.decisions;
        }
    }
    return best;
}

}  // namespace

void GreedyConfig::validate() const {
    if (max_iterations < 1) throw SchedulerError("max_iterations must be >= 1");
    if (swap_base_probability < 0 || swap_base_probability > 1)
        throw SchedulerError("swap_base_probability must be in [0,1]");
    if (candidate_pool_size < 1) throw SchedulerError("candidate_pool_size must be >= 1");
    if (threads < 1) throw SchedulerError("threads must be >= 1");
}

std::uint64_t iteration_seed(std::uint64_t seed, int iteration) {
    return mix64(seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(iteration + 1)));
}

std::vector<JobState> sort_jobs_list(const std::vector<JobState>& queue,
                                     const std::map<std::string, Seconds>& pressures,
                                     const GreedyConfig& config, Rng* rng) {
    std::vector<std::size_t> order(queue.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::vector<Seconds> delta(queue.size());
    for (std::size_t i = 0; i < queue.size(); ++i) {
        auto it = pressures.find(queue[i].spec.id);
        if (it == pressures.end())
            throw SchedulerError("no pressure for job " + queue[i].spec.id);
        delta[i] = it->second;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (delta[a] != delta[b]) return delta[a] > delta[b];
        return queue[a].spec.id < queue[b].spec.id;
    });
    if (rng != nullptr) {
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
            const double wj = queue[order[i]].spec.tardiness_weight;
            const double wk = queue[order[i + 1]].spec.tardiness_weight;
            const double ratio = wj > 0 ? std::min(1.0, wk / wj) : 1.0;
            if (rng->bernoulli(config.swap_base_probability * ratio))
                std::swap(order[i], order[i + 1]);
        }
    }
    std::vector<JobState> out;
    out.reserve(queue.size());
    for (std::size_t i : order) out.push_back(queue[i]);
    return out;
}

Placement select_candidate_configuration(const JobState& job,
                                         const ProblemInstance& instance,
                                         const GreedyConfig& config, Rng* rng) {
    if (rng == nullptr) return best_configuration(job, instance);
    JobCandidates cands = build_job_candidates(job, instance);
    if (cands.all_by_time.empty())
        throw UnprofiledConfigurationError("job " + job.spec.id +
                                           ": no profiled configuration");
    std::vector<double> weights;
    const Candidate& c = sample_candidate(cands, config, rng, weights);
    return Placement{instance.nodes[static_cast<std::size_t>(c.node_index)].id, c.gpus};
}

Schedule construct_schedule(const ProblemInstance& instance, const GreedyConfig& config,
                            Rng* rng) {
    config.validate();
    SolverView view = build_view(instance);
    Workspace ws;
    construct_on_view(view, config, rng, ws);
    return materialize(view, ws.decisions);
}

OptimizeResult optimize(const ProblemInstance& instance, const GreedyConfig& config) {
    config.validate();
    SolverView view = build_view(instance);

    IterationBest best;
    const int iterations = config.max_iterations;
    const int threads = std::min(config.threads, iterations);
    if (threads <= 1) {
        best = run_iterations(view, config, 0, iterations);
    } else {
        std::vector<IterationBest> partial(static_cast<std::size_t>(threads));
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        const int chunk = (iterations + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            const int begin = t * chunk;
            const int end = std::min(iterations, begin + chunk);
            pool.emplace_back([&, t, begin, end] {
                partial[static_cast<std::size_t>(t)] =
                    run_iterations(view, config, begin, end);
            });
        }
        for (auto& th : pool) th.join();
        for (auto& p : partial)
            if (p.beats(best)) best = std::move(p);
    }

    OptimizeResult result;
    result.schedule = materialize(view, best.decisions);
    result.objective = evaluate_objective(result.schedule, instance);
    result.winning_iteration = best.iteration;
    return result;
}

}  // namespace gsched::rg
