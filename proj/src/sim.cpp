#include "gsched/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <queue>

#include "gsched/baselines.hpp"

namespace gsched::sim {

const char* trace_kind_name(TraceKind kind) {
    switch (kind) {
        case TraceKind::arrival: return "arrival";
        case TraceKind::start: return "start";
        case TraceKind::preempt: return "preempt";
        case TraceKind::completion: return "completion";
        case TraceKind::tick: return "tick";
    }
    return "?";
}

const char* policy_kind_name(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::rg: return "rg";
        case PolicyKind::fifo: return "fifo";
        case PolicyKind::edf: return "edf";
        case PolicyKind::ps: return "ps";
    }
    return "?";
}

std::optional<PolicyKind> parse_policy(const std::string& name) {
    if (name == "rg") return PolicyKind::rg;
    if (name == "fifo") return PolicyKind::fifo;
    if (name == "edf") return PolicyKind::edf;
    if (name == "ps") return PolicyKind::ps;
    return std::nullopt;
}

Currency watts_cost_rate(double watts, double price_per_kwh, double pue) {
    return watts * pue * price_per_kwh / 3.6e6;
}

std::vector<Node> lower_catalog(const Catalog& catalog, double price_per_kwh, double pue) {
    std::vector<Node> nodes;
    nodes.reserve(catalog.nodes.size());
    for (const auto& np : catalog.nodes) {
        Node n;
        n.id = np.id;
        n.gpu_type = np.gpu_type;
        n.capacity = np.capacity;
        for (int g = 1; g <= np.capacity; ++g)
            n.cost_rate.push_back(
                watts_cost_rate(np.idle_watts + g * np.gpu_watts, price_per_kwh, pue));
        n.validate();
        nodes.push_back(std::move(n));
    }
    return nodes;
}

namespace {

enum EventKind { kArrival = 0, kCompletion = 1, kTick = 2 };

struct Event {
    Seconds time = 0;
    int kind = kArrival;
    std::string job;
    int version = 0;  // placement generation for completion staleness
};

struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
        if (a.time != b.time) return a.time > b.time;
        if (a.kind != b.kind) return a.kind > b.kind;
        return a.job > b.job;
    }
};

struct SimJob {
    JobSpec spec;
    double progress = 0;  // retained epochs, fractional
    double executed = 0;  // all epochs run, including rework
    double lost = 0;      // epochs lost to snapshot rollback
    bool arrived = false;
    bool finished = false;
    Seconds completion_time = 0;
    std::optional<Placement> placement;
    Seconds started_at = 0;     // of the current placement
    int epochs_at_start = 0;
    int version = 0;
};

struct Engine {
    const Catalog& catalog;
    const SimConfig& config;
    std::vector<Node> nodes;
    std::map<std::string, std::size_t> node_index;
    std::vector<SimJob> jobs;  // workload order
    std::map<std::string, std::size_t> job_index;
    Seconds horizon = 300;

    std::priority_queue<Event, std::vector<Event>, EventAfter> events;
    std::vector<int> used_gpus;
    Seconds now = 0;
    int arrivals_pending = 0;
    int unfinished = 0;
    int idle_reschedules = 0;

    SimResult result;

    Engine(const std::vector<JobSpec>& workload, const Catalog& cat, const SimConfig& cfg)
        : catalog(cat), config(cfg) {
        if (cfg.snapshot_epochs < 1) throw SchedulerError("snapshot_epochs must be >= 1");
        if (cfg.pue < 1) throw SchedulerError("pue must be >= 1");
        if (cfg.periodic_interval && !(*cfg.periodic_interval > 0))
            throw SchedulerError("periodic_interval must be > 0");
        nodes = lower_catalog(cat, cfg.price_per_kwh, cfg.pue);
        for (std::size_t n = 0; n < nodes.size(); ++n) node_index[nodes[n].id] = n;
        used_gpus.assign(nodes.size(), 0);
        for (const auto& spec : workload) {
            job_index[spec.id] = jobs.size();
            SimJob job;
            job.spec = spec;
            jobs.push_back(std::move(job));
        }
        if (job_index.size() != jobs.size()) throw SchedulerError("duplicate job ids");
        horizon = derive_horizon(workload);
        validate_inputs();
    }

    Seconds derive_horizon(const std::vector<JobSpec>& workload) const {
        if (config.horizon) return *config.horizon;
        if (config.periodic_interval) return *config.periodic_interval;
        if (workload.size() >= 2) {
            Seconds lo = workload.front().submission_time;
            Seconds hi = lo;
            for (const auto& j : workload) {
                lo = std::min(lo, j.submission_time);
                hi = std::max(hi, j.submission_time);
            }
            const Seconds mean = (hi - lo) / static_cast<Seconds>(workload.size() - 1);
            if (mean > 0) return mean;
        }
        return 300;
    }

    void validate_inputs() const {
        ProblemInstance probe;
        probe.nodes = nodes;
        probe.profiles = catalog.profiles;
        probe.rho = catalog.rho;
        probe.horizon = horizon;
        probe.now = 0;
        for (const auto& j : jobs) probe.jobs.push_back(JobState{j.spec, 0, Queued{}});
        probe.validate();
    }

    double snapshot_floor(double progress) const {
        const double snap = config.snapshot_epochs;
        return std::floor(progress / snap) * snap;
    }

    Seconds per_epoch(const SimJob& job, const Placement& p) const {
        const Node& node = nodes[node_index.at(p.node_id)];
        return catalog.profiles.per_epoch_or_throw(job.spec.job_class, node.gpu_type.name,
                                                   p.gpus);
    }

    void emit(TraceKind kind, const std::string& job, const std::string& node, int gpus) {
        result.trace.push_back(TraceRecord{now, kind, job, node, gpus});
    }

    void accrue_and_advance(Seconds to) {
        const Seconds dt = to - now;
        if (dt > 0) {
            for (std::size_t n = 0; n < nodes.size(); ++n)
                if (used_gpus[n] > 0)
                    result.ledger.energy_cost += nodes[n].rate(used_gpus[n]) * dt;
            for (auto& job : jobs) {
                if (!job.placement || job.finished) continue;
                const double delta = dt / per_epoch(job, *job.placement);
                const double added =
                    std::min(delta, static_cast<double>(job.spec.total_epochs) - job.progress);
                job.progress += added;
                job.executed += added;
            }
        }
        now = to;
    }

    ProblemInstance build_instance() const {
        ProblemInstance inst;
        inst.nodes = nodes;
        inst.profiles = catalog.profiles;
        inst.rho = catalog.rho;
        inst.horizon = horizon;
        inst.now = now;
        for (const auto& job : jobs) {
            if (!job.arrived || job.finished) continue;
            JobState s;
            s.spec = job.spec;
            s.completed_epochs = static_cast<int>(snapshot_floor(job.progress));
            if (job.placement)
                s.status = Running{job.placement->node_id, job.placement->gpus,
                                   job.started_at, job.epochs_at_start};
            else
                s.status = Queued{};
            inst.jobs.push_back(std::move(s));
        }
        return inst;
    }

    void schedule_completion(SimJob& job) {
        const double remaining = static_cast<double>(job.spec.total_epochs) - job.progress;
        const Seconds finish = now + remaining * per_epoch(job, *job.placement);
        events.push(Event{finish, kCompletion, job.spec.id, job.version});
    }

    void reschedule() {
        ProblemInstance instance = build_instance();
        if (instance.jobs.empty()) return;

        Schedule schedule;
        Currency objective = 0;
        const auto t0 = std::chrono::steady_clock::now();
        if (config.policy == PolicyKind::rg) {
            auto res = rg::optimize(instance, config.greedy);
            schedule = std::move(res.schedule);
            objective = res.objective.total;
        } else {
            std::map<std::string, Placement> locked;
            for (const auto& job : jobs)
                if (job.arrived && !job.finished && job.placement)
                    locked[job.spec.id] = *job.placement;
            baselines::Policy policy = baselines::Policy::fifo;
            if (config.policy == PolicyKind::edf) policy = baselines::Policy::edf;
            if (config.policy == PolicyKind::ps) policy = baselines::Policy::ps;
            schedule = baselines::baseline_schedule(instance, policy, locked);
        }
        const auto t1 = std::chrono::steady_clock::now();
        if (config.policy != PolicyKind::rg)
            objective = evaluate_objective(schedule, instance).total;
        result.ledger.per_call_stats.push_back(
            CallStat{now, std::chrono::duration<double>(t1 - t0).count(), objective});

        apply(schedule);
    }

    void apply(const Schedule& schedule) {
        // release phase: preempt every job whose placement changes
        for (const auto& [id, decision] : schedule.decisions) {
            SimJob& job = jobs[job_index.at(id)];
            if (!job.placement || decision == job.placement) continue;
            const Placement old = *job.placement;
            used_gpus[node_index.at(old.node_id)] -= old.gpus;
            const double snapped = snapshot_floor(job.progress);
            job.lost += job.progress - snapped;
            job.progress = snapped;
            job.placement.reset();
            job.version++;
            emit(TraceKind::preempt, id, old.node_id, old.gpus);
        }
        // start phase
        for (const auto& [id, decision] : schedule.decisions) {
            SimJob& job = jobs[job_index.at(id)];
            if (!decision || job.placement == decision) continue;
            job.placement = *decision;
            job.started_at = now;
            job.epochs_at_start = static_cast<int>(snapshot_floor(job.progress));
            used_gpus[node_index.at(decision->node_id)] += decision->gpus;
            job.version++;
            emit(TraceKind::start, id, decision->node_id, decision->gpus);
            schedule_completion(job);
        }
    }

    SimResult run_loop() {
        for (const auto& job : jobs)
            events.push(Event{job.spec.submission_time, kArrival, job.spec.id, 0});
        arrivals_pending = static_cast<int>(jobs.size());
        unfinished = static_cast<int>(jobs.size());
        if (config.periodic_interval)
            events.push(Event{*config.periodic_interval, kTick, "", 0});

        while (!events.empty()) {
            // drain every event at this instant, then reschedule once: a
            // rescheduling point is a time instant, not an individual record
            const Seconds at = events.top().time;
            bool any_processed = false;
            while (!events.empty() && events.top().time == at) {
                const Event e = events.top();
                events.pop();
                if (e.kind == kCompletion) {
                    const SimJob& job = jobs[job_index.at(e.job)];
                    if (job.finished || !job.placement || e.version != job.version)
                        continue;  // stale: the job was preempted or reconfigured
                }
                if (e.kind == kTick && unfinished == 0) continue;

                accrue_and_advance(e.time);
                any_processed = true;

                switch (e.kind) {
                    case kArrival: {
                        SimJob& job = jobs[job_index.at(e.job)];
                        job.arrived = true;
                        --arrivals_pending;
                        emit(TraceKind::arrival, e.job, "", 0);
                        break;
                    }
                    case kCompletion: {
                        SimJob& job = jobs[job_index.at(e.job)];
                        const Placement p = *job.placement;
                        job.executed +=
                            static_cast<double>(job.spec.total_epochs) - job.progress;
                        job.progress = job.spec.total_epochs;
                        job.finished = true;
                        job.completion_time = now;
                        used_gpus[node_index.at(p.node_id)] -= p.gpus;
                        job.placement.reset();
                        job.version++;
                        --unfinished;
                        emit(TraceKind::completion, e.job, p.node_id, p.gpus);
                        break;
                    }
                    case kTick: {
                        emit(TraceKind::tick, "", "", 0);
                        if (unfinished > 0)
                            events.push(Event{now + *config.periodic_interval, kTick, "", 0});
                        break;
                    }
                }
            }
            if (!any_processed) continue;

            reschedule();

            // livelock guard: a schedule that leaves the cluster idle with
            // work waiting and nothing else on the horizon cannot make
            // progress (possible only when every tardiness weight is 0)
            bool any_running = false;
            for (const auto& job : jobs)
                if (job.placement) any_running = true;
            const bool queue_waiting = [&] {
                for (const auto& job : jobs)
                    if (job.arrived && !job.finished && !job.placement) return true;
                return false;
            }();
            if (!any_running && queue_waiting && arrivals_pending == 0) {
                if (++idle_reschedules >= 2)
                    throw SchedulerError(
                        "scheduler made no progress: jobs waiting on an idle cluster");
            } else {
                idle_reschedules = 0;
            }
        }

        if (unfinished > 0)
            throw SchedulerError("simulation ended with unfinished jobs");

        for (const auto& job : jobs) {
            result.ledger.makespan = std::max(result.ledger.makespan, job.completion_time);
            result.ledger.tardiness_penalty +=
                job.spec.tardiness_weight *
                std::max(0.0, job.completion_time - job.spec.due_date);
            result.outcomes[job.spec.id] =
                JobOutcome{job.completion_time, job.executed, job.lost};
        }
        result.nodes = nodes;
        return std::move(result);
    }
};

}  // namespace

SimResult run(const std::vector<JobSpec>& workload, const Catalog& catalog,
              const SimConfig& config) {
    Engine engine(workload, catalog, config);
    return engine.run_loop();
}

Summary summarize(const std::vector<CostLedger>& ledgers) {
    if (ledgers.empty()) throw SchedulerError("summarize: no ledgers");
    Summary s;
    s.runs = ledgers.size();
    auto stats = [&](auto get, double& mean, double& stddev) {
        double sum = 0;
        for (const auto& l : ledgers) sum += get(l);
        mean = sum / static_cast<double>(ledgers.size());
        double var = 0;
        for (const auto& l : ledgers) {
            const double d = get(l) - mean;
            var += d * d;
        }
        stddev = std::sqrt(var / static_cast<double>(ledgers.size()));
    };
    stats([](const CostLedger& l) { return l.energy_cost; }, s.mean_energy, s.std_energy);
    stats([](const CostLedger& l) { return l.total_cost(); }, s.mean_total, s.std_total);
    stats([](const CostLedger& l) { return l.makespan; }, s.mean_makespan, s.std_makespan);
    double wall = 0;
    std::size_t calls = 0;
    for (const auto& l : ledgers) {
        for (const auto& c : l.per_call_stats) wall += c.wall_seconds;
        calls += l.per_call_stats.size();
    }
    s.mean_call_seconds = calls == 0 ? 0 : wall / static_cast<double>(calls);
    return s;
}

}  // namespace gsched::sim
