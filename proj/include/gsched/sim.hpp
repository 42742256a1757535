#pragma once

#include <optional>

#include "gsched/greedy.hpp"
#include "gsched/model.hpp"

namespace gsched::sim {

enum class TraceKind { arrival, start, preempt, completion, tick };
const char* trace_kind_name(TraceKind kind);

// One record per simulation event, including placement changes; enough to
// reconstruct per-node GPU occupancy over time.
struct TraceRecord {
    Seconds time = 0;
    TraceKind kind = TraceKind::arrival;
    std::string job;   // empty for ticks
    std::string node;  // empty unless start/preempt/completion
    int gpus = 0;
};

struct CallStat {
    Seconds at = 0;            // T_c of the rescheduling point
    double wall_seconds = 0;   // wall time of the policy call only
    Currency objective = 0;    // f_OBJ of the applied schedule
};

struct CostLedger {
    Currency energy_cost = 0;       // PUE-inflated, integrated over run intervals
    Currency tardiness_penalty = 0; // sum of w_j * max(0, completion_j - d_j)
    Seconds makespan = 0;           // time at which the last job finishes
    std::vector<CallStat> per_call_stats;

    Currency total_cost() const { return energy_cost + tardiness_penalty; }
};

struct JobOutcome {
    Seconds completion_time = 0;
    double executed_epochs = 0;  // all work done, including rework
    double lost_epochs = 0;      // rework lost to preemption snapshots
};

// Catalog-level node description; cost rates are derived from the power
// model when the simulation starts.
struct NodePower {
    std::string id;
    GpuType gpu_type;
    int capacity = 1;
    double idle_watts = 200.0;
    double gpu_watts = 250.0;
};

struct Catalog {
    std::vector<NodePower> nodes;
    ProfileTable profiles;
    double rho = 100.0;
};

enum class PolicyKind { rg, fifo, edf, ps };
const char* policy_kind_name(PolicyKind kind);
std::optional<PolicyKind> parse_policy(const std::string& name);

struct SimConfig {
    std::optional<Seconds> periodic_interval;
    int snapshot_epochs = 1;
    double price_per_kwh = 0.172;  // EUR per kWh
    double pue = 1.33;             // datacenter overhead multiplier
    PolicyKind policy = PolicyKind::rg;
    rg::GreedyConfig greedy;
    std::optional<Seconds> horizon;  // explicit H; defaults to the rescheduling
                                     // period, else the mean inter-arrival time
};

// Cost per second of drawing `watts` continuously, PUE-inflated.
Currency watts_cost_rate(double watts, double price_per_kwh, double pue);

// Bake the power model into per-g cost rates.
std::vector<Node> lower_catalog(const Catalog& catalog, double price_per_kwh, double pue);

struct SimResult {
    CostLedger ledger;
    std::vector<TraceRecord> trace;
    std::map<std::string, JobOutcome> outcomes;
    std::vector<Node> nodes;  // lowered nodes, rates baked in
};

// Deterministic event loop: arrivals, completions and periodic ticks are
// rescheduling points; the configured policy is invoked at each one. Under
// rg, running jobs are preemptible and restart from their last snapshot when
// displaced; first-principle policies never touch a started job.
SimResult run(const std::vector<JobSpec>& workload, const Catalog& catalog,
              const SimConfig& config);

struct Summary {
    double mean_energy = 0, std_energy = 0;
    double mean_total = 0, std_total = 0;
    double mean_makespan = 0, std_makespan = 0;
    double mean_call_seconds = 0;
    std::size_t runs = 0;
};

Summary summarize(const std::vector<CostLedger>& ledgers);

}  // namespace gsched::sim
