#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace gsched {

using Seconds = double;
using Currency = double;

struct SchedulerError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A (job class, GPU type, GPU count) lookup with no profile entry.
struct UnprofiledConfigurationError : SchedulerError {
    using SchedulerError::SchedulerError;
};

// A schedule that is structurally inconsistent with its instance.
struct InvalidScheduleError : SchedulerError {
    using SchedulerError::SchedulerError;
};

struct GpuType {
    std::string name;
    double relative_speed = 1.0;  // per-epoch time divisor vs the reference type
};

// A cluster node: homogeneous GPUs, energy cost per second depending on how
// many of them are in use. cost_rate[g-1] is the rate with g GPUs busy; it
// must be strictly increasing and affine in g.
struct Node {
    std::string id;
    GpuType gpu_type;
    int capacity = 1;
    std::vector<Currency> cost_rate;

    Currency rate(int gpus) const;
    void validate() const;
};

struct JobSpec {
    std::string id;
    std::string job_class;    // profile key
    int total_epochs = 1;
    int batch_size = 1;       // metadata only
    Seconds submission_time = 0;
    Seconds due_date = 0;     // absolute, same clock as submission_time
    double tardiness_weight = 0;
};

struct Queued {};
struct Running {
    std::string node_id;
    int gpus = 1;
    Seconds started_at = 0;
    int epochs_at_start = 0;
};
struct Finished {
    Seconds completion_time = 0;
};
using JobStatus = std::variant<Queued, Running, Finished>;

struct JobState {
    JobSpec spec;
    int completed_epochs = 0;
    JobStatus status = Queued{};

    int remaining_epochs() const { return spec.total_epochs - completed_epochs; }
    bool finished() const { return std::holds_alternative<Finished>(status); }
};

// Per-epoch execution times keyed by (job class, GPU type, GPU count).
class ProfileTable {
public:
    struct Key {
        std::string job_class;
        std::string gpu_type;
        int gpus = 1;
        auto operator<=>(const Key&) const = default;
    };

    void set(const std::string& job_class, const std::string& gpu_type, int gpus,
             Seconds per_epoch);
    std::optional<Seconds> per_epoch(const std::string& job_class,
                                     const std::string& gpu_type, int gpus) const;
    Seconds per_epoch_or_throw(const std::string& job_class,
                               const std::string& gpu_type, int gpus) const;

    // positivity, per-epoch time non-increasing in g, g*t(g) non-decreasing
    void validate() const;

    const std::map<Key, Seconds>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }

private:
    std::map<Key, Seconds> entries_;
};

struct Placement {
    std::string node_id;
    int gpus = 1;
    bool operator==(const Placement&) const = default;
};

// nullopt = postponed to the next rescheduling point
using Decision = std::optional<Placement>;

// One rescheduling point's output: a decision for every job in the queue.
struct Schedule {
    std::map<std::string, Decision> decisions;
    Seconds timestamp = 0;  // T_c the schedule was computed at
};

struct ObjectiveBreakdown {
    Currency tardiness_cost = 0;   // sum of w_j * tau_j
    Currency worst_case_cost = 0;  // sum of rho * w_j * tau_hat_j
    Currency first_end_cost = 0;   // sum of first-ending jobs' execution costs
    Currency total = 0;
};

// The capacity-allocation problem at one rescheduling point.
struct ProblemInstance {
    std::vector<Node> nodes;
    std::vector<JobState> jobs;  // the current queue
    ProfileTable profiles;
    double rho = 100.0;          // postponement penalty coefficient
    Seconds horizon = 300.0;     // H, the scheduling interval
    Seconds now = 0.0;           // T_c

    const Node* find_node(const std::string& id) const;
    void validate() const;
};

// Remaining execution time of `job` on `node` with `gpus` GPUs:
// remaining epochs times the profiled per-epoch time. 0 once finished.
Seconds remaining_time(const JobState& job, const Node& node, int gpus,
                       const ProfileTable& profiles);

// Slowest-configuration remaining time (M_j). Used for worst-case tardiness.
Seconds max_remaining_time(const JobState& job, const ProblemInstance& instance);

// Pressure: T_c + fastest remaining time - due date. Positive means the due
// date is missed even on the fastest configuration.
Seconds pressure(const JobState& job, const ProblemInstance& instance);

// The configurations on which the job would finish strictly before its due
// date, ignoring occupancy.
bool deadline_feasible(const JobState& job, const Node& node, int gpus,
                       const ProblemInstance& instance);

// Cheapest configuration meeting the due date if one exists, else the fastest
// overall. Ties broken by (node id, gpus). Ignores occupancy.
Placement best_configuration(const JobState& job, const ProblemInstance& instance);

// Which cost rate the first-ending term charges: the rate indexed by the
// job's own GPU count (literal reading) or by the node-wide total in use.
enum class FirstEndRate { job_gpus, node_total_gpus };

ObjectiveBreakdown evaluate_objective(const Schedule& schedule,
                                      const ProblemInstance& instance,
                                      FirstEndRate rate_mode = FirstEndRate::job_gpus);

}  // namespace gsched
