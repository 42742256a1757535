#include "gsched/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace gsched {

namespace {

std::string profile_key_str(const std::string& job_class, const std::string& gpu_type,
                            int gpus) {
    std::ostringstream os;
    os << "(" << job_class << ", " << gpu_type << ", " << gpus << " GPU)";
    return os.str();
}

}  // namespace

Currency Node::rate(int gpus) const {
    if (gpus < 1 || gpus > capacity)
        throw SchedulerError("node " + id + ": no cost rate for " + std::to_string(gpus) +
                             " GPUs");
    return cost_rate[static_cast<std::size_t>(gpus - 1)];
}

void Node::validate() const {
    if (capacity < 1) throw SchedulerError("node " + id + ": capacity must be >= 1");
    if (gpu_type.relative_speed <= 0)
        throw SchedulerError("node " + id + ": relative_speed must be > 0");
    if (static_cast<int>(cost_rate.size()) != capacity)
        throw SchedulerError("node " + id + ": cost_rate must cover 1.." +
                             std::to_string(capacity));
    for (std::size_t i = 0; i + 1 < cost_rate.size(); ++i)
        if (!(cost_rate[i] < cost_rate[i + 1]))
            throw SchedulerError("node " + id + ": cost_rate must be strictly increasing");
    if (cost_rate.size() >= 3) {
        const double step = cost_rate[1] - cost_rate[0];
        const double tol = 1e-9 * (std::abs(cost_rate.back()) + 1.0);
        for (std::size_t i = 1; i + 1 < cost_rate.size(); ++i)
            if (std::abs((cost_rate[i + 1] - cost_rate[i]) - step) > tol)
                throw SchedulerError("node " + id + ": cost_rate must be affine in g");
    }
    if (!cost_rate.empty() && cost_rate.front() < 0)
        throw SchedulerError("node " + id + ": cost rates must be nonnegative");
}

void ProfileTable::set(const std::string& job_class, const std::string& gpu_type, int gpus,
                       Seconds per_epoch) {
    entries_[Key{job_class, gpu_type, gpus}] = per_epoch;
}

std::optional<Seconds> ProfileTable::per_epoch(const std::string& job_class,
                                               const std::string& gpu_type,
                                               int gpus) const {
    auto it = entries_.find(Key{job_class, gpu_type, gpus});
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

Seconds ProfileTable::per_epoch_or_throw(const std::string& job_class,
                                         const std::string& gpu_type, int gpus) const {
    auto t = per_epoch(job_class, gpu_type, gpus);
    if (!t)
        throw UnprofiledConfigurationError("unprofiled configuration " +
                                           profile_key_str(job_class, gpu_type, gpus));
    return *t;
}

void ProfileTable::validate() const {
    for (const auto& [key, t] : entries_) {
        if (!(t > 0))
            throw SchedulerError("profile " +
                                 profile_key_str(key.job_class, key.gpu_type, key.gpus) +
                                 ": per-epoch time must be > 0");
        auto prev = per_epoch(key.job_class, key.gpu_type, key.gpus - 1);
        if (prev) {
            const double tol = 1e-9 * (*prev + 1.0);
            if (t > *prev + tol)
                throw SchedulerError("profile " +
                                     profile_key_str(key.job_class, key.gpu_type, key.gpus) +
                                     ": per-epoch time must be non-increasing in g");
            // total work g*t(g) must not shrink with more GPUs (sublinear speedup)
            if (key.gpus * t < (key.gpus - 1) * *prev - tol)
                throw SchedulerError("profile " +
                                     profile_key_str(key.job_class, key.gpu_type, key.gpus) +
                                     ": g*t(g) must be non-decreasing in g");
        }
    }
}

const Node* ProblemInstance::find_node(const std::string& id) const {
    for (const auto& n : nodes)
        if (n.id == id) return &n;
    return nullptr;
}

void ProblemInstance::validate() const {
    if (rho < 0) throw SchedulerError("rho must be >= 0");
    if (!(horizon > 0)) throw SchedulerError("horizon must be > 0");
    std::set<std::string> node_ids;
    std::set<std::string> type_names;
    std::map<std::string, double> type_speed;
    for (const auto& n : nodes) {
        n.validate();
        if (!node_ids.insert(n.id).second)
            throw SchedulerError("duplicate node id " + n.id);
        auto [it, fresh] = type_speed.try_emplace(n.gpu_type.name, n.gpu_type.relative_speed);
        if (!fresh && it->second != n.gpu_type.relative_speed)
            throw SchedulerError("GPU type " + n.gpu_type.name +
                                 " has inconsistent relative_speed across nodes");
    }
    profiles.validate();
    std::set<std::string> job_ids;
    for (const auto& j : jobs) {
        if (j.spec.total_epochs < 1)
            throw SchedulerError("job " + j.spec.id + ": total_epochs must be >= 1");
        if (j.completed_epochs < 0 || j.completed_epochs > j.spec.total_epochs)
            throw SchedulerError("job " + j.spec.id + ": completed_epochs out of range");
        if (j.spec.due_date < 0)
            throw SchedulerError("job " + j.spec.id + ": due_date must be >= 0");
        if (j.spec.tardiness_weight < 0)
            throw SchedulerError("job " + j.spec.id + ": tardiness_weight must be >= 0");
        if (!job_ids.insert(j.spec.id).second)
            throw SchedulerError("duplicate job id " + j.spec.id);
        for (const auto& n : nodes)
            for (int g = 1; g <= n.capacity; ++g)
                if (!profiles.per_epoch(j.spec.job_class, n.gpu_type.name, g))
                    throw UnprofiledConfigurationError(
                        "unprofiled configuration " +
                        profile_key_str(j.spec.job_class, n.gpu_type.name, g));
    }
}

Seconds remaining_time(const JobState& job, const Node& node, int gpus,
                       const ProfileTable& profiles) {
    if (gpus < 1 || gpus > node.capacity)
        throw SchedulerError("node " + node.id + ": GPU count " + std::to_string(gpus) +
                             " outside 1.." + std::to_string(node.capacity));
    const Seconds per_epoch =
        profiles.per_epoch_or_throw(job.spec.job_class, node.gpu_type.name, gpus);
    const int remaining = job.remaining_epochs();
    if (remaining <= 0) return 0;
    return static_cast<Seconds>(remaining) * per_epoch;
}

Seconds max_remaining_time(const JobState& job, const ProblemInstance& instance) {
    Seconds worst = -1;
    for (const auto& node : instance.nodes)
        for (int g = 1; g <= node.capacity; ++g) {
            auto t = instance.profiles.per_epoch(job.spec.job_class, node.gpu_type.name, g);
            if (!t) continue;
            const Seconds rem = job.remaining_epochs() <= 0
                                    ? 0
                                    : static_cast<Seconds>(job.remaining_epochs()) * *t;
            worst = std::max(worst, rem);
        }
    if (worst < 0)
        throw UnprofiledConfigurationError("job " + job.spec.id +
                                           ": no profiled configuration");
    return worst;
}

Seconds pressure(const JobState& job, const ProblemInstance& instance) {
    Seconds fastest = std::numeric_limits<Seconds>::infinity();
    bool any = false;
    for (const auto& node : instance.nodes)
        for (int g = 1; g <= node.capacity; ++g) {
            auto t = instance.profiles.per_epoch(job.spec.job_class, node.gpu_type.name, g);
            if (!t) continue;
            any = true;
            const Seconds rem = job.remaining_epochs() <= 0
                                    ? 0
                                    : static_cast<Seconds>(job.remaining_epochs()) * *t;
            fastest = std::min(fastest, rem);
        }
    if (!any)
        throw UnprofiledConfigurationError("job " + job.spec.id +
                                           ": no profiled configuration");
    return instance.now + fastest - job.spec.due_date;
}

bool deadline_feasible(const JobState& job, const Node& node, int gpus,
                       const ProblemInstance& instance) {
    return instance.now + remaining_time(job, node, gpus, instance.profiles) <
           job.spec.due_date;
}

Placement best_configuration(const JobState& job, const ProblemInstance& instance) {
    if (instance.nodes.empty()) throw SchedulerError("empty node catalog");

    bool have_best = false;
    Placement best;
    double best_key = 0;
    bool best_feasible = false;

    auto consider = [&](const Node& node, int g, Seconds t, bool feasible) {
        const double key = feasible ? t * node.rate(g) : t;
        if (have_best) {
            if (best_feasible && !feasible) return;  // infeasible never displaces feasible
            if (best_feasible == feasible) {
                if (key > best_key) return;
                if (key == best_key) {
                    if (node.id > best.node_id) return;
                    if (node.id == best.node_id && g >= best.gpus) return;
                }
            }
        }
        have_best = true;
        best = Placement{node.id, g};
        best_key = key;
        best_feasible = feasible;
    };

    bool any = false;
    for (const auto& node : instance.nodes)
        for (int g = 1; g <= node.capacity; ++g) {
            auto per = instance.profiles.per_epoch(job.spec.job_class, node.gpu_type.name, g);
            if (!per) continue;
            any = true;
            const Seconds t = job.remaining_epochs() <= 0
                                  ? 0
                                  : static_cast<Seconds>(job.remaining_epochs()) * *per;
            consider(node, g, t, instance.now + t < job.spec.due_date);
        }
    if (!any)
        throw UnprofiledConfigurationError("job " + job.spec.id +
                                           ": no profiled configuration");
    return best;
}

ObjectiveBreakdown evaluate_objective(const Schedule& schedule,
                                      const ProblemInstance& instance,
                                      FirstEndRate rate_mode) {
    // structural validation
    if (schedule.decisions.size() != instance.jobs.size())
        throw InvalidScheduleError("schedule covers " +
                                   std::to_string(schedule.decisions.size()) + " jobs, queue has " +
                                   std::to_string(instance.jobs.size()));
    std::map<std::string, int> used;  // node id -> assigned GPUs
    for (const auto& job : instance.jobs) {
        auto it = schedule.decisions.find(job.spec.id);
        if (it == schedule.decisions.end())
            throw InvalidScheduleError("job " + job.spec.id + " missing from schedule");
        if (!it->second) continue;
        const Placement& p = *it->second;
        const Node* node = instance.find_node(p.node_id);
        if (node == nullptr)
            throw InvalidScheduleError("job " + job.spec.id + " assigned to unknown node " +
                                       p.node_id);
        if (p.gpus < 1 || p.gpus > node->capacity)
            throw InvalidScheduleError("job " + job.spec.id + ": GPU count " +
                                       std::to_string(p.gpus) + " outside 1.." +
                                       std::to_string(node->capacity));
        used[p.node_id] += p.gpus;
    }
    for (const auto& node : instance.nodes) {
        auto it = used.find(node.id);
        if (it != used.end() && it->second > node.capacity)
            throw InvalidScheduleError("node " + node.id + ": " +
                                       std::to_string(it->second) + " GPUs assigned, capacity " +
                                       std::to_string(node.capacity));
    }

    ObjectiveBreakdown out;

    // tardiness and worst-case tardiness, jobs in instance order
    for (const auto& job : instance.jobs) {
        const Decision& d = schedule.decisions.at(job.spec.id);
        const double w = job.spec.tardiness_weight;
        if (d) {
            const Node& node = *instance.find_node(d->node_id);
            const Seconds t = remaining_time(job, node, d->gpus, instance.profiles);
            out.tardiness_cost += w * std::max(0.0, instance.now + t - job.spec.due_date);
        } else {
            const Seconds m = max_remaining_time(job, instance);
            out.worst_case_cost +=
                instance.rho * w *
                std::max(0.0, instance.now + instance.horizon + m - job.spec.due_date);
        }
    }

    // first-ending job per node, nodes in instance order; tie (t, g, job id)
    for (const auto& node : instance.nodes) {
        bool found = false;
        Seconds first_t = 0;
        int first_g = 0;
        std::string first_id;
        for (const auto& job : instance.jobs) {
            const Decision& d = schedule.decisions.at(job.spec.id);
            if (!d || d->node_id != node.id) continue;
            const Seconds t = remaining_time(job, node, d->gpus, instance.profiles);
            if (!found || t < first_t ||
                (t == first_t && (d->gpus < first_g ||
                                  (d->gpus == first_g && job.spec.id < first_id)))) {
                found = true;
                first_t = t;
                first_g = d->gpus;
                first_id = job.spec.id;
            }
        }
        if (!found) continue;
        const int rate_gpus =
            rate_mode == FirstEndRate::job_gpus ? first_g : used.at(node.id);
        out.first_end_cost += first_t * node.rate(rate_gpus);
    }

    out.total = out.tardiness_cost + out.worst_case_cost + out.first_end_cost;
    return out;
}

}  // namespace gsched
