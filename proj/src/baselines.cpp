#include "gsched/baselines.hpp"

#include <algorithm>

#include "gsched/candidates.hpp"

namespace gsched::baselines {

const char* policy_name(Policy policy) {
    switch (policy) {
        case Policy::fifo: return "fifo";
        case Policy::edf: return "edf";
        case Policy::ps: return "ps";
    }
    return "?";
}

std::vector<std::string> policy_order(const std::vector<JobState>& queue, Policy policy) {
    std::vector<const JobState*> jobs;
    jobs.reserve(queue.size());
    for (const auto& j : queue) jobs.push_back(&j);
    auto key_less = [policy](const JobState* a, const JobState* b) {
        switch (policy) {
            case Policy::fifo:
                if (a->spec.submission_time != b->spec.submission_time)
                    return a->spec.submission_time < b->spec.submission_time;
                break;
            case Policy::edf:
                if (a->spec.due_date != b->spec.due_date)
                    return a->spec.due_date < b->spec.due_date;
                break;
            case Policy::ps:
                if (a->spec.tardiness_weight != b->spec.tardiness_weight)
                    return a->spec.tardiness_weight > b->spec.tardiness_weight;
                break;
        }
        return a->spec.id < b->spec.id;
    };
    std::sort(jobs.begin(), jobs.end(), key_less);
    std::vector<std::string> out;
    out.reserve(jobs.size());
    for (const auto* j : jobs) out.push_back(j->spec.id);
    return out;
}

Schedule baseline_schedule(const ProblemInstance& instance, Policy policy,
                           const std::map<std::string, Placement>& locked) {
    Schedule schedule;
    schedule.timestamp = instance.now;

    std::map<std::string, int> node_index;
    for (std::size_t n = 0; n < instance.nodes.size(); ++n)
        node_index[instance.nodes[n].id] = static_cast<int>(n);
    std::vector<int> free_gpus(instance.nodes.size());
    for (std::size_t n = 0; n < instance.nodes.size(); ++n)
        free_gpus[n] = instance.nodes[n].capacity;

    std::vector<JobState> queued;
    for (const auto& job : instance.jobs) {
        auto it = locked.find(job.spec.id);
        if (it != locked.end()) {
            auto ni = node_index.find(it->second.node_id);
            if (ni == node_index.end())
                throw InvalidScheduleError("locked job " + job.spec.id +
                                           " on unknown node " + it->second.node_id);
            free_gpus[static_cast<std::size_t>(ni->second)] -= it->second.gpus;
            schedule.decisions[job.spec.id] = it->second;
        } else {
            queued.push_back(job);
        }
    }
    for (std::size_t n = 0; n < free_gpus.size(); ++n)
        if (free_gpus[n] < 0)
            throw InvalidScheduleError("locked assignments exceed capacity on node " +
                                       instance.nodes[n].id);

    std::map<std::string, const JobState*> by_id;
    for (const auto& j : queued) by_id[j.spec.id] = &j;

    for (const std::string& id : policy_order(queued, policy)) {
        const JobState& job = *by_id.at(id);
        JobCandidates cands = build_job_candidates(job, instance);
        const auto& primary =
            cands.deadline_feasible() ? cands.feasible_by_cost : cands.all_by_time;

        std::optional<Placement> chosen;
        auto try_list = [&](const std::vector<Candidate>& list) {
            for (const Candidate& c : list) {
                const auto n = static_cast<std::size_t>(c.node_index);
                if (free_gpus[n] >= c.gpus) {
                    chosen = Placement{instance.nodes[n].id, c.gpus};
                    free_gpus[n] -= c.gpus;
                    return true;
                }
            }
            return false;
        };
        // cheapest deadline-feasible first (or fastest when none exists),
        // then the remaining configurations fastest-first
        if (!try_list(primary) && cands.deadline_feasible()) try_list(cands.all_by_time);
        schedule.decisions[job.spec.id] = chosen;
    }
    return schedule;
}

}  // namespace gsched::baselines
