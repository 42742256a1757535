#include "gsched/candidates.hpp"

#include <algorithm>

namespace gsched {

JobCandidates build_job_candidates(const JobState& job, const ProblemInstance& instance) {
    JobCandidates out;
    for (std::size_t ni = 0; ni < instance.nodes.size(); ++ni) {
        const Node& node = instance.nodes[ni];
        for (int g = 1; g <= node.capacity; ++g) {
            auto per = instance.profiles.per_epoch(job.spec.job_class, node.gpu_type.name, g);
            if (!per) continue;
            const Seconds t = job.remaining_epochs() <= 0
                                  ? 0
                                  : static_cast<Seconds>(job.remaining_epochs()) * *per;
            Candidate c{static_cast<int>(ni), g, t, t * node.rate(g)};
            out.all_by_time.push_back(c);
            if (instance.now + t < job.spec.due_date) out.feasible_by_cost.push_back(c);
        }
    }
    auto node_id = [&](const Candidate& c) -> const std::string& {
        return instance.nodes[static_cast<std::size_t>(c.node_index)].id;
    };
    std::sort(out.feasible_by_cost.begin(), out.feasible_by_cost.end(),
              [&](const Candidate& a, const Candidate& b) {
                  if (a.cost != b.cost) return a.cost < b.cost;
                  if (node_id(a) != node_id(b)) return node_id(a) < node_id(b);
                  return a.gpus < b.gpus;
              });
    std::sort(out.all_by_time.begin(), out.all_by_time.end(),
              [&](const Candidate& a, const Candidate& b) {
                  if (a.time != b.time) return a.time < b.time;
                  if (node_id(a) != node_id(b)) return node_id(a) < node_id(b);
                  return a.gpus < b.gpus;
              });
    return out;
}

}  // namespace gsched
