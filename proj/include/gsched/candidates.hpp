#pragma once

#include "gsched/model.hpp"

namespace gsched {

// One (node, GPU count) option for a specific job, with its remaining time
// and execution cost precomputed.
struct Candidate {
    int node_index = 0;
    int gpus = 1;
    Seconds time = 0;     // remaining execution time on this configuration
    Currency cost = 0;    // time * c_ng
};

// Per-job configuration menu. feasible_by_cost is D*_j (configurations that
// finish strictly before the due date) sorted by (cost, node id, gpus);
// all_by_time is every profiled configuration sorted by (time, node id, gpus).
struct JobCandidates {
    std::vector<Candidate> feasible_by_cost;
    std::vector<Candidate> all_by_time;

    bool deadline_feasible() const { return !feasible_by_cost.empty(); }
};

JobCandidates build_job_candidates(const JobState& job, const ProblemInstance& instance);

}  // namespace gsched
