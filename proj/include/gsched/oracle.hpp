#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gsched/model.hpp"

namespace gsched::oracle {

// Exceeding the exhaustive-search size guard.
struct OracleSizeError : SchedulerError {
    using SchedulerError::SchedulerError;
};

// The mathematical-programming variable encoding of a schedule. Indices
// follow instance order: j over instance.jobs, n over instance.nodes,
// g in 1..G_n stored at [g-1].
struct MinlpEncoding {
    std::vector<std::uint8_t> w;                           // node chosen
    std::vector<std::vector<std::uint8_t>> y;              // [n][g-1] total g GPUs used
    std::vector<std::vector<std::uint8_t>> z;              // [j][n] job on node
    std::vector<std::vector<std::vector<std::uint8_t>>> x; // [j][n][g-1]
    std::vector<double> tau;                               // tardiness
    std::vector<double> tau_hat;                           // worst-case tardiness
    std::vector<std::vector<double>> pi;                   // [j][n] execution cost
    std::vector<std::vector<std::uint8_t>> alpha;          // [j][n] first-ending job
};

struct Violation {
    std::string constraint;  // MSha..MShx
    int job = -1;
    int node = -1;
    int gpus = 0;
    double slack = 0;

    std::string describe() const;
};

struct ValidationReport {
    std::vector<Violation> violations;
    std::vector<Violation> informational;  // MShp when not in strict mode
    bool strict_mode = false;

    bool feasible() const { return violations.empty(); }
    std::string summary() const;
};

// Translate a schedule into the variable encoding, with tau/tau_hat/pi/alpha
// at their minimal feasible values.
MinlpEncoding encode(const Schedule& schedule, const ProblemInstance& instance);

// Check every constraint against the encoding. Numeric comparisons use 1e-9
// absolute tolerance. The forced-node-usage constraint (MShp) is only a
// violation in strict mode; heuristics may legitimately leave nodes empty.
ValidationReport validate(const MinlpEncoding& encoding, const ProblemInstance& instance,
                          bool strict = false);

ValidationReport validate_schedule(const Schedule& schedule,
                                   const ProblemInstance& instance, bool strict = false);

// f_OBJ recomputed from the encoding's tau/tau_hat/pi/alpha values; matches
// evaluate_objective bit for bit on encodings produced by encode().
Currency objective_from_encoding(const MinlpEncoding& encoding,
                                 const ProblemInstance& instance);

// Number of per-job decision combinations the exhaustive search would visit.
double search_space_size(const ProblemInstance& instance);

constexpr double kOracleSearchLimit = 1e6;

struct OracleResult {
    Schedule schedule;
    ObjectiveBreakdown objective;
};

// Brute-force optimum over every per-job choice of postpone / (node, g),
// filtered by capacity. Ties resolved to the lexicographically smallest
// decision vector (postpone < configurations in node-then-g order, jobs
// most-significant first). Guarded by kOracleSearchLimit.
OracleResult exhaustive_optimum(const ProblemInstance& instance);

}  // namespace gsched::oracle
