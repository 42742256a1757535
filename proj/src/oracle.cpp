#include "gsched/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gsched::oracle {

namespace {

constexpr double kTol = 1e-9;

struct Dims {
    std::size_t jobs;
    std::size_t nodes;
};

Dims dims_of(const ProblemInstance& instance) {
    return Dims{instance.jobs.size(), instance.nodes.size()};
}

}  // namespace

std::string Violation::describe() const {
    std::ostringstream os;
    os << constraint;
    os << " (";
    bool first = true;
    auto field = [&](const char* name, long v) {
        if (!first) os << ", ";
        os << name << "=" << v;
        first = false;
    };
    if (job >= 0) field("job", job);
    if (node >= 0) field("node", node);
    if (gpus > 0) field("g", gpus);
    if (!first) os << ", ";
    os << "slack=" << slack << ")";
    return os.str();
}

std::string ValidationReport::summary() const {
    std::ostringstream os;
    os << violations.size() << " violation" << (violations.size() == 1 ? "" : "s");
    if (strict_mode) os << " [strict]";
    os << "\n";
    for (const auto& v : violations) os << "  " << v.describe() << "\n";
    for (const auto& v : informational) os << "  info: " << v.describe() << "\n";
    return os.str();
}

MinlpEncoding encode(const Schedule& schedule, const ProblemInstance& instance) {
    const auto [J, N] = dims_of(instance);
    MinlpEncoding e;
    e.w.assign(N, 0);
    e.y.resize(N);
    for (std::size_t n = 0; n < N; ++n)
        e.y[n].assign(static_cast<std::size_t>(instance.nodes[n].capacity), 0);
    e.z.assign(J, std::vector<std::uint8_t>(N, 0));
    e.x.resize(J);
    for (std::size_t j = 0; j < J; ++j) {
        e.x[j].resize(N);
        for (std::size_t n = 0; n < N; ++n)
            e.x[j][n].assign(static_cast<std::size_t>(instance.nodes[n].capacity), 0);
    }
    e.tau.assign(J, 0);
    e.tau_hat.assign(J, 0);
    e.pi.assign(J, std::vector<double>(N, 0));
    e.alpha.assign(J, std::vector<std::uint8_t>(N, 0));

    std::map<std::string, std::size_t> node_index;
    for (std::size_t n = 0; n < N; ++n) node_index[instance.nodes[n].id] = n;

    std::vector<int> used(N, 0);
    for (std::size_t j = 0; j < J; ++j) {
        const JobState& job = instance.jobs[j];
        auto it = schedule.decisions.find(job.spec.id);
        if (it == schedule.decisions.end())
            throw InvalidScheduleError("job " + job.spec.id + " missing from schedule");
        if (!it->second) {
            // postponed: minimal tau/tau_hat feasible under the completion
            // constraints, stated on absolute instants
            e.tau[j] = std::max(0.0, -job.spec.due_date);
            const Seconds m = max_remaining_time(job, instance);
            e.tau_hat[j] = std::max(
                0.0, instance.now + instance.horizon + m - job.spec.due_date);
            continue;
        }
        const Placement& p = *it->second;
        auto ni = node_index.find(p.node_id);
        if (ni == node_index.end())
            throw InvalidScheduleError("job " + job.spec.id + " on unknown node " +
                                       p.node_id);
        const std::size_t n = ni->second;
        const Node& node = instance.nodes[n];
        if (p.gpus < 1 || p.gpus > node.capacity)
            throw InvalidScheduleError("job " + job.spec.id + ": invalid GPU count");
        e.z[j][n] = 1;
        e.x[j][n][static_cast<std::size_t>(p.gpus - 1)] = 1;
        e.w[n] = 1;
        used[n] += p.gpus;
        const Seconds t = remaining_time(job, node, p.gpus, instance.profiles);
        e.tau[j] = std::max(0.0, instance.now + t - job.spec.due_date);
        e.pi[j][n] = t * node.rate(p.gpus);
    }
    for (std::size_t n = 0; n < N; ++n) {
        // over-capacity totals have no representable y level; validation
        // reports them through MShh/MShi instead
        if (used[n] < 1 || used[n] > instance.nodes[n].capacity) continue;
        e.y[n][static_cast<std::size_t>(used[n] - 1)] = 1;
    }
    // first-ending job per used node: min (t, g, job id)
    for (std::size_t n = 0; n < N; ++n) {
        if (!e.w[n]) continue;
        bool found = false;
        Seconds first_t = 0;
        int first_g = 0;
        std::size_t first_j = 0;
        for (std::size_t j = 0; j < J; ++j) {
            if (!e.z[j][n]) continue;
            int g = 0;
            for (std::size_t gi = 0; gi < e.x[j][n].size(); ++gi)
                if (e.x[j][n][gi]) g = static_cast<int>(gi) + 1;
            const Seconds t =
                remaining_time(instance.jobs[j], instance.nodes[n], g, instance.profiles);
            const std::string& id = instance.jobs[j].spec.id;
            if (!found || t < first_t ||
                (t == first_t &&
                 (g < first_g || (g == first_g && id < instance.jobs[first_j].spec.id)))) {
                found = true;
                first_t = t;
                first_g = g;
                first_j = j;
            }
        }
        if (found) e.alpha[first_j][n] = 1;
    }
    return e;
}

ValidationReport validate(const MinlpEncoding& e, const ProblemInstance& instance,
                          bool strict) {
    const auto [J, N] = dims_of(instance);
    ValidationReport report;
    report.strict_mode = strict;

    auto add = [&](const char* c, int j, int n, int g, double slack) {
        report.violations.push_back(Violation{c, j, n, g, slack});
    };

    // domains first: every binary must actually be 0/1 (MShq, MShr, MShs,
    // MSht, MShx), continuous variables nonnegative (MShu, MShv, MShw)
    for (std::size_t n = 0; n < N; ++n) {
        if (e.w[n] > 1) add("MShq", -1, static_cast<int>(n), 0, e.w[n] - 1.0);
        for (std::size_t gi = 0; gi < e.y[n].size(); ++gi)
            if (e.y[n][gi] > 1)
                add("MShr", -1, static_cast<int>(n), static_cast<int>(gi) + 1,
                    e.y[n][gi] - 1.0);
    }
    for (std::size_t j = 0; j < J; ++j) {
        for (std::size_t n = 0; n < N; ++n) {
            if (e.z[j][n] > 1)
                add("MShs", static_cast<int>(j), static_cast<int>(n), 0, e.z[j][n] - 1.0);
            for (std::size_t gi = 0; gi < e.x[j][n].size(); ++gi)
                if (e.x[j][n][gi] > 1)
                    add("MSht", static_cast<int>(j), static_cast<int>(n),
                        static_cast<int>(gi) + 1, e.x[j][n][gi] - 1.0);
            if (e.pi[j][n] < -kTol)
                add("MShw", static_cast<int>(j), static_cast<int>(n), 0, -e.pi[j][n]);
            if (e.alpha[j][n] > 1)
                add("MShx", static_cast<int>(j), static_cast<int>(n), 0,
                    e.alpha[j][n] - 1.0);
        }
        if (e.tau[j] < -kTol) add("MShu", static_cast<int>(j), -1, 0, -e.tau[j]);
        if (e.tau_hat[j] < -kTol) add("MShv", static_cast<int>(j), -1, 0, -e.tau_hat[j]);
    }

    for (std::size_t j = 0; j < J; ++j) {
        const JobState& job = instance.jobs[j];
        int z_sum = 0;
        int x_sum_all = 0;
        for (std::size_t n = 0; n < N; ++n) {
            int x_sum = 0;
            for (std::size_t gi = 0; gi < e.x[j][n].size(); ++gi) {
                x_sum += e.x[j][n][gi];
                // MShd: a configuration may be selected only on the node the
                // job is deployed on
                if (e.x[j][n][gi] > e.z[j][n])
                    add("MShd", static_cast<int>(j), static_cast<int>(n),
                        static_cast<int>(gi) + 1, e.x[j][n][gi] - e.z[j][n]);
            }
            // MSha: at most one configuration per (job, node)
            if (x_sum > e.z[j][n])
                add("MSha", static_cast<int>(j), static_cast<int>(n), 0,
                    x_sum - e.z[j][n]);
            // MShc: deployment only on chosen nodes
            if (e.z[j][n] > e.w[n])
                add("MShc", static_cast<int>(j), static_cast<int>(n), 0,
                    e.z[j][n] - e.w[n]);
            z_sum += e.z[j][n];
            x_sum_all += x_sum;
        }
        // MShe: a job runs on at most one node
        if (z_sum > 1) add("MShe", static_cast<int>(j), -1, 0, z_sum - 1.0);
        // MShg: x and z agree on whether the job executes
        if (x_sum_all != z_sum)
            add("MShg", static_cast<int>(j), -1, 0, std::abs(x_sum_all - z_sum));

        // MShk: completion instant within due date plus tardiness
        double completion = 0;
        for (std::size_t n = 0; n < N; ++n)
            for (std::size_t gi = 0; gi < e.x[j][n].size(); ++gi)
                if (e.x[j][n][gi])
                    completion +=
                        instance.now + remaining_time(job, instance.nodes[n],
                                                      static_cast<int>(gi) + 1,
                                                      instance.profiles);
        if (completion > job.spec.due_date + e.tau[j] + kTol)
            add("MShk", static_cast<int>(j), -1, 0,
                completion - (job.spec.due_date + e.tau[j]));

        // MShl: worst-case completion of a postponed job
        const double postponed = 1.0 - z_sum;
        const double worst_completion =
            (instance.now + instance.horizon + max_remaining_time(job, instance)) *
            postponed;
        if (worst_completion > job.spec.due_date + e.tau_hat[j] + kTol)
            add("MShl", static_cast<int>(j), -1, 0,
                worst_completion - (job.spec.due_date + e.tau_hat[j]));

        // MShm: execution cost lower bound
        for (std::size_t n = 0; n < N; ++n) {
            double cost = 0;
            for (std::size_t gi = 0; gi < e.x[j][n].size(); ++gi)
                if (e.x[j][n][gi]) {
                    const int g = static_cast<int>(gi) + 1;
                    cost += remaining_time(job, instance.nodes[n], g, instance.profiles) *
                            instance.nodes[n].rate(g);
                }
            if (cost > e.pi[j][n] + kTol)
                add("MShm", static_cast<int>(j), static_cast<int>(n), 0,
                    cost - e.pi[j][n]);
        }
    }

    for (std::size_t n = 0; n < N; ++n) {
        const Node& node = instance.nodes[n];
        // MShh: exactly one y level on chosen nodes
        int y_sum = 0;
        for (std::size_t gi = 0; gi < e.y[n].size(); ++gi) y_sum += e.y[n][gi];
        if (y_sum != e.w[n])
            add("MShh", -1, static_cast<int>(n), 0, std::abs(y_sum - e.w[n]));

        int assigned = 0;
        for (std::size_t j = 0; j < J; ++j)
            for (std::size_t gi = 0; gi < e.x[j][n].size(); ++gi)
                assigned += static_cast<int>(gi + 1) * e.x[j][n][gi];
        for (std::size_t gi = 0; gi < e.y[n].size(); ++gi) {
            const int g = static_cast<int>(gi) + 1;
            // MShi: total assigned GPUs at most the selected level (capacity
            // when the level is not selected)
            const int ub = e.y[n][gi] ? g : node.capacity;
            if (assigned > ub)
                add("MShi", -1, static_cast<int>(n), g, assigned - ub);
            // MShj: total assigned GPUs at least the selected level
            if (e.y[n][gi] && assigned < g)
                add("MShj", -1, static_cast<int>(n), g, g - assigned);
        }

        // MShn / MSho: exactly one first-ending job on each chosen node
        int alpha_sum = 0;
        for (std::size_t j = 0; j < J; ++j) {
            alpha_sum += e.alpha[j][n];
            if (e.alpha[j][n] > e.z[j][n])
                add("MSho", static_cast<int>(j), static_cast<int>(n), 0,
                    e.alpha[j][n] - e.z[j][n]);
        }
        if (alpha_sum != e.w[n])
            add("MShn", -1, static_cast<int>(n), 0, std::abs(alpha_sum - e.w[n]));
    }

    // MShp: forced node usage
    int w_sum = 0;
    for (std::size_t n = 0; n < N; ++n) w_sum += e.w[n];
    const int forced = static_cast<int>(std::min(N, J));
    if (w_sum != forced) {
        Violation v{"MShp", -1, -1, 0, static_cast<double>(std::abs(w_sum - forced))};
        if (strict)
            report.violations.push_back(v);
        else
            report.informational.push_back(v);
    }
    return report;
}

ValidationReport validate_schedule(const Schedule& schedule,
                                   const ProblemInstance& instance, bool strict) {
    return validate(encode(schedule, instance), instance, strict);
}

Currency objective_from_encoding(const MinlpEncoding& e, const ProblemInstance& instance) {
    // accumulation order mirrors evaluate_objective
    Currency tardiness = 0;
    Currency worst = 0;
    for (std::size_t j = 0; j < instance.jobs.size(); ++j) {
        const double w = instance.jobs[j].spec.tardiness_weight;
        tardiness += w * e.tau[j];
        worst += instance.rho * w * e.tau_hat[j];
    }
    Currency first_end = 0;
    for (std::size_t n = 0; n < instance.nodes.size(); ++n)
        for (std::size_t j = 0; j < instance.jobs.size(); ++j)
            if (e.alpha[j][n]) first_end += e.pi[j][n];
    return tardiness + worst + first_end;
}

double search_space_size(const ProblemInstance& instance) {
    double space = 1;
    for (const auto& job : instance.jobs) {
        std::size_t choices = 1;  // postpone
        for (const auto& node : instance.nodes)
            for (int g = 1; g <= node.capacity; ++g)
                if (instance.profiles.per_epoch(job.spec.job_class, node.gpu_type.name, g))
                    ++choices;
        space *= static_cast<double>(choices);
        if (space > 1e18) return space;  // saturate early, the guard will trip
    }
    return space;
}

namespace {

struct Choice {
    int node = -1;  // -1 = postpone
    int gpus = 0;
    Seconds time = 0;
    Currency cost = 0;  // t * c_ng
};

struct Enumerator {
    const ProblemInstance& instance;
    std::vector<std::vector<Choice>> choices;  // per job; [0] = postpone
    std::vector<double> postpone_cost;         // rho * w * tau_hat per job
    std::vector<int> used;                     // per node, current GPUs
    std::vector<std::size_t> current;          // choice index per job
    std::vector<std::size_t> best;
    Currency best_total = std::numeric_limits<Currency>::infinity();
    bool found = false;

    explicit Enumerator(const ProblemInstance& inst) : instance(inst) {
        const auto [J, N] = dims_of(inst);
        choices.resize(J);
        postpone_cost.resize(J);
        for (std::size_t j = 0; j < J; ++j) {
            const JobState& job = inst.jobs[j];
            choices[j].push_back(Choice{});
            for (std::size_t n = 0; n < N; ++n)
                for (int g = 1; g <= inst.nodes[n].capacity; ++g) {
                    auto per = inst.profiles.per_epoch(job.spec.job_class,
                                                       inst.nodes[n].gpu_type.name, g);
                    if (!per) continue;
                    const Seconds t =
                        job.remaining_epochs() <= 0
                            ? 0
                            : static_cast<Seconds>(job.remaining_epochs()) * *per;
                    choices[j].push_back(Choice{static_cast<int>(n), g, t,
                                                t * inst.nodes[n].rate(g)});
                }
            const Seconds m = max_remaining_time(job, inst);
            postpone_cost[j] =
                inst.rho * job.spec.tardiness_weight *
                std::max(0.0, inst.now + inst.horizon + m - job.spec.due_date);
        }
        used.assign(N, 0);
        current.assign(J, 0);
    }

    // mirrors evaluate_objective's accumulation order exactly
    Currency evaluate_leaf() const {
        Currency tardiness = 0;
        Currency worst = 0;
        for (std::size_t j = 0; j < choices.size(); ++j) {
            const Choice& c = choices[j][current[j]];
            if (c.node >= 0) {
                tardiness += instance.jobs[j].spec.tardiness_weight *
                             std::max(0.0, instance.now + c.time -
                                               instance.jobs[j].spec.due_date);
            } else {
                worst += postpone_cost[j];
            }
        }
        Currency first_end = 0;
        for (std::size_t n = 0; n < instance.nodes.size(); ++n) {
            bool found_first = false;
            Seconds first_t = 0;
            int first_g = 0;
            const std::string* first_id = nullptr;
            Currency first_cost = 0;
            for (std::size_t j = 0; j < choices.size(); ++j) {
                const Choice& c = choices[j][current[j]];
                if (c.node != static_cast<int>(n)) continue;
                const std::string& id = instance.jobs[j].spec.id;
                if (!found_first || c.time < first_t ||
                    (c.time == first_t &&
                     (c.gpus < first_g || (c.gpus == first_g && id < *first_id)))) {
                    found_first = true;
                    first_t = c.time;
                    first_g = c.gpus;
                    first_id = &id;
                    first_cost = c.cost;
                }
            }
            if (found_first) first_end += first_cost;
        }
        return tardiness + worst + first_end;
    }

    void recurse(std::size_t j) {
        if (j == choices.size()) {
            const Currency total = evaluate_leaf();
            if (!found || total < best_total) {
                found = true;
                best_total = total;
                best = current;
            }
            return;
        }
        for (std::size_t c = 0; c < choices[j].size(); ++c) {
            const Choice& choice = choices[j][c];
            if (choice.node >= 0) {
                const auto n = static_cast<std::size_t>(choice.node);
                if (used[n] + choice.gpus > instance.nodes[n].capacity) continue;
                used[n] += choice.gpus;
                current[j] = c;
                recurse(j + 1);
                used[n] -= choice.gpus;
            } else {
                current[j] = c;
                recurse(j + 1);
            }
        }
        current[j] = 0;
    }
};

}  // namespace

OracleResult exhaustive_optimum(const ProblemInstance& instance) {
    const double space = search_space_size(instance);
    if (space > kOracleSearchLimit) {
        std::ostringstream os;
        os << "instance too large for oracle: " << space << " combinations exceed "
           << kOracleSearchLimit;
        throw OracleSizeError(os.str());
    }
    Enumerator en(instance);
    en.recurse(0);

    Schedule schedule;
    schedule.timestamp = instance.now;
    for (std::size_t j = 0; j < instance.jobs.size(); ++j) {
        const Choice& c = en.choices[j][en.best[j]];
        if (c.node >= 0)
            schedule.decisions[instance.jobs[j].spec.id] =
                Placement{instance.nodes[static_cast<std::size_t>(c.node)].id, c.gpus};
        else
            schedule.decisions[instance.jobs[j].spec.id] = std::nullopt;
    }
    OracleResult result;
    result.schedule = schedule;
    result.objective = evaluate_objective(schedule, instance);
    return result;
}

}  // namespace gsched::oracle
