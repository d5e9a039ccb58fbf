#pragma once

#include "taskgen/symexec.hpp"

namespace taskgen {

/// Best task found for a code by repeated independent puzzle rollouts.
struct OracleResult {
    Task task;            ///< stays empty when no rollout produced a positive score
    double score = 0.0;
    int rolloutsUsed = 0;
};

/// Estimates the best achievable task score for `code` by running `rollouts`
/// uniform-policy episodes. Episode i draws its randomness from
/// derive_seed(seed, i), so a smaller rollout count sees a prefix of the same
/// episodes and the estimate is nondecreasing in `rollouts` at a fixed seed.
/// The first episode attaining the maximum provides the task.
inline OracleResult task_oracle(const Ast& code, const TaskSpec& spec, int rollouts,
                                std::uint64_t seed = 0, const ExecConfig& cfg = {}) {
    OracleResult best;
    best.rolloutsUsed = std::max(rollouts, 0);
    for (int i = 0; i < rollouts; ++i) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
        SymEpisode ep = generate_puzzle_uniform(code, spec, rng, cfg);
        if (ep.success && ep.reward > best.score) {
            best.score = ep.reward;
            best.task = std::move(ep.task);
        }
    }
    return best;
}

}  // namespace taskgen
