#pragma once

#include <optional>
#include <string>
#include <vector>

#include "planrec/corpus.hpp"
#include "planrec/rand.hpp"

namespace planrec::blocks {

// Towers are ordered bottom to top; block ids are 0-based ('A' + id).
struct BlocksState {
    std::vector<std::vector<int>> towers;
    std::optional<int> holding;

    bool operator==(const BlocksState&) const = default;
    // Sorts towers by bottom block so equal configurations compare equal.
    void canonicalize();
};

std::string block_name(int id);

std::pair<BlocksState, BlocksState> generate_problem(int n_blocks, Rng& rng);

// Canonical strategy: unstack every misplaced block to the table, then build
// the goal towers bottom-up. Not optimal, always valid.
Plan solve(const BlocksState& initial, const BlocksState& goal);

// Independent step simulator. Enforces preconditions of every action and
// throws InvalidPlanError on any violation or malformed token.
BlocksState simulate(const BlocksState& initial, const Plan& plan);

PlanLibrary generate_corpus(std::size_t n_plans, int min_blocks, int max_blocks,
                            std::uint64_t seed);

}  // namespace planrec::blocks
