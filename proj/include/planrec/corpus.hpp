#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "planrec/rand.hpp"

namespace planrec {

// Serialized stand-in for a missing action in observation files.
inline constexpr const char* kUnobservedMarker = "??";

using ActionToken = std::string;

bool valid_token(const ActionToken& t);

struct Plan {
    std::vector<ActionToken> actions;

    std::size_t size() const { return actions.size(); }
    bool operator==(const Plan&) const = default;
};

struct PlanLibrary {
    std::vector<Plan> plans;
    std::optional<std::string> source_path;

    std::size_t size() const { return plans.size(); }
    std::size_t total_tokens() const;
};

// Dense token <-> index mapping, indices assigned by descending corpus count,
// ties broken lexicographically.
class Vocabulary {
public:
    Vocabulary() = default;

    std::size_t size() const { return tokens_.size(); }
    const ActionToken& token(std::size_t index) const { return tokens_[index]; }
    std::size_t count(std::size_t index) const { return counts_[index]; }
    std::size_t total_count() const { return total_; }

    // -1 if the token is unknown.
    long index_of(const ActionToken& t) const;
    std::size_t require(const ActionToken& t) const;  // throws UnknownTokenError
    bool contains(const ActionToken& t) const { return index_of(t) >= 0; }

    static Vocabulary from_counts(
        const std::unordered_map<ActionToken, std::size_t>& counts);

private:
    std::vector<ActionToken> tokens_;
    std::vector<std::size_t> counts_;
    std::unordered_map<ActionToken, std::size_t> index_;
    std::size_t total_ = 0;
};

struct Slot {
    bool observed = false;
    ActionToken token;  // empty when unobserved

    static Slot obs(ActionToken t) { return {true, std::move(t)}; }
    static Slot unobs() { return {false, {}}; }
    bool operator==(const Slot&) const = default;
};

struct Observation {
    std::vector<Slot> slots;
    std::optional<Plan> truth;

    std::size_t size() const { return slots.size(); }
    std::vector<std::size_t> unobserved_indices() const;
};

enum class MaskLocation { Middle, End };

PlanLibrary parse_plan_library(const std::string& text);
std::string write_plan_library(const PlanLibrary& lib);

Vocabulary build_vocabulary(const PlanLibrary& lib);

Observation mask_random(const Plan& p, double xi, Rng& rng);
Observation mask_consecutive(const Plan& p, std::size_t count,
                             MaskLocation where, Rng& rng);

std::vector<PlanLibrary> split_folds(const PlanLibrary& lib, std::size_t k,
                                     Rng& rng);

// Observation files carry one observation per line, "??" per missing slot.
std::vector<Observation> parse_observations(const std::string& text);
std::string write_observation(const Observation& obs);

// Attaches per-line ground truth from a companion plan file of equal shape.
void attach_truth(std::vector<Observation>& obs, const PlanLibrary& truth);

}  // namespace planrec
