#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "centsmooth/hypergraph.hpp"

namespace centsmooth {

/// Group-combination generator. sigma is the standard deviation of the per-coordinate
/// Gaussian noise around each drug's binary template.
struct SynthConfig {
    Index num_groups = 10;         // n
    Index features_per_group = 3;  // a
    Index num_drugs = 500;         // D
    Index max_groups = 1;          // m
    double sigma = 0.01;
    std::uint64_t seed = 0;

    void validate() const;
    Index num_side_effects() const { return num_groups * (num_groups - 1) / 2; }
    Index feature_width() const { return num_groups * features_per_group; }
};

struct GroupAssignment {
    std::vector<std::vector<Index>> groups;  // G_i, sorted ascending
    Matrix templates;                        // b_i rows, |V_D| x (a*n)
};

struct SynthDataset {
    SynthConfig config;
    DdiHypergraph graph;
    GroupAssignment ledger;
    /// Side effect t is caused by the group pair side_effect_groups[t] (first < second).
    std::vector<std::pair<Index, Index>> side_effect_groups;
};

/// Index of side effect for groups g < h in the lexicographic enumeration of pairs.
Index side_effect_for_groups(Index g, Index h, Index num_groups);

SynthDataset generate(const SynthConfig& config);

/// One dataset per m; each seed is derived from (config.seed, m).
std::vector<SynthDataset> sweep(const SynthConfig& base, std::span<const Index> m_values);

/// Re-derives the edge set from a ledger by brute force over drug pairs.
std::vector<Triple> triples_from_ledger(const GroupAssignment& ledger, Index num_groups);

}  // namespace centsmooth
