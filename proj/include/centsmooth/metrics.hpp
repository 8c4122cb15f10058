#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "centsmooth/hypergraph.hpp"
#include "centsmooth/train.hpp"

namespace centsmooth {

struct ScoredLabel {
    double score;
    bool positive;
};

/// Mann-Whitney AUC; ties count 1/2.
double auc(std::span<const ScoredLabel> scores);

/// Average precision over distinct score thresholds (descending), with tied scores
/// entering the curve together.
double aupr(std::span<const ScoredLabel> scores);

struct FoldSplit {
    Index num_folds = 0;
    std::vector<std::vector<Triple>> test;  // sorted per fold

    /// E minus the test fold.
    std::vector<Triple> train_edges(const DdiHypergraph& g, Index fold) const;
};

/// Per side effect: seeded shuffle, then round-robin dealing into F folds.
FoldSplit stratified_folds(const DdiHypergraph& g, Index num_folds, std::uint64_t seed);

/// For every side effect t, samples as many non-edges labelled t as `test_positives`
/// holds. Keys already present in `used` are avoided and newly drawn keys are added,
/// so successive calls within a run stay disjoint.
std::vector<Triple> eval_negatives(const DdiHypergraph& g, std::span<const Triple> test_positives, std::uint64_t seed,
                                   std::unordered_set<std::uint64_t>* used = nullptr);

struct CurvePoint {
    Index num_side_effects;  // size of the prefix of rarest side effects
    Index side_effect;       // side effect added at this point
    double auc;
    double aupr;
};

struct ScoredTriple {
    Triple triple;
    double score;
    bool positive;
};

/// Pooled AUC/AUPR over the i rarest side effects for i = 1..|V_S|. Frequencies are
/// positive-triple counts; ties are broken by side-effect index. Points whose pool lacks
/// a positive or a negative are omitted.
std::vector<CurvePoint> infrequent_curve(std::span<const ScoredTriple> results, std::span<const Index> frequencies);

struct FoldMetrics {
    double auc = 0.0;
    double aupr = 0.0;
    Index num_positives = 0;
    Index num_negatives = 0;
};

struct SideEffectMetrics {
    Index side_effect = 0;
    Index frequency = 0;
    double auc = 0.0;
    double aupr = 0.0;
    Index folds_evaluated = 0;
};

struct EvalReport {
    std::vector<FoldMetrics> folds;
    double mean_auc = 0.0, std_auc = 0.0;
    double mean_aupr = 0.0, std_aupr = 0.0;
    std::vector<SideEffectMetrics> per_side_effect;
    std::vector<CurvePoint> infrequent_curve;  // fold means
};

/// Scores `queries` with a model fitted on `train_graph`.
using FoldScorer = std::function<std::vector<double>(const DdiHypergraph& train_graph,
                                                     std::span<const Triple> queries, Index fold)>;

/// Scorer that trains with `config` (seed derived from the fold) and scores with p(e).
/// `on_trained` sees each fold's training result.
FoldScorer trained_scorer(const TrainConfig& config,
                          std::function<void(Index fold, const TrainResult&)> on_trained = {});

struct CrossValidationOptions {
    Index num_folds = 20;
    std::uint64_t seed = 0;
    Index jobs = 1;
};

EvalReport cross_validate(const DdiHypergraph& g, const FoldScorer& scorer, const CrossValidationOptions& options);
EvalReport cross_validate(const DdiHypergraph& g, const TrainConfig& config, const CrossValidationOptions& options);

/// JSON with keys folds, mean_auc, std_auc, mean_aupr, std_aupr, per_side_effect, infrequent_curve.
std::string report_to_json(const EvalReport& report, const std::string& provenance = {});
std::string curve_to_csv(std::span<const CurvePoint> curve);

}  // namespace centsmooth
