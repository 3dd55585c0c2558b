#pragma once

// Data-parallel kernels behind GRM fitting and batch scoring. Each kernel has
// a plain serial reference kept for testing and benchmarking; the OpenMP
// variants partition work into fixed chunks and reduce in chunk order, so
// their output does not depend on the thread count.

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "alba/grm.hpp"

namespace alba::kernels {

struct EStepInput {
    const Eigen::MatrixXi* categories = nullptr;       // n x J effective categories, 0 = unanswered
    std::span<const Eigen::MatrixXd> log_probs;        // per item: categories x nodes
    std::span<const double> log_weights;               // per node
};

struct EStepResult {
    std::vector<Eigen::MatrixXd> counts; // per item: categories x nodes, expected counts
    double loglik = 0.0;                 // marginal log-likelihood
};

inline constexpr int kEStepChunk = 64;

EStepResult estep_serial(const EStepInput& input);
EStepResult estep_parallel(const EStepInput& input);

/// MAP estimates for many independent response sets.
std::vector<LatentEstimate> map_batch_serial(const LatentScorer& scorer,
                                             std::span<const std::vector<ItemResponse>> sets);
std::vector<LatentEstimate> map_batch_parallel(const LatentScorer& scorer,
                                               std::span<const std::vector<ItemResponse>> sets);

} // namespace alba::kernels
