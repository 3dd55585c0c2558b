#pragma once

#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "alba/data_model.hpp"
#include "alba/polytomize.hpp"

namespace alba {

inline constexpr double kThetaMin = -6.0;
inline constexpr double kThetaMax = 6.0;
inline constexpr double kAlphaMax = 50.0;

/// Graded-response item: one discriminant shared by the K-1 boundary
/// logistics, strictly increasing difficulties.
struct GrmItemParams {
    double alpha = 1.0;
    std::vector<double> betas;

    int categories() const { return static_cast<int>(betas.size()) + 1; }
    bool valid() const;
};

/// P(response > k | theta) = 1 / (1 + exp(-alpha (theta - beta_k))), k = 1..K-1.
double boundary_prob(const GrmItemParams& params, int k, double theta);

/// P(response = k | theta) = B(k-1) - B(k) with B(0) = 1, B(K) = 0.
double category_prob(const GrmItemParams& params, int k, double theta);

/// All K category probabilities at once.
std::vector<double> category_probs(const GrmItemParams& params, double theta);

/// d/dtheta log P(response = k | theta).
double category_score(const GrmItemParams& params, int k, double theta);

/// Fisher information sum_k P_k'(theta)^2 / P_k(theta).
double item_information(const GrmItemParams& params, double theta);

/// Equally spaced nodes on [lo, hi] weighted by the standard normal density,
/// weights normalized to one.
struct Quadrature {
    int points = 61;
    double lo = kThetaMin;
    double hi = kThetaMax;
    std::vector<double> nodes;
    std::vector<double> log_weights;

    static Quadrature standard_normal(int points = 61, double lo = kThetaMin, double hi = kThetaMax);
};

/// Fitted item plus its category collapse table: category_map[level] is the
/// effective category (1..categories()) used for polytomized level 1..K.
struct GrmItem {
    GrmItemParams params;
    std::vector<int> category_map; // size K + 1, index 0 unused
};

struct GrmFitMeta {
    int cycles = 0;
    double tol = 1e-4;
    int max_cycles = 500;
    bool converged = false;
    double loglik = 0.0;
    std::vector<double> loglik_trace; // marginal log-likelihood before each M-step
};

/// The fitted parameter set over all items; immutable once built.
struct GrmModel {
    int levels = 0; // K
    std::map<ItemId, GrmItem> items;
    Quadrature quadrature = Quadrature::standard_normal();
    GrmFitMeta fit_meta;

    const GrmItemParams& params(ItemId item) const;
    int effective_category(ItemId item, int level) const;

    /// Stored parameters: one alpha plus the betas, per item (J x K without
    /// collapsing).
    int parameter_count() const;
};

struct ItemResponse {
    ItemId item = 0;
    int level = 0; // 1..K polytomized level

    bool operator==(const ItemResponse&) const = default;
};

struct LatentEstimate {
    double theta = 0.0;
    double posterior_sd = 1.0;
    int n_items_used = 0;
};

/// Maps each unobserved level to its nearest observed neighbour (ties go to
/// the lower level). Returned table is indexed by level 1..K.
std::vector<int> collapse_map(std::span<const int> observed_levels, int levels);

struct GrmFitOptions {
    int quadrature_points = 61;
    double tol = 1e-4;
    int max_cycles = 500;
    /// When false, an unobserved (item, level) pair throws UnobservedCategory.
    bool collapse_unobserved = true;
};

/// Marginal maximum likelihood by EM over fixed quadrature under a standard
/// normal prior. Each M-step runs BFGS per item on (log alpha, beta_1, log
/// gaps) and only accepts improving steps, so the marginal log-likelihood
/// never decreases. `levels` holds 1..K, 0 for unanswered. Non-convergence is
/// reported through fit_meta.converged rather than thrown.
GrmModel fit_grm(const LevelMatrix& levels, int k, const GrmFitOptions& options = {});

/// Expected complete-data log-likelihood of one item and its gradient with
/// respect to (alpha, beta_1..beta_{K-1}). `counts` is categories x nodes.
double grm_item_objective(const GrmItemParams& params, const Eigen::MatrixXd& counts,
                          std::span<const double> nodes, Eigen::VectorXd* gradient);

/// Sum of log P(response | theta) over the responses, plus log phi(theta)
/// (up to a constant).
double log_posterior(const GrmModel& model, std::span<const ItemResponse> responses, double theta);

/// MAP latent estimate: dense 1e-3 grid on [-6, 6], one Newton polish, clipped
/// to the bounds. The empty set returns the prior mode 0. Responses are summed
/// in item-id order, so any permutation yields the identical estimate.
LatentEstimate map_estimate(const GrmModel& model, std::span<const ItemResponse> responses);

/// Same estimator as map_estimate with the per-item log-probabilities on the
/// grid precomputed once; results are bit-identical.
class LatentScorer {
public:
    explicit LatentScorer(GrmModel model);

    const GrmModel& model() const { return model_; }
    LatentEstimate estimate(std::span<const ItemResponse> responses) const;

    static constexpr int kGridPoints = 12001;
    static double grid_theta(int index);

private:
    GrmModel model_;
    // per item: grid x categories, column-major so each category is contiguous
    std::map<ItemId, Eigen::MatrixXd> table_;
    std::vector<double> log_prior_;
};

/// Standard-normal log-density up to its constant.
inline double log_prior(double theta) { return -0.5 * theta * theta; }

/// Newton polish and bound clipping shared by both estimators.
LatentEstimate finish_map(const GrmModel& model, std::span<const ItemResponse> sorted, double grid_theta);

} // namespace alba
