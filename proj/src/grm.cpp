#include "alba/grm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "alba/error.hpp"
#include "alba/kernels.hpp"

namespace alba {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kProbFloor = 1e-300;
constexpr double kGridStep = 1e-3;

double sigmoid(double x)
{
    if (x >= 0.0)
        return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// Logit arguments of the two boundaries around category k: the upper one is
// B(k-1) (+inf for k = 1), the lower one B(k) (-inf for k = K).
struct Bounds {
    double upper;
    double lower;
};

Bounds bounds(const GrmItemParams& p, int k, double theta)
{
    const int cats = p.categories();
    const double upper = k == 1 ? kInf : p.alpha * (theta - p.betas[static_cast<std::size_t>(k - 2)]);
    const double lower = k == cats ? -kInf : p.alpha * (theta - p.betas[static_cast<std::size_t>(k - 1)]);
    return {upper, lower};
}

double prob_between(const Bounds& b)
{
    // B(k-1) - B(k); when both sit above one half the complements lose less.
    if (b.lower >= 0.0)
        return sigmoid(-b.lower) - sigmoid(-b.upper);
    return sigmoid(b.upper) - sigmoid(b.lower);
}

double slope(double x) // d sigma / dx
{
    if (std::isinf(x))
        return 0.0;
    const double s = sigmoid(x);
    return s * (1.0 - s);
}

double curvature(double x) // d^2 sigma / dx^2
{
    if (std::isinf(x))
        return 0.0;
    const double s = sigmoid(x);
    return s * (1.0 - s) * (1.0 - 2.0 * s);
}

void check_category(const GrmItemParams& p, int k)
{
    if (k < 1 || k > p.categories())
        throw Error(Errc::InvalidArgument, "category " + std::to_string(k) + " out of range");
}

double log_category(const GrmItemParams& p, int k, double theta)
{
    return std::log(std::max(category_prob(p, k, theta), kProbFloor));
}

// d/dtheta log P and d^2/dtheta^2 log P.
std::pair<double, double> log_category_derivatives(const GrmItemParams& p, int k, double theta)
{
    const auto b = bounds(p, k, theta);
    const double prob = std::max(prob_between(b), kProbFloor);
    const double d1 = p.alpha * (slope(b.upper) - slope(b.lower));
    const double d2 = p.alpha * p.alpha * (curvature(b.upper) - curvature(b.lower));
    const double s = d1 / prob;
    return {s, d2 / prob - s * s};
}

} // namespace

bool GrmItemParams::valid() const
{
    if (!(alpha > 0.0 && std::isfinite(alpha)) || betas.empty())
        return false;
    for (std::size_t i = 0; i < betas.size(); ++i) {
        if (!std::isfinite(betas[i]))
            return false;
        if (i > 0 && !(betas[i] > betas[i - 1]))
            return false;
    }
    return true;
}

double boundary_prob(const GrmItemParams& params, int k, double theta)
{
    if (k < 1 || k >= params.categories())
        throw Error(Errc::InvalidArgument, "boundary " + std::to_string(k) + " out of range");
    return sigmoid(params.alpha * (theta - params.betas[static_cast<std::size_t>(k - 1)]));
}

double category_prob(const GrmItemParams& params, int k, double theta)
{
    check_category(params, k);
    return prob_between(bounds(params, k, theta));
}

std::vector<double> category_probs(const GrmItemParams& params, double theta)
{
    std::vector<double> out(static_cast<std::size_t>(params.categories()));
    for (int k = 1; k <= params.categories(); ++k)
        out[static_cast<std::size_t>(k - 1)] = prob_between(bounds(params, k, theta));
    return out;
}

double category_score(const GrmItemParams& params, int k, double theta)
{
    check_category(params, k);
    return log_category_derivatives(params, k, theta).first;
}

double item_information(const GrmItemParams& params, double theta)
{
    double info = 0.0;
    for (int k = 1; k <= params.categories(); ++k) {
        const auto b = bounds(params, k, theta);
        const double prob = prob_between(b);
        if (prob <= kProbFloor)
            continue;
        const double d1 = params.alpha * (slope(b.upper) - slope(b.lower));
        info += d1 * d1 / prob;
    }
    return info;
}

Quadrature Quadrature::standard_normal(int points, double lo, double hi)
{
    if (points < 2 || !(hi > lo))
        throw Error(Errc::InvalidArgument, "quadrature needs >= 2 points on a non-empty interval");
    Quadrature q;
    q.points = points;
    q.lo = lo;
    q.hi = hi;
    q.nodes.resize(static_cast<std::size_t>(points));
    q.log_weights.resize(static_cast<std::size_t>(points));
    double total = 0.0;
    for (int i = 0; i < points; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
        q.nodes[static_cast<std::size_t>(i)] = x;
        total += std::exp(-0.5 * x * x);
    }
    const double log_total = std::log(total);
    for (int i = 0; i < points; ++i) {
        const double x = q.nodes[static_cast<std::size_t>(i)];
        q.log_weights[static_cast<std::size_t>(i)] = -0.5 * x * x - log_total;
    }
    return q;
}

const GrmItemParams& GrmModel::params(ItemId item) const
{
    auto it = items.find(item);
    if (it == items.end())
        throw Error(Errc::UnknownItemId, "item " + std::to_string(item) + " is not in the IRT model");
    return it->second.params;
}

int GrmModel::effective_category(ItemId item, int level) const
{
    auto it = items.find(item);
    if (it == items.end())
        throw Error(Errc::UnknownItemId, "item " + std::to_string(item) + " is not in the IRT model");
    if (level < 1 || level > levels)
        throw Error(Errc::InvalidArgument, "level " + std::to_string(level) + " out of 1.." +
                                               std::to_string(levels));
    return it->second.category_map[static_cast<std::size_t>(level)];
}

int GrmModel::parameter_count() const
{
    int total = 0;
    for (const auto& [id, item] : items)
        total += 1 + static_cast<int>(item.params.betas.size());
    return total;
}

std::vector<int> collapse_map(std::span<const int> observed_levels, int levels)
{
    std::vector<int> observed(observed_levels.begin(), observed_levels.end());
    std::sort(observed.begin(), observed.end());
    observed.erase(std::unique(observed.begin(), observed.end()), observed.end());
    if (observed.empty())
        throw Error(Errc::InsufficientData, "no observed levels");
    std::vector<int> map(static_cast<std::size_t>(levels) + 1, 0);
    for (int level = 1; level <= levels; ++level) {
        std::size_t best = 0;
        int best_dist = std::numeric_limits<int>::max();
        for (std::size_t r = 0; r < observed.size(); ++r) {
            const int dist = std::abs(observed[r] - level);
            if (dist < best_dist) { // strict: ties keep the lower level
                best_dist = dist;
                best = r;
            }
        }
        map[static_cast<std::size_t>(level)] = static_cast<int>(best) + 1;
    }
    return map;
}

double grm_item_objective(const GrmItemParams& params, const Eigen::MatrixXd& counts,
                          std::span<const double> nodes, Eigen::VectorXd* gradient)
{
    const int cats = params.categories();
    double value = 0.0;
    if (gradient)
        *gradient = Eigen::VectorXd::Zero(cats); // alpha, beta_1..beta_{K-1}
    for (std::size_t q = 0; q < nodes.size(); ++q) {
        const double theta = nodes[q];
        for (int k = 1; k <= cats; ++k) {
            const double c = counts(k - 1, static_cast<Eigen::Index>(q));
            if (c == 0.0)
                continue;
            const auto b = bounds(params, k, theta);
            const double prob = std::max(prob_between(b), kProbFloor);
            value += c * std::log(prob);
            if (!gradient)
                continue;
            const double su = slope(b.upper);
            const double sl = slope(b.lower);
            const double w = c / prob;
            double d_alpha = 0.0;
            if (k > 1) {
                const double beta_up = params.betas[static_cast<std::size_t>(k - 2)];
                d_alpha += su * (theta - beta_up);
                (*gradient)(k - 1) += w * (-params.alpha * su);
            }
            if (k < cats) {
                const double beta_lo = params.betas[static_cast<std::size_t>(k - 1)];
                d_alpha -= sl * (theta - beta_lo);
                (*gradient)(k) += w * (params.alpha * sl);
            }
            (*gradient)(0) += w * d_alpha;
        }
    }
    return value;
}

namespace {

// Unconstrained coordinates: u = (log alpha, beta_1, log(beta_2 - beta_1), ...).
Eigen::VectorXd to_unconstrained(const GrmItemParams& p)
{
    Eigen::VectorXd u(p.categories());
    u(0) = std::log(p.alpha);
    u(1) = p.betas[0];
    for (std::size_t k = 1; k < p.betas.size(); ++k)
        u(static_cast<Eigen::Index>(k) + 1) = std::log(p.betas[k] - p.betas[k - 1]);
    return u;
}

bool from_unconstrained(const Eigen::VectorXd& u, GrmItemParams& p)
{
    p.alpha = std::exp(u(0));
    if (!(p.alpha >= 1e-8 && p.alpha <= kAlphaMax))
        return false;
    p.betas.resize(static_cast<std::size_t>(u.size() - 1));
    p.betas[0] = u(1);
    for (Eigen::Index k = 2; k < u.size(); ++k) {
        const double gap = std::exp(u(k));
        if (!(gap > 1e-10) || !std::isfinite(gap))
            return false;
        p.betas[static_cast<std::size_t>(k - 1)] = p.betas[static_cast<std::size_t>(k - 2)] + gap;
    }
    for (double b : p.betas)
        if (!std::isfinite(b) || std::abs(b) > 1e6)
            return false;
    return true;
}

// Negative objective and its gradient in unconstrained coordinates.
double negative_objective(const Eigen::VectorXd& u, const Eigen::MatrixXd& counts,
                          std::span<const double> nodes, Eigen::VectorXd& grad_u)
{
    GrmItemParams p;
    if (!from_unconstrained(u, p))
        return kInf;
    Eigen::VectorXd g;
    const double value = grm_item_objective(p, counts, nodes, &g);
    grad_u.resize(u.size());
    grad_u(0) = -p.alpha * g(0);
    // beta_k = u_1 + sum_{m=2..k} exp(u_m)
    double tail = 0.0;
    for (Eigen::Index k = u.size() - 1; k >= 1; --k) {
        tail += g(k);
        grad_u(k) = k == 1 ? -tail : -std::exp(u(k)) * tail;
    }
    return -value;
}

// BFGS with Armijo backtracking; never returns a point worse than the start.
GrmItemParams maximize_item(const GrmItemParams& start, const Eigen::MatrixXd& counts,
                            std::span<const double> nodes)
{
    Eigen::VectorXd x = to_unconstrained(start);
    Eigen::VectorXd g;
    double f = negative_objective(x, counts, nodes, g);
    if (!std::isfinite(f))
        return start;
    const Eigen::Index n = x.size();
    Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n) / std::max(1.0, g.cwiseAbs().maxCoeff());

    Eigen::VectorXd g_new;
    for (int iter = 0; iter < 200; ++iter) {
        if (g.cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, std::abs(f)))
            break;
        Eigen::VectorXd dir = -h * g;
        double slope0 = g.dot(dir);
        if (!(slope0 < 0.0)) {
            h = Eigen::MatrixXd::Identity(n, n) / std::max(1.0, g.cwiseAbs().maxCoeff());
            dir = -h * g;
            slope0 = g.dot(dir);
        }
        double t = 1.0;
        double f_new = kInf;
        Eigen::VectorXd x_new;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            x_new = x + t * dir;
            f_new = negative_objective(x_new, counts, nodes, g_new);
            if (std::isfinite(f_new) && f_new <= f + 1e-4 * t * slope0) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted || !(f_new <= f))
            break;
        const Eigen::VectorXd s = x_new - x;
        const Eigen::VectorXd y = g_new - g;
        const double f_old = f;
        x = x_new;
        f = f_new;
        g = g_new;
        const double sy = s.dot(y);
        if (sy > 1e-12) {
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd ident = Eigen::MatrixXd::Identity(n, n);
            h = (ident - rho * s * y.transpose()) * h * (ident - rho * y * s.transpose()) +
                rho * s * s.transpose();
        }
        if (f_old - f <= 1e-14 * std::max(1.0, std::abs(f)) && s.cwiseAbs().maxCoeff() < 1e-10)
            break;
    }
    GrmItemParams out;
    from_unconstrained(x, out);
    return out;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b)
{
    const auto n = static_cast<double>(a.size());
    if (a.size() < 2)
        return 0.0;
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa <= 0.0 || sbb <= 0.0)
        return 0.0;
    return sab / std::sqrt(saa * sbb);
}

// Start values: alpha from the item-rest correlation, betas from the
// cumulative category proportions.
GrmItemParams start_values(const Eigen::MatrixXi& cats, Eigen::Index j, int n_cats)
{
    std::vector<double> item, rest;
    std::vector<double> tally(static_cast<std::size_t>(n_cats) + 1, 0.0);
    for (Eigen::Index i = 0; i < cats.rows(); ++i) {
        const int c = cats(i, j);
        if (c <= 0)
            continue;
        tally[static_cast<std::size_t>(c)] += 1.0;
        double sum = 0.0;
        int used = 0;
        for (Eigen::Index o = 0; o < cats.cols(); ++o)
            if (o != j && cats(i, o) > 0) {
                sum += cats(i, o);
                ++used;
            }
        if (used > 0) {
            item.push_back(c);
            rest.push_back(sum / used);
        }
    }
    const double r = std::clamp(pearson(item, rest), 0.0, 0.95);
    GrmItemParams p;
    p.alpha = std::clamp(1.702 * r / std::sqrt(1.0 - r * r), 0.1, 4.0);
    const double total = std::accumulate(tally.begin(), tally.end(), 0.0);
    double above = total;
    const double spread = std::sqrt(1.0 + 0.346 * p.alpha * p.alpha) / p.alpha;
    for (int k = 1; k < n_cats; ++k) {
        above -= tally[static_cast<std::size_t>(k)];
        const double prop = std::clamp(above / total, 1e-3, 1.0 - 1e-3);
        double beta = std::clamp(-std::log(prop / (1.0 - prop)) * spread, -10.0, 10.0);
        if (!p.betas.empty())
            beta = std::max(beta, p.betas.back() + 1e-3);
        p.betas.push_back(beta);
    }
    return p;
}

double max_change(const GrmItemParams& a, const GrmItemParams& b)
{
    double d = std::abs(a.alpha - b.alpha);
    for (std::size_t k = 0; k < a.betas.size(); ++k)
        d = std::max(d, std::abs(a.betas[k] - b.betas[k]));
    return d;
}

} // namespace

GrmModel fit_grm(const LevelMatrix& levels, int k, const GrmFitOptions& options)
{
    if (k < 2)
        throw Error(Errc::InvalidArgument, "K must be >= 2");
    const Eigen::Index n = levels.rows();
    const Eigen::Index j_count = levels.cols();
    if (n < 2 || j_count < 1)
        throw Error(Errc::InsufficientData, "IRT fitting needs at least two respondents");

    GrmModel model;
    model.levels = k;
    model.quadrature = Quadrature::standard_normal(options.quadrature_points);
    model.fit_meta.tol = options.tol;
    model.fit_meta.max_cycles = options.max_cycles;

    // Observed levels per item and the collapse tables.
    Eigen::MatrixXi cats = Eigen::MatrixXi::Zero(n, j_count);
    std::vector<int> n_cats(static_cast<std::size_t>(j_count));
    std::ostringstream unobserved;
    for (Eigen::Index j = 0; j < j_count; ++j) {
        std::vector<int> seen;
        for (Eigen::Index i = 0; i < n; ++i) {
            const int v = levels(i, j);
            if (v < 0 || v > k)
                throw Error(Errc::InvalidArgument, "level out of range in IRT input");
            if (v > 0)
                seen.push_back(v);
        }
        std::sort(seen.begin(), seen.end());
        seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
        if (seen.size() < 2)
            throw Error(Errc::InsufficientData, "item " + std::to_string(j + 1) +
                                                    " has fewer than two observed levels");
        if (static_cast<int>(seen.size()) < k) {
            unobserved << " item " << (j + 1) << ": observed";
            for (int v : seen)
                unobserved << ' ' << v;
            unobserved << ';';
        }
        GrmItem item;
        item.category_map = collapse_map(seen, k);
        n_cats[static_cast<std::size_t>(j)] = static_cast<int>(seen.size());
        for (Eigen::Index i = 0; i < n; ++i)
            if (levels(i, j) > 0)
                cats(i, j) = item.category_map[static_cast<std::size_t>(levels(i, j))];
        model.items.emplace(static_cast<ItemId>(j + 1), std::move(item));
    }
    if (!options.collapse_unobserved && !unobserved.str().empty())
        throw Error(Errc::UnobservedCategory,
                    "unobserved categories; collapse into nearest observed neighbours:" + unobserved.str());

    std::vector<GrmItemParams> params(static_cast<std::size_t>(j_count));
    for (Eigen::Index j = 0; j < j_count; ++j)
        params[static_cast<std::size_t>(j)] = start_values(cats, j, n_cats[static_cast<std::size_t>(j)]);

    const auto& nodes = model.quadrature.nodes;
    std::vector<Eigen::MatrixXd> log_probs(static_cast<std::size_t>(j_count));
    auto refresh_tables = [&]() {
        for (Eigen::Index j = 0; j < j_count; ++j) {
            const auto& p = params[static_cast<std::size_t>(j)];
            auto& lp = log_probs[static_cast<std::size_t>(j)];
            lp.resize(p.categories(), static_cast<Eigen::Index>(nodes.size()));
            for (std::size_t q = 0; q < nodes.size(); ++q)
                for (int c = 1; c <= p.categories(); ++c)
                    lp(c - 1, static_cast<Eigen::Index>(q)) = log_category(p, c, nodes[q]);
        }
    };

    kernels::EStepInput input;
    input.categories = &cats;
    input.log_weights = model.quadrature.log_weights;

    auto& meta = model.fit_meta;
    for (int cycle = 1; cycle <= options.max_cycles; ++cycle) {
        refresh_tables();
        input.log_probs = log_probs;
        const auto estep = kernels::estep_parallel(input);
        meta.loglik_trace.push_back(estep.loglik);
        meta.cycles = cycle;

        std::vector<GrmItemParams> next(params.size());
#pragma omp parallel for schedule(dynamic, 1)
        for (Eigen::Index j = 0; j < j_count; ++j)
            next[static_cast<std::size_t>(j)] =
                maximize_item(params[static_cast<std::size_t>(j)], estep.counts[static_cast<std::size_t>(j)], nodes);

        double change = 0.0;
        for (std::size_t j = 0; j < params.size(); ++j)
            change = std::max(change, max_change(params[j], next[j]));
        params = std::move(next);
        if (change < options.tol) {
            meta.converged = true;
            break;
        }
    }
    refresh_tables();
    input.log_probs = log_probs;
    meta.loglik = kernels::estep_parallel(input).loglik;
    meta.loglik_trace.push_back(meta.loglik);

    for (Eigen::Index j = 0; j < j_count; ++j)
        model.items.at(static_cast<ItemId>(j + 1)).params = params[static_cast<std::size_t>(j)];
    return model;
}

double log_posterior(const GrmModel& model, std::span<const ItemResponse> responses, double theta)
{
    double lp = log_prior(theta);
    for (const auto& r : responses)
        lp += log_category(model.params(r.item), model.effective_category(r.item, r.level), theta);
    return lp;
}

namespace {

std::vector<ItemResponse> sorted_responses(const GrmModel& model, std::span<const ItemResponse> responses)
{
    std::vector<ItemResponse> sorted(responses.begin(), responses.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const auto& a, const auto& b) { return a.item < b.item; });
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        model.effective_category(sorted[i].item, sorted[i].level); // validates
        if (i > 0 && sorted[i].item == sorted[i - 1].item)
            throw Error(Errc::ItemAlreadyAdministered,
                        "item " + std::to_string(sorted[i].item) + " appears twice");
    }
    return sorted;
}

} // namespace

double LatentScorer::grid_theta(int index) { return kThetaMin + kGridStep * index; }

LatentEstimate finish_map(const GrmModel& model, std::span<const ItemResponse> sorted, double grid_theta)
{
    LatentEstimate est;
    est.n_items_used = static_cast<int>(sorted.size());
    double theta = grid_theta;
    double grad = -theta;
    double hess = -1.0;
    for (const auto& r : sorted) {
        const auto [s, h] = log_category_derivatives(model.params(r.item),
                                                     model.effective_category(r.item, r.level), theta);
        grad += s;
        hess += h;
    }
    if (hess < 0.0) {
        const double candidate = theta - grad / hess;
        if (std::abs(candidate - theta) <= kGridStep && candidate >= kThetaMin && candidate <= kThetaMax &&
            log_posterior(model, sorted, candidate) >= log_posterior(model, sorted, theta))
            theta = candidate;
    }
    est.theta = std::clamp(theta, kThetaMin, kThetaMax);
    double info = 1.0;
    for (const auto& r : sorted)
        info += item_information(model.params(r.item), est.theta);
    est.posterior_sd = 1.0 / std::sqrt(info);
    return est;
}

LatentEstimate map_estimate(const GrmModel& model, std::span<const ItemResponse> responses)
{
    const auto sorted = sorted_responses(model, responses);
    if (sorted.empty()) {
        LatentEstimate prior;
        prior.theta = 0.0;
        prior.posterior_sd = 1.0;
        return prior;
    }
    int best = 0;
    double best_value = -kInf;
    for (int g = 0; g < LatentScorer::kGridPoints; ++g) {
        const double theta = LatentScorer::grid_theta(g);
        double lp = log_prior(theta);
        for (const auto& r : sorted)
            lp += log_category(model.params(r.item), model.effective_category(r.item, r.level), theta);
        if (lp > best_value) {
            best_value = lp;
            best = g;
        }
    }
    return finish_map(model, sorted, LatentScorer::grid_theta(best));
}

LatentScorer::LatentScorer(GrmModel model) : model_(std::move(model))
{
    log_prior_.resize(kGridPoints);
    for (int g = 0; g < kGridPoints; ++g)
        log_prior_[static_cast<std::size_t>(g)] = log_prior(grid_theta(g));
    for (const auto& [id, item] : model_.items) {
        const int cats = item.params.categories();
        Eigen::MatrixXd t(kGridPoints, cats);
        for (int c = 1; c <= cats; ++c)
            for (int g = 0; g < kGridPoints; ++g)
                t(g, c - 1) = log_category(item.params, c, grid_theta(g));
        table_.emplace(id, std::move(t));
    }
}

LatentEstimate LatentScorer::estimate(std::span<const ItemResponse> responses) const
{
    const auto sorted = sorted_responses(model_, responses);
    if (sorted.empty())
        return LatentEstimate{};
    std::vector<const double*> columns;
    columns.reserve(sorted.size());
    for (const auto& r : sorted)
        columns.push_back(table_.at(r.item).col(model_.effective_category(r.item, r.level) - 1).data());
    int best = 0;
    double best_value = -kInf;
    for (int g = 0; g < kGridPoints; ++g) {
        double lp = log_prior_[static_cast<std::size_t>(g)];
        for (const double* col : columns)
            lp += col[g];
        if (lp > best_value) {
            best_value = lp;
            best = g;
        }
    }
    return finish_map(model_, sorted, grid_theta(best));
}

} // namespace alba
