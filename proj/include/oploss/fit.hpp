#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "oploss/freq.hpp"

namespace oploss::fit {

inline constexpr std::size_t kCategories = 7;
inline constexpr std::size_t kPairs = 21;
inline constexpr std::size_t kParams = 42;

/// Flat index of the unordered pair (j, k), j < k, in lexicographic order.
std::size_t pair_index(std::size_t j, std::size_t k);
std::pair<std::size_t, std::size_t> pair_members(std::size_t idx);

/// 7 frequency means, 7 variances and 21 covariances at a fixed window,
/// plus the per-event severity means used by the covariance sweep.
struct FitTarget {
    std::array<double, kCategories> freq_mean{};
    std::array<double, kCategories> freq_var{};
    std::array<double, kPairs> freq_cov{};
    std::array<double, kCategories> severity_mean{};
    double tw = 1.0;

    double l1_norm() const;
};

/// The 42 unknowns: (a, tau, gamma) per category and c per pair.
struct ParamVector {
    std::array<double, kCategories> a{};
    std::array<double, kCategories> tau{};
    std::array<double, kCategories> gamma{};
    std::array<double, kPairs> c{};

    PairCoupling coupling(std::size_t pair_idx) const;
};

struct ModelStats {
    std::array<double, kCategories> mean{};
    std::array<double, kCategories> variance{};
    std::array<double, kPairs> cov{};
};

ModelStats model_stats(const ParamVector& x, double tw);

/// l1 distance between model statistics and the target. Out-of-domain
/// parameters (nonpositive a/tau/gamma, |c| >= 1) are a domain error.
double objective(const ParamVector& x, const FitTarget& target);

/// Latin hypercube starts: a ~ U(0,15), tau ~ U(0,2), gamma ~ U(0,40),
/// c ~ U(-1,1), each coordinate stratified into n equal bins hit exactly once.
std::vector<ParamVector> lhs_starts(std::size_t n, std::uint64_t seed);

struct FitOptions {
    double tol = 1e-8;            // stop when a full sweep improves less than this
    std::size_t max_evals = 5000;
};

struct StartResult {
    ParamVector params;
    double objective = 0.0;
    bool converged = false;
    std::size_t evaluations = 0;
};

struct FitResult {
    std::vector<StartResult> starts;
    ParamVector mean_params;   // average over converged starts
    ModelStats mean_stats;     // average fitted statistics over converged starts
    std::size_t converged = 0;
    std::size_t best = 0;      // index of the lowest-objective start
};

/// Bounded derivative-free local descent (cyclic coordinate search on
/// log/atanh-transformed coordinates) from every start; starts are
/// independent work units and run in parallel deterministically.
FitResult fit(const FitTarget& target, const std::vector<ParamVector>& starts,
              const FitOptions& opts = {});

struct SweepCurve {
    std::size_t j = 0;
    std::size_t k = 0;
    std::vector<double> value;  // aligned with the tw grid
};

/// Cov(Q_j, Q_k) per pair across the window grid; needs only mean severities.
std::vector<SweepCurve> sweep_cov_q(const ParamVector& x,
                                    const std::array<double, kCategories>& severity_mean,
                                    std::span<const double> tw_grid, double dt);

/// Pair indices ordered by descending |covariance| at one grid point;
/// lexicographic tie-break.
std::vector<std::size_t> rank_pairs(const std::vector<SweepCurve>& curves, std::size_t tw_index);

}  // namespace oploss::fit
