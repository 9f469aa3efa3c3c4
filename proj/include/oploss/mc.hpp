#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "oploss/loss.hpp"

namespace oploss::mc {

enum class PathKind { rate, loss };

enum class InitMode {
    stationary_mean,  // nu(-burn_in) = a*tau*gamma, burn-in discarded
    zero,             // nu(0) = 0, reproduces transient-inclusive experiments
};

struct SimConfig {
    double dt = 1e-3;                 // years
    double years = 100.0;             // recorded horizon per realization
    std::size_t realizations = 1;
    std::uint64_t seed = 0;
    double burn_in_years = -1.0;      // negative selects the default 20*tau
    InitMode init = InitMode::stationary_mean;
    int negative_jump_stream = 2;     // stream taking the downward jump when c < 0
};

void validate(const SimConfig& cfg);
std::size_t bin_count(const SimConfig& cfg);

/// Fraction of clipped bins above which a loss simulation is rejected.
inline constexpr double kMaxClipFraction = 1e-4;

/// n_realizations x n_bins matrix of rates or losses. Loss entries are zero
/// or one severity draw (at most one event per bin). Rows are generated from
/// per-realization substreams, so the matrix is bit-identical for any thread
/// count.
struct PathEnsemble {
    PathKind kind = PathKind::rate;
    std::size_t realizations = 0;
    std::size_t bins = 0;
    double dt = 0.0;
    double years = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> data;
    std::uint64_t clipped_bins = 0;   // bins where nu*dt exceeded 1
    std::uint64_t floored_jumps = 0;  // downward common jumps cut at nu = 0

    double* row(std::size_t r) { return data.data() + r * bins; }
    const double* row(std::size_t r) const { return data.data() + r * bins; }
};

PathEnsemble simulate_rate_paths(const FreqParams& p, const SimConfig& cfg);
PathEnsemble simulate_losses(const LossModel& m, const SimConfig& cfg);
std::pair<PathEnsemble, PathEnsemble> simulate_pair(const PairLossModel& m, const SimConfig& cfg);
std::pair<PathEnsemble, PathEnsemble> simulate_pair_rates(const PairCoupling& pc, const SimConfig& cfg);

/// Non-overlapping window sums; floor(years/tw) windows per realization.
struct QSeries {
    std::size_t realizations = 0;
    std::size_t windows = 0;
    double tw = 0.0;
    std::vector<double> data;

    double* row(std::size_t r) { return data.data() + r * windows; }
    const double* row(std::size_t r) const { return data.data() + r * windows; }
};

QSeries window_aggregate(const PathEnsemble& e, double tw);

struct MomentEstimate {
    double mean = 0.0;
    double variance = 0.0;
    double se_mean = 0.0;      // realization-level batching
    double se_variance = 0.0;  // realization-level batching
    std::size_t samples = 0;
};

MomentEstimate estimate_moments(const PathEnsemble& e);
MomentEstimate estimate_moments(const QSeries& q);

/// Lag covariance estimates, pooled across realizations and time against the
/// grand mean. Values are per-bin covariances at the given lags.
struct LagEstimate {
    std::vector<double> lag;    // years, ascending
    std::vector<double> value;
    std::vector<double> se;     // realization-level batching
};

LagEstimate estimate_autocov(const PathEnsemble& e, double max_lag_years, std::size_t stride = 1);

/// Cross covariance at signed lags; value at lag t estimates
/// Cov(x1(s + t), x2(s)).
LagEstimate estimate_cross_cov(const PathEnsemble& e1, const PathEnsemble& e2,
                               double max_lag_years, std::size_t stride = 1);

struct CovEstimate {
    double cov = 0.0;
    double se = 0.0;
    std::size_t samples = 0;
};

CovEstimate estimate_window_cov(const QSeries& q1, const QSeries& q2);

// ---------------------------------------------------------------------------
// Streaming drivers. Same statistics as the ensemble ops, but realizations are
// simulated into thread-local buffers and reduced per realization, so the
// horizon is not limited by memory. Deterministic for any thread count.
// ---------------------------------------------------------------------------

struct WindowMomentsEstimate {
    MomentEstimate bin;
    std::vector<double> tw;
    std::vector<MomentEstimate> window;  // aligned with tw
    std::uint64_t clipped_bins = 0;
    std::uint64_t total_bins = 0;
};

WindowMomentsEstimate simulate_loss_window_moments(const LossModel& m, const SimConfig& cfg,
                                                   std::span<const double> tws);

LagEstimate simulate_rate_autocov(const FreqParams& p, const SimConfig& cfg,
                                  double max_lag_years, std::size_t stride = 1);

struct PairWindowCov {
    std::vector<double> tw;
    std::vector<CovEstimate> cov;        // Cov(Q1, Q2) per tw
    std::vector<MomentEstimate> q1;      // per-stream window moments
    std::vector<MomentEstimate> q2;
    std::uint64_t clipped_bins = 0;
    std::uint64_t floored_jumps = 0;
    std::uint64_t total_bins = 0;
};

PairWindowCov simulate_pair_window_cov(const PairLossModel& m, const SimConfig& cfg,
                                       std::span<const double> tws);

}  // namespace oploss::mc
