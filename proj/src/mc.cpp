#include "oploss/mc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "oploss/errors.hpp"
#include "oploss/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace oploss::mc {

namespace {

constexpr std::size_t kMaxEnsembleEntries = 250'000'000;  // ~2 GB of doubles

void require(bool ok, const std::string& msg) {
    if (!ok) throw ValidationError(msg);
}

std::size_t commensurate_bins(double span_years, double dt, const char* what) {
    const double ratio = span_years / dt;
    const double rounded = std::round(ratio);
    require(std::fabs(ratio - rounded) <= 1e-9 * std::max(1.0, rounded),
            std::string(what) + " must be a whole number of bins");
    return std::size_t(rounded);
}

std::size_t resolve_burn_bins(const SimConfig& cfg, double tau) {
    const double years = cfg.burn_in_years >= 0.0 ? cfg.burn_in_years : 20.0 * tau;
    return std::size_t(std::llround(years / cfg.dt));
}

// One shot-noise rate: exact exponential decay between bins; Poisson jump
// counts land at the bin boundary scaled by the mean within-bin decay
// tau*(1-exp(-dt/tau))/dt, which keeps the stationary mean exactly a*tau*gamma.
struct RateStepper {
    double nu = 0.0;
    double decay = 0.0;
    double gain = 0.0;
    double lam = 0.0;
    double exp_neg_lam = 1.0;

    RateStepper(const FreqParams& p, double dt, InitMode init)
        : decay(std::exp(-dt / p.tau)),
          gain(p.a * p.tau * (1.0 - std::exp(-dt / p.tau)) / dt),
          lam(p.gamma * dt),
          exp_neg_lam(std::exp(-p.gamma * dt)) {
        nu = (init == InitMode::stationary_mean) ? p.a * p.tau * p.gamma : 0.0;
    }

    void advance(Substream& jumps) {
        nu = nu * decay + gain * double(poisson_u32(jumps, lam, exp_neg_lam));
    }
};

void fill_rate_row(const FreqParams& p, const SimConfig& cfg, std::uint32_t r, double* out,
                   std::size_t bins) {
    Substream jumps(cfg.seed, r, StreamRole::jumps_1);
    RateStepper st(p, cfg.dt, cfg.init);
    for (std::size_t i = resolve_burn_bins(cfg, p.tau); i > 0; --i) st.advance(jumps);
    for (std::size_t i = 0; i < bins; ++i) {
        out[i] = st.nu;
        st.advance(jumps);
    }
}

std::uint64_t fill_loss_row(const LossModel& m, const SimConfig& cfg, std::uint32_t r,
                            double* out, std::size_t bins) {
    Substream bern(cfg.seed, r, StreamRole::bernoulli_1);
    Substream sev(cfg.seed, r, StreamRole::severity_1);
    std::uint64_t clipped = 0;
    if (const auto* hom = std::get_if<HomogRate>(&m.freq)) {
        double p = hom->nu_r * cfg.dt;
        if (p > 1.0) {
            clipped += bins;
            p = 1.0;
        }
        for (std::size_t i = 0; i < bins; ++i) {
            out[i] = bernoulli_u32(bern, p) ? sample(m.severity, sev) : 0.0;
        }
        return clipped;
    }
    const auto& fp = std::get<FreqParams>(m.freq);
    Substream jumps(cfg.seed, r, StreamRole::jumps_1);
    RateStepper st(fp, cfg.dt, cfg.init);
    for (std::size_t i = resolve_burn_bins(cfg, fp.tau); i > 0; --i) st.advance(jumps);
    for (std::size_t i = 0; i < bins; ++i) {
        double p = st.nu * cfg.dt;
        if (p > 1.0) {
            ++clipped;
            p = 1.0;
        }
        out[i] = bernoulli_u32(bern, p) ? sample(m.severity, sev) : 0.0;
        st.advance(jumps);
    }
    return clipped;
}

struct PairRateStepper {
    RateStepper s1;
    RateStepper s2;
    double lam_common = 0.0;
    double lam_private1 = 0.0;
    double lam_private2 = 0.0;
    double e_common = 1.0;
    double e_private1 = 1.0;
    double e_private2 = 1.0;
    double sign1 = 1.0;  // sign of the common jump applied to each stream
    double sign2 = 1.0;
    std::uint64_t floored = 0;

    PairRateStepper(const PairCoupling& pc, const SimConfig& cfg)
        : s1(pc.p1, cfg.dt, cfg.init), s2(pc.p2, cfg.dt, cfg.init) {
        const double shared = std::fabs(pc.c) * pc.gamma_bar();
        lam_common = shared * cfg.dt;
        lam_private1 = (pc.p1.gamma - shared) * cfg.dt;
        lam_private2 = (pc.p2.gamma - shared) * cfg.dt;
        e_common = std::exp(-lam_common);
        e_private1 = std::exp(-lam_private1);
        e_private2 = std::exp(-lam_private2);
        if (pc.c < 0.0) {
            (cfg.negative_jump_stream == 1 ? sign1 : sign2) = -1.0;
        }
    }

    void advance(Substream& common, Substream& priv1, Substream& priv2) {
        const double jc = double(poisson_u32(common, lam_common, e_common));
        const double j1 = double(poisson_u32(priv1, lam_private1, e_private1));
        const double j2 = double(poisson_u32(priv2, lam_private2, e_private2));
        double n1 = s1.nu * s1.decay + s1.gain * (j1 + sign1 * jc);
        double n2 = s2.nu * s2.decay + s2.gain * (j2 + sign2 * jc);
        if (n1 < 0.0) {
            n1 = 0.0;
            ++floored;
        }
        if (n2 < 0.0) {
            n2 = 0.0;
            ++floored;
        }
        s1.nu = n1;
        s2.nu = n2;
    }
};

struct PairDiag {
    std::uint64_t clipped = 0;
    std::uint64_t floored = 0;
};

PairDiag fill_pair_rate_rows(const PairCoupling& pc, const SimConfig& cfg, std::uint32_t r,
                             double* out1, double* out2, std::size_t bins) {
    Substream common(cfg.seed, r, StreamRole::jumps_common);
    Substream priv1(cfg.seed, r, StreamRole::jumps_1);
    Substream priv2(cfg.seed, r, StreamRole::jumps_2);
    PairRateStepper st(pc, cfg);
    const std::size_t burn = resolve_burn_bins(cfg, std::max(pc.p1.tau, pc.p2.tau));
    for (std::size_t i = 0; i < burn; ++i) st.advance(common, priv1, priv2);
    for (std::size_t i = 0; i < bins; ++i) {
        out1[i] = st.s1.nu;
        out2[i] = st.s2.nu;
        st.advance(common, priv1, priv2);
    }
    return {0, st.floored};
}

PairDiag fill_pair_loss_rows(const PairLossModel& m, const SimConfig& cfg, std::uint32_t r,
                             double* out1, double* out2, std::size_t bins) {
    Substream common(cfg.seed, r, StreamRole::jumps_common);
    Substream priv1(cfg.seed, r, StreamRole::jumps_1);
    Substream priv2(cfg.seed, r, StreamRole::jumps_2);
    Substream bern1(cfg.seed, r, StreamRole::bernoulli_1);
    Substream bern2(cfg.seed, r, StreamRole::bernoulli_2);
    Substream sev1(cfg.seed, r, StreamRole::severity_1);
    Substream sev2(cfg.seed, r, StreamRole::severity_2);
    PairRateStepper st(m.coupling, cfg);
    const std::size_t burn = resolve_burn_bins(cfg, std::max(m.coupling.p1.tau, m.coupling.p2.tau));
    for (std::size_t i = 0; i < burn; ++i) st.advance(common, priv1, priv2);
    PairDiag diag;
    for (std::size_t i = 0; i < bins; ++i) {
        double p1 = st.s1.nu * cfg.dt;
        double p2 = st.s2.nu * cfg.dt;
        if (p1 > 1.0) {
            ++diag.clipped;
            p1 = 1.0;
        }
        if (p2 > 1.0) {
            ++diag.clipped;
            p2 = 1.0;
        }
        out1[i] = bernoulli_u32(bern1, p1) ? sample(m.sev1, sev1) : 0.0;
        out2[i] = bernoulli_u32(bern2, p2) ? sample(m.sev2, sev2) : 0.0;
        st.advance(common, priv1, priv2);
    }
    diag.floored = st.floored;
    return diag;
}

PathEnsemble make_ensemble(PathKind kind, const SimConfig& cfg, std::size_t streams = 1) {
    const std::size_t bins = bin_count(cfg);
    require(cfg.realizations * bins * streams <= kMaxEnsembleEntries,
            "ensemble would need too much memory; use the streaming estimators");
    PathEnsemble e;
    e.kind = kind;
    e.realizations = cfg.realizations;
    e.bins = bins;
    e.dt = cfg.dt;
    e.years = cfg.years;
    e.seed = cfg.seed;
    e.data.assign(cfg.realizations * bins, 0.0);
    return e;
}

void check_clip_fraction(std::uint64_t clipped, std::uint64_t total) {
    if (total == 0) return;
    const double frac = double(clipped) / double(total);
    if (frac > kMaxClipFraction) {
        throw SimulationError("clip fraction " + std::to_string(frac) + " exceeds " +
                              std::to_string(kMaxClipFraction) +
                              "; nu*dt left the Bernoulli regime, reduce dt");
    }
}

double sample_sd(const std::vector<double>& xs) {
    if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (double x : xs) s += x;
    const double m = s / double(xs.size());
    double q = 0.0;
    for (double x : xs) q += (x - m) * (x - m);
    return std::sqrt(q / double(xs.size() - 1));
}

MomentEstimate pooled_moments(const double* data, std::size_t n_rows, std::size_t n_cols) {
    require(n_rows * n_cols >= 2, "estimate_moments: need at least two samples");
    std::vector<double> row_sum(n_rows), row_sumsq(n_rows);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long r = 0; r < (long long)n_rows; ++r) {
        const double* x = data + std::size_t(r) * n_cols;
        double s = 0.0, q = 0.0;
        for (std::size_t i = 0; i < n_cols; ++i) {
            s += x[i];
            q += x[i] * x[i];
        }
        row_sum[std::size_t(r)] = s;
        row_sumsq[std::size_t(r)] = q;
    }
    double s = 0.0, q = 0.0;
    for (std::size_t r = 0; r < n_rows; ++r) {
        s += row_sum[r];
        q += row_sumsq[r];
    }
    const double n = double(n_rows) * double(n_cols);
    MomentEstimate est;
    est.samples = n_rows * n_cols;
    est.mean = s / n;
    est.variance = (q - s * s / n) / (n - 1.0);
    if (n_rows >= 2 && n_cols >= 2) {
        std::vector<double> means(n_rows), vars(n_rows);
        for (std::size_t r = 0; r < n_rows; ++r) {
            means[r] = row_sum[r] / double(n_cols);
            vars[r] = (row_sumsq[r] - row_sum[r] * row_sum[r] / double(n_cols)) /
                      (double(n_cols) - 1.0);
        }
        est.se_mean = sample_sd(means) / std::sqrt(double(n_rows));
        est.se_variance = sample_sd(vars) / std::sqrt(double(n_rows));
    } else {
        est.se_mean = est.se_variance = std::numeric_limits<double>::quiet_NaN();
    }
    return est;
}

struct LagAccum {
    // raw sums per realization; combined against the grand mean afterwards
    std::vector<double> cross;  // sum x_i * y_{i+lag}
    std::vector<double> head;   // sum of the first factor over the overlap
    std::vector<double> tail;   // sum of the second factor over the overlap
};

}  // namespace

void validate(const SimConfig& cfg) {
    require(std::isfinite(cfg.dt) && cfg.dt > 0.0, "sim config: dt must be > 0");
    require(std::isfinite(cfg.years) && cfg.years > 0.0, "sim config: years must be > 0");
    require(cfg.realizations >= 1, "sim config: need at least one realization");
    require(cfg.negative_jump_stream == 1 || cfg.negative_jump_stream == 2,
            "sim config: negative_jump_stream must be 1 or 2");
    commensurate_bins(cfg.years, cfg.dt, "sim config: years");
    require(cfg.realizations <= 0xFFFFFFFFull, "sim config: too many realizations");
}

std::size_t bin_count(const SimConfig& cfg) {
    return commensurate_bins(cfg.years, cfg.dt, "sim config: years");
}

PathEnsemble simulate_rate_paths(const FreqParams& p, const SimConfig& cfg) {
    validate(cfg);
    if (p.a != 0.0) validate(p);
    PathEnsemble e = make_ensemble(PathKind::rate, cfg);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long r = 0; r < (long long)cfg.realizations; ++r) {
        fill_rate_row(p, cfg, std::uint32_t(r), e.row(std::size_t(r)), e.bins);
    }
    return e;
}

PathEnsemble simulate_losses(const LossModel& m, const SimConfig& cfg) {
    validate(cfg);
    validate(m);
    PathEnsemble e = make_ensemble(PathKind::loss, cfg);
    std::vector<std::uint64_t> clipped(cfg.realizations, 0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long r = 0; r < (long long)cfg.realizations; ++r) {
        clipped[std::size_t(r)] =
            fill_loss_row(m, cfg, std::uint32_t(r), e.row(std::size_t(r)), e.bins);
    }
    for (auto c : clipped) e.clipped_bins += c;
    check_clip_fraction(e.clipped_bins, e.realizations * e.bins);
    return e;
}

std::pair<PathEnsemble, PathEnsemble> simulate_pair(const PairLossModel& m, const SimConfig& cfg) {
    validate(cfg);
    validate(m);
    PathEnsemble e1 = make_ensemble(PathKind::loss, cfg, 2);
    PathEnsemble e2 = make_ensemble(PathKind::loss, cfg, 2);
    std::vector<PairDiag> diag(cfg.realizations);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long r = 0; r < (long long)cfg.realizations; ++r) {
        diag[std::size_t(r)] = fill_pair_loss_rows(m, cfg, std::uint32_t(r),
                                                   e1.row(std::size_t(r)),
                                                   e2.row(std::size_t(r)), e1.bins);
    }
    for (const auto& d : diag) {
        e1.clipped_bins += d.clipped;
        e1.floored_jumps += d.floored;
    }
    e2.clipped_bins = e1.clipped_bins;
    e2.floored_jumps = e1.floored_jumps;
    check_clip_fraction(e1.clipped_bins, 2 * e1.realizations * e1.bins);
    return {std::move(e1), std::move(e2)};
}

std::pair<PathEnsemble, PathEnsemble> simulate_pair_rates(const PairCoupling& pc,
                                                          const SimConfig& cfg) {
    validate(cfg);
    validate(pc);
    PathEnsemble e1 = make_ensemble(PathKind::rate, cfg, 2);
    PathEnsemble e2 = make_ensemble(PathKind::rate, cfg, 2);
    std::vector<PairDiag> diag(cfg.realizations);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long r = 0; r < (long long)cfg.realizations; ++r) {
        diag[std::size_t(r)] = fill_pair_rate_rows(pc, cfg, std::uint32_t(r),
                                                   e1.row(std::size_t(r)),
                                                   e2.row(std::size_t(r)), e1.bins);
    }
    for (const auto& d : diag) e1.floored_jumps += d.floored;
    e2.floored_jumps = e1.floored_jumps;
    return {std::move(e1), std::move(e2)};
}

QSeries window_aggregate(const PathEnsemble& e, double tw) {
    require(tw > 0.0, "window_aggregate: tw must be > 0");
    const std::size_t per_window = commensurate_bins(tw, e.dt, "window_aggregate: tw");
    require(per_window >= 1, "window_aggregate: tw must cover at least one bin");
    require(tw <= e.years * (1.0 + 1e-12), "window_aggregate: tw exceeds the horizon");
    QSeries q;
    q.realizations = e.realizations;
    q.windows = e.bins / per_window;
    q.tw = tw;
    q.data.assign(q.realizations * q.windows, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long r = 0; r < (long long)e.realizations; ++r) {
        const double* x = e.row(std::size_t(r));
        double* out = q.row(std::size_t(r));
        for (std::size_t w = 0; w < q.windows; ++w) {
            double s = 0.0;
            const double* base = x + w * per_window;
            for (std::size_t i = 0; i < per_window; ++i) s += base[i];
            out[w] = s;
        }
    }
    return q;
}

MomentEstimate estimate_moments(const PathEnsemble& e) {
    return pooled_moments(e.data.data(), e.realizations, e.bins);
}

MomentEstimate estimate_moments(const QSeries& q) {
    return pooled_moments(q.data.data(), q.realizations, q.windows);
}

namespace {

LagEstimate combine_lag_estimate(const std::vector<std::size_t>& lag_bins, double dt,
                                 const std::vector<LagAccum>& acc, double grand_mean,
                                 std::size_t n_rows, std::size_t n_cols, bool negate_lag) {
    LagEstimate est;
    const std::size_t n_lags = lag_bins.size();
    est.lag.resize(n_lags);
    est.value.resize(n_lags);
    est.se.resize(n_lags);
    std::vector<double> per_real(n_rows);
    for (std::size_t l = 0; l < n_lags; ++l) {
        const std::size_t lb = lag_bins[l];
        const double overlap = double(n_cols - lb);
        double cross = 0.0, head = 0.0, tail = 0.0;
        for (std::size_t r = 0; r < n_rows; ++r) {
            cross += acc[r].cross[l];
            head += acc[r].head[l];
            tail += acc[r].tail[l];
            per_real[r] = (acc[r].cross[l] - grand_mean * (acc[r].head[l] + acc[r].tail[l]) +
                           overlap * grand_mean * grand_mean) /
                          std::max(1.0, overlap - 1.0);
        }
        const double n_pairs = double(n_rows) * overlap;
        est.lag[l] = (negate_lag ? -1.0 : 1.0) * double(lb) * dt;
        est.value[l] = (cross - grand_mean * (head + tail) + n_pairs * grand_mean * grand_mean) /
                       (n_pairs - 1.0);
        est.se[l] = n_rows >= 2 ? sample_sd(per_real) / std::sqrt(double(n_rows))
                                : std::numeric_limits<double>::quiet_NaN();
    }
    return est;
}

std::vector<std::size_t> make_lag_bins(double max_lag_years, double dt, std::size_t stride,
                                       std::size_t n_cols) {
    require(stride >= 1, "lag stride must be >= 1");
    const std::size_t max_bin = std::size_t(std::llround(max_lag_years / dt));
    require(max_bin < n_cols, "max lag must be shorter than the horizon");
    std::vector<std::size_t> lags;
    for (std::size_t lb = 0; lb <= max_bin; lb += stride) lags.push_back(lb);
    return lags;
}

// cross[l] = sum_i x[i + lag] * y[i]; head sums x over the overlap, tail sums y.
void accumulate_lags(const double* x, const double* y, std::size_t n_cols,
                     const std::vector<std::size_t>& lag_bins, LagAccum& out) {
    const std::size_t n_lags = lag_bins.size();
    out.cross.assign(n_lags, 0.0);
    out.head.assign(n_lags, 0.0);
    out.tail.assign(n_lags, 0.0);
    for (std::size_t l = 0; l < n_lags; ++l) {
        const std::size_t lb = lag_bins[l];
        const std::size_t overlap = n_cols - lb;
        double c = 0.0;
        for (std::size_t i = 0; i < overlap; ++i) c += x[i + lb] * y[i];
        double h = 0.0, t = 0.0;
        for (std::size_t i = 0; i < overlap; ++i) h += x[i + lb];
        for (std::size_t i = 0; i < overlap; ++i) t += y[i];
        out.cross[l] = c;
        out.head[l] = h;
        out.tail[l] = t;
    }
}

double grand_mean_of(const double* data, std::size_t n_rows, std::size_t n_cols) {
    std::vector<double> row_sum(n_rows, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long r = 0; r < (long long)n_rows; ++r) {
        const double* x = data + std::size_t(r) * n_cols;
        double s = 0.0;
        for (std::size_t i = 0; i < n_cols; ++i) s += x[i];
        row_sum[std::size_t(r)] = s;
    }
    double s = 0.0;
    for (double v : row_sum) s += v;
    return s / (double(n_rows) * double(n_cols));
}

}  // namespace

LagEstimate estimate_autocov(const PathEnsemble& e, double max_lag_years, std::size_t stride) {
    require(max_lag_years <= 0.5 * e.years * (1.0 + 1e-12),
            "estimate_autocov: max lag must not exceed half the horizon");
    const auto lag_bins = make_lag_bins(max_lag_years, e.dt, stride, e.bins);
    const double m = grand_mean_of(e.data.data(), e.realizations, e.bins);
    std::vector<LagAccum> acc(e.realizations);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long r = 0; r < (long long)e.realizations; ++r) {
        const double* x = e.row(std::size_t(r));
        accumulate_lags(x, x, e.bins, lag_bins, acc[std::size_t(r)]);
    }
    return combine_lag_estimate(lag_bins, e.dt, acc, m, e.realizations, e.bins, false);
}

LagEstimate estimate_cross_cov(const PathEnsemble& e1, const PathEnsemble& e2,
                               double max_lag_years, std::size_t stride) {
    require(e1.realizations == e2.realizations && e1.bins == e2.bins && e1.dt == e2.dt,
            "estimate_cross_cov: ensembles must share shape");
    require(max_lag_years <= 0.5 * e1.years * (1.0 + 1e-12),
            "estimate_cross_cov: max lag must not exceed half the horizon");
    const auto lag_bins = make_lag_bins(max_lag_years, e1.dt, stride, e1.bins);
    const double m1 = grand_mean_of(e1.data.data(), e1.realizations, e1.bins);
    const double m2 = grand_mean_of(e2.data.data(), e2.realizations, e2.bins);

    // positive lags: x1 leads; negative lags: x2 leads
    std::vector<LagAccum> pos(e1.realizations), neg(e1.realizations);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long r = 0; r < (long long)e1.realizations; ++r) {
        accumulate_lags(e1.row(std::size_t(r)), e2.row(std::size_t(r)), e1.bins, lag_bins,
                        pos[std::size_t(r)]);
        accumulate_lags(e2.row(std::size_t(r)), e1.row(std::size_t(r)), e1.bins, lag_bins,
                        neg[std::size_t(r)]);
    }

    // stitch: negative lags (descending bins) then positive lags
    LagEstimate est_pos, est_neg;
    {
        // grand mean correction uses both means: adapt the per-stream sums
        const std::size_t n_lags = lag_bins.size();
        auto combine2 = [&](const std::vector<LagAccum>& acc, bool swap_means, bool negate) {
            LagEstimate est;
            est.lag.resize(n_lags);
            est.value.resize(n_lags);
            est.se.resize(n_lags);
            const double mh = swap_means ? m2 : m1;  // mean of the leading factor
            const double mt = swap_means ? m1 : m2;  // mean of the trailing factor
            std::vector<double> per_real(e1.realizations);
            for (std::size_t l = 0; l < n_lags; ++l) {
                const double overlap = double(e1.bins - lag_bins[l]);
                double cross = 0.0, head = 0.0, tail = 0.0;
                for (std::size_t r = 0; r < e1.realizations; ++r) {
                    cross += acc[r].cross[l];
                    head += acc[r].head[l];
                    tail += acc[r].tail[l];
                    per_real[r] = (acc[r].cross[l] - mt * acc[r].head[l] - mh * acc[r].tail[l] +
                                   overlap * mh * mt) /
                                  std::max(1.0, overlap - 1.0);
                }
                const double n_pairs = double(e1.realizations) * overlap;
                est.lag[l] = (negate ? -1.0 : 1.0) * double(lag_bins[l]) * e1.dt;
                est.value[l] =
                    (cross - mt * head - mh * tail + n_pairs * mh * mt) / (n_pairs - 1.0);
                est.se[l] = e1.realizations >= 2
                                ? sample_sd(per_real) / std::sqrt(double(e1.realizations))
                                : std::numeric_limits<double>::quiet_NaN();
            }
            return est;
        };
        est_pos = combine2(pos, false, false);
        est_neg = combine2(neg, true, true);
    }

    LagEstimate est;
    for (std::size_t l = lag_bins.size(); l-- > 1;) {
        est.lag.push_back(est_neg.lag[l]);
        est.value.push_back(est_neg.value[l]);
        est.se.push_back(est_neg.se[l]);
    }
    for (std::size_t l = 0; l < lag_bins.size(); ++l) {
        est.lag.push_back(est_pos.lag[l]);
        est.value.push_back(est_pos.value[l]);
        est.se.push_back(est_pos.se[l]);
    }
    return est;
}

CovEstimate estimate_window_cov(const QSeries& q1, const QSeries& q2) {
    require(q1.realizations == q2.realizations && q1.windows == q2.windows,
            "estimate_window_cov: series must share shape");
    const std::size_t n_rows = q1.realizations, n_cols = q1.windows;
    require(n_rows * n_cols >= 2, "estimate_window_cov: need at least two samples");
    std::vector<double> s1(n_rows), s2(n_rows), s12(n_rows);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long r = 0; r < (long long)n_rows; ++r) {
        const double* a = q1.row(std::size_t(r));
        const double* b = q2.row(std::size_t(r));
        double x = 0.0, y = 0.0, xy = 0.0;
        for (std::size_t i = 0; i < n_cols; ++i) {
            x += a[i];
            y += b[i];
            xy += a[i] * b[i];
        }
        s1[std::size_t(r)] = x;
        s2[std::size_t(r)] = y;
        s12[std::size_t(r)] = xy;
    }
    double S1 = 0.0, S2 = 0.0, S12 = 0.0;
    for (std::size_t r = 0; r < n_rows; ++r) {
        S1 += s1[r];
        S2 += s2[r];
        S12 += s12[r];
    }
    const double n = double(n_rows) * double(n_cols);
    const double m1 = S1 / n, m2 = S2 / n;
    CovEstimate est;
    est.samples = n_rows * n_cols;
    est.cov = (S12 - n * m1 * m2) / (n - 1.0);
    if (n_rows >= 2 && n_cols >= 1) {
        std::vector<double> per_real(n_rows);
        for (std::size_t r = 0; r < n_rows; ++r) {
            per_real[r] = (s12[r] - m1 * s2[r] - m2 * s1[r] + double(n_cols) * m1 * m2) /
                          std::max(1.0, double(n_cols) - 1.0);
        }
        est.se = sample_sd(per_real) / std::sqrt(double(n_rows));
    } else {
        est.se = std::numeric_limits<double>::quiet_NaN();
    }
    return est;
}

// ---------------------------------------------------------------------------
// Streaming drivers
// ---------------------------------------------------------------------------

WindowMomentsEstimate simulate_loss_window_moments(const LossModel& m, const SimConfig& cfg,
                                                   std::span<const double> tws) {
    validate(cfg);
    validate(m);
    const std::size_t bins = bin_count(cfg);
    const std::size_t n_tw = tws.size();
    std::vector<std::size_t> per_window(n_tw);
    for (std::size_t t = 0; t < n_tw; ++t) {
        per_window[t] = commensurate_bins(tws[t], cfg.dt, "window moments: tw");
    }
    const std::size_t n_rows = cfg.realizations;

    std::vector<double> bin_sum(n_rows), bin_sumsq(n_rows);
    std::vector<std::vector<double>> w_sum(n_tw), w_sumsq(n_tw);
    std::vector<std::size_t> w_count(n_tw);
    for (std::size_t t = 0; t < n_tw; ++t) {
        w_count[t] = bins / per_window[t];
        w_sum[t].assign(n_rows, 0.0);
        w_sumsq[t].assign(n_rows, 0.0);
    }
    std::vector<std::uint64_t> clipped(n_rows, 0);

#ifdef _OPENMP
#pragma omp parallel
#endif
    {
        std::vector<double> buf(bins);
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
        for (long long r = 0; r < (long long)n_rows; ++r) {
            const std::size_t rr = std::size_t(r);
            clipped[rr] = fill_loss_row(m, cfg, std::uint32_t(r), buf.data(), bins);
            double s = 0.0, q = 0.0;
            for (std::size_t i = 0; i < bins; ++i) {
                s += buf[i];
                q += buf[i] * buf[i];
            }
            bin_sum[rr] = s;
            bin_sumsq[rr] = q;
            for (std::size_t t = 0; t < n_tw; ++t) {
                const std::size_t W = per_window[t];
                double ws = 0.0, wq = 0.0;
                for (std::size_t w = 0; w < w_count[t]; ++w) {
                    double acc = 0.0;
                    const double* base = buf.data() + w * W;
                    for (std::size_t i = 0; i < W; ++i) acc += base[i];
                    ws += acc;
                    wq += acc * acc;
                }
                w_sum[t][rr] = ws;
                w_sumsq[t][rr] = wq;
            }
        }
    }

    auto combine = [&](const std::vector<double>& sums, const std::vector<double>& sumsqs,
                       std::size_t n_cols) {
        double S = 0.0, Q = 0.0;
        for (std::size_t r = 0; r < n_rows; ++r) {
            S += sums[r];
            Q += sumsqs[r];
        }
        const double n = double(n_rows) * double(n_cols);
        MomentEstimate est;
        est.samples = n_rows * n_cols;
        est.mean = S / n;
        est.variance = (Q - S * S / n) / (n - 1.0);
        if (n_rows >= 2 && n_cols >= 2) {
            std::vector<double> means(n_rows), vars(n_rows);
            for (std::size_t r = 0; r < n_rows; ++r) {
                means[r] = sums[r] / double(n_cols);
                vars[r] =
                    (sumsqs[r] - sums[r] * sums[r] / double(n_cols)) / (double(n_cols) - 1.0);
            }
            est.se_mean = sample_sd(means) / std::sqrt(double(n_rows));
            est.se_variance = sample_sd(vars) / std::sqrt(double(n_rows));
        } else {
            est.se_mean = est.se_variance = std::numeric_limits<double>::quiet_NaN();
        }
        return est;
    };

    WindowMomentsEstimate out;
    out.bin = combine(bin_sum, bin_sumsq, bins);
    out.tw.assign(tws.begin(), tws.end());
    for (std::size_t t = 0; t < n_tw; ++t) {
        out.window.push_back(combine(w_sum[t], w_sumsq[t], w_count[t]));
    }
    for (auto c : clipped) out.clipped_bins += c;
    out.total_bins = std::uint64_t(n_rows) * bins;
    check_clip_fraction(out.clipped_bins, out.total_bins);
    return out;
}

LagEstimate simulate_rate_autocov(const FreqParams& p, const SimConfig& cfg,
                                  double max_lag_years, std::size_t stride) {
    validate(cfg);
    validate(p);
    const std::size_t bins = bin_count(cfg);
    require(max_lag_years <= 0.5 * cfg.years * (1.0 + 1e-12),
            "rate autocov: max lag must not exceed half the horizon");
    const auto lag_bins = make_lag_bins(max_lag_years, cfg.dt, stride, bins);
    const std::size_t n_rows = cfg.realizations;
    std::vector<LagAccum> acc(n_rows);
    std::vector<double> row_sum(n_rows);

#ifdef _OPENMP
#pragma omp parallel
#endif
    {
        std::vector<double> buf(bins);
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
        for (long long r = 0; r < (long long)n_rows; ++r) {
            const std::size_t rr = std::size_t(r);
            fill_rate_row(p, cfg, std::uint32_t(r), buf.data(), bins);
            double s = 0.0;
            for (std::size_t i = 0; i < bins; ++i) s += buf[i];
            row_sum[rr] = s;
            accumulate_lags(buf.data(), buf.data(), bins, lag_bins, acc[rr]);
        }
    }
    double S = 0.0;
    for (double v : row_sum) S += v;
    const double m = S / (double(n_rows) * double(bins));
    return combine_lag_estimate(lag_bins, cfg.dt, acc, m, n_rows, bins, false);
}

PairWindowCov simulate_pair_window_cov(const PairLossModel& m, const SimConfig& cfg,
                                       std::span<const double> tws) {
    validate(cfg);
    validate(m);
    const std::size_t bins = bin_count(cfg);
    const std::size_t n_tw = tws.size();
    std::vector<std::size_t> per_window(n_tw), w_count(n_tw);
    for (std::size_t t = 0; t < n_tw; ++t) {
        per_window[t] = commensurate_bins(tws[t], cfg.dt, "pair window cov: tw");
        w_count[t] = bins / per_window[t];
    }
    const std::size_t n_rows = cfg.realizations;

    struct Sums {
        double s1 = 0, s2 = 0, q1 = 0, q2 = 0, x12 = 0;
    };
    std::vector<std::vector<Sums>> sums(n_tw, std::vector<Sums>(n_rows));
    std::vector<PairDiag> diag(n_rows);

#ifdef _OPENMP
#pragma omp parallel
#endif
    {
        std::vector<double> b1(bins), b2(bins);
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
        for (long long r = 0; r < (long long)n_rows; ++r) {
            const std::size_t rr = std::size_t(r);
            diag[rr] = fill_pair_loss_rows(m, cfg, std::uint32_t(r), b1.data(), b2.data(), bins);
            for (std::size_t t = 0; t < n_tw; ++t) {
                const std::size_t W = per_window[t];
                Sums s;
                for (std::size_t w = 0; w < w_count[t]; ++w) {
                    double a = 0.0, b = 0.0;
                    const double* p1 = b1.data() + w * W;
                    const double* p2 = b2.data() + w * W;
                    for (std::size_t i = 0; i < W; ++i) {
                        a += p1[i];
                        b += p2[i];
                    }
                    s.s1 += a;
                    s.s2 += b;
                    s.q1 += a * a;
                    s.q2 += b * b;
                    s.x12 += a * b;
                }
                sums[t][rr] = s;
            }
        }
    }

    PairWindowCov out;
    out.tw.assign(tws.begin(), tws.end());
    for (std::size_t t = 0; t < n_tw; ++t) {
        double S1 = 0, S2 = 0, Q1 = 0, Q2 = 0, X = 0;
        for (std::size_t r = 0; r < n_rows; ++r) {
            S1 += sums[t][r].s1;
            S2 += sums[t][r].s2;
            Q1 += sums[t][r].q1;
            Q2 += sums[t][r].q2;
            X += sums[t][r].x12;
        }
        const double K = double(w_count[t]);
        const double n = double(n_rows) * K;
        const double m1 = S1 / n, m2 = S2 / n;
        CovEstimate ce;
        ce.samples = std::size_t(n);
        ce.cov = (X - n * m1 * m2) / (n - 1.0);
        MomentEstimate e1, e2;
        e1.samples = e2.samples = std::size_t(n);
        e1.mean = m1;
        e2.mean = m2;
        e1.variance = (Q1 - S1 * S1 / n) / (n - 1.0);
        e2.variance = (Q2 - S2 * S2 / n) / (n - 1.0);
        if (n_rows >= 2) {
            std::vector<double> pc(n_rows), v1(n_rows), v2(n_rows), mm1(n_rows), mm2(n_rows);
            for (std::size_t r = 0; r < n_rows; ++r) {
                const auto& s = sums[t][r];
                const double denom = std::max(1.0, K - 1.0);
                pc[r] = (s.x12 - m1 * s.s2 - m2 * s.s1 + K * m1 * m2) / denom;
                v1[r] = (s.q1 - 2.0 * m1 * s.s1 + K * m1 * m1) / denom;
                v2[r] = (s.q2 - 2.0 * m2 * s.s2 + K * m2 * m2) / denom;
                mm1[r] = s.s1 / K;
                mm2[r] = s.s2 / K;
            }
            const double rootn = std::sqrt(double(n_rows));
            ce.se = sample_sd(pc) / rootn;
            e1.se_variance = sample_sd(v1) / rootn;
            e2.se_variance = sample_sd(v2) / rootn;
            e1.se_mean = sample_sd(mm1) / rootn;
            e2.se_mean = sample_sd(mm2) / rootn;
        } else {
            ce.se = std::numeric_limits<double>::quiet_NaN();
        }
        out.cov.push_back(ce);
        out.q1.push_back(e1);
        out.q2.push_back(e2);
    }
    for (const auto& d : diag) {
        out.clipped_bins += d.clipped;
        out.floored_jumps += d.floored;
    }
    out.total_bins = 2ull * n_rows * bins;
    check_clip_fraction(out.clipped_bins, out.total_bins);
    return out;
}

}  // namespace oploss::mc
