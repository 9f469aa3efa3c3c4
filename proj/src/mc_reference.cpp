#include "oploss/mc_reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "oploss/errors.hpp"
#include "oploss/rng.hpp"

namespace oploss::mc::reference {

namespace {

double initial_nu(const FreqParams& p, InitMode init) {
    return init == InitMode::stationary_mean ? p.a * p.tau * p.gamma : 0.0;
}

std::size_t burn_bins(const SimConfig& cfg, double tau) {
    const double years = cfg.burn_in_years >= 0.0 ? cfg.burn_in_years : 20.0 * tau;
    return std::size_t(std::llround(years / cfg.dt));
}

double naive_mean(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / double(xs.size());
}

}  // namespace

PathEnsemble simulate_rate_paths(const FreqParams& p, const SimConfig& cfg) {
    validate(cfg);
    PathEnsemble e;
    e.kind = PathKind::rate;
    e.realizations = cfg.realizations;
    e.bins = bin_count(cfg);
    e.dt = cfg.dt;
    e.years = cfg.years;
    e.seed = cfg.seed;
    e.data.assign(e.realizations * e.bins, 0.0);

    const double decay = std::exp(-cfg.dt / p.tau);
    const double gain = p.a * p.tau * (1.0 - decay) / cfg.dt;
    const double lam = p.gamma * cfg.dt;
    for (std::size_t r = 0; r < e.realizations; ++r) {
        Substream jumps(cfg.seed, std::uint32_t(r), StreamRole::jumps_1);
        const double exp_neg_lam = std::exp(-lam);
        double nu = initial_nu(p, cfg.init);
        for (std::size_t i = burn_bins(cfg, p.tau); i > 0; --i) {
            nu = nu * decay + gain * double(poisson_u32(jumps, lam, exp_neg_lam));
        }
        double* out = e.row(r);
        for (std::size_t i = 0; i < e.bins; ++i) {
            out[i] = nu;
            nu = nu * decay + gain * double(poisson_u32(jumps, lam, exp_neg_lam));
        }
    }
    return e;
}

PathEnsemble simulate_losses(const LossModel& m, const SimConfig& cfg) {
    validate(cfg);
    validate(m);
    PathEnsemble e;
    e.kind = PathKind::loss;
    e.realizations = cfg.realizations;
    e.bins = bin_count(cfg);
    e.dt = cfg.dt;
    e.years = cfg.years;
    e.seed = cfg.seed;
    e.data.assign(e.realizations * e.bins, 0.0);

    for (std::size_t r = 0; r < e.realizations; ++r) {
        Substream bern(cfg.seed, std::uint32_t(r), StreamRole::bernoulli_1);
        Substream sev(cfg.seed, std::uint32_t(r), StreamRole::severity_1);
        double* out = e.row(r);
        if (const auto* hom = std::get_if<HomogRate>(&m.freq)) {
            double p = hom->nu_r * cfg.dt;
            if (p > 1.0) {
                e.clipped_bins += e.bins;
                p = 1.0;
            }
            for (std::size_t i = 0; i < e.bins; ++i) {
                out[i] = bernoulli_u32(bern, p) ? sample(m.severity, sev) : 0.0;
            }
            continue;
        }
        const auto& fp = std::get<FreqParams>(m.freq);
        Substream jumps(cfg.seed, std::uint32_t(r), StreamRole::jumps_1);
        const double decay = std::exp(-cfg.dt / fp.tau);
        const double gain = fp.a * fp.tau * (1.0 - decay) / cfg.dt;
        const double lam = fp.gamma * cfg.dt;
        const double exp_neg_lam = std::exp(-lam);
        double nu = initial_nu(fp, cfg.init);
        for (std::size_t i = burn_bins(cfg, fp.tau); i > 0; --i) {
            nu = nu * decay + gain * double(poisson_u32(jumps, lam, exp_neg_lam));
        }
        for (std::size_t i = 0; i < e.bins; ++i) {
            double p = nu * cfg.dt;
            if (p > 1.0) {
                ++e.clipped_bins;
                p = 1.0;
            }
            out[i] = bernoulli_u32(bern, p) ? sample(m.severity, sev) : 0.0;
            nu = nu * decay + gain * double(poisson_u32(jumps, lam, exp_neg_lam));
        }
    }
    return e;
}

MomentEstimate estimate_moments(const PathEnsemble& e) {
    const std::size_t n = e.realizations * e.bins;
    if (n < 2) throw ValidationError("reference moments: need at least two samples");
    double s = 0.0;
    for (double x : e.data) s += x;
    const double mean = s / double(n);
    double q = 0.0;
    for (double x : e.data) q += (x - mean) * (x - mean);

    MomentEstimate est;
    est.samples = n;
    est.mean = mean;
    est.variance = q / double(n - 1);

    std::vector<double> row_mean(e.realizations), row_var(e.realizations);
    for (std::size_t r = 0; r < e.realizations; ++r) {
        const double* x = e.row(r);
        double rs = 0.0;
        for (std::size_t i = 0; i < e.bins; ++i) rs += x[i];
        row_mean[r] = rs / double(e.bins);
        double rq = 0.0;
        for (std::size_t i = 0; i < e.bins; ++i) {
            rq += (x[i] - row_mean[r]) * (x[i] - row_mean[r]);
        }
        row_var[r] = rq / double(e.bins - 1);
    }
    if (e.realizations >= 2) {
        const double mm = naive_mean(row_mean);
        const double mv = naive_mean(row_var);
        double qm = 0.0, qv = 0.0;
        for (std::size_t r = 0; r < e.realizations; ++r) {
            qm += (row_mean[r] - mm) * (row_mean[r] - mm);
            qv += (row_var[r] - mv) * (row_var[r] - mv);
        }
        est.se_mean = std::sqrt(qm / double(e.realizations - 1) / double(e.realizations));
        est.se_variance = std::sqrt(qv / double(e.realizations - 1) / double(e.realizations));
    } else {
        est.se_mean = est.se_variance = std::numeric_limits<double>::quiet_NaN();
    }
    return est;
}

MomentEstimate estimate_moments(const QSeries& q) {
    PathEnsemble shim;
    shim.realizations = q.realizations;
    shim.bins = q.windows;
    shim.data = q.data;
    return reference::estimate_moments(shim);
}

LagEstimate estimate_autocov(const PathEnsemble& e, double max_lag_years, std::size_t stride) {
    const std::size_t max_bin = std::size_t(std::llround(max_lag_years / e.dt));
    double s = 0.0;
    for (double x : e.data) s += x;
    const double m = s / double(e.realizations * e.bins);

    LagEstimate est;
    for (std::size_t lb = 0; lb <= max_bin; lb += stride) {
        double acc = 0.0;
        std::size_t pairs = 0;
        std::vector<double> per_real(e.realizations, 0.0);
        for (std::size_t r = 0; r < e.realizations; ++r) {
            const double* x = e.row(r);
            double local = 0.0;
            for (std::size_t i = 0; i + lb < e.bins; ++i) {
                local += (x[i + lb] - m) * (x[i] - m);
            }
            acc += local;
            per_real[r] = local / std::max<double>(1.0, double(e.bins - lb) - 1.0);
            pairs += e.bins - lb;
        }
        est.lag.push_back(double(lb) * e.dt);
        est.value.push_back(acc / double(pairs - 1));
        if (e.realizations >= 2) {
            const double pm = naive_mean(per_real);
            double q = 0.0;
            for (double v : per_real) q += (v - pm) * (v - pm);
            est.se.push_back(
                std::sqrt(q / double(e.realizations - 1) / double(e.realizations)));
        } else {
            est.se.push_back(std::numeric_limits<double>::quiet_NaN());
        }
    }
    return est;
}

}  // namespace oploss::mc::reference
