#pragma once

#include <span>
#include <variant>
#include <vector>

#include "oploss/freq.hpp"
#include "oploss/severity.hpp"

namespace oploss {

using FrequencyModel = std::variant<HomogRate, FreqParams>;

/// Discrete-time loss process: at most one event per bin of width dt, event
/// probability nu*dt, independent severity draw on each event.
struct LossModel {
    FrequencyModel freq;
    SeveritySpec severity;
    double dt = 1e-3;  // years
};

struct PairLossModel {
    PairCoupling coupling;
    SeveritySpec sev1;
    SeveritySpec sev2;
    double dt = 1e-3;
};

struct LossStats {
    double bin_mean = 0.0;        // mu_R
    double bin_variance = 0.0;    // sigma^2_R
    double window_mean = 0.0;     // mu_Q
    double window_variance = 0.0; // sigma^2_Q
    /// The shot-noise window variance comes from the lag-integral
    /// approximation and is known to underestimate simulation; see
    /// calibrate_scale for the empirical correction.
    bool window_variance_is_approx = false;
};

void validate(const LossModel& m);
void validate(const PairLossModel& m);

/// nu_r, or the stationary mean a*tau*gamma.
double event_rate(const FrequencyModel& freq);

LossStats homog_stats(const LossModel& m, double tw);
LossStats inhomog_stats(const LossModel& m, double tw);
/// Dispatch on the frequency variant.
LossStats loss_stats(const LossModel& m, double tw);

/// Autocovariance of the loss series as an atom at lag zero plus an
/// exponential tail. Homogeneous: pure atom of mass bin_variance/dt.
/// Shot-noise: pure tail with tail(0) = bin_variance/dt.
struct LossAutocov {
    double atom_mass = 0.0;
    double tail_at_zero = 0.0;
    double tau = 0.0;

    double tail(double lag) const;
};

LossAutocov loss_autocov(const LossModel& m);

/// Lag-covariance samples on a symmetric grid -max_lag..max_lag, step dt.
struct SampledAutocov {
    double dt = 0.0;
    std::vector<double> values;  // index 0 is lag -max_lag

    double max_lag() const;
};

/// sigma^2_Q = integral_{-tw}^{tw} A(t) (tw - |t|) dt. The atom integrates
/// exactly; the tail is integrated by the trapezoidal rule with step `dt`.
double windowed_var_from_autocov(const LossAutocov& a, double tw, double dt);

/// Same integral from sampled lags; throws if the sampled range is shorter
/// than the window (truncation is an error, never silent).
double windowed_var_from_autocov(const SampledAutocov& a, double tw);

/// Cov(R1, R2) for one bin.
double pair_cov_small(const PairLossModel& m);

/// CC_R(t) = Cov(R1,R2)/dt * exp(-t/tau1) for t >= 0, exp(t/tau2) for t < 0.
double pair_cross_cov(const PairLossModel& m, double lag);

/// Cov(Q1, Q2) over a window tw; the (tw - |t|)-weighted integral of
/// pair_cross_cov.
double pair_cov_window(const PairLossModel& m, double tw);

/// Least-squares multiplier s = <analytic, mc> / <analytic, analytic>.
double calibrate_scale(std::span<const double> analytic, std::span<const double> mc);

}  // namespace oploss
