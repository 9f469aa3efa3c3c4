#include "oploss/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "oploss/errors.hpp"

namespace oploss {

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw ValidationError(msg);
}

}  // namespace

double event_rate(const FrequencyModel& freq) {
    return std::visit(
        [](const auto& f) {
            if constexpr (std::is_same_v<std::decay_t<decltype(f)>, HomogRate>) {
                return f.nu_r;
            } else {
                return f.a * f.tau * f.gamma;
            }
        },
        freq);
}

void validate(const LossModel& m) {
    require(std::isfinite(m.dt) && m.dt > 0.0, "loss model: dt must be > 0");
    std::visit([](const auto& f) { validate(f); }, m.freq);
    validate(m.severity);
    require(event_rate(m.freq) * m.dt < 1.0,
            "loss model: per-bin event probability must stay below 1 (reduce dt)");
}

void validate(const PairLossModel& m) {
    require(std::isfinite(m.dt) && m.dt > 0.0, "pair loss model: dt must be > 0");
    validate(m.coupling);
    validate(m.sev1);
    validate(m.sev2);
    require(event_rate(FrequencyModel{m.coupling.p1}) * m.dt < 1.0,
            "pair loss model: stream 1 per-bin event probability must stay below 1");
    require(event_rate(FrequencyModel{m.coupling.p2}) * m.dt < 1.0,
            "pair loss model: stream 2 per-bin event probability must stay below 1");
}

LossStats homog_stats(const LossModel& m, double tw) {
    const auto* rate = std::get_if<HomogRate>(&m.freq);
    require(rate != nullptr, "homog_stats: model does not carry a constant rate");
    const double nu = rate->nu_r;
    require(nu * m.dt < 1.0, "homog_stats: nu_r*dt must stay below 1");
    const auto sm = moments(m.severity);

    LossStats out;
    out.bin_mean = nu * m.dt * sm.mean;
    out.bin_variance = nu * m.dt * sm.second_moment - out.bin_mean * out.bin_mean;
    out.window_mean = tw * nu * sm.mean;
    out.window_variance = tw * nu * (sm.second_moment - nu * m.dt * sm.mean * sm.mean);
    out.window_variance_is_approx = false;
    return out;
}

LossStats inhomog_stats(const LossModel& m, double tw) {
    const auto* p = std::get_if<FreqParams>(&m.freq);
    require(p != nullptr, "inhomog_stats: model does not carry shot-noise parameters");
    const double nu = p->a * p->tau * p->gamma;
    const auto sm = moments(m.severity);

    LossStats out;
    out.bin_mean = sm.mean * nu * m.dt;
    out.bin_variance = sm.second_moment * nu * m.dt - out.bin_mean * out.bin_mean;
    out.window_mean = tw * nu * sm.mean;
    out.window_variance = 2.0 * (out.bin_variance / m.dt) * decay_window_integral(p->tau, tw);
    out.window_variance_is_approx = true;
    return out;
}

LossStats loss_stats(const LossModel& m, double tw) {
    return std::holds_alternative<HomogRate>(m.freq) ? homog_stats(m, tw)
                                                     : inhomog_stats(m, tw);
}

double LossAutocov::tail(double lag) const {
    if (tau <= 0.0) return 0.0;
    return tail_at_zero * std::exp(-std::fabs(lag) / tau);
}

LossAutocov loss_autocov(const LossModel& m) {
    LossAutocov a;
    if (std::holds_alternative<HomogRate>(m.freq)) {
        a.atom_mass = homog_stats(m, m.dt).bin_variance / m.dt;
    } else {
        const auto& p = std::get<FreqParams>(m.freq);
        a.tail_at_zero = inhomog_stats(m, m.dt).bin_variance / m.dt;
        a.tau = p.tau;
    }
    return a;
}

double windowed_var_from_autocov(const LossAutocov& a, double tw, double dt) {
    require(tw > 0.0 && dt > 0.0, "windowed_var_from_autocov: tw and dt must be > 0");
    double total = a.atom_mass * tw;
    if (a.tail_at_zero != 0.0 && a.tau > 0.0) {
        // even integrand: 2 * integral_0^tw tail(t)*(tw - t) dt, trapezoidal
        const std::size_t n = std::max<std::size_t>(8, std::size_t(std::ceil(tw / dt)));
        const double h = tw / double(n);
        double sum = 0.5 * (a.tail(0.0) * tw + a.tail(tw) * 0.0);
        for (std::size_t i = 1; i < n; ++i) {
            const double t = double(i) * h;
            sum += a.tail(t) * (tw - t);
        }
        total += 2.0 * sum * h;
    }
    return total;
}

double SampledAutocov::max_lag() const {
    if (values.size() < 3 || values.size() % 2 == 0) return 0.0;
    return double(values.size() / 2) * dt;
}

double windowed_var_from_autocov(const SampledAutocov& a, double tw) {
    require(a.dt > 0.0, "windowed_var_from_autocov: sample grid step must be > 0");
    require(!a.values.empty() && a.values.size() % 2 == 1,
            "windowed_var_from_autocov: samples must cover a symmetric lag grid");
    const double lag_span = a.max_lag();
    if (lag_span + 1e-9 * std::max(1.0, tw) < tw) {
        throw ValidationError(
            "windowed_var_from_autocov: sampled lags reach " + std::to_string(lag_span) +
            " years but the window needs " + std::to_string(tw) +
            "; the integral would be truncated");
    }
    // Trapezoid over the symmetric grid; the integrand A(t)*(tw - |t|)
    // vanishes at |t| >= tw, so boundary half-weights drop out.
    const std::ptrdiff_t half = std::ptrdiff_t(a.values.size() / 2);
    double sum = 0.0;
    for (std::ptrdiff_t i = -half; i <= half; ++i) {
        const double weight = tw - std::fabs(double(i) * a.dt);
        if (weight <= 0.0) continue;
        sum += a.values[std::size_t(i + half)] * weight;
    }
    return sum * a.dt;
}

double pair_cov_small(const PairLossModel& m) {
    const auto& pc = m.coupling;
    const double mu1 = moments(m.sev1).mean;
    const double mu2 = moments(m.sev2).mean;
    const double tt = pc.p1.tau * pc.p2.tau / (pc.p1.tau + pc.p2.tau);
    return mu1 * mu2 * pc.c * pc.gamma_bar() * pc.p1.a * pc.p2.a * tt * m.dt * m.dt;
}

double pair_cross_cov(const PairLossModel& m, double lag) {
    const double peak = pair_cov_small(m) / m.dt;
    return peak * (lag >= 0.0 ? std::exp(-lag / m.coupling.p1.tau)
                              : std::exp(lag / m.coupling.p2.tau));
}

double pair_cov_window(const PairLossModel& m, double tw) {
    const double mu1 = moments(m.sev1).mean;
    const double mu2 = moments(m.sev2).mean;
    return mu1 * mu2 * count_window_cov(m.coupling, tw) * m.dt;
}

double calibrate_scale(std::span<const double> analytic, std::span<const double> mc) {
    require(analytic.size() == mc.size(), "calibrate_scale: series lengths differ");
    require(analytic.size() >= 2, "calibrate_scale: need at least two points");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        num += analytic[i] * mc[i];
        den += analytic[i] * analytic[i];
    }
    require(den > 0.0, "calibrate_scale: analytic series is identically zero");
    return num / den;
}

}  // namespace oploss
