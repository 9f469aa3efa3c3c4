#include "oploss/fit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oploss/errors.hpp"
#include "oploss/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace oploss::fit {

namespace {

constexpr double kMaxAbsC = 1.0 - 1e-9;

}  // namespace

std::size_t pair_index(std::size_t j, std::size_t k) {
    if (j > k) std::swap(j, k);
    // pairs (0,1)..(0,6),(1,2)..: offset of row j is j*kCategories - j*(j+1)/2
    return j * (kCategories - 1) - j * (j + 1) / 2 + (k - 1);
}

std::pair<std::size_t, std::size_t> pair_members(std::size_t idx) {
    std::size_t j = 0;
    std::size_t row = kCategories - 1;
    while (idx >= row) {
        idx -= row;
        ++j;
        --row;
    }
    return {j, j + 1 + idx};
}

double FitTarget::l1_norm() const {
    double s = 0.0;
    for (double v : freq_mean) s += std::fabs(v);
    for (double v : freq_var) s += std::fabs(v);
    for (double v : freq_cov) s += std::fabs(v);
    return s;
}

PairCoupling ParamVector::coupling(std::size_t pair_idx) const {
    const auto [j, k] = pair_members(pair_idx);
    return {{a[j], tau[j], gamma[j]}, {a[k], tau[k], gamma[k]}, c[pair_idx]};
}

ModelStats model_stats(const ParamVector& x, double tw) {
    ModelStats s;
    for (std::size_t j = 0; j < kCategories; ++j) {
        const FreqParams p{x.a[j], x.tau[j], x.gamma[j]};
        const auto cw = count_window_stats(p, tw);
        s.mean[j] = cw.mean;
        s.variance[j] = cw.variance;
    }
    for (std::size_t i = 0; i < kPairs; ++i) {
        s.cov[i] = count_window_cov(x.coupling(i), tw);
    }
    return s;
}

double objective(const ParamVector& x, const FitTarget& target) {
    for (std::size_t j = 0; j < kCategories; ++j) {
        if (!(x.a[j] > 0.0) || !(x.tau[j] > 0.0) || !(x.gamma[j] > 0.0) ||
            !std::isfinite(x.a[j]) || !std::isfinite(x.tau[j]) || !std::isfinite(x.gamma[j])) {
            throw ValidationError("objective: a, tau, gamma must be positive finite");
        }
    }
    for (double c : x.c) {
        if (!(std::fabs(c) < 1.0)) throw ValidationError("objective: c must lie in (-1, 1)");
    }
    const ModelStats s = model_stats(x, target.tw);
    double total = 0.0;
    for (std::size_t j = 0; j < kCategories; ++j) {
        total += std::fabs(s.mean[j] - target.freq_mean[j]);
        total += std::fabs(s.variance[j] - target.freq_var[j]);
    }
    for (std::size_t i = 0; i < kPairs; ++i) {
        total += std::fabs(s.cov[i] - target.freq_cov[i]);
    }
    return total;
}

std::vector<ParamVector> lhs_starts(std::size_t n, std::uint64_t seed) {
    if (n == 0) throw ValidationError("lhs_starts: need n >= 1");
    struct Range {
        double lo, hi;
    };
    auto coord_range = [](std::size_t d) -> Range {
        if (d < kCategories) return {0.0, 15.0};        // a
        if (d < 2 * kCategories) return {0.0, 2.0};     // tau
        if (d < 3 * kCategories) return {0.0, 40.0};    // gamma
        return {-1.0, 1.0};                             // c
    };

    std::vector<std::array<double, kParams>> flat(n);
    for (std::size_t d = 0; d < kParams; ++d) {
        Substream s(seed, std::uint32_t(d), StreamRole::aux);
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        for (std::size_t i = n; i > 1; --i) {
            const std::size_t j = std::size_t(s.next_u64() % i);
            std::swap(perm[i - 1], perm[j]);
        }
        const Range r = coord_range(d);
        for (std::size_t i = 0; i < n; ++i) {
            const double u = s.next_open();
            flat[i][d] = r.lo + (r.hi - r.lo) * (double(perm[i]) + u) / double(n);
        }
    }

    std::vector<ParamVector> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < kCategories; ++j) {
            out[i].a[j] = flat[i][j];
            out[i].tau[j] = flat[i][kCategories + j];
            out[i].gamma[j] = flat[i][2 * kCategories + j];
        }
        for (std::size_t p = 0; p < kPairs; ++p) {
            out[i].c[p] = flat[i][3 * kCategories + p];
        }
    }
    return out;
}

namespace {

// Local descent over the transformed coordinates. The mean and variance
// equations of one category determine (a_j, gamma_j) in closed form once
// tau_j is fixed, and each covariance equation is linear in its c, so both
// blocks are eliminated exactly inside every probe and the derivative-free
// search runs over the seven log-tau coordinates only.
struct Descent {
    const FitTarget& target;
    std::size_t evals = 0;
    std::size_t max_evals;

    void eliminate(ParamVector& x) const {
        const double tw = target.tw;
        for (std::size_t j = 0; j < kCategories; ++j) {
            const double mu = target.freq_mean[j];
            const double var = target.freq_var[j];
            const double dwi = decay_window_integral(x.tau[j], tw);
            if (mu > 0.0 && var > 0.0 && dwi > 0.0) {
                // a*tau*gamma*tw = mu and a^2*gamma*tau*dwi = var
                x.a[j] = var * tw / (mu * dwi);
                x.gamma[j] = mu * mu * dwi / (var * x.tau[j] * tw * tw);
            }
        }
        for (std::size_t i = 0; i < kPairs; ++i) {
            PairCoupling pc = x.coupling(i);
            pc.c = 1.0;
            const double coef = count_window_cov(pc, tw);
            if (std::fabs(coef) > 1e-300) {
                x.c[i] = std::clamp(target.freq_cov[i] / coef, -kMaxAbsC, kMaxAbsC);
            }
        }
    }

    double eval(const ParamVector& x) {
        ++evals;
        return objective(x, target);
    }

    double eval_at_tau(ParamVector& x, std::size_t j, double log_tau) {
        x.tau[j] = std::exp(std::clamp(log_tau, -40.0, 40.0));
        eliminate(x);
        return eval(x);
    }

    // Golden-section search along log tau_j: probe +-step, march downhill
    // with doubling steps until the value turns, refine inside the bracket.
    double line_search(ParamVector& x, std::size_t j, double f0) {
        constexpr double kGolden = 0.6180339887498949;
        const double y0 = std::log(x.tau[j]);
        const double step = 0.4;

        double lo = y0 - step, hi = y0 + step;
        const double flo = eval_at_tau(x, j, lo), fhi = eval_at_tau(x, j, hi);
        if (flo < f0 || fhi < f0) {
            const double dir = flo < fhi ? -1.0 : 1.0;
            double fbest = std::min(flo, fhi);
            double span = step;
            double far = y0 + dir * span * 2.0;
            while (evals < max_evals && span < 30.0) {
                far = y0 + dir * span * 2.0;
                const double fn = eval_at_tau(x, j, far);
                if (fn >= fbest) break;
                fbest = fn;
                span *= 2.0;
            }
            lo = std::min(y0, far);
            hi = std::max(y0, far);
        }

        double x1 = hi - kGolden * (hi - lo);
        double x2 = lo + kGolden * (hi - lo);
        double f1 = eval_at_tau(x, j, x1), f2 = eval_at_tau(x, j, x2);
        for (int i = 0; i < 30 && evals < max_evals; ++i) {
            if (f1 <= f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - kGolden * (hi - lo);
                f1 = eval_at_tau(x, j, x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + kGolden * (hi - lo);
                f2 = eval_at_tau(x, j, x2);
            }
        }
        double ybest = f1 <= f2 ? x1 : x2;
        double fbest = std::min(f1, f2);
        if (f0 <= fbest) {
            ybest = y0;
            fbest = f0;
        }
        x.tau[j] = std::exp(ybest);
        eliminate(x);
        return fbest;
    }
};

StartResult descend(const ParamVector& start, const FitTarget& target, const FitOptions& opts) {
    Descent ds{target, 0, opts.max_evals};
    ParamVector x = start;
    ds.eliminate(x);
    double f = ds.eval(x);
    bool converged = false;
    while (ds.evals < ds.max_evals) {
        const double f_before = f;
        for (std::size_t j = 0; j < kCategories && ds.evals < ds.max_evals; ++j) {
            f = ds.line_search(x, j, f);
        }
        if (f_before - f < opts.tol) {
            converged = true;
            break;
        }
    }
    StartResult res;
    res.params = x;
    res.objective = f;
    res.converged = converged && ds.evals <= ds.max_evals;
    res.evaluations = ds.evals;
    return res;
}

}  // namespace

FitResult fit(const FitTarget& target, const std::vector<ParamVector>& starts,
              const FitOptions& opts) {
    if (starts.empty()) throw ValidationError("fit: need at least one start");
    FitResult out;
    out.starts.resize(starts.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (long long i = 0; i < (long long)starts.size(); ++i) {
        out.starts[std::size_t(i)] = descend(starts[std::size_t(i)], target, opts);
    }

    for (const auto& s : out.starts) out.converged += s.converged ? 1 : 0;
    const bool use_all = out.converged == 0;
    double weight = 0.0;
    ModelStats stats_sum;
    ParamVector param_sum;
    out.best = 0;
    for (std::size_t i = 0; i < out.starts.size(); ++i) {
        const auto& s = out.starts[i];
        if (s.objective < out.starts[out.best].objective) out.best = i;
        if (!use_all && !s.converged) continue;
        weight += 1.0;
        const ModelStats ms = model_stats(s.params, target.tw);
        for (std::size_t j = 0; j < kCategories; ++j) {
            param_sum.a[j] += s.params.a[j];
            param_sum.tau[j] += s.params.tau[j];
            param_sum.gamma[j] += s.params.gamma[j];
            stats_sum.mean[j] += ms.mean[j];
            stats_sum.variance[j] += ms.variance[j];
        }
        for (std::size_t c = 0; c < kPairs; ++c) {
            param_sum.c[c] += s.params.c[c];
            stats_sum.cov[c] += ms.cov[c];
        }
    }
    for (std::size_t j = 0; j < kCategories; ++j) {
        out.mean_params.a[j] = param_sum.a[j] / weight;
        out.mean_params.tau[j] = param_sum.tau[j] / weight;
        out.mean_params.gamma[j] = param_sum.gamma[j] / weight;
        out.mean_stats.mean[j] = stats_sum.mean[j] / weight;
        out.mean_stats.variance[j] = stats_sum.variance[j] / weight;
    }
    for (std::size_t c = 0; c < kPairs; ++c) {
        out.mean_params.c[c] = param_sum.c[c] / weight;
        out.mean_stats.cov[c] = stats_sum.cov[c] / weight;
    }
    return out;
}

std::vector<SweepCurve> sweep_cov_q(const ParamVector& x,
                                    const std::array<double, kCategories>& severity_mean,
                                    std::span<const double> tw_grid, double dt) {
    std::vector<SweepCurve> curves(kPairs);
    for (std::size_t i = 0; i < kPairs; ++i) {
        const auto [j, k] = pair_members(i);
        curves[i].j = j;
        curves[i].k = k;
        const PairCoupling pc = x.coupling(i);
        for (double tw : tw_grid) {
            curves[i].value.push_back(severity_mean[j] * severity_mean[k] *
                                      count_window_cov(pc, tw) * dt);
        }
    }
    return curves;
}

std::vector<std::size_t> rank_pairs(const std::vector<SweepCurve>& curves, std::size_t tw_index) {
    std::vector<std::size_t> order(curves.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t lhs, std::size_t rhs) {
        const double l = std::fabs(curves[lhs].value.at(tw_index));
        const double r = std::fabs(curves[rhs].value.at(tw_index));
        if (l != r) return l > r;
        return std::make_pair(curves[lhs].j, curves[lhs].k) <
               std::make_pair(curves[rhs].j, curves[rhs].k);
    });
    return order;
}

}  // namespace oploss::fit
