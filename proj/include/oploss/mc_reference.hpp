#pragma once

#include "oploss/mc.hpp"

namespace oploss::mc::reference {

/// Plain single-threaded implementations with the same stream contract as the
/// engine. Simulators must match the engine bit for bit; estimators recompute
/// the same statistics with naive two-pass loops and are used to validate the
/// engine's blocked accumulators.

PathEnsemble simulate_rate_paths(const FreqParams& p, const SimConfig& cfg);
PathEnsemble simulate_losses(const LossModel& m, const SimConfig& cfg);

MomentEstimate estimate_moments(const PathEnsemble& e);
MomentEstimate estimate_moments(const QSeries& q);
LagEstimate estimate_autocov(const PathEnsemble& e, double max_lag_years, std::size_t stride = 1);

}  // namespace oploss::mc::reference
