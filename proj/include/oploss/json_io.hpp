#pragma once

#include <json.hpp>

#include "oploss/fit.hpp"
#include "oploss/loss.hpp"
#include "oploss/mc.hpp"
#include "oploss/orx.hpp"

namespace oploss {

using Json = nlohmann::ordered_json;

Json to_json(const SeveritySpec& spec);
SeveritySpec severity_from_json(const Json& j);

Json to_json(const FreqParams& p);
FreqParams freq_from_json(const Json& j);

Json to_json(const HomogRate& r);
Json to_json(const FrequencyModel& f);
FrequencyModel frequency_from_json(const Json& j);

Json to_json(const PairCoupling& pc);
PairCoupling pair_coupling_from_json(const Json& j);

Json to_json(const LossModel& m);
LossModel loss_model_from_json(const Json& j);

Json to_json(const PairLossModel& m);
PairLossModel pair_loss_model_from_json(const Json& j);

Json to_json(const orx::CategoryStats& stats);
Json to_json(const fit::ParamVector& x);
fit::ParamVector params_from_json(const Json& j);
Json to_json(const fit::FitResult& r, double tw);

/// FitTarget from a category_stats.json document.
fit::FitTarget fit_target_from_category_stats(const Json& j);

}  // namespace oploss
