#include "oploss/json_io.hpp"

#include "oploss/errors.hpp"

namespace oploss {

namespace {

double need_number(const Json& j, const char* key, const char* where) {
    if (!j.contains(key) || !j[key].is_number()) {
        throw ValidationError(std::string(where) + ": missing numeric field '" + key + "'");
    }
    return j[key].get<double>();
}

}  // namespace

Json to_json(const SeveritySpec& spec) {
    Json params;
    switch (spec.family) {
        case SeverityFamily::gamma:
            params = {{"alpha", spec.p1}, {"beta", spec.p2}};
            break;
        case SeverityFamily::lognormal:
            params = {{"mu", spec.p1}, {"sigma", spec.p2}};
            break;
        case SeverityFamily::gpd:
            params = {{"k", spec.p1}, {"sigma", spec.p2}};
            break;
        case SeverityFamily::weibull:
            params = {{"a", spec.p1}, {"b", spec.p2}};
            break;
        case SeverityFamily::burr:
            params = {{"alpha", spec.p1}, {"c", spec.p2}, {"k", spec.p3}};
            break;
    }
    return Json{{"family", std::string(family_name(spec.family))}, {"params", params}};
}

SeveritySpec severity_from_json(const Json& j) {
    if (!j.contains("family") || !j["family"].is_string()) {
        throw ValidationError("severity: missing 'family'");
    }
    if (!j.contains("params") || !j["params"].is_object()) {
        throw ValidationError("severity: missing 'params'");
    }
    const auto family = family_from_name(j["family"].get<std::string>());
    const Json& p = j["params"];
    SeveritySpec spec;
    switch (family) {
        case SeverityFamily::gamma:
            spec = SeveritySpec::gamma(need_number(p, "alpha", "severity.gamma"),
                                       need_number(p, "beta", "severity.gamma"));
            break;
        case SeverityFamily::lognormal:
            // mu is optional and defaults to zero
            spec = SeveritySpec::lognormal(p.contains("mu") ? p["mu"].get<double>() : 0.0,
                                           need_number(p, "sigma", "severity.lognormal"));
            break;
        case SeverityFamily::gpd:
            spec = SeveritySpec::gpd(need_number(p, "k", "severity.gpd"),
                                     need_number(p, "sigma", "severity.gpd"));
            break;
        case SeverityFamily::weibull:
            spec = SeveritySpec::weibull(need_number(p, "a", "severity.weibull"),
                                         need_number(p, "b", "severity.weibull"));
            break;
        case SeverityFamily::burr:
            spec = SeveritySpec::burr(need_number(p, "alpha", "severity.burr"),
                                      need_number(p, "c", "severity.burr"),
                                      need_number(p, "k", "severity.burr"));
            break;
    }
    validate(spec);
    return spec;
}

Json to_json(const FreqParams& p) {
    return Json{{"a", p.a}, {"tau", p.tau}, {"gamma", p.gamma}};
}

FreqParams freq_from_json(const Json& j) {
    FreqParams p{need_number(j, "a", "freq"), need_number(j, "tau", "freq"),
                 need_number(j, "gamma", "freq")};
    validate(p);
    return p;
}

Json to_json(const HomogRate& r) { return Json{{"nu_r", r.nu_r}}; }

Json to_json(const FrequencyModel& f) {
    return std::visit([](const auto& x) { return to_json(x); }, f);
}

FrequencyModel frequency_from_json(const Json& j) {
    if (j.contains("nu_r")) {
        HomogRate r{need_number(j, "nu_r", "freq")};
        validate(r);
        return r;
    }
    return freq_from_json(j);
}

Json to_json(const PairCoupling& pc) {
    return Json{{"p1", to_json(pc.p1)}, {"p2", to_json(pc.p2)}, {"c", pc.c}};
}

PairCoupling pair_coupling_from_json(const Json& j) {
    if (!j.contains("p1") || !j.contains("p2")) {
        throw ValidationError("pair: missing 'p1'/'p2'");
    }
    PairCoupling pc{freq_from_json(j["p1"]), freq_from_json(j["p2"]),
                    need_number(j, "c", "pair")};
    validate(pc);
    return pc;
}

Json to_json(const LossModel& m) {
    return Json{{"freq", to_json(m.freq)}, {"severity", to_json(m.severity)}, {"dt", m.dt}};
}

LossModel loss_model_from_json(const Json& j) {
    if (!j.contains("freq") || !j.contains("severity")) {
        throw ValidationError("loss model: needs 'freq' and 'severity'");
    }
    LossModel m{frequency_from_json(j["freq"]), severity_from_json(j["severity"]),
                j.contains("dt") ? j["dt"].get<double>() : 1e-3};
    validate(m);
    return m;
}

Json to_json(const PairLossModel& m) {
    return Json{{"coupling", to_json(m.coupling)},
                {"severity1", to_json(m.sev1)},
                {"severity2", to_json(m.sev2)},
                {"dt", m.dt}};
}

PairLossModel pair_loss_model_from_json(const Json& j) {
    if (!j.contains("coupling") || !j.contains("severity1") || !j.contains("severity2")) {
        throw ValidationError("pair loss model: needs 'coupling', 'severity1', 'severity2'");
    }
    PairLossModel m{pair_coupling_from_json(j["coupling"]),
                    severity_from_json(j["severity1"]),
                    severity_from_json(j["severity2"]),
                    j.contains("dt") ? j["dt"].get<double>() : 1e-3};
    validate(m);
    return m;
}

Json to_json(const orx::CategoryStats& stats) {
    Json categories = Json::array();
    for (std::size_t c = 0; c < orx::kCategories; ++c) {
        categories.push_back(Json{{"name", orx::kCategoryNames[c]},
                                  {"freq_mean", stats.freq_mean[c]},
                                  {"freq_var", stats.freq_var[c]},
                                  {"severity_per_event", stats.severity_per_event[c]},
                                  {"freq_proportion", stats.freq_prop[c]},
                                  {"sev_proportion", stats.sev_prop[c]}});
    }
    Json cov = Json::array();
    for (std::size_t r = 0; r < orx::kCategories; ++r) {
        Json row = Json::array();
        for (std::size_t c = 0; c < orx::kCategories; ++c) row.push_back(stats.freq_cov[r][c]);
        cov.push_back(row);
    }
    return Json{{"categories", categories},
                {"freq_cov", cov},
                {"grand_freq_mean", stats.grand_freq_mean},
                {"grand_severity", stats.grand_severity},
                {"yearly_freq_var", stats.yearly_freq_var},
                {"warnings", stats.warnings}};
}

Json to_json(const fit::ParamVector& x) {
    Json pairs = Json::array();
    for (std::size_t i = 0; i < fit::kPairs; ++i) {
        const auto [j, k] = fit::pair_members(i);
        pairs.push_back(Json{{"j", j}, {"k", k}, {"c", x.c[i]}});
    }
    return Json{{"a", x.a}, {"tau", x.tau}, {"gamma", x.gamma}, {"c", pairs}};
}

fit::ParamVector params_from_json(const Json& j) {
    fit::ParamVector x;
    for (std::size_t i = 0; i < fit::kCategories; ++i) {
        x.a[i] = j.at("a").at(i).get<double>();
        x.tau[i] = j.at("tau").at(i).get<double>();
        x.gamma[i] = j.at("gamma").at(i).get<double>();
    }
    const auto& pairs = j.at("c");
    if (pairs.size() != fit::kPairs) throw ValidationError("params: expected 21 pair entries");
    for (const auto& entry : pairs) {
        const std::size_t idx = fit::pair_index(entry.at("j").get<std::size_t>(),
                                                entry.at("k").get<std::size_t>());
        x.c[idx] = entry.at("c").get<double>();
    }
    return x;
}

Json to_json(const fit::FitResult& r, double tw) {
    Json starts = Json::array();
    for (const auto& s : r.starts) {
        starts.push_back(Json{{"params", to_json(s.params)},
                              {"objective", s.objective},
                              {"converged", s.converged},
                              {"evaluations", s.evaluations}});
    }
    return Json{{"tw", tw},
                {"starts", starts},
                {"converged", r.converged},
                {"best", r.best},
                {"mean_params", to_json(r.mean_params)}};
}

fit::FitTarget fit_target_from_category_stats(const Json& j) {
    fit::FitTarget target;
    const auto& cats = j.at("categories");
    if (cats.size() != fit::kCategories) {
        throw ValidationError("category stats: expected 7 categories");
    }
    for (std::size_t c = 0; c < fit::kCategories; ++c) {
        target.freq_mean[c] = cats.at(c).at("freq_mean").get<double>();
        target.freq_var[c] = cats.at(c).at("freq_var").get<double>();
        target.severity_mean[c] = cats.at(c).at("severity_per_event").get<double>();
    }
    const auto& cov = j.at("freq_cov");
    for (std::size_t a = 0; a < fit::kCategories; ++a) {
        for (std::size_t b = a + 1; b < fit::kCategories; ++b) {
            target.freq_cov[fit::pair_index(a, b)] = cov.at(a).at(b).get<double>();
        }
    }
    target.tw = 1.0;
    return target;
}

}  // namespace oploss
