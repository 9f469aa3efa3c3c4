#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace oploss::orx {

inline constexpr std::size_t kCategories = 7;
inline constexpr std::size_t kYears = 6;

/// Category order used everywhere downstream.
extern const std::array<const char*, kCategories> kCategoryNames;  // IF .. EDPM

/// Published consortium totals: six-year frequency and severity by category,
/// plus the yearly totals and institution counts used to build per-institution
/// series. Banking shares split banking activity out of the all-business
/// yearly totals.
struct RawConsortium {
    std::array<double, kCategories> freq_totals{};  // events over six years
    double freq_grand = 0.0;
    std::array<double, kCategories> sev_totals{};  // EUR millions over six years
    double sev_grand = 0.0;
    std::array<int, kYears> year{};
    std::array<double, kYears> yearly_events{};
    std::array<double, kYears> yearly_losses_eur_billion{};
    std::array<double, kYears> institutions{};
    double banking_share_freq = 0.0;
    double banking_share_sev = 0.0;
    std::string checksum;  // combined fixture checksum (fnv1a-64 hex per file)
};

/// Parse the three CSV fixtures (orx_frequency.csv, orx_severity.csv,
/// orx_yearly.csv). Row and column sums are revalidated against the printed
/// totals; a mismatch beyond source rounding reports the failing row. When a
/// checksums.txt is present beside the fixtures each file hash must match it.
RawConsortium load_raw(const std::filesystem::path& fixture_dir);

/// Yearly per-institution frequency (events/inst) and severity (EUR M/inst).
struct YearlySeries {
    std::array<double, kYears> freq_per_inst{};
    std::array<double, kYears> sev_per_inst{};
    double freq_mean = 0.0;
    double freq_var = 0.0;  // unbiased over the six years
};

YearlySeries per_institution_yearly(const RawConsortium& raw);

struct CategoryStats {
    std::array<double, kCategories> freq_prop{};  // exact ratios of the totals
    std::array<double, kCategories> sev_prop{};
    std::array<double, kCategories> freq_mean{};
    std::array<double, kCategories> freq_var{};
    std::array<double, kCategories> severity_per_event{};  // reported x1000, table units
    std::array<std::array<double, kCategories>, kCategories> freq_cov{};
    double grand_freq_mean = 0.0;
    double grand_severity = 0.0;
    double yearly_freq_var = 0.0;  // variance of the per-institution yearly series
    std::vector<std::string> warnings;
};

CategoryStats category_stats(const YearlySeries& yearly, const RawConsortium& raw);

struct GrandAverages {
    double frequency = 0.0;
    double severity = 0.0;
};

GrandAverages grand_averages(const CategoryStats& stats);

std::string fnv1a_hex(const std::filesystem::path& file);

}  // namespace oploss::orx
