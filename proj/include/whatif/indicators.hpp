#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "whatif/model.hpp"
#include "whatif/production.hpp"

namespace whatif {

/// Reserved codes for indicator values that are missing or not applicable.
/// Every legal indicator value is non-negative, so any negative number is a
/// sentinel.
enum class Sentinel : int {
  kNoDemand = -1,
  kNoCapacityUse = -2,
  kNotInvolved = -3,
};

/// An indicator value or a sentinel code.
class Metric {
 public:
  constexpr Metric() = default;
  constexpr Metric(double value) : raw_(value) {}  // NOLINT(google-explicit-constructor)
  static constexpr Metric missing(Sentinel s) { return Metric(static_cast<double>(s)); }

  constexpr bool is_sentinel() const { return raw_ < 0.0; }
  std::optional<Sentinel> sentinel() const;
  /// The numeric value; throws std::logic_error on a sentinel.
  double value() const;
  /// Value or sentinel code, as stored.
  constexpr double raw() const { return raw_; }

  friend constexpr bool operator==(Metric a, Metric b) { return a.raw_ == b.raw_; }

 private:
  double raw_ = 0.0;
};

struct IndicatorConfig {
  /// Stand-in for an infinite week-over-week change.
  double infinity_cap = 10.0;
  int week_length = 7;
  double epsilon = 1e-9;
};

/// Day-to-week bucketing anchored at day 0. A trailing partial week is its
/// own bucket, and its use is scaled up to a full-week equivalent, so a
/// 30-day horizon yields five buckets and four week-over-week rates.
class WeekBuckets {
 public:
  WeekBuckets(int horizon, int week_length);

  int count() const { return static_cast<int>(scale_.size()); }
  int bucket_of(int day) const { return day / week_length_; }
  int first_day(int bucket) const { return bucket * week_length_; }
  int end_day(int bucket) const;  // exclusive
  /// Multiplier that turns a bucket total into a full-week equivalent.
  double scale(int bucket) const { return scale_[static_cast<std::size_t>(bucket)]; }

  /// Scaled per-bucket totals of a daily series.
  std::vector<double> totals(std::span<const double> daily) const;

 private:
  int horizon_;
  int week_length_;
  std::vector<double> scale_;
};

/// Daily share of demand not served on its due day; NO_DEMAND where the day
/// has no demand. Throws std::invalid_argument on negative inputs or
/// served > demand.
std::vector<Metric> delay_rate(std::span<const std::int64_t> demand,
                               std::span<const std::int64_t> served_on_time);

/// Relative change of weekly use against the previous week, for weeks
/// 1..n-1. A change from (near) zero to positive use is infinite and, like
/// every other value, capped at config.infinity_cap.
std::vector<Metric> smoothing_rate(std::span<const double> weekly_use,
                                   const IndicatorConfig& config = {});

struct CostSeries {
  std::vector<double> production;  // per day
  std::vector<double> inventory;   // per day
};

/// Per-product daily production and holding costs, aligned with
/// production.product_ids().
std::vector<CostSeries> cost_series(const Dataset& dataset, const Production& production,
                                    const std::vector<std::vector<std::int64_t>>& inventory);

struct IndicatorSummary {
  Metric value;  // delay: delayed/demand; costs: horizon total; smoothing: mean
  Metric mean;
  Metric variance;  // population variance over non-sentinel entries
};

struct ProductKpis {
  std::string product;
  std::vector<Metric> daily_delay_rate;
  std::vector<double> daily_production_cost;
  std::vector<double> daily_inventory_cost;
  std::vector<Metric> weekly_smoothing_rate;
  IndicatorSummary delay_rate;
  IndicatorSummary production_cost;
  IndicatorSummary inventory_cost;
  IndicatorSummary smoothing_rate;
  std::int64_t total_demand = 0;
  std::int64_t total_delayed = 0;
};

struct CapacitySetKpis {
  std::string capacity_set;
  std::vector<double> daily_use;
  std::vector<Metric> daily_utilization;  // NO_CAPACITY_USE on unlimited days
  std::vector<double> weekly_use;         // scaled bucket totals
  std::vector<Metric> weekly_smoothing_rate;
};

struct PlanTotals {
  Metric delay_rate;
  Metric production_cost;
  Metric inventory_cost;
  Metric smoothing_rate;
};

struct KpiSet {
  std::vector<ProductKpis> products;  // dataset product order
  std::vector<CapacitySetKpis> capacity_sets;
  PlanTotals totals;

  const ProductKpis* find(std::string_view product) const;
};

/// Daily quantity of each product's demand served on its due day, derived
/// from the trajectories (components are consumed before demand is served,
/// and old backlog is served before new demand).
std::vector<std::vector<std::int64_t>> served_on_time(
    const Dataset& dataset, const PlanConfig& config, const Production& production,
    const std::vector<std::vector<std::int64_t>>& inventory,
    const std::vector<std::vector<std::int64_t>>& backlog);

/// All indicators of a plan. Plan-level delay is demand weighted; plan-level
/// smoothing weights each weekly rate by the previous week's use, so capped
/// entries (previous use ~ 0) barely move it.
KpiSet compute_kpis(const Dataset& dataset, const PlanConfig& config,
                    const Production& production,
                    const std::vector<std::vector<std::int64_t>>& inventory,
                    const std::vector<std::vector<std::int64_t>>& backlog,
                    const IndicatorConfig& indicator_config = {});

}  // namespace whatif
