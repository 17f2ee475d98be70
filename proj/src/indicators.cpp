#include "whatif/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace whatif {

std::optional<Sentinel> Metric::sentinel() const {
  if (raw_ == static_cast<double>(Sentinel::kNoDemand)) return Sentinel::kNoDemand;
  if (raw_ == static_cast<double>(Sentinel::kNoCapacityUse)) return Sentinel::kNoCapacityUse;
  if (raw_ == static_cast<double>(Sentinel::kNotInvolved)) return Sentinel::kNotInvolved;
  return std::nullopt;
}

double Metric::value() const {
  if (is_sentinel()) throw std::logic_error("metric holds a sentinel, not a value");
  return raw_;
}

WeekBuckets::WeekBuckets(int horizon, int week_length)
    : horizon_(horizon), week_length_(week_length) {
  if (horizon < 0 || week_length < 1) throw std::invalid_argument("bad week bucketing");
  for (int start = 0; start < horizon; start += week_length) {
    const int len = std::min(week_length, horizon - start);
    scale_.push_back(static_cast<double>(week_length) / len);
  }
}

int WeekBuckets::end_day(int bucket) const {
  return std::min(horizon_, (bucket + 1) * week_length_);
}

std::vector<double> WeekBuckets::totals(std::span<const double> daily) const {
  if (static_cast<int>(daily.size()) != horizon_) {
    throw std::invalid_argument("daily series length differs from the horizon");
  }
  std::vector<double> out(scale_.size(), 0.0);
  for (int t = 0; t < horizon_; ++t) out[static_cast<std::size_t>(bucket_of(t))] += daily[t];
  for (std::size_t w = 0; w < out.size(); ++w) out[w] *= scale_[w];
  return out;
}

std::vector<Metric> delay_rate(std::span<const std::int64_t> demand,
                               std::span<const std::int64_t> served_on_time) {
  if (demand.size() != served_on_time.size()) {
    throw std::invalid_argument("demand and served series differ in length");
  }
  std::vector<Metric> out;
  out.reserve(demand.size());
  for (std::size_t t = 0; t < demand.size(); ++t) {
    const auto d = demand[t];
    const auto s = served_on_time[t];
    if (d < 0 || s < 0) throw std::invalid_argument("negative demand or served quantity");
    if (s > d) throw std::invalid_argument("served quantity exceeds demand");
    if (d == 0) {
      out.push_back(Metric::missing(Sentinel::kNoDemand));
    } else {
      out.emplace_back(static_cast<double>(d - s) / static_cast<double>(d));
    }
  }
  return out;
}

std::vector<Metric> smoothing_rate(std::span<const double> weekly_use,
                                   const IndicatorConfig& config) {
  for (double u : weekly_use) {
    if (!(u >= 0.0)) throw std::invalid_argument("negative or NaN capacity use");
  }
  std::vector<Metric> out;
  for (std::size_t w = 1; w < weekly_use.size(); ++w) {
    const double prev = weekly_use[w - 1];
    const double cur = weekly_use[w];
    double rate;
    if (prev > config.epsilon) {
      rate = std::abs(cur - prev) / prev;
    } else if (cur > config.epsilon) {
      rate = config.infinity_cap;
    } else {
      rate = 0.0;
    }
    out.emplace_back(std::min(rate, config.infinity_cap));
  }
  return out;
}

std::vector<CostSeries> cost_series(const Dataset& dataset, const Production& production,
                                    const std::vector<std::vector<std::int64_t>>& inventory) {
  DatasetIndex index(dataset);
  const int h = production.horizon();
  std::vector<CostSeries> out(production.num_products());
  for (std::size_t p = 0; p < production.num_products(); ++p) {
    const auto& product = dataset.products[index.product(production.product_ids()[p])];
    auto& series = out[p];
    series.production.assign(static_cast<std::size_t>(h), 0.0);
    series.inventory.assign(static_cast<std::size_t>(h), 0.0);
    for (std::size_t f = 0; f < production.num_factories(); ++f) {
      const auto it = product.unit_production_cost.find(production.factory_ids()[f]);
      for (int t = 0; t < h; ++t) {
        const auto q = production.at(p, f, t);
        if (q == 0) continue;
        if (it == product.unit_production_cost.end()) {
          throw DataError("'" + product.id + "' is produced in factory '" +
                          production.factory_ids()[f] + "' which has no cost for it");
        }
        series.production[static_cast<std::size_t>(t)] += it->second * static_cast<double>(q);
      }
    }
    if (p < inventory.size()) {
      for (int t = 0; t < h && t < static_cast<int>(inventory[p].size()); ++t) {
        series.inventory[static_cast<std::size_t>(t)] =
            product.unit_holding_cost * static_cast<double>(inventory[p][static_cast<std::size_t>(t)]);
      }
    }
  }
  return out;
}

const ProductKpis* KpiSet::find(std::string_view product) const {
  for (const auto& k : products) {
    if (k.product == product) return &k;
  }
  return nullptr;
}

std::vector<std::vector<std::int64_t>> served_on_time(
    const Dataset& dataset, const PlanConfig& config, const Production& production,
    const std::vector<std::vector<std::int64_t>>& inventory,
    const std::vector<std::vector<std::int64_t>>& backlog) {
  DatasetIndex index(dataset);
  const int h = config.horizon;
  std::vector<std::vector<std::int64_t>> out(dataset.products.size(),
                                             std::vector<std::int64_t>(static_cast<std::size_t>(h), 0));
  for (std::size_t p = 0; p < dataset.products.size(); ++p) {
    const auto& id = dataset.products[p].id;
    std::int64_t stock = config.initial_inventory_of(id);
    std::int64_t owed = 0;
    for (int t = 0; t < h; ++t) {
      const auto ut = static_cast<std::size_t>(t);
      std::int64_t consumed = 0;
      for (const auto& parent : index.parents(p)) {
        consumed += parent.quantity_per * production.total(parent.product, t);
      }
      const std::int64_t served = stock + production.total(p, t) - consumed - inventory[p][ut];
      out[p][ut] = std::clamp<std::int64_t>(served - owed, 0, config.demand_at(id, t));
      stock = inventory[p][ut];
      owed = backlog[p][ut];
    }
  }
  return out;
}

namespace {

struct Moments {
  double sum = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  std::size_t n = 0;
};

template <typename Range>
Moments moments(const Range& values) {
  Moments m;
  for (const auto& v : values) {
    const double x = static_cast<double>(v);
    if (x < 0.0) continue;
    m.sum += x;
    ++m.n;
  }
  if (m.n == 0) return m;
  m.mean = m.sum / static_cast<double>(m.n);
  for (const auto& v : values) {
    const double x = static_cast<double>(v);
    if (x < 0.0) continue;
    m.variance += (x - m.mean) * (x - m.mean);
  }
  m.variance /= static_cast<double>(m.n);
  return m;
}

std::vector<double> raws(const std::vector<Metric>& metrics) {
  std::vector<double> out;
  out.reserve(metrics.size());
  for (auto m : metrics) out.push_back(m.raw());
  return out;
}

IndicatorSummary cost_summary(const std::vector<double>& daily) {
  const auto m = moments(daily);
  return {m.sum, m.n ? m.mean : 0.0, m.n ? m.variance : 0.0};
}

IndicatorSummary all(Metric m) { return {m, m, m}; }

}  // namespace

KpiSet compute_kpis(const Dataset& dataset, const PlanConfig& config,
                    const Production& production,
                    const std::vector<std::vector<std::int64_t>>& inventory,
                    const std::vector<std::vector<std::int64_t>>& backlog,
                    const IndicatorConfig& indicator_config) {
  DatasetIndex index(dataset);
  const int h = config.horizon;
  const std::size_t n = dataset.products.size();
  const WeekBuckets weeks(h, indicator_config.week_length);

  KpiSet kpis;

  // Capacity sets first: product smoothing is derived from them.
  const auto use = capacity_use(dataset, production);
  for (std::size_t cs = 0; cs < dataset.capacity_sets.size(); ++cs) {
    const auto& id = dataset.capacity_sets[cs].id;
    const CapacitySet* edited = config.find_capacity_set(id);
    const CapacitySet& set = edited ? *edited : dataset.capacity_sets[cs];
    CapacitySetKpis k;
    k.capacity_set = id;
    k.daily_use = use[cs];
    for (int t = 0; t < h; ++t) {
      const auto ut = static_cast<std::size_t>(t);
      const CapacityValue cap =
          ut < set.daily_capacity.size() ? set.daily_capacity[ut] : CapacityValue{};
      if (!cap) {
        k.daily_utilization.push_back(Metric::missing(Sentinel::kNoCapacityUse));
        continue;
      }
      const double limit = config.is_holiday(set.factory, t) ? 0.0 : *cap;
      const double used = k.daily_use[ut];
      if (limit > indicator_config.epsilon) {
        k.daily_utilization.emplace_back(used / limit);
      } else {
        k.daily_utilization.emplace_back(used > indicator_config.epsilon
                                             ? indicator_config.infinity_cap
                                             : 0.0);
      }
    }
    k.weekly_use = weeks.totals(k.daily_use);
    k.weekly_smoothing_rate = smoothing_rate(k.weekly_use, indicator_config);
    kpis.capacity_sets.push_back(std::move(k));
  }

  const auto served = served_on_time(dataset, config, production, inventory, backlog);
  const auto costs = cost_series(dataset, production, inventory);
  const std::size_t num_rates = weeks.count() > 0 ? static_cast<std::size_t>(weeks.count() - 1) : 0;

  std::int64_t plan_demand = 0;
  std::int64_t plan_delayed = 0;
  double plan_production = 0.0;
  double plan_inventory = 0.0;

  for (std::size_t p = 0; p < n; ++p) {
    const auto& id = dataset.products[p].id;
    ProductKpis k;
    k.product = id;

    std::vector<std::int64_t> demand(static_cast<std::size_t>(h));
    for (int t = 0; t < h; ++t) demand[static_cast<std::size_t>(t)] = config.demand_at(id, t);
    k.daily_delay_rate = delay_rate(demand, served[p]);
    k.daily_production_cost = costs[p].production;
    k.daily_inventory_cost = costs[p].inventory;
    for (int t = 0; t < h; ++t) {
      const auto ut = static_cast<std::size_t>(t);
      k.total_demand += demand[ut];
      k.total_delayed += demand[ut] - served[p][ut];
    }

    // Weekly smoothing: usage-weighted mean over the product's capacity sets.
    const auto& usages = index.usages(p);
    if (usages.empty()) {
      k.weekly_smoothing_rate.assign(num_rates, Metric::missing(Sentinel::kNoCapacityUse));
    } else {
      std::vector<double> weight;
      double weight_sum = 0.0;
      for (const auto& u : usages) {
        const auto f = index.factory_of_set(u.capacity_set);
        double w = 0.0;
        for (int t = 0; t < h; ++t) w += u.rate * static_cast<double>(production.at(p, f, t));
        weight.push_back(w);
        weight_sum += w;
      }
      if (weight_sum <= indicator_config.epsilon) {
        std::fill(weight.begin(), weight.end(), 1.0);
        weight_sum = static_cast<double>(weight.size());
      }
      for (std::size_t w = 0; w < num_rates; ++w) {
        double acc = 0.0;
        for (std::size_t i = 0; i < usages.size(); ++i) {
          acc += weight[i] * kpis.capacity_sets[usages[i].capacity_set].weekly_smoothing_rate[w].raw();
        }
        k.weekly_smoothing_rate.emplace_back(acc / weight_sum);
      }
    }

    bool involved = k.total_demand > 0 || config.initial_inventory_of(id) > 0;
    for (int t = 0; t < h && !involved; ++t) {
      const auto ut = static_cast<std::size_t>(t);
      if (production.total(p, t) > 0 || inventory[p][ut] > 0 || backlog[p][ut] > 0) involved = true;
      for (const auto& parent : index.parents(p)) {
        if (production.total(parent.product, t) > 0) involved = true;
      }
    }

    if (!involved) {
      const auto none = Metric::missing(Sentinel::kNotInvolved);
      k.delay_rate = k.production_cost = k.inventory_cost = k.smoothing_rate = all(none);
    } else {
      const auto delay = moments(raws(k.daily_delay_rate));
      if (k.total_demand > 0) {
        k.delay_rate = {static_cast<double>(k.total_delayed) / static_cast<double>(k.total_demand),
                        delay.mean, delay.variance};
      } else {
        k.delay_rate = all(Metric::missing(Sentinel::kNoDemand));
      }
      k.production_cost = cost_summary(k.daily_production_cost);
      k.inventory_cost = cost_summary(k.daily_inventory_cost);
      const auto smooth = moments(raws(k.weekly_smoothing_rate));
      if (smooth.n == 0) {
        k.smoothing_rate = all(Metric::missing(Sentinel::kNoCapacityUse));
      } else {
        k.smoothing_rate = {smooth.mean, smooth.mean, smooth.variance};
      }
    }

    plan_demand += k.total_demand;
    plan_delayed += k.total_delayed;
    plan_production += k.production_cost.value.is_sentinel() ? 0.0 : k.production_cost.value.raw();
    plan_inventory += k.inventory_cost.value.is_sentinel() ? 0.0 : k.inventory_cost.value.raw();
    kpis.products.push_back(std::move(k));
  }

  auto& totals = kpis.totals;
  totals.delay_rate = plan_demand > 0 ? Metric(static_cast<double>(plan_delayed) /
                                               static_cast<double>(plan_demand))
                                      : Metric::missing(Sentinel::kNoDemand);
  totals.production_cost = plan_production;
  totals.inventory_cost = plan_inventory;

  double weighted = 0.0, weights = 0.0, plain = 0.0;
  std::size_t entries = 0;
  for (const auto& cs : kpis.capacity_sets) {
    for (std::size_t w = 0; w < cs.weekly_smoothing_rate.size(); ++w) {
      const double r = cs.weekly_smoothing_rate[w].raw();
      weighted += r * cs.weekly_use[w];
      weights += cs.weekly_use[w];
      plain += r;
      ++entries;
    }
  }
  if (entries == 0) {
    totals.smoothing_rate = Metric::missing(Sentinel::kNoCapacityUse);
  } else if (weights > indicator_config.epsilon) {
    totals.smoothing_rate = weighted / weights;
  } else {
    totals.smoothing_rate = plain / static_cast<double>(entries);
  }
  return kpis;
}

}  // namespace whatif
