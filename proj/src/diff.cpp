#include "whatif/diff.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace whatif {

namespace {

void add_change(CategoryDelta& c, double a, double b) {
  const double d = b - a;
  c.delta += d;
  if (d > 0) c.increase += d;
  if (d < 0) c.decrease -= d;
  if (d != 0) c.unchanged = false;
}

template <typename Map>
std::set<std::string> keys_of(const Map& a, const Map& b) {
  std::set<std::string> keys;
  for (const auto& [k, v] : a) keys.insert(k);
  for (const auto& [k, v] : b) keys.insert(k);
  return keys;
}

void check_comparable(const Plan& a, const Plan& b) {
  if (a.production.horizon() != b.production.horizon() || a.config.horizon != b.config.horizon) {
    throw DiffError("plans have different horizons");
  }
  if (a.production.product_ids() != b.production.product_ids() ||
      a.production.factory_ids() != b.production.factory_ids()) {
    throw DiffError("plans come from different datasets");
  }
  if (a.kpis.capacity_sets.size() != b.kpis.capacity_sets.size() ||
      a.kpis.products.size() != b.kpis.products.size()) {
    throw DiffError("plans come from different datasets");
  }
  for (std::size_t cs = 0; cs < a.kpis.capacity_sets.size(); ++cs) {
    if (a.kpis.capacity_sets[cs].capacity_set != b.kpis.capacity_sets[cs].capacity_set) {
      throw DiffError("plans come from different datasets");
    }
  }
}

Json values_json(const IndicatorValues& v) {
  Json j = Json::object();
  for (auto ind : kIndicators) j[std::string(to_string(ind))] = v[static_cast<std::size_t>(ind)].raw();
  return j;
}

Json deltas_json(const IndicatorDeltas& d) {
  Json j = Json::object();
  for (auto ind : kIndicators) j[std::string(to_string(ind))] = to_json(d[static_cast<std::size_t>(ind)]);
  return j;
}

Json metrics_json(const std::vector<Metric>& v) {
  Json j = Json::array();
  for (auto m : v) j.push_back(m.raw());
  return j;
}

Json side_json(const DetailSide& s) {
  Json nodes = Json::array();
  for (const auto& n : s.nodes) {
    nodes.push_back({{"product", n.product}, {"inventory", n.inventory}, {"backlog", n.backlog}});
  }
  Json factories = Json::array();
  for (const auto& f : s.factories) {
    factories.push_back({{"factory", f.factory}, {"production", f.production}});
  }
  Json sets = Json::array();
  for (const auto& c : s.capacity_sets) {
    sets.push_back({{"capacity_set", c.capacity_set},
                    {"use", c.use},
                    {"utilization", metrics_json(c.utilization)}});
  }
  return {{"daily_delay_rate", metrics_json(s.daily_delay_rate)},
          {"daily_production_cost", s.daily_production_cost},
          {"daily_inventory_cost", s.daily_inventory_cost},
          {"weekly_smoothing_rate", metrics_json(s.weekly_smoothing_rate)},
          {"nodes", nodes},
          {"factories", factories},
          {"capacity_sets", sets}};
}

std::size_t position(const std::vector<std::string>& ids, const std::string& id) {
  const auto it = std::find(ids.begin(), ids.end(), id);
  if (it == ids.end()) throw DataError("unknown id: " + id);
  return static_cast<std::size_t>(it - ids.begin());
}

}  // namespace

MetricDelta metric_delta(Metric a, Metric b) {
  MetricDelta d;
  d.was_sentinel_in_a = a.is_sentinel();
  d.is_sentinel_in_b = b.is_sentinel();
  if (!d.was_sentinel_in_a && !d.is_sentinel_in_b) d.delta = b.value() - a.value();
  return d;
}

std::string_view to_string(Indicator indicator) {
  switch (indicator) {
    case Indicator::kDelayRate: return "delay_rate";
    case Indicator::kProductionCost: return "production_cost";
    case Indicator::kInventoryCost: return "inventory_cost";
    case Indicator::kSmoothingRate: return "smoothing_rate";
  }
  return "unknown";
}

IndicatorValues totals_values(const PlanTotals& t) {
  return {t.delay_rate, t.production_cost, t.inventory_cost, t.smoothing_rate};
}

IndicatorValues summary_values(const ProductKpis& k) {
  return {k.delay_rate.value, k.production_cost.value, k.inventory_cost.value,
          k.smoothing_rate.value};
}

ConfigDelta diff_configs(const PlanConfig& a, const PlanConfig& b) {
  if (a.horizon != b.horizon) throw DiffError("configs have different horizons");
  ConfigDelta out;
  for (const auto& id : keys_of(a.demand, b.demand)) {
    for (int t = 0; t < a.horizon; ++t) {
      add_change(out.demand, static_cast<double>(a.demand_at(id, t)),
                 static_cast<double>(b.demand_at(id, t)));
    }
  }
  for (const auto& id : keys_of(a.initial_inventory, b.initial_inventory)) {
    add_change(out.inventory, static_cast<double>(a.initial_inventory_of(id)),
               static_cast<double>(b.initial_inventory_of(id)));
  }
  std::set<std::string> set_ids;
  for (const auto& cs : a.capacity_sets) set_ids.insert(cs.id);
  for (const auto& cs : b.capacity_sets) set_ids.insert(cs.id);
  for (const auto& id : set_ids) {
    const auto* sa = a.find_capacity_set(id);
    const auto* sb = b.find_capacity_set(id);
    if (!sa || !sb) throw DiffError("configs have different capacity sets");
    for (int t = 0; t < a.horizon; ++t) {
      const auto& va = sa->daily_capacity[static_cast<std::size_t>(t)];
      const auto& vb = sb->daily_capacity[static_cast<std::size_t>(t)];
      if (va && vb) {
        add_change(out.capacity, *va, *vb);
      } else if (va && !vb) {
        ++out.capacity.became_unlimited;
        out.capacity.unchanged = false;
      } else if (!va && vb) {
        ++out.capacity.became_finite;
        out.capacity.unchanged = false;
      }
    }
  }
  for (const auto& f : keys_of(a.holidays, b.holidays)) {
    for (int t = 0; t < a.horizon; ++t) {
      add_change(out.holidays, a.is_holiday(f, t) ? 1.0 : 0.0, b.is_holiday(f, t) ? 1.0 : 0.0);
    }
  }
  return out;
}

PlanDiff diff_plans(const Plan& a, const Plan& b) {
  check_comparable(a, b);
  PlanDiff d;
  d.a = a.id;
  d.b = b.id;
  d.config = diff_configs(a.config, b.config);
  const auto ta = totals_values(a.kpis.totals), tb = totals_values(b.kpis.totals);
  for (std::size_t i = 0; i < 4; ++i) d.kpis[i] = metric_delta(ta[i], tb[i]);

  for (std::size_t p = 0; p < a.kpis.products.size(); ++p) {
    const auto& ka = a.kpis.products[p];
    const auto& kb = b.kpis.products[p];
    if (ka.product != kb.product) throw DiffError("plans come from different datasets");
    ProductDelta pd{ka.product, summary_values(ka), summary_values(kb), {}};
    for (std::size_t i = 0; i < 4; ++i) pd.delta[i] = metric_delta(pd.a[i], pd.b[i]);
    d.products.push_back(std::move(pd));
  }

  auto& det = d.detail;
  det.products = a.production.product_ids();
  det.factories = a.production.factory_ids();
  det.horizon = a.production.horizon();
  const auto h = static_cast<std::size_t>(det.horizon);
  det.production.resize(det.products.size() * det.factories.size() * h);
  for (std::size_t p = 0; p < det.products.size(); ++p) {
    for (std::size_t f = 0; f < det.factories.size(); ++f) {
      for (int t = 0; t < det.horizon; ++t) {
        det.production[(p * det.factories.size() + f) * h + static_cast<std::size_t>(t)] =
            b.production.at(p, f, t) - a.production.at(p, f, t);
      }
    }
  }
  auto series_delta = [&](const auto& sa, const auto& sb) {
    std::vector<std::vector<std::int64_t>> out(sa.size());
    for (std::size_t p = 0; p < sa.size(); ++p) {
      out[p].resize(sa[p].size());
      for (std::size_t t = 0; t < sa[p].size(); ++t) out[p][t] = sb[p][t] - sa[p][t];
    }
    return out;
  };
  det.inventory = series_delta(a.inventory, b.inventory);
  det.backlog = series_delta(a.backlog, b.backlog);
  for (std::size_t cs = 0; cs < a.kpis.capacity_sets.size(); ++cs) {
    const auto& ua = a.kpis.capacity_sets[cs].daily_use;
    const auto& ub = b.kpis.capacity_sets[cs].daily_use;
    det.capacity_sets.push_back(a.kpis.capacity_sets[cs].capacity_set);
    std::vector<double> du(ua.size());
    for (std::size_t t = 0; t < ua.size(); ++t) du[t] = ub[t] - ua[t];
    det.capacity_use.push_back(std::move(du));
  }
  return d;
}

std::vector<std::string> product_filter(const PlanDiff& diff, const ProductPredicate& predicate) {
  std::vector<const ProductDelta*> hits;
  for (const auto& pd : diff.products) {
    bool any_value = false;
    for (std::size_t i = 0; i < 4; ++i) {
      any_value = any_value || !pd.a[i].is_sentinel() || !pd.b[i].is_sentinel();
    }
    if (!any_value) continue;
    bool ok = true;
    for (std::size_t i = 0; i < 4 && ok; ++i) {
      if (const auto& r = predicate.delta[i]) ok = pd.delta[i].delta && r->contains(*pd.delta[i].delta);
      if (const auto& r = predicate.value[i]; ok && r) ok = !pd.b[i].is_sentinel() && r->contains(pd.b[i].raw());
    }
    if (ok) hits.push_back(&pd);
  }
  const auto delay = static_cast<std::size_t>(Indicator::kDelayRate);
  auto key = [&](const ProductDelta* pd) {
    const auto& d = pd->delta[delay].delta;
    return d ? std::abs(*d) : -1.0;
  };
  std::stable_sort(hits.begin(), hits.end(), [&](const ProductDelta* x, const ProductDelta* y) {
    const double kx = key(x), ky = key(y);
    return kx != ky ? kx > ky : x->product < y->product;
  });
  std::vector<std::string> out;
  for (const auto* pd : hits) out.push_back(pd->product);
  return out;
}

DetailSlice detail_slice(const Dataset& dataset, const Plan& a, const Plan& b,
                         std::string_view product) {
  check_comparable(a, b);
  DatasetIndex index(dataset);
  const auto self = index.product(product);
  if (a.production.product_ids().size() != dataset.products.size()) {
    throw DiffError("plans do not belong to this dataset");
  }
  DetailSlice s;
  s.product = std::string(product);
  for (const auto& q : index.parents(self)) s.parents.push_back(dataset.products[q.product].id);

  auto node = [&](std::size_t p, int depth, std::int64_t cumulative) {
    TreeNode n{dataset.products[p].id, depth, cumulative, {}};
    for (const auto& c : index.children(p)) {
      n.children.push_back({dataset.products[c.product].id, c.quantity_per});
    }
    return n;
  };
  s.tree.push_back(node(self, 0, 1));
  for (const auto& e : bom_closure(dataset, product)) {
    s.tree.push_back(node(index.product(e.product), e.depth, e.cumulative_quantity));
  }

  std::vector<std::size_t> sets;
  for (const auto& u : index.usages(self)) sets.push_back(u.capacity_set);
  std::sort(sets.begin(), sets.end());
  sets.erase(std::unique(sets.begin(), sets.end()), sets.end());

  auto side = [&](const Plan& plan) {
    DetailSide d;
    const auto* k = plan.kpis.find(product);
    if (!k) throw DiffError("plan has no indicators for " + std::string(product));
    d.daily_delay_rate = k->daily_delay_rate;
    d.daily_production_cost = k->daily_production_cost;
    d.daily_inventory_cost = k->daily_inventory_cost;
    d.weekly_smoothing_rate = k->weekly_smoothing_rate;
    for (const auto& n : s.tree) {
      const auto p = index.product(n.product);
      d.nodes.push_back({n.product, plan.inventory[p], plan.backlog[p]});
    }
    for (const auto& [f, cost] : index.factories_of(self)) {
      FactorySeries fs{dataset.factories[f].id, {}};
      for (int t = 0; t < plan.production.horizon(); ++t) fs.production.push_back(plan.production.at(self, f, t));
      d.factories.push_back(std::move(fs));
    }
    for (auto cs : sets) {
      const auto& c = plan.kpis.capacity_sets[cs];
      d.capacity_sets.push_back({c.capacity_set, c.daily_use, c.daily_utilization});
    }
    return d;
  };
  s.a = side(a);
  s.b = side(b);
  return s;
}

DiffLevel diff_level_from_string(std::string_view text) {
  if (text == "plan") return DiffLevel::kPlan;
  if (text == "product") return DiffLevel::kProduct;
  if (text == "detail") return DiffLevel::kDetail;
  throw std::invalid_argument("unknown diff level: " + std::string(text));
}

Json to_json(const MetricDelta& d) {
  Json j{{"was_sentinel_in_a", d.was_sentinel_in_a}, {"is_sentinel_in_b", d.is_sentinel_in_b}};
  if (d.delta) j["delta"] = *d.delta;
  return j;
}

Json to_json(const CategoryDelta& c) {
  return {{"delta", c.delta},
          {"increase", c.increase},
          {"decrease", c.decrease},
          {"magnitude", c.magnitude()},
          {"became_unlimited", c.became_unlimited},
          {"became_finite", c.became_finite},
          {"unchanged", c.unchanged}};
}

Json to_json(const ConfigDelta& c) {
  return {{"demand", to_json(c.demand)},
          {"inventory", to_json(c.inventory)},
          {"capacity", to_json(c.capacity)},
          {"holidays", to_json(c.holidays)}};
}

Json to_json(const ProductDelta& d) {
  return {{"product", d.product},
          {"a", values_json(d.a)},
          {"b", values_json(d.b)},
          {"delta", deltas_json(d.delta)}};
}

Json to_json(const DetailSlice& s) {
  Json tree = Json::array();
  for (const auto& n : s.tree) {
    Json children = Json::array();
    for (const auto& c : n.children) children.push_back({{"product", c.product}, {"quantity_per", c.quantity_per}});
    tree.push_back({{"product", n.product},
                    {"depth", n.depth},
                    {"cumulative_quantity", n.cumulative_quantity},
                    {"children", children}});
  }
  return {{"product", s.product},
          {"parents", s.parents},
          {"tree", tree},
          {"a", side_json(s.a)},
          {"b", side_json(s.b)}};
}

Json diff_to_json(const PlanDiff& diff, DiffLevel level, const DetailSlice* slice) {
  Json j{{"a", diff.a},
         {"b", diff.b},
         {"level", level == DiffLevel::kPlan ? "plan" : level == DiffLevel::kProduct ? "product" : "detail"},
         {"config", to_json(diff.config)},
         {"kpis", deltas_json(diff.kpis)}};
  if (level == DiffLevel::kProduct) {
    Json products = Json::array();
    for (const auto& pd : diff.products) products.push_back(to_json(pd));
    j["products"] = products;
  }
  if (level == DiffLevel::kDetail) {
    if (!slice) throw std::invalid_argument("detail level needs a product slice");
    const auto& det = diff.detail;
    const auto p = position(det.products, slice->product);
    for (const auto& pd : diff.products) {
      if (pd.product == slice->product) j["product"] = to_json(pd);
    }
    j["slice"] = to_json(*slice);
    Json production = Json::array();
    for (std::size_t f = 0; f < det.factories.size(); ++f) {
      std::vector<std::int64_t> q;
      for (int t = 0; t < det.horizon; ++t) q.push_back(det.production_at(p, f, t));
      if (std::any_of(q.begin(), q.end(), [](auto v) { return v != 0; }) ||
          std::any_of(slice->a.factories.begin(), slice->a.factories.end(),
                      [&](const auto& fs) { return fs.factory == det.factories[f]; })) {
        production.push_back({{"factory", det.factories[f]}, {"delta", q}});
      }
    }
    Json nodes = Json::array();
    for (const auto& n : slice->tree) {
      const auto q = position(det.products, n.product);
      nodes.push_back({{"product", n.product},
                       {"inventory_delta", det.inventory[q]},
                       {"backlog_delta", det.backlog[q]}});
    }
    Json sets = Json::array();
    for (const auto& c : slice->a.capacity_sets) {
      const auto cs = position(det.capacity_sets, c.capacity_set);
      sets.push_back({{"capacity_set", c.capacity_set}, {"use_delta", det.capacity_use[cs]}});
    }
    j["detail"] = {{"production", production}, {"nodes", nodes}, {"capacity_sets", sets}};
  }
  return j;
}

}  // namespace whatif
