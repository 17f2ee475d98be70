#include "whatif/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <set>

namespace whatif {

namespace {

double round_to(double v, double step) { return std::round(v / step) * step; }

std::string padded(const char* prefix, int n, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*d", prefix, width, n);
  return buf;
}

// Sizes of level 0 (finished) .. level depth (raw).
std::vector<int> level_sizes(int n, int depth) {
  std::vector<int> sizes(static_cast<std::size_t>(depth) + 1, 0);
  if (n == 1) {
    sizes[0] = 1;
    return sizes;
  }
  const int raw = std::max(1, static_cast<int>(std::lround(0.25 * n)));
  const int finished = depth == 1 ? n - raw : std::max(1, static_cast<int>(std::lround(0.3 * n)));
  sizes[0] = finished;
  sizes[static_cast<std::size_t>(depth)] = raw;
  int rest = n - raw - finished;
  for (int l = 1; l < depth; ++l) {
    const int share = rest / (depth - l);
    sizes[static_cast<std::size_t>(l)] = share;
    rest -= share;
  }
  return sizes;
}

}  // namespace

Dataset generate_dataset(const GeneratorParams& gp) {
  if (gp.products < 1 || gp.factories < 1 || gp.depth < 1 || gp.horizon < 1) {
    throw std::invalid_argument("products, factories, depth and horizon must all be at least 1");
  }
  if (!(gp.target_utilization > 0.0)) throw std::invalid_argument("target utilization must be positive");

  std::mt19937_64 rng(gp.seed);
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto chance = [&](double p) { return uniform(0.0, 1.0) < p; };

  const int n = gp.products;
  const int h = gp.horizon;
  const auto hs = static_cast<std::size_t>(h);
  const auto sizes = level_sizes(n, gp.depth);
  const int width = static_cast<int>(std::to_string(n).size());

  Dataset ds;
  for (int f = 1; f <= gp.factories; ++f) {
    const auto id = "F" + std::to_string(f);
    ds.factories.push_back({id, "Factory " + std::to_string(f)});
  }

  // Products, grouped by level.
  std::vector<int> level;
  std::vector<std::vector<std::size_t>> by_level(sizes.size());
  int counters[3] = {0, 0, 0};
  for (std::size_t l = 0; l < sizes.size(); ++l) {
    for (int i = 0; i < sizes[l]; ++i) {
      Product p;
      const bool raw = l + 1 == sizes.size() && n > 1;
      p.kind = l == 0 ? ProductKind::kFinished : raw ? ProductKind::kRawMaterial : ProductKind::kIntermediate;
      const int k = static_cast<int>(p.kind);
      static const char* prefixes[] = {"fg_", "part_", "raw_"};
      static const char* names[] = {"Finished good ", "Assembly ", "Material "};
      p.id = padded(prefixes[k], ++counters[k], width);
      p.name = names[k] + std::to_string(counters[k]);
      p.unit_holding_cost = round_to(raw ? uniform(0.01, 0.05) : l == 0 ? uniform(0.1, 0.5) : uniform(0.05, 0.2), 0.01);
      by_level[l].push_back(ds.products.size());
      level.push_back(static_cast<int>(l));
      ds.products.push_back(std::move(p));
    }
  }
  std::vector<int> priorities(static_cast<std::size_t>(n));
  std::iota(priorities.begin(), priorities.end(), 1);
  std::shuffle(priorities.begin(), priorities.end(), rng);
  for (std::size_t p = 0; p < ds.products.size(); ++p) ds.products[p].priority = priorities[p];

  // Layered BOM: children always sit on a deeper level, so the forest is
  // acyclic and no path is longer than `depth` edges.
  const auto np = ds.products.size();
  std::vector<std::vector<std::pair<std::size_t, std::int64_t>>> children(np);
  std::vector<int> parent_count(np, 0);
  std::set<std::pair<std::size_t, std::size_t>> edges;
  auto add_edge = [&](std::size_t parent, std::size_t child) {
    if (!edges.insert({parent, child}).second) return;
    static const std::int64_t quantities[] = {1, 1, 1, 2, 2, 3};
    const auto q = quantities[pick(0, 5)];
    children[parent].push_back({child, q});
    ++parent_count[child];
    ds.bom_edges.push_back({ds.products[parent].id, ds.products[child].id, q});
  };
  auto next_level = [&](int l) {
    for (int m = l + 1; m < static_cast<int>(by_level.size()); ++m) {
      if (!by_level[static_cast<std::size_t>(m)].empty()) return m;
    }
    return -1;
  };
  for (std::size_t p = 0; p < np; ++p) {
    if (ds.products[p].kind == ProductKind::kRawMaterial) continue;
    const int first = next_level(level[p]);
    if (first < 0) continue;
    const int count = pick(1, 3);
    for (int i = 0; i < count; ++i) {
      int l = first;
      if (chance(0.2)) l = pick(first, static_cast<int>(by_level.size()) - 1);
      while (by_level[static_cast<std::size_t>(l)].empty()) ++l;
      const auto& pool = by_level[static_cast<std::size_t>(l)];
      add_edge(p, pool[static_cast<std::size_t>(pick(0, static_cast<int>(pool.size()) - 1))]);
    }
  }
  // Every component gets at least one parent on a shallower level.
  for (std::size_t p = 0; p < np; ++p) {
    if (level[p] == 0 || parent_count[p] > 0) continue;
    std::vector<std::size_t> pool;
    for (int l = 0; l < level[p]; ++l) {
      for (auto q : by_level[static_cast<std::size_t>(l)]) {
        if (ds.products[q].kind != ProductKind::kRawMaterial) pool.push_back(q);
      }
    }
    if (!pool.empty()) add_edge(pool[static_cast<std::size_t>(pick(0, static_cast<int>(pool.size()) - 1))], p);
  }

  // Factories, capacity sets and usage rates.
  for (const auto& f : ds.factories) {
    ds.capacity_sets.push_back({f.id + "-assembly", f.id, {}});
    ds.capacity_sets.push_back({f.id + "-fab", f.id, {}});
  }
  std::vector<std::vector<std::pair<std::size_t, double>>> uses(np);  // (set, rate)
  for (std::size_t p = 0; p < np; ++p) {
    auto& prod = ds.products[p];
    if (prod.kind == ProductKind::kRawMaterial) continue;
    const double base_cost = uniform(1.0, 8.0) * (prod.kind == ProductKind::kFinished ? 2.0 : 1.0);
    const int sites = gp.factories > 1 && chance(0.3) ? 2 : 1;
    std::vector<int> order(static_cast<std::size_t>(gp.factories));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (int s = 0; s < sites; ++s) {
      const auto f = static_cast<std::size_t>(order[static_cast<std::size_t>(s)]);
      prod.unit_production_cost[ds.factories[f].id] = round_to(base_cost * uniform(0.9, 1.2), 0.01);
      const auto set = 2 * f + (prod.kind == ProductKind::kFinished ? 0 : 1);
      const double rate = round_to(uniform(0.5, 2.0), 0.1);
      uses[p].push_back({set, rate});
      ds.usage_rates.push_back({prod.id, ds.capacity_sets[set].id, rate});
    }
  }

  // Demand on finished goods: weekday/weekend pattern plus one peak week.
  auto& cfg = ds.default_config;
  cfg.horizon = h;
  cfg.start_date = "2024-01-01";
  const int weeks = (h + 6) / 7;
  static const double weekday_factor[] = {1.0, 1.0, 1.0, 1.0, 1.0, 0.6, 0.4};
  for (auto p : by_level[0]) {
    const double base = uniform(5.0, 40.0);
    const int peak = pick(0, weeks - 1);
    const double peak_factor = uniform(1.3, 1.7);
    std::vector<std::int64_t> series(hs);
    for (int t = 0; t < h; ++t) {
      double v = base * weekday_factor[t % 7] * uniform(0.85, 1.15);
      if (t / 7 == peak) v *= peak_factor;
      series[static_cast<std::size_t>(t)] = std::llround(v);
    }
    cfg.demand[ds.products[p].id] = std::move(series);
  }

  // Gross requirements, exploded level by level.
  std::vector<std::vector<double>> req(np, std::vector<double>(hs, 0.0));
  for (auto p : by_level[0]) {
    const auto& series = cfg.demand.at(ds.products[p].id);
    for (std::size_t t = 0; t < hs; ++t) req[p][t] = static_cast<double>(series[t]);
  }
  for (const auto& lvl : by_level) {
    for (auto p : lvl) {
      for (const auto& [c, q] : children[p]) {
        for (std::size_t t = 0; t < hs; ++t) req[c][t] += req[p][t] * static_cast<double>(q);
      }
    }
  }

  // Capacity: mean daily load over the target, with an occasional weak week.
  std::vector<double> load(ds.capacity_sets.size(), 0.0);
  for (std::size_t p = 0; p < np; ++p) {
    const double total = std::accumulate(req[p].begin(), req[p].end(), 0.0);
    for (const auto& [set, rate] : uses[p]) load[set] += total / h / static_cast<double>(uses[p].size()) * rate;
  }
  for (std::size_t s = 0; s < ds.capacity_sets.size(); ++s) {
    const double per_day = std::max(1.0, std::round(load[s] / gp.target_utilization));
    auto& cap = ds.capacity_sets[s].daily_capacity;
    cap.assign(hs, per_day);
    if (chance(0.35)) {
      const int weak = pick(0, weeks - 1);
      for (int t = weak * 7; t < std::min(h, weak * 7 + 7); ++t) cap[static_cast<std::size_t>(t)] = std::round(per_day * 0.7);
    }
  }
  cfg.capacity_sets = ds.capacity_sets;

  // Opening stock: raw materials roughly cover the horizon, the rest a day or so.
  for (std::size_t p = 0; p < np; ++p) {
    const double total = std::accumulate(req[p].begin(), req[p].end(), 0.0);
    const double stock = ds.products[p].kind == ProductKind::kRawMaterial ? total * uniform(0.95, 1.25)
                                                                         : total / h * uniform(0.0, 1.5);
    const auto units = std::llround(stock);
    if (units > 0) cfg.initial_inventory[ds.products[p].id] = units;
  }

  // A few shared components restricted to a subset of their parents.
  std::vector<std::size_t> shared;
  for (std::size_t p = 0; p < np; ++p) {
    if (parent_count[p] >= 2) shared.push_back(p);
  }
  std::stable_partition(shared.begin(), shared.end(),
                        [&](std::size_t p) { return ds.products[p].kind == ProductKind::kRawMaterial; });
  const auto wanted = std::min(shared.size(), static_cast<std::size_t>(std::max(1, n / 250)));
  for (std::size_t i = 0; i < wanted; ++i) {
    const auto c = shared[i];
    std::vector<std::string> parents;
    for (const auto& e : ds.bom_edges) {
      if (e.child == ds.products[c].id) parents.push_back(e.parent);
    }
    std::shuffle(parents.begin(), parents.end(), rng);
    const auto keep = static_cast<std::size_t>(pick(1, static_cast<int>(parents.size()) - 1));
    ds.fixed_component_constraints.push_back(
        {ds.products[c].id, std::set<std::string>(parents.begin(), parents.begin() + static_cast<long>(keep))});
  }
  return ds;
}

}  // namespace whatif
