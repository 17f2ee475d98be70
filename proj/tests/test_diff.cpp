#include <doctest.h>

#include <random>
#include <set>

#include "support/fixtures.hpp"
#include "support/planner_oracle.hpp"
#include "whatif/diff.hpp"

using namespace whatif;

namespace {

void check_antisymmetric(const CategoryDelta& x, const CategoryDelta& y) {
  CHECK(x.delta == -y.delta);
  CHECK(x.increase == y.decrease);
  CHECK(x.decrease == y.increase);
  CHECK(x.became_unlimited == y.became_finite);
  CHECK(x.became_finite == y.became_unlimited);
  CHECK(x.unchanged == y.unchanged);
}

void check_antisymmetric(const MetricDelta& x, const MetricDelta& y) {
  REQUIRE(x.delta.has_value() == y.delta.has_value());
  if (x.delta) CHECK(*x.delta == -*y.delta);
  CHECK(x.was_sentinel_in_a == y.is_sentinel_in_b);
  CHECK(x.is_sentinel_in_b == y.was_sentinel_in_a);
}

}  // namespace

TEST_CASE("a plan compared with itself has no differences") {
  auto ds = testing_support::scenario_dataset();
  auto a = plan(ds, ds.default_config);
  auto d = diff_plans(a, a);
  for (const auto* c : {&d.config.demand, &d.config.inventory, &d.config.capacity, &d.config.holidays}) {
    CHECK(c->unchanged);
    CHECK(c->delta == 0.0);
    CHECK(c->magnitude() == 0.0);
  }
  for (const auto& m : d.kpis) {
    if (m.delta) CHECK(*m.delta == 0.0);
  }
  for (const auto& pd : d.products) {
    for (const auto& m : pd.delta) {
      if (m.delta) CHECK(*m.delta == 0.0);
    }
  }
  for (auto v : d.detail.production) CHECK(v == 0);
  for (const auto& s : d.detail.capacity_use) {
    for (auto v : s) CHECK(v == 0.0);
  }
}

TEST_CASE("two added holidays show up only in the holiday category") {
  auto ds = testing_support::scenario_dataset();
  auto b = ds.default_config;
  b.holidays["F1"] = {10, 11};
  auto d = diff_configs(ds.default_config, b);
  CHECK(d.holidays.delta == 2.0);
  CHECK(d.holidays.increase == 2.0);
  CHECK_FALSE(d.holidays.unchanged);
  CHECK(d.demand.unchanged);
  CHECK(d.inventory.unchanged);
  CHECK(d.capacity.unchanged);
}

TEST_CASE("config deltas are signed and mirrored") {
  auto ds = testing_support::scenario_dataset();
  auto b = ds.default_config;
  b.demand["Laptop"][3] += 7;
  b.demand["Tablet"][4] -= 2;
  b.initial_inventory["Chip"] = 100;
  b.capacity_sets[0].daily_capacity[5] = 90.0;
  b.capacity_sets[1].daily_capacity[6] = std::nullopt;
  auto d = diff_configs(ds.default_config, b);
  CHECK(d.demand.delta == 5.0);
  CHECK(d.demand.increase == 7.0);
  CHECK(d.demand.decrease == 2.0);
  CHECK(d.inventory.delta == -3900.0);
  CHECK(d.capacity.delta == 30.0);
  CHECK(d.capacity.became_unlimited == 1);
  CHECK(d.capacity.became_finite == 0);
  auto r = diff_configs(b, ds.default_config);
  check_antisymmetric(d.demand, r.demand);
  check_antisymmetric(d.inventory, r.inventory);
  check_antisymmetric(d.capacity, r.capacity);
}

TEST_CASE("sentinels become flags, never arithmetic") {
  auto d = metric_delta(Metric::missing(Sentinel::kNoDemand), 0.4);
  CHECK_FALSE(d.delta);
  CHECK(d.was_sentinel_in_a);
  CHECK_FALSE(d.is_sentinel_in_b);
  auto j = to_json(d);
  CHECK_FALSE(j.contains("delta"));
  CHECK(j["was_sentinel_in_a"] == true);
  auto e = metric_delta(0.25, 0.5);
  REQUIRE(e.delta);
  CHECK(*e.delta == 0.25);
}

TEST_CASE("diffs of random plan pairs are antisymmetric") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 15; ++i) {
    auto ds = oracle::random_tiny_instance(rng);
    auto cb = ds.default_config;
    for (auto& [id, d] : cb.demand) d[0] += static_cast<std::int64_t>(rng() % 4);
    if (!cb.capacity_sets.empty()) cb.capacity_sets[0].daily_capacity[0] = 1.0 + static_cast<double>(rng() % 5);
    auto a = plan(ds, ds.default_config);
    auto b = plan(ds, cb);
    auto ab = diff_plans(a, b);
    auto ba = diff_plans(b, a);
    check_antisymmetric(ab.config.demand, ba.config.demand);
    check_antisymmetric(ab.config.capacity, ba.config.capacity);
    for (std::size_t k = 0; k < 4; ++k) check_antisymmetric(ab.kpis[k], ba.kpis[k]);
    for (std::size_t p = 0; p < ab.products.size(); ++p) {
      for (std::size_t k = 0; k < 4; ++k) check_antisymmetric(ab.products[p].delta[k], ba.products[p].delta[k]);
    }
    for (std::size_t k = 0; k < ab.detail.production.size(); ++k) {
      CHECK(ab.detail.production[k] == -ba.detail.production[k]);
    }
  }
}

TEST_CASE("mismatched plans cannot be compared") {
  auto ds = testing_support::scenario_dataset();
  auto a = plan(ds, ds.default_config);
  auto other = testing_support::three_parent_dataset();
  auto b = plan(other, other.default_config);
  CHECK_THROWS_AS(diff_plans(a, b), DiffError);
}

TEST_CASE("product filter on hand-built deltas") {
  PlanDiff d;
  auto pd = [](std::string id, double delay_a, double delay_b) {
    ProductDelta x;
    x.product = std::move(id);
    x.a = {delay_a, 1.0, 1.0, 0.1};
    x.b = {delay_b, 1.0, 1.0, 0.1};
    for (std::size_t k = 0; k < 4; ++k) x.delta[k] = metric_delta(x.a[k], x.b[k]);
    return x;
  };
  d.products = {pd("A", 0.2, 0.2), pd("B", 0.1, 0.4), pd("C", 0.3, 0.3)};
  ProductPredicate rises;
  rises.delta[0] = Range{1e-12};
  CHECK(product_filter(d, rises) == std::vector<std::string>{"B"});
  ProductPredicate falls;
  falls.delta[0] = Range{-std::numeric_limits<double>::infinity(), -1e-12};
  CHECK(product_filter(d, falls).empty());

  // Unfiltered: largest |delay delta| first, then id; all-sentinel products dropped.
  ProductDelta z;
  z.product = "Z";
  z.a = z.b = {Metric::missing(Sentinel::kNotInvolved), Metric::missing(Sentinel::kNotInvolved),
               Metric::missing(Sentinel::kNotInvolved), Metric::missing(Sentinel::kNotInvolved)};
  for (std::size_t k = 0; k < 4; ++k) z.delta[k] = metric_delta(z.a[k], z.b[k]);
  d.products.push_back(z);
  CHECK(product_filter(d) == std::vector<std::string>{"B", "A", "C"});
}

TEST_CASE("product filter agrees with the raw indicators after a capacity increase") {
  auto ds = testing_support::scenario_dataset();
  auto base = plan(ds, ds.default_config);
  auto cfg = ds.default_config;
  for (auto& v : cfg.capacity_sets[0].daily_capacity) v = *v * 1.5;
  auto more = plan(ds, cfg);
  auto d = diff_plans(base, more);
  ProductPredicate pred;
  pred.delta[static_cast<std::size_t>(Indicator::kDelayRate)] =
      Range{-std::numeric_limits<double>::infinity(), -1e-12};
  pred.delta[static_cast<std::size_t>(Indicator::kSmoothingRate)] = Range{1e-12};
  const auto hits = product_filter(d, pred);

  std::set<std::string> expected;
  for (std::size_t p = 0; p < base.kpis.products.size(); ++p) {
    const auto& ka = base.kpis.products[p];
    const auto& kb = more.kpis.products[p];
    if (ka.delay_rate.value.is_sentinel() || kb.delay_rate.value.is_sentinel()) continue;
    if (ka.smoothing_rate.value.is_sentinel() || kb.smoothing_rate.value.is_sentinel()) continue;
    if (kb.delay_rate.value.value() < ka.delay_rate.value.value() - 1e-12 &&
        kb.smoothing_rate.value.value() > ka.smoothing_rate.value.value() + 1e-12) {
      expected.insert(ka.product);
    }
  }
  CHECK(std::set<std::string>(hits.begin(), hits.end()) == expected);
  // The bottleneck relief must at least lower some product's delay.
  CHECK(d.kpis[0].delta);
  CHECK(*d.kpis[0].delta < 0.0);
}

TEST_CASE("detail slice of the three-parent fixture") {
  auto ds = testing_support::three_parent_dataset();
  auto a = plan(ds, ds.default_config);
  auto s = detail_slice(ds, a, a, "Routers_491");
  REQUIRE(s.tree.size() == 2);
  CHECK(s.tree[0].product == "Routers_491");
  CHECK(s.tree[1].product == "common_32");
  CHECK(s.parents.empty());
  CHECK(s.a.factories.size() == 1);
  CHECK(s.a.capacity_sets.size() == 1);

  // Never produced, so its backlog is its cumulative demand.
  for (int t = 0; t < 30; ++t) {
    CHECK(s.a.nodes[0].backlog[static_cast<std::size_t>(t)] == 50 * (t + 1));
    CHECK(s.a.nodes[1].backlog[static_cast<std::size_t>(t)] == 0);
    CHECK(s.a.factories[0].production[static_cast<std::size_t>(t)] == 0);
  }
  // All 1000 shared parts go to the two allowed parents.
  auto r22 = detail_slice(ds, a, a, "Routers_22");
  auto sr18 = detail_slice(ds, a, a, "Service_Router_18");
  CHECK(r22.a.nodes[0].backlog.back() + sr18.a.nodes[0].backlog.back() == 30 * 180 - 1000);
}

TEST_CASE("detail slice structure") {
  auto ds = testing_support::scenario_dataset();
  auto a = plan(ds, ds.default_config);
  auto leaf = detail_slice(ds, a, a, "Glass");
  CHECK(leaf.tree.size() == 1);
  CHECK(leaf.tree[0].children.empty());
  CHECK(leaf.parents == std::vector<std::string>{"Screen"});

  auto laptop = detail_slice(ds, a, a, "Laptop");
  CHECK(laptop.tree.size() == bom_closure(ds, "Laptop").size() + 1);
  for (const auto& n : laptop.a.nodes) {
    CHECK(n.inventory.size() == 30);
    CHECK(n.backlog.size() == 30);
  }
  CHECK(laptop.a.daily_delay_rate == laptop.b.daily_delay_rate);
  CHECK_THROWS_AS(detail_slice(ds, a, a, "Nope"), DataError);

  auto d = diff_plans(a, a);
  auto j = diff_to_json(d, DiffLevel::kDetail, &laptop);
  CHECK(j["slice"]["tree"].size() == laptop.tree.size());
  CHECK(j["detail"]["nodes"].size() == laptop.tree.size());
  CHECK_FALSE(diff_to_json(d, DiffLevel::kPlan).contains("products"));
  CHECK(diff_to_json(d, DiffLevel::kProduct)["products"].size() == ds.products.size());
}
