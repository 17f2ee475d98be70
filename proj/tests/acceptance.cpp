// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "support/builders.hpp"
#include "support/fixtures.hpp"
#include "support/invariants.hpp"
#include "support/lp_oracle.hpp"
#include "support/planner_oracle.hpp"
#include "whatif/datagen.hpp"
#include "whatif/diff.hpp"
#include "whatif/edits.hpp"
#include "whatif/plan.hpp"

using namespace whatif;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects the first few failures of one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (++failures_ <= 3) out_ << (failures_ > 1 ? "; " : "") << what;
  }
  Outcome done(const std::string& summary) const {
    if (failures_ == 0) return {true, summary};
    std::ostringstream s;
    s << failures_ << " failure(s): " << out_.str() << " [" << summary << "]";
    return {false, s.str()};
  }

 private:
  int failures_ = 0;
  std::ostringstream out_;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome lp_oracle() {
  Check c;
  std::mt19937_64 rng(20240607);
  const auto start = Clock::now();
  int counts[3] = {0, 0, 0};
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const auto dense = oracle::random_lp(rng);
    const auto expected = oracle::solve(dense);
    const auto got = lp::solve_lp(dense.build());
    const auto tag = "lp " + std::to_string(i);
    switch (expected.status) {
      case oracle::Status::kOptimal:
        ++counts[0];
        c.expect(got.status == lp::LpStatus::kOptimal, tag + " not optimal");
        if (got.status == lp::LpStatus::kOptimal) {
          const double err = std::abs(got.objective_value - expected.objective);
          worst = std::max(worst, err);
          c.expect(err <= 1e-6, tag + " objective off by " + fmt("%.3g", err));
        }
        break;
      case oracle::Status::kInfeasible:
        ++counts[1];
        c.expect(got.status == lp::LpStatus::kInfeasible, tag + " should be infeasible");
        break;
      case oracle::Status::kUnbounded:
        ++counts[2];
        c.expect(got.status == lp::LpStatus::kUnbounded, tag + " should be unbounded");
        break;
    }
  }
  const double secs = seconds_since(start);
  c.expect(secs < 5.0, "took " + fmt("%.2f s", secs));
  std::ostringstream s;
  s << "200 LPs (" << counts[0] << " optimal, " << counts[1] << " infeasible, " << counts[2]
    << " unbounded), max objective error " << fmt("%.2g", worst) << ", " << fmt("%.2f s", secs);
  return c.done(s.str());
}

Outcome planner_oracle() {
  Check c;
  std::mt19937_64 rng(4242);
  const auto start = Clock::now();
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const auto ds = oracle::random_tiny_instance(rng);
    const auto result = solve_hybrid(build_problem(ds, ds.default_config));
    const double exact = oracle::exact_optimum(ds, ds.default_config);
    const auto tag = "instance " + std::to_string(i);
    c.expect(result.lp_exact, tag + " relaxation not exact");
    c.expect(result.objective >= result.lp_objective - 1e-6, tag + " below LP bound");
    c.expect(exact >= result.lp_objective - 1e-6, tag + " oracle below LP bound");
    const double gap = (result.objective - exact) / std::max(1.0, exact);
    worst = std::max(worst, gap);
    c.expect(gap <= 0.05, tag + " gap " + fmt("%.4f", gap));
    const auto v = testing_support::plan_violation(ds, ds.default_config, result.production);
    c.expect(v.empty(), tag + " infeasible: " + v);
  }
  const double secs = seconds_since(start);
  c.expect(secs < 60.0, "took " + fmt("%.1f s", secs));
  return c.done("50 instances, worst gap " + fmt("%.4f", worst) + ", " + fmt("%.2f s", secs));
}

Outcome feasibility_suite() {
  Check c;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    GeneratorParams gp;
    gp.products = 100;
    gp.seed = seed;
    const auto ds = generate_dataset(gp);
    const auto p = plan(ds, ds.default_config);
    const auto v = testing_support::plan_violation(ds, ds.default_config, p.production);
    c.expect(v.empty(), "seed " + std::to_string(seed) + ": " + v);
  }
  return c.done("seeds 1-20, 100 products each");
}

double total_delay(const Plan& p) { return p.kpis.totals.delay_rate.value(); }

Outcome scenario_a() {
  Check c;
  const auto ds = testing_support::scenario_dataset();
  const auto base = plan(ds, ds.default_config);
  const auto cfg = apply_edits(ds, ds.default_config, {ScaleCapacity{"F1-assembly", 50.0, 0, 29}});
  const auto more = plan(ds, cfg);
  c.expect(total_delay(more) < total_delay(base), "delay did not drop");
  c.expect(more.kpis.totals.production_cost.value() >= base.kpis.totals.production_cost.value(),
           "production cost fell");
  return c.done("delay " + fmt("%.4f", total_delay(base)) + " -> " + fmt("%.4f", total_delay(more)) +
                ", production cost " + fmt("%.1f", base.kpis.totals.production_cost.value()) + " -> " +
                fmt("%.1f", more.kpis.totals.production_cost.value()));
}

const ProductKpis& kpis_of(const Plan& p, const std::string& id) { return *p.kpis.find(id); }

Outcome scenario_b() {
  Check c;
  const auto ds = testing_support::three_parent_dataset(1000);
  DatasetIndex index(ds);
  const auto base = plan(ds, ds.default_config);
  const auto stocked = apply_edits(ds, ds.default_config, {SetInitialInventory{"common_32", 8000}});
  const auto more = plan(ds, stocked);
  for (const char* id : {"Routers_22", "Service_Router_18"}) {
    for (auto b : more.backlog[index.product(id)]) c.expect(b == 0, std::string(id) + " still delayed");
  }
  const auto banned = index.product("Routers_491");
  c.expect(more.backlog[banned] == base.backlog[banned], "banned parent backlog changed");
  c.expect(kpis_of(more, "Routers_491").delay_rate.value == kpis_of(base, "Routers_491").delay_rate.value,
           "banned parent delay changed");
  const auto freed_cfg = apply_edits(ds, stocked, {RemoveFixedConstraint{"common_32"}});
  const auto freed = plan(ds, freed_cfg);
  for (auto b : freed.backlog[banned]) c.expect(b == 0, "banned parent still delayed after removal");
  c.expect(kpis_of(freed, "Routers_491").delay_rate.value.value() == 0.0, "banned parent delay not zero");
  return c.done("allowed parents delay " + fmt("%.3f", kpis_of(base, "Routers_22").delay_rate.value.value()) +
                " -> 0, banned parent " + fmt("%.3f", kpis_of(more, "Routers_491").delay_rate.value.value()) +
                " -> " + fmt("%.3f", kpis_of(freed, "Routers_491").delay_rate.value.value()));
}

Outcome scenario_c() {
  // Two weekday holidays at the main plant, then the bottleneck set +50%.
  constexpr double kRecoveredShare = 0.5;
  Check c;
  const auto ds = testing_support::scenario_dataset();
  const auto base = plan(ds, ds.default_config);
  const auto hol_cfg = apply_edits(ds, ds.default_config, {ToggleHoliday{"F1", 8}, ToggleHoliday{"F1", 9}});
  const auto hol = plan(ds, hol_cfg);
  const auto rec_cfg = apply_edits(ds, hol_cfg, {ScaleCapacity{"F1-assembly", 50.0, 0, 29}});
  const auto rec = plan(ds, rec_cfg);
  const double rise = total_delay(hol) - total_delay(base);
  const double recovered = total_delay(hol) - total_delay(rec);
  c.expect(rise > 0.0, "holidays did not raise delay");
  c.expect(recovered >= kRecoveredShare * rise, "recovered only " + fmt("%.4f", recovered));
  return c.done("delay " + fmt("%.4f", total_delay(base)) + " -> " + fmt("%.4f", total_delay(hol)) +
                " with holidays -> " + fmt("%.4f", total_delay(rec)) + " with +50% capacity (recovered " +
                fmt("%.0f%%", rise > 0 ? 100.0 * recovered / rise : 0.0) + " of the rise, need 50%)");
}

Outcome performance() {
  Check c;
  const auto ds = generate_dataset({});
  const auto start = Clock::now();
  const auto p = plan(ds, ds.default_config);
  const double secs = seconds_since(start);
  c.expect(secs < 10.0, "took " + fmt("%.2f s", secs));
  const auto v = testing_support::plan_violation(ds, ds.default_config, p.production);
  c.expect(v.empty(), v);
  return c.done(std::to_string(ds.products.size()) + " products, " + std::to_string(ds.factories.size()) +
                " factories, " + fmt("%.2f s", secs));
}

void expect_mirrored(Check& c, const CategoryDelta& x, const CategoryDelta& y, const std::string& tag) {
  c.expect(x.delta == -y.delta && x.increase == y.decrease && x.decrease == y.increase &&
               x.became_unlimited == y.became_finite && x.became_finite == y.became_unlimited &&
               x.unchanged == y.unchanged,
           tag + " config not mirrored");
}

void expect_mirrored(Check& c, const MetricDelta& x, const MetricDelta& y, const std::string& tag) {
  c.expect(x.delta.has_value() == y.delta.has_value() && (!x.delta || *x.delta == -*y.delta) &&
               x.was_sentinel_in_a == y.is_sentinel_in_b && x.is_sentinel_in_b == y.was_sentinel_in_a,
           tag + " metric not mirrored");
}

void expect_zero(Check& c, const PlanDiff& d, const std::string& tag) {
  for (const auto* cat : {&d.config.demand, &d.config.inventory, &d.config.capacity, &d.config.holidays}) {
    c.expect(cat->unchanged && cat->delta == 0.0 && cat->magnitude() == 0.0, tag + " config not zero");
  }
  for (const auto& m : d.kpis) c.expect(!m.delta || *m.delta == 0.0, tag + " kpi not zero");
  for (const auto& pd : d.products) {
    for (const auto& m : pd.delta) c.expect(!m.delta || *m.delta == 0.0, tag + " product not zero");
  }
  for (auto v : d.detail.production) c.expect(v == 0, tag + " production not zero");
  for (std::size_t p = 0; p < d.detail.inventory.size(); ++p) {
    for (std::size_t t = 0; t < d.detail.inventory[p].size(); ++t) {
      c.expect(d.detail.inventory[p][t] == 0 && d.detail.backlog[p][t] == 0, tag + " trajectories not zero");
    }
  }
  for (const auto& s : d.detail.capacity_use) {
    for (auto v : s) c.expect(v == 0.0, tag + " capacity use not zero");
  }
}

Outcome diff_algebra() {
  Check c;
  const auto ds = testing_support::scenario_dataset();
  std::mt19937_64 rng(31337);
  auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };
  const char* finished[] = {"Laptop", "Tablet", "Server"};
  const char* sets[] = {"F1-assembly", "F1-smt", "F2-line", "F2-screens"};
  std::vector<Plan> plans;
  for (int i = 0; i < 15; ++i) {
    std::vector<ConfigEdit> edits;
    const int n = pick(4);
    for (int k = 0; k < n; ++k) {
      switch (pick(5)) {
        case 0: edits.push_back(SetDemandPoint{finished[pick(3)], pick(30), pick(80)}); break;
        case 1: edits.push_back(ScaleCapacity{sets[pick(4)], static_cast<double>(pick(101) - 50), 0, 29}); break;
        case 2: edits.push_back(ToggleHoliday{pick(2) ? "F1" : "F2", pick(30)}); break;
        case 3: edits.push_back(SetInitialInventory{"Glass", pick(3000)}); break;
        default: edits.push_back(SetCapacityPoint{sets[pick(4)], pick(30), std::nullopt}); break;
      }
    }
    plans.push_back(plan(ds, apply_edits(ds, ds.default_config, edits)));
  }
  int pairs = 0;
  for (std::size_t i = 0; i < plans.size() && pairs < 100; ++i) {
    for (std::size_t j = i + 1; j < plans.size() && pairs < 100; ++j, ++pairs) {
      const auto tag = "pair " + std::to_string(i) + "," + std::to_string(j);
      const auto ab = diff_plans(plans[i], plans[j]);
      const auto ba = diff_plans(plans[j], plans[i]);
      expect_mirrored(c, ab.config.demand, ba.config.demand, tag);
      expect_mirrored(c, ab.config.inventory, ba.config.inventory, tag);
      expect_mirrored(c, ab.config.capacity, ba.config.capacity, tag);
      expect_mirrored(c, ab.config.holidays, ba.config.holidays, tag);
      for (std::size_t k = 0; k < ab.kpis.size(); ++k) expect_mirrored(c, ab.kpis[k], ba.kpis[k], tag);
      for (std::size_t p = 0; p < ab.products.size(); ++p) {
        for (std::size_t k = 0; k < 4; ++k) expect_mirrored(c, ab.products[p].delta[k], ba.products[p].delta[k], tag);
      }
      for (std::size_t k = 0; k < ab.detail.production.size(); ++k) {
        c.expect(ab.detail.production[k] == -ba.detail.production[k], tag + " production not mirrored");
      }
      for (std::size_t p = 0; p < ab.detail.inventory.size(); ++p) {
        for (std::size_t t = 0; t < ab.detail.inventory[p].size(); ++t) {
          c.expect(ab.detail.inventory[p][t] == -ba.detail.inventory[p][t] &&
                       ab.detail.backlog[p][t] == -ba.detail.backlog[p][t],
                   tag + " trajectories not mirrored");
        }
      }
      for (std::size_t s = 0; s < ab.detail.capacity_use.size(); ++s) {
        for (std::size_t t = 0; t < ab.detail.capacity_use[s].size(); ++t) {
          c.expect(ab.detail.capacity_use[s][t] == -ba.detail.capacity_use[s][t], tag + " capacity use not mirrored");
        }
      }
      expect_zero(c, diff_plans(plans[i], plans[i]), tag + " self");
    }
  }
  return c.done(std::to_string(pairs) + " pairs from 15 randomly edited plans, exact");
}

Outcome kpi_definitions() {
  Check c;
  // Hand-computed table on a three-level chain over five days:
  //   A: demand 5,5,0,5,5; production 3,5,2,0,0 -> delay .4,.4,NO_DEMAND,1,1.
  //   C: stock 60, consumed 12,30,12,0,0 -> holding .48,.18,.06,.06,.06.
  //   A's production cost at 2 a piece: 6,10,4,0,0.
  auto ds = testing_support::chain_dataset(5);
  auto cfg = ds.default_config;
  cfg.demand.clear();
  cfg.demand["A"] = {5, 5, 0, 5, 5};
  cfg.initial_inventory = {{"B", 2}, {"C", 60}};
  auto prod = Production::for_dataset(ds, 5);
  const std::int64_t xa[] = {3, 5, 2, 0, 0}, xb[] = {4, 10, 4, 0, 0};
  for (int t = 0; t < 5; ++t) {
    prod.at(0, 0, t) = xa[t];
    prod.at(1, 0, t) = xb[t];
  }
  const auto tr = simulate(ds, cfg, prod);
  const auto k = compute_kpis(ds, cfg, prod, tr.inventory, tr.backlog);
  const auto& a = *k.find("A");
  const auto& cc = *k.find("C");
  const double delay[] = {0.4, 0.4, -1.0, 1.0, 1.0};
  const double cost[] = {6, 10, 4, 0, 0};
  const double hold[] = {0.48, 0.18, 0.06, 0.06, 0.06};
  for (std::size_t t = 0; t < 5; ++t) {
    c.expect(std::abs(a.daily_delay_rate[t].raw() - delay[t]) < 1e-12, "delay day " + std::to_string(t));
    c.expect(a.daily_production_cost[t] == cost[t], "production cost day " + std::to_string(t));
    c.expect(std::abs(cc.daily_inventory_cost[t] - hold[t]) < 1e-12, "holding cost day " + std::to_string(t));
  }
  c.expect(std::abs(a.delay_rate.value.value() - 0.7) < 1e-12, "30-day delay rate");

  // Weekly smoothing: two weeks of use 70 then 105 -> |105-70|/70 = 0.5.
  auto flat = testing_support::chain_dataset(14);
  auto fcfg = flat.default_config;
  fcfg.demand.clear();
  fcfg.initial_inventory = {{"B", 1000}, {"C", 0}};
  auto fprod = Production::for_dataset(flat, 14);
  for (int t = 0; t < 14; ++t) fprod.at(0, 0, t) = t < 7 ? 10 : 15;
  const auto ftr = simulate(flat, fcfg, fprod);
  const auto fk = compute_kpis(flat, fcfg, fprod, ftr.inventory, ftr.backlog);
  const auto& wk = fk.capacity_sets[0].weekly_smoothing_rate;
  c.expect(wk.size() == 1 && std::abs(wk[0].value() - 0.5) < 1e-12, "weekly smoothing rate");

  // Cap substitution on the scenario fixture plan.
  const auto sds = testing_support::scenario_dataset();
  const auto sp = plan(sds, sds.default_config);
  IndicatorConfig doubled;
  doubled.infinity_cap *= 2;
  const auto k2 = compute_kpis(sds, sds.default_config, sp.production, sp.inventory, sp.backlog, doubled);
  const double s1 = sp.kpis.totals.smoothing_rate.value();
  const double s2 = k2.totals.smoothing_rate.value();
  const double change = std::abs(s2 - s1) / s1;
  c.expect(change < 0.05, "cap doubling moved smoothing by " + fmt("%.2f%%", 100 * change));
  return c.done("tables exact; cap doubling moves plan smoothing by " + fmt("%.3f%%", 100 * change));
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"lp-oracle", lp_oracle},
      {"planner-oracle", planner_oracle},
      {"feasibility-suite", feasibility_suite},
      {"scenario-a-capacity", scenario_a},
      {"scenario-b-shared-component", scenario_b},
      {"scenario-c-holidays", scenario_c},
      {"performance", performance},
      {"diff-algebra", diff_algebra},
      {"kpi-definitions", kpi_definitions},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
