#include <algorithm>
#include <cmath>
#include <string>

#include "whatif/planner.hpp"

namespace whatif {

namespace {

std::string var_name(char kind, const std::string& a, int t) {
  return std::string(1, kind) + "[" + a + "," + std::to_string(t) + "]";
}

}  // namespace

ObjectiveCoefficients objective_coefficients(const Dataset& dataset, const PlanConfig& config) {
  DatasetIndex index(dataset);
  const std::size_t n = dataset.products.size();
  const std::size_t nf = dataset.factories.size();
  const auto& w = config.objective_weights;

  // Full unit cost: cheapest own cost plus the full cost of every component.
  std::vector<std::size_t> order(n);
  for (std::size_t p = 0; p < n; ++p) order[p] = p;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return index.levels()[a] > index.levels()[b];
  });
  std::vector<double> full(n, 0.0);
  for (auto p : order) {
    double own = 0.0;
    if (!index.is_raw(p) && !index.factories_of(p).empty()) {
      own = lp::kInfinity;
      for (const auto& [f, cost] : index.factories_of(p)) own = std::min(own, cost);
    }
    full[p] = own;
    for (const auto& c : index.children(p)) full[p] += static_cast<double>(c.quantity_per) * full[c.product];
  }
  double cost_ref = 0.0, hold_ref = 0.0, rate_ref = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    cost_ref = std::max(cost_ref, full[p]);
    hold_ref = std::max(hold_ref, dataset.products[p].unit_holding_cost);
  }
  for (const auto& u : dataset.usage_rates) rate_ref = std::max(rate_ref, u.rate);
  if (cost_ref <= 0.0) cost_ref = 1.0;
  if (hold_ref <= 0.0) hold_ref = 1.0;
  if (rate_ref <= 0.0) rate_ref = 1.0;
  const double horizon = std::max(1, config.horizon);
  const double dn = static_cast<double>(std::max<std::size_t>(n, 1));

  ObjectiveCoefficients out;
  out.backlog.resize(n);
  out.holding.resize(n);
  out.production.assign(n, std::vector<double>(nf, 0.0));
  for (std::size_t p = 0; p < n; ++p) {
    const double prio = (dn - dataset.products[p].priority + 1.0) / dn;
    out.backlog[p] = w.delay * 5.0 * dn * prio;
    out.holding[p] = w.inventory * dataset.products[p].unit_holding_cost / (hold_ref * horizon);
    for (const auto& [f, cost] : index.factories_of(p)) {
      out.production[p][f] = w.production * cost / cost_ref;
    }
  }
  out.smoothing = w.smoothing / rate_ref;
  return out;
}

double evaluate_objective(const Dataset& dataset, const PlanConfig& config,
                          const Production& production, const Trajectories& trajectories) {
  const auto coef = objective_coefficients(dataset, config);
  const int h = config.horizon;
  double total = 0.0;
  for (std::size_t p = 0; p < dataset.products.size(); ++p) {
    for (int t = 0; t < h; ++t) {
      const auto ut = static_cast<std::size_t>(t);
      total += coef.backlog[p] * static_cast<double>(trajectories.backlog[p][ut]);
      total += coef.holding[p] * static_cast<double>(trajectories.inventory[p][ut]);
      for (std::size_t f = 0; f < production.num_factories(); ++f) {
        total += coef.production[p][f] * static_cast<double>(production.at(p, f, t));
      }
    }
  }
  const WeekBuckets weeks(h, IndicatorConfig{}.week_length);
  for (const auto& daily : capacity_use(dataset, production)) {
    const auto u = weeks.totals(daily);
    for (std::size_t k = 1; k < u.size(); ++k) total += coef.smoothing * std::abs(u[k] - u[k - 1]);
  }
  return total;
}

PlanningProblem build_problem(const Dataset& dataset, const PlanConfig& config) {
  const auto report = validate_config(dataset, config);
  if (!report.ok()) {
    std::string msg = "invalid plan config:";
    for (const auto& v : report.violations) msg += "\n  " + v.message;
    throw PlanningError(PlanningError::Kind::kInvalidConfig, msg);
  }

  DatasetIndex index(dataset);
  PlanningProblem pb;
  pb.dataset = &dataset;
  pb.config = config;
  pb.horizon = config.horizon;
  pb.num_products = dataset.products.size();
  pb.num_factories = dataset.factories.size();
  pb.num_capacity_sets = dataset.capacity_sets.size();
  pb.coefficients = objective_coefficients(dataset, config);
  const int h = pb.horizon;
  const auto uh = static_cast<std::size_t>(h);
  const WeekBuckets weeks(h, IndicatorConfig{}.week_length);
  const int nw = weeks.count();
  pb.num_weeks = nw;
  const std::size_t n = pb.num_products, nf = pb.num_factories, ncs = pb.num_capacity_sets;
  const bool named = n <= 200;
  auto& lp = pb.lp;

  // Effective capacity.
  pb.capacity.assign(ncs * uh, lp::kInfinity);
  for (std::size_t cs = 0; cs < ncs; ++cs) {
    const auto& ds_set = dataset.capacity_sets[cs];
    const CapacitySet* set = config.find_capacity_set(ds_set.id);
    if (!set) set = &ds_set;
    for (int t = 0; t < h; ++t) {
      const auto& v = set->daily_capacity[static_cast<std::size_t>(t)];
      if (config.is_holiday(ds_set.factory, t)) {
        pb.capacity[pb.ct(cs, t)] = 0.0;
      } else if (v) {
        pb.capacity[pb.ct(cs, t)] = *v;
      }
    }
  }

  // Fixed-component bans: a parent outside the allowed set may not be made.
  std::vector<bool> banned(n, false);
  for (const auto& fc : dataset.fixed_component_constraints) {
    if (config.disabled_fixed_components.count(fc.component)) continue;
    const auto c = index.product(fc.component);
    for (const auto& parent : index.parents(c)) {
      if (!fc.allowed_parents.count(dataset.products[parent.product].id)) banned[parent.product] = true;
    }
  }

  // Variables.
  pb.x.assign(n * nf * uh, -1);
  pb.allowed.assign(n * nf * uh, 0);
  for (std::size_t p = 0; p < n; ++p) {
    if (index.is_raw(p)) continue;
    for (const auto& [f, cost] : index.factories_of(p)) {
      const auto& fid = dataset.factories[f].id;
      for (int t = 0; t < h; ++t) {
        const bool ok = !banned[p] && !config.is_holiday(fid, t);
        pb.allowed[pb.xi(p, f, t)] = ok;
        pb.x[pb.xi(p, f, t)] = lp.add_variable(
            pb.coefficients.production[p][f], 0.0, ok ? lp::kInfinity : 0.0,
            named ? "x[" + dataset.products[p].id + "," + fid + "," + std::to_string(t) + "]"
                  : std::string{});
      }
    }
  }
  pb.inventory.assign(n * uh, -1);
  pb.backlog.assign(n * uh, -1);
  for (std::size_t p = 0; p < n; ++p) {
    const auto& id = dataset.products[p].id;
    // Backlog never exceeds the demand due so far. The bound matters for
    // components: without it the LP could hold stock and backlog at once
    // and feed parents from stock it does not have.
    double due = 0.0;
    for (int t = 0; t < h; ++t) {
      due += static_cast<double>(config.demand_at(id, t));
      pb.inventory[pb.pt(p, t)] = lp.add_variable(pb.coefficients.holding[p], 0.0, lp::kInfinity,
                                                  named ? var_name('I', id, t) : std::string{});
      pb.backlog[pb.pt(p, t)] = lp.add_variable(pb.coefficients.backlog[p], 0.0, due,
                                                named ? var_name('B', id, t) : std::string{});
    }
  }

  // Initial stock may be written off in the relaxation. Integer plans never
  // do, but it keeps the LP optimum monotone in initial inventory.
  pb.disposal.assign(n, -1);
  for (std::size_t p = 0; p < n; ++p) {
    const auto init = config.initial_inventory_of(dataset.products[p].id);
    if (init > 0 && h > 0) {
      pb.disposal[p] = lp.add_variable(0.0, 0.0, static_cast<double>(init),
                                       named ? "z[" + dataset.products[p].id + "]" : std::string{});
    }
  }

  // Balance and availability rows.
  pb.balance_rows.assign(n * uh, -1);
  pb.availability_rows.assign(n * uh, -1);
  std::vector<lp::Entry> row;
  for (std::size_t p = 0; p < n; ++p) {
    const auto& id = dataset.products[p].id;
    const double init = static_cast<double>(config.initial_inventory_of(id));
    for (int t = 0; t < h; ++t) {
      row.clear();
      row.push_back({pb.inventory[pb.pt(p, t)], 1.0});
      row.push_back({pb.backlog[pb.pt(p, t)], -1.0});
      if (t > 0) {
        row.push_back({pb.inventory[pb.pt(p, t - 1)], -1.0});
        row.push_back({pb.backlog[pb.pt(p, t - 1)], 1.0});
      }
      if (t == 0 && pb.disposal[p] >= 0) row.push_back({pb.disposal[p], 1.0});
      for (std::size_t f = 0; f < nf; ++f) {
        if (pb.x[pb.xi(p, f, t)] >= 0) row.push_back({pb.x[pb.xi(p, f, t)], -1.0});
      }
      bool has_parent_columns = false;
      for (const auto& parent : index.parents(p)) {
        for (std::size_t f = 0; f < nf; ++f) {
          const int col = pb.x[pb.xi(parent.product, f, t)];
          if (col < 0) continue;
          row.push_back({col, static_cast<double>(parent.quantity_per)});
          has_parent_columns = true;
        }
      }
      const double rhs = -static_cast<double>(config.demand_at(id, t)) + (t == 0 ? init : 0.0);
      pb.balance_rows[pb.pt(p, t)] = lp.add_row(row, lp::Sense::kEqual, rhs,
                                                named ? var_name('b', id, t) : std::string{});
      if (!has_parent_columns) continue;

      // Components are consumed before demand is served:
      //   consumption - production - I[t-1] (+ z at t = 0) <= I0 (t = 0) or 0.
      // That is the balance row without I[t], B[t] and B[t-1].
      std::vector<lp::Entry> avail;
      for (std::size_t k = 2; k < row.size(); ++k) {
        if (t > 0 && k == 3) continue;
        avail.push_back(row[k]);
      }
      pb.availability_rows[pb.pt(p, t)] =
          lp.add_row(avail, lp::Sense::kLessEqual, t == 0 ? init : 0.0,
                     named ? var_name('a', id, t) : std::string{});
    }
  }

  // Capacity rows.
  pb.capacity_rows.assign(ncs * uh, -1);
  std::vector<std::vector<std::pair<std::size_t, double>>> set_users(ncs);
  for (std::size_t p = 0; p < n; ++p) {
    for (const auto& u : index.usages(p)) {
      if (h > 0 && pb.x[pb.xi(p, index.factory_of_set(u.capacity_set), 0)] >= 0) {
        set_users[u.capacity_set].emplace_back(p, u.rate);
      }
    }
  }
  for (std::size_t cs = 0; cs < ncs; ++cs) {
    if (set_users[cs].empty()) continue;
    const auto f = index.factory_of_set(cs);
    for (int t = 0; t < h; ++t) {
      const double cap = pb.capacity[pb.ct(cs, t)];
      if (std::isinf(cap)) continue;
      row.clear();
      for (const auto& [p, rate] : set_users[cs]) row.push_back({pb.x[pb.xi(p, f, t)], rate});
      pb.capacity_rows[pb.ct(cs, t)] = lp.add_row(
          row, lp::Sense::kLessEqual, cap,
          named ? var_name('c', dataset.capacity_sets[cs].id, t) : std::string{});
    }
  }

  // Smoothing: s+ - s- = U[w] - U[w-1] on scaled weekly use.
  const auto uw = static_cast<std::size_t>(nw);
  pb.smooth_plus.assign(ncs * uw, -1);
  pb.smooth_minus.assign(ncs * uw, -1);
  pb.smoothing_rows.assign(ncs * uw, -1);
  for (std::size_t cs = 0; cs < ncs; ++cs) {
    if (set_users[cs].empty()) continue;
    const auto f = index.factory_of_set(cs);
    const auto& sid = dataset.capacity_sets[cs].id;
    for (int w = 1; w < nw; ++w) {
      const auto k = cs * uw + static_cast<std::size_t>(w);
      pb.smooth_plus[k] = lp.add_variable(pb.coefficients.smoothing, 0.0, lp::kInfinity,
                                          named ? var_name('+', sid, w) : std::string{});
      pb.smooth_minus[k] = lp.add_variable(pb.coefficients.smoothing, 0.0, lp::kInfinity,
                                           named ? var_name('-', sid, w) : std::string{});
      row.clear();
      row.push_back({pb.smooth_plus[k], 1.0});
      row.push_back({pb.smooth_minus[k], -1.0});
      for (int b : {w, w - 1}) {
        const double sign = b == w ? -1.0 : 1.0;
        for (int t = weeks.first_day(b); t < weeks.end_day(b); ++t) {
          for (const auto& [p, rate] : set_users[cs]) {
            row.push_back({pb.x[pb.xi(p, f, t)], sign * weeks.scale(b) * rate});
          }
        }
      }
      pb.smoothing_rows[k] = lp.add_row(row, lp::Sense::kEqual, 0.0,
                                        named ? var_name('s', sid, w) : std::string{});
    }
  }
  return pb;
}

}  // namespace whatif
