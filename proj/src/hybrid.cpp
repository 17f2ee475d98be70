#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>

#include "whatif/planner.hpp"

namespace whatif {

namespace {

using Clock = std::chrono::steady_clock;
constexpr std::int64_t kUnbounded = std::numeric_limits<std::int64_t>::max() / 4;
constexpr double kCapacityGuard = 1e-9;

void check_deadline(const HybridParams& params) {
  if (params.deadline && Clock::now() > *params.deadline) {
    throw PlanningError(PlanningError::Kind::kTimeout, "planning exceeded its time limit");
  }
}

lp::LpSolution run_lp(const lp::LinearProgram& program, const HybridParams& params) {
  auto opts = params.lp_options;
  if (params.deadline && !opts.deadline) opts.deadline = params.deadline;
  try {
    return lp::solve_lp(program, opts);
  } catch (const lp::DeadlineExceeded&) {
    throw PlanningError(PlanningError::Kind::kTimeout, "planning exceeded its time limit");
  }
}

[[noreturn]] void fail_status(lp::LpStatus status) {
  if (status == lp::LpStatus::kInfeasible) {
    throw PlanningError(PlanningError::Kind::kInfeasible,
                        "the planning LP is infeasible; the config contains contradictory "
                        "constraints");
  }
  throw PlanningError(PlanningError::Kind::kUnbounded,
                      "the planning LP is unbounded; this indicates a modelling error");
}

struct Relaxation {
  std::vector<double> x;  // indexed like PlanningProblem::x
  double objective = 0.0;
  std::int64_t iterations = 0;
  lp::LpStatus status = lp::LpStatus::kOptimal;
  bool exact = true;
};

std::vector<std::size_t> by_priority(const Dataset& ds) {
  std::vector<std::size_t> order(ds.products.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ds.products[a].priority != ds.products[b].priority
               ? ds.products[a].priority < ds.products[b].priority
               : ds.products[a].id < ds.products[b].id;
  });
  return order;
}

// One small LP per product, parents before children. Each sees its parents'
// relaxed production as dependent demand, the capacity left by products
// already planned, and the raw stock not yet committed.
Relaxation solve_decomposed(const PlanningProblem& pb, const HybridParams& params) {
  const Dataset& ds = *pb.dataset;
  DatasetIndex index(ds);
  const int h = pb.horizon;
  const auto uh = static_cast<std::size_t>(h);
  const std::size_t n = pb.num_products, nf = pb.num_factories, ncs = pb.num_capacity_sets;
  const WeekBuckets weeks(h, IndicatorConfig{}.week_length);
  const int nw = weeks.count();
  const auto& coef = pb.coefficients;

  auto priority_rank = by_priority(ds);
  std::vector<std::size_t> rank_of(n);
  for (std::size_t i = 0; i < n; ++i) rank_of[priority_rank[i]] = i;
  std::vector<std::size_t> order;
  for (std::size_t p = 0; p < n; ++p) {
    if (!index.is_raw(p)) order.push_back(p);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const int la = index.levels()[a], lb = index.levels()[b];
    return la != lb ? la < lb : rank_of[a] < rank_of[b];
  });

  Relaxation out;
  out.exact = false;
  out.x.assign(pb.x.size(), 0.0);
  std::vector<double> residual = pb.capacity;
  std::vector<double> set_use(ncs * uh, 0.0);
  std::vector<double> raw_used(n * uh, 0.0);

  for (auto p : order) {
    check_deadline(params);
    const auto& id = ds.products[p].id;
    lp::LinearProgram sub;
    const auto& producers = index.factories_of(p);
    if (producers.empty()) continue;

    std::vector<double> dependent(uh, 0.0);
    double backlog_weight = coef.backlog[p];
    for (const auto& parent : index.parents(p)) {
      backlog_weight = std::max(backlog_weight, coef.backlog[parent.product]);
      for (std::size_t f = 0; f < nf; ++f) {
        for (int t = 0; t < h; ++t) {
          dependent[static_cast<std::size_t>(t)] +=
              static_cast<double>(parent.quantity_per) * out.x[pb.xi(parent.product, f, t)];
        }
      }
    }
    double total_need = 0.0;
    for (int t = 0; t < h; ++t) {
      total_need += dependent[static_cast<std::size_t>(t)] +
                    static_cast<double>(pb.config.demand_at(id, t));
    }
    if (total_need <= 0.0) continue;

    // xcol[k][t] for producers[k].
    std::vector<std::vector<int>> xcol(producers.size(), std::vector<int>(uh));
    for (std::size_t k = 0; k < producers.size(); ++k) {
      const auto f = producers[k].first;
      for (int t = 0; t < h; ++t) {
        const bool ok = pb.allowed[pb.xi(p, f, t)];
        xcol[k][static_cast<std::size_t>(t)] =
            sub.add_variable(coef.production[p][f], 0.0, ok ? lp::kInfinity : 0.0);
      }
    }
    std::vector<int> icol(uh), bcol(uh);
    for (std::size_t t = 0; t < uh; ++t) {
      icol[t] = sub.add_variable(coef.holding[p]);
      bcol[t] = sub.add_variable(backlog_weight);
    }
    std::vector<lp::Entry> row;
    const double init = static_cast<double>(pb.config.initial_inventory_of(id));
    for (int t = 0; t < h; ++t) {
      const auto ut = static_cast<std::size_t>(t);
      row.clear();
      row.push_back({icol[ut], 1.0});
      row.push_back({bcol[ut], -1.0});
      if (t > 0) {
        row.push_back({icol[ut - 1], -1.0});
        row.push_back({bcol[ut - 1], 1.0});
      }
      for (const auto& cols : xcol) row.push_back({cols[ut], -1.0});
      sub.add_row(row, lp::Sense::kEqual,
                  -static_cast<double>(pb.config.demand_at(id, t)) - dependent[ut] +
                      (t == 0 ? init : 0.0));
    }

    struct SetTerm {
      std::size_t cs;
      std::size_t k;
      double rate;
    };
    std::vector<SetTerm> terms;
    for (const auto& u : index.usages(p)) {
      const auto f = index.factory_of_set(u.capacity_set);
      for (std::size_t k = 0; k < producers.size(); ++k) {
        if (producers[k].first == f) terms.push_back({u.capacity_set, k, u.rate});
      }
    }
    for (const auto& term : terms) {
      for (int t = 0; t < h; ++t) {
        const double cap = residual[pb.ct(term.cs, t)];
        if (std::isinf(cap)) continue;
        sub.add_row({{xcol[term.k][static_cast<std::size_t>(t)], term.rate}}, lp::Sense::kLessEqual,
                    std::max(0.0, cap));
      }
    }

    for (const auto& child : index.children(p)) {
      if (!index.is_raw(child.product)) continue;
      const double stock =
          static_cast<double>(pb.config.initial_inventory_of(ds.products[child.product].id));
      double committed = 0.0;
      for (int t = 0; t < h; ++t) {
        committed += raw_used[pb.pt(child.product, t)];
        row.clear();
        for (int tau = 0; tau <= t; ++tau) {
          for (const auto& cols : xcol) {
            row.push_back({cols[static_cast<std::size_t>(tau)],
                           static_cast<double>(child.quantity_per)});
          }
        }
        sub.add_row(row, lp::Sense::kLessEqual, std::max(0.0, stock - committed));
      }
    }

    if (coef.smoothing > 0.0) {
      for (const auto& term : terms) {
        std::vector<double> other(uh);
        for (std::size_t t = 0; t < uh; ++t) other[t] = set_use[pb.ct(term.cs, static_cast<int>(t))];
        const auto weekly = weeks.totals(other);
        for (int w = 1; w < nw; ++w) {
          row.clear();
          row.push_back({sub.add_variable(coef.smoothing), 1.0});
          row.push_back({sub.add_variable(coef.smoothing), -1.0});
          for (int b : {w, w - 1}) {
            const double sign = b == w ? -1.0 : 1.0;
            for (int t = weeks.first_day(b); t < weeks.end_day(b); ++t) {
              row.push_back({xcol[term.k][static_cast<std::size_t>(t)],
                             sign * weeks.scale(b) * term.rate});
            }
          }
          sub.add_row(row, lp::Sense::kEqual,
                      weekly[static_cast<std::size_t>(w)] - weekly[static_cast<std::size_t>(w - 1)]);
        }
      }
    }

    const auto sol = run_lp(sub, params);
    out.iterations += sol.iterations;
    if (sol.status == lp::LpStatus::kUnbounded) fail_status(sol.status);
    if (sol.status != lp::LpStatus::kOptimal) {
      out.status = sol.status;
      continue;
    }
    out.objective += sol.objective_value;
    for (std::size_t k = 0; k < producers.size(); ++k) {
      const auto f = producers[k].first;
      for (int t = 0; t < h; ++t) {
        const double v = std::max(0.0, sol.x[static_cast<std::size_t>(xcol[k][static_cast<std::size_t>(t)])]);
        out.x[pb.xi(p, f, t)] = v;
      }
    }
    for (const auto& term : terms) {
      const auto f = producers[term.k].first;
      for (int t = 0; t < h; ++t) {
        const double used = term.rate * out.x[pb.xi(p, f, t)];
        residual[pb.ct(term.cs, t)] -= used;
        set_use[pb.ct(term.cs, t)] += used;
      }
    }
    for (const auto& child : index.children(p)) {
      if (!index.is_raw(child.product)) continue;
      for (std::size_t f = 0; f < nf; ++f) {
        for (int t = 0; t < h; ++t) {
          raw_used[pb.pt(child.product, t)] +=
              static_cast<double>(child.quantity_per) * out.x[pb.xi(p, f, t)];
        }
      }
    }
  }
  return out;
}

Relaxation solve_monolithic(const PlanningProblem& pb, const HybridParams& params) {
  const auto sol = run_lp(pb.lp, params);
  Relaxation out;
  out.status = sol.status;
  out.iterations = sol.iterations;
  if (sol.status != lp::LpStatus::kOptimal) return out;
  out.objective = sol.objective_value;
  out.x.assign(pb.x.size(), 0.0);
  for (std::size_t i = 0; i < pb.x.size(); ++i) {
    if (pb.x[i] >= 0) out.x[i] = sol.x[static_cast<std::size_t>(pb.x[i])];
  }
  return out;
}

// Integer production state with incrementally maintained consumption,
// capacity use and per-product trajectories.
class Repair {
 public:
  Repair(const PlanningProblem& pb, const HybridParams& params)
      : pb_(pb),
        params_(params),
        ds_(*pb.dataset),
        index_(ds_),
        h_(pb.horizon),
        n_(pb.num_products),
        nf_(pb.num_factories),
        x_(Production::for_dataset(ds_, pb.horizon)) {
    const auto cells = n_ * static_cast<std::size_t>(h_);
    prod_.assign(cells, 0);
    cons_.assign(cells, 0);
    avail_.assign(cells, 0);
    stock_.assign(cells, 0);
    owed_.assign(cells, 0);
    demand_.assign(cells, 0);
    init_.assign(n_, 0);
    for (std::size_t p = 0; p < n_; ++p) {
      init_[p] = pb.config.initial_inventory_of(ds_.products[p].id);
      for (int t = 0; t < h_; ++t) demand_[pb.pt(p, t)] = pb.config.demand_at(ds_.products[p].id, t);
    }
    use_.assign(pb.num_capacity_sets * static_cast<std::size_t>(h_), 0.0);
    set_usage_.resize(n_ * nf_);
    for (std::size_t p = 0; p < n_; ++p) {
      for (const auto& u : index_.usages(p)) {
        set_usage_[p * nf_ + index_.factory_of_set(u.capacity_set)].push_back(u);
      }
    }
    priority_ = by_priority(ds_);
    producers_.resize(n_);
    for (std::size_t p = 0; p < n_; ++p) {
      if (index_.is_raw(p)) continue;
      auto fs = index_.factories_of(p);
      std::stable_sort(fs.begin(), fs.end(),
                       [](const auto& a, const auto& b) { return a.second < b.second; });
      for (const auto& [f, cost] : fs) producers_[p].push_back(f);
    }
    memo_version_.assign(n_, -1);
    memo_net_.assign(n_, 0);
    pot_version_.assign(n_, -1);
    pot_.assign(n_, 0);
  }

  void load(const std::vector<double>& relaxed) {
    for (std::size_t p = 0; p < n_; ++p) {
      for (auto f : producers_[p]) {
        for (int t = 0; t < h_; ++t) {
          const auto i = pb_.xi(p, f, t);
          if (!pb_.allowed[i]) continue;
          const double v = relaxed.empty() ? 0.0 : relaxed[i];
          const auto q = static_cast<std::int64_t>(std::floor(std::max(0.0, v) + 1e-6));
          if (q > 0) change(p, f, t, q);
        }
      }
    }
  }

  // Cut production until every finite capacity and every component balance
  // holds. Lowest-priority products give way first.
  void restore() {
    const auto ncs = pb_.num_capacity_sets;
    for (std::size_t cs = 0; cs < ncs; ++cs) {
      const auto f = index_.factory_of_set(cs);
      for (int t = 0; t < h_; ++t) {
        const double cap = pb_.capacity[pb_.ct(cs, t)];
        if (std::isinf(cap)) continue;
        for (auto it = priority_.rbegin(); it != priority_.rend() && over(cs, t); ++it) {
          const auto p = *it;
          for (const auto& u : set_usage_[p * nf_ + f]) {
            if (u.capacity_set != cs) continue;
            const auto have = x_.at(p, f, t);
            if (have == 0) continue;
            const double excess = use_[pb_.ct(cs, t)] - cap;
            const auto cut = std::min<std::int64_t>(
                have, static_cast<std::int64_t>(std::ceil(excess / u.rate - kCapacityGuard)));
            if (cut > 0) change(p, f, t, -cut);
          }
        }
      }
    }

    std::vector<std::size_t> deepest(n_);
    std::iota(deepest.begin(), deepest.end(), 0);
    std::stable_sort(deepest.begin(), deepest.end(), [&](std::size_t a, std::size_t b) {
      return index_.levels()[a] > index_.levels()[b];
    });
    std::vector<std::int64_t> stock = init_, owed(n_, 0);
    for (int t = 0; t < h_; ++t) {
      for (auto c : deepest) {
        std::int64_t excess = cons_[pb_.pt(c, t)] - (stock[c] + prod_[pb_.pt(c, t)]);
        if (excess <= 0) continue;
        auto parents = index_.parents(c);
        std::stable_sort(parents.begin(), parents.end(), [&](const auto& a, const auto& b) {
          return ds_.products[a.product].priority > ds_.products[b.product].priority;
        });
        for (const auto& parent : parents) {
          const auto& fs = producers_[parent.product];
          for (auto it = fs.rbegin(); it != fs.rend() && excess > 0; ++it) {
            const auto have = x_.at(parent.product, *it, t);
            const auto cut = std::min(have, (excess + parent.quantity_per - 1) / parent.quantity_per);
            if (cut <= 0) continue;
            change(parent.product, *it, t, -cut);
            excess -= cut * parent.quantity_per;
          }
          if (excess <= 0) break;
        }
      }
      for (std::size_t p = 0; p < n_; ++p) {
        const auto a = stock[p] + prod_[pb_.pt(p, t)] - cons_[pb_.pt(p, t)];
        const auto due = owed[p] + demand_[pb_.pt(p, t)];
        const auto served = std::min(a, due);
        stock[p] = a - served;
        owed[p] = due - served;
      }
    }
    for (std::size_t p = 0; p < n_; ++p) resim(p);
  }

  // One chronological pass of greedy increases. Returns whether anything
  // changed.
  bool repair_pass() {
    bool changed = false;
    const auto lot = params_.lot_increment;
    for (int t = 0; t < h_; ++t) {
      check_deadline(params_);
      for (int sweep = 0; sweep < 64; ++sweep) {
        bool changed_today = false;
        for (auto p : priority_) {
          if (producers_[p].empty()) continue;
          std::int64_t need = net(p, t);
          for (auto f : producers_[p]) {
            if (need <= 0) break;
            if (!pb_.allowed[pb_.xi(p, f, t)]) continue;
            std::int64_t k = (need + lot - 1) / lot * lot;
            for (const auto& u : set_usage_[p * nf_ + f]) {
              const double cap = pb_.capacity[pb_.ct(u.capacity_set, t)];
              if (std::isinf(cap)) continue;
              const double room = cap - use_[pb_.ct(u.capacity_set, t)];
              k = std::min(k, static_cast<std::int64_t>(std::floor(room / u.rate + kCapacityGuard)));
            }
            for (const auto& child : index_.children(p)) {
              std::int64_t spare = kUnbounded;
              for (int tau = t; tau < h_; ++tau) spare = std::min(spare, avail_[pb_.pt(child.product, tau)]);
              k = std::min(k, spare / child.quantity_per);
            }
            k = k / lot * lot;
            if (k <= 0) continue;
            change(p, f, t, k);
            resim(p);
            for (const auto& child : index_.children(p)) resim(child.product);
            ++version_;
            need -= k;
            changed = changed_today = true;
          }
        }
        if (!changed_today) break;
      }
    }
    return changed;
  }

  // Local search over single-cell moves: add or remove a lot, shift a lot
  // to a neighbouring day or another factory, or trade capacity with a
  // product sharing the set. A move is kept only if it lowers the
  // objective and keeps capacity and material feasible.
  void improve(int passes, Clock::time_point soft_stop) {
    traj_cost_.assign(n_, 0.0);
    for (std::size_t p = 0; p < n_; ++p) resim(p);
    const auto ncs = pb_.num_capacity_sets;
    set_cost_.assign(ncs, 0.0);
    for (std::size_t cs = 0; cs < ncs; ++cs) set_cost_[cs] = smoothing_cost(cs);
    sharing_.assign(ncs, {});
    for (std::size_t p = 0; p < n_; ++p) {
      for (std::size_t f = 0; f < nf_; ++f) {
        for (const auto& u : set_usage_[p * nf_ + f]) sharing_[u.capacity_set].push_back(p);
      }
    }
    const auto lot = params_.lot_increment;
    for (int pass = 0; pass < passes; ++pass) {
      bool improved = false;
      for (auto p : priority_) {
        check_deadline(params_);
        if (Clock::now() > soft_stop) return;
        for (auto f : producers_[p]) {
          for (int t = 0; t < h_; ++t) {
            if (!pb_.allowed[pb_.xi(p, f, t)] && x_.at(p, f, t) == 0) continue;
            improved |= improve_cell(p, f, t, lot, true);
            journal_.clear();
          }
        }
      }
      if (!improved) break;
    }
  }

  Production take() { return std::move(x_); }

 private:
  struct Move {
    std::size_t p, f;
    int t;
    std::int64_t k;
  };

  bool improve_cell(std::size_t p, std::size_t f, int t, std::int64_t lot, bool chains) {
    if (pb_.allowed[pb_.xi(p, f, t)]) {
      if (attempt({{p, f, t, lot}})) return true;
      if (with_components(p, f, t, lot)) return true;
      if (chains && blocked(p, f, t, lot)) {
        for (const auto& u : set_usage_[p * nf_ + f]) {
          for (auto q : sharing_[u.capacity_set]) {
            if (q == p || x_.at(q, f, t) == 0) continue;
            const double need = use_[pb_.ct(u.capacity_set, t)] + u.rate * static_cast<double>(lot) -
                                 pb_.capacity[pb_.ct(u.capacity_set, t)];
            double rq = 0.0;
            for (const auto& v : set_usage_[q * nf_ + f]) {
              if (v.capacity_set == u.capacity_set) rq = v.rate;
            }
            if (rq <= 0.0) continue;
            auto m = static_cast<std::int64_t>(std::ceil(need / rq - kCapacityGuard));
            m = std::max<std::int64_t>(lot, (m + lot - 1) / lot * lot);
            if (m > x_.at(q, f, t)) continue;
            if (chain({{q, f, t, -m}, {p, f, t, lot}}, p, q)) return true;
          }
        }
      }
    }
    if (x_.at(p, f, t) < lot) return false;
    if (attempt({{p, f, t, -lot}})) return true;
    for (int dt : {-1, 1}) {
      const int u = t + dt;
      if (u < 0 || u >= h_ || !pb_.allowed[pb_.xi(p, f, u)]) continue;
      if (attempt({{p, f, t, -lot}, {p, f, u, lot}})) return true;
    }
    for (auto g : producers_[p]) {
      if (g == f || !pb_.allowed[pb_.xi(p, g, t)]) continue;
      if (attempt({{p, f, t, -lot}, {p, g, t, lot}})) return true;
    }
    return false;
  }

  // Adds a lot of p together with the components it consumes, made on the
  // same day or the day before.
  bool with_components(std::size_t p, std::size_t f, int t, std::int64_t lot) {
    for (int lead : {0, 1}) {
      if (t - lead < 0) break;
      std::vector<Move> moves{{p, f, t, lot}};
      bool ok = true;
      for (const auto& c : index_.children(p)) {
        if (index_.is_raw(c.product)) continue;
        bool placed = false;
        for (auto g : producers_[c.product]) {
          if (pb_.allowed[pb_.xi(c.product, g, t - lead)]) {
            moves.push_back({c.product, g, t - lead, c.quantity_per * lot});
            placed = true;
            break;
          }
        }
        ok = ok && placed;
      }
      if (ok && moves.size() > 1 && attempt(moves)) return true;
    }
    return false;
  }

  // Forces an exchange of capacity between p and q, then lets single moves
  // on both products settle. Kept only if the whole chain pays off.
  bool chain(const std::vector<Move>& exchange, std::size_t p, std::size_t q) {
    const auto mark = journal_.size();
    const double start = total_;
    if (!attempt(exchange, true)) return false;
    for (int round = 0; round < 4; ++round) {
      bool moved = false;
      for (auto r : {p, q}) {
        for (auto f : producers_[r]) {
          for (int t = 0; t < h_; ++t) moved |= improve_cell(r, f, t, params_.lot_increment, false);
        }
      }
      if (!moved) break;
    }
    if (total_ < start - 1e-9) return true;
    undo(mark);
    total_ = start;
    return false;
  }

  void undo(std::size_t mark) {
    std::vector<std::size_t> products, sets;
    while (journal_.size() > mark) {
      const auto m = journal_.back();
      journal_.pop_back();
      change(m.p, m.f, m.t, -m.k);
      products.push_back(m.p);
      for (const auto& c : index_.children(m.p)) products.push_back(c.product);
      for (const auto& u : set_usage_[m.p * nf_ + m.f]) sets.push_back(u.capacity_set);
    }
    std::sort(products.begin(), products.end());
    products.erase(std::unique(products.begin(), products.end()), products.end());
    std::sort(sets.begin(), sets.end());
    sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
    for (auto r : products) resim(r);
    for (auto cs : sets) set_cost_[cs] = smoothing_cost(cs);
  }

  bool blocked(std::size_t p, std::size_t f, int t, std::int64_t k) const {
    for (const auto& u : set_usage_[p * nf_ + f]) {
      const auto i = pb_.ct(u.capacity_set, t);
      if (use_[i] + u.rate * static_cast<double>(k) > pb_.capacity[i] + kCapacityGuard) return true;
    }
    return false;
  }

  // Applies the moves, keeps them if feasible and strictly better.
  bool attempt(const std::vector<Move>& moves, bool force = false) {
    touched_products_.clear();
    touched_sets_.clear();
    for (const auto& m : moves) {
      if (x_.at(m.p, m.f, m.t) + m.k < 0) return false;
      touched_products_.push_back(m.p);
      for (const auto& c : index_.children(m.p)) touched_products_.push_back(c.product);
      for (const auto& u : set_usage_[m.p * nf_ + m.f]) touched_sets_.push_back(u.capacity_set);
    }
    std::sort(touched_products_.begin(), touched_products_.end());
    touched_products_.erase(std::unique(touched_products_.begin(), touched_products_.end()),
                            touched_products_.end());
    std::sort(touched_sets_.begin(), touched_sets_.end());
    touched_sets_.erase(std::unique(touched_sets_.begin(), touched_sets_.end()), touched_sets_.end());

    double before = 0.0, after = 0.0;
    for (auto q : touched_products_) before += traj_cost_[q];
    for (auto cs : touched_sets_) before += set_cost_[cs];
    for (const auto& m : moves) {
      change(m.p, m.f, m.t, m.k);
      after += pb_.coefficients.production[m.p][m.f] * static_cast<double>(m.k);
    }
    bool ok = true;
    for (const auto& m : moves) {
      for (const auto& u : set_usage_[m.p * nf_ + m.f]) ok = ok && !over(u.capacity_set, m.t);
    }
    if (ok) {
      for (auto q : touched_products_) {
        resim(q);
        after += traj_cost_[q];
        for (int t = 0; t < h_ && ok; ++t) ok = avail_[pb_.pt(q, t)] >= 0;
        if (!ok) break;
      }
    }
    std::vector<double> new_set_cost;
    if (ok) {
      for (auto cs : touched_sets_) {
        new_set_cost.push_back(smoothing_cost(cs));
        after += new_set_cost.back();
      }
    }
    if (ok && (force || after < before - 1e-9)) {
      for (std::size_t i = 0; i < touched_sets_.size(); ++i) set_cost_[touched_sets_[i]] = new_set_cost[i];
      total_ += after - before;
      journal_.insert(journal_.end(), moves.begin(), moves.end());
      return true;
    }
    for (auto it = moves.rbegin(); it != moves.rend(); ++it) change(it->p, it->f, it->t, -it->k);
    for (auto q : touched_products_) resim(q);
    return false;
  }

  double smoothing_cost(std::size_t cs) const {
    const double w = pb_.coefficients.smoothing;
    if (w <= 0.0 || pb_.num_weeks < 2) return 0.0;
    const auto begin = use_.begin() + static_cast<std::ptrdiff_t>(pb_.ct(cs, 0));
    const auto u = weeks_.totals(std::span<const double>(&*begin, static_cast<std::size_t>(h_)));
    double total = 0.0;
    for (std::size_t k = 1; k < u.size(); ++k) total += w * std::abs(u[k] - u[k - 1]);
    return total;
  }

  bool over(std::size_t cs, int t) const {
    return use_[pb_.ct(cs, t)] > pb_.capacity[pb_.ct(cs, t)] + kCapacityGuard;
  }

  void change(std::size_t p, std::size_t f, int t, std::int64_t k) {
    x_.at(p, f, t) += k;
    prod_[pb_.pt(p, t)] += k;
    for (const auto& u : set_usage_[p * nf_ + f]) {
      use_[pb_.ct(u.capacity_set, t)] += u.rate * static_cast<double>(k);
    }
    for (const auto& child : index_.children(p)) {
      cons_[pb_.pt(child.product, t)] += child.quantity_per * k;
    }
  }

  void resim(std::size_t p) {
    std::int64_t s = init_[p], o = 0;
    const double bw = pb_.coefficients.backlog[p], hw = pb_.coefficients.holding[p];
    double cost = 0.0;
    for (int t = 0; t < h_; ++t) {
      const auto i = pb_.pt(p, t);
      const auto a = s + prod_[i] - cons_[i];
      avail_[i] = a;
      const auto due = o + demand_[i];
      const auto served = std::clamp<std::int64_t>(a, 0, due);
      s = a - served;
      o = due - served;
      stock_[i] = s;
      owed_[i] = o;
      cost += bw * static_cast<double>(o) + hw * static_cast<double>(s);
    }
    if (!traj_cost_.empty()) traj_cost_[p] = cost;
  }

  // Pieces of p still missing by the end of the horizon, including what
  // its parents still miss and could actually make.
  std::int64_t net(std::size_t p, int t) {
    if (memo_version_[p] == version_ && memo_day_ == t) return memo_net_[p];
    if (memo_day_ != t) {
      memo_day_ = t;
      ++version_;
    }
    const auto last = pb_.pt(p, h_ - 1);
    std::int64_t need = owed_[last] - stock_[last];
    for (const auto& parent : index_.parents(p)) {
      const auto nq = net(parent.product, t);
      if (nq <= 0) continue;
      need += parent.quantity_per * std::min(nq, potential(parent.product, t));
    }
    memo_version_[p] = version_;
    memo_net_[p] = need;
    return need;
  }

  // Upper bound on what p could still be produced from day t on, given the
  // capacity left.
  std::int64_t potential(std::size_t p, int t) {
    if (pot_version_[p] == version_) return pot_[p];
    std::int64_t total = 0;
    for (auto f : producers_[p]) {
      for (int tau = t; tau < h_ && total < kUnbounded; ++tau) {
        if (!pb_.allowed[pb_.xi(p, f, tau)]) continue;
        std::int64_t units = kUnbounded;
        for (const auto& u : set_usage_[p * nf_ + f]) {
          const double cap = pb_.capacity[pb_.ct(u.capacity_set, tau)];
          if (std::isinf(cap)) continue;
          const double room = std::max(0.0, cap - use_[pb_.ct(u.capacity_set, tau)]);
          units = std::min(units, static_cast<std::int64_t>(std::floor(room / u.rate + kCapacityGuard)));
        }
        total = std::min(kUnbounded, total + units);
      }
    }
    pot_version_[p] = version_;
    pot_[p] = total;
    return total;
  }

  const PlanningProblem& pb_;
  const HybridParams& params_;
  const Dataset& ds_;
  DatasetIndex index_;
  int h_;
  std::size_t n_, nf_;
  Production x_;
  std::vector<std::int64_t> prod_, cons_, avail_, stock_, owed_, demand_, init_;
  std::vector<double> use_;
  std::vector<std::vector<DatasetIndex::Usage>> set_usage_;
  std::vector<std::size_t> priority_;
  std::vector<std::vector<std::size_t>> producers_;
  std::int64_t version_ = 0;
  int memo_day_ = -1;
  std::vector<std::int64_t> memo_version_, memo_net_, pot_version_, pot_;
  WeekBuckets weeks_{h_, IndicatorConfig{}.week_length};
  std::vector<double> traj_cost_, set_cost_;
  std::vector<std::vector<std::size_t>> sharing_;
  std::vector<std::size_t> touched_products_, touched_sets_;
  std::vector<Move> journal_;
  double total_ = 0.0;
};

}  // namespace

HybridResult solve_hybrid(const PlanningProblem& problem, const HybridParams& params) {
  if (params.max_repair_passes < 1) throw std::invalid_argument("max_repair_passes must be >= 1");
  if (params.improvement_passes < 0) throw std::invalid_argument("improvement_passes must be >= 0");
  if (params.lot_increment < 1) throw std::invalid_argument("lot_increment must be >= 1");
  if (!problem.dataset) throw std::invalid_argument("planning problem has no dataset");
  check_deadline(params);

  Relaxation relaxed;
  bool solved = false;
  if (problem.lp.num_rows() <= params.max_monolithic_rows) {
    relaxed = solve_monolithic(problem, params);
    if (relaxed.status == lp::LpStatus::kInfeasible || relaxed.status == lp::LpStatus::kUnbounded) {
      fail_status(relaxed.status);
    }
    solved = relaxed.status == lp::LpStatus::kOptimal;
  }
  if (!solved) relaxed = solve_decomposed(problem, params);

  Repair repair(problem, params);
  repair.load(relaxed.x);
  repair.restore();
  for (int pass = 0; pass < params.max_repair_passes; ++pass) {
    if (!repair.repair_pass()) break;
  }
  if (params.improvement_passes > 0) {
    repair.improve(params.improvement_passes, Clock::now() + params.improvement_budget);
  }

  HybridResult result;
  result.production = repair.take();
  result.lp_status = relaxed.status;
  result.lp_objective = relaxed.objective;
  result.lp_exact = relaxed.exact && relaxed.status == lp::LpStatus::kOptimal;
  result.lp_iterations = relaxed.iterations;
  const auto trajectories = simulate(*problem.dataset, problem.config, result.production);
  result.objective =
      evaluate_objective(*problem.dataset, problem.config, result.production, trajectories);
  return result;
}

}  // namespace whatif
