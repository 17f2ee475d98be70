#include "whatif/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <sstream>

namespace whatif {

std::string_view to_string(ProductKind kind) {
  switch (kind) {
    case ProductKind::kFinished:
      return "finished";
    case ProductKind::kIntermediate:
      return "intermediate";
    case ProductKind::kRawMaterial:
      return "raw_material";
  }
  return "finished";
}

ProductKind product_kind_from_string(std::string_view text) {
  if (text == "finished") return ProductKind::kFinished;
  if (text == "intermediate") return ProductKind::kIntermediate;
  if (text == "raw_material") return ProductKind::kRawMaterial;
  throw DataError("unknown product kind '" + std::string(text) + "'");
}

std::int64_t PlanConfig::demand_at(const std::string& product, int day) const {
  auto it = demand.find(product);
  if (it == demand.end() || day < 0 || static_cast<std::size_t>(day) >= it->second.size()) {
    return 0;
  }
  return it->second[static_cast<std::size_t>(day)];
}

std::int64_t PlanConfig::initial_inventory_of(const std::string& product) const {
  auto it = initial_inventory.find(product);
  return it == initial_inventory.end() ? 0 : it->second;
}

bool PlanConfig::is_holiday(const std::string& factory, int day) const {
  auto it = holidays.find(factory);
  return it != holidays.end() && it->second.contains(day);
}

const CapacitySet* PlanConfig::find_capacity_set(std::string_view id) const {
  for (const auto& cs : capacity_sets) {
    if (cs.id == id) return &cs;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------

DatasetIndex::DatasetIndex(const Dataset& dataset) : dataset_(&dataset) {
  const auto n = dataset.products.size();
  for (std::size_t i = 0; i < n; ++i) product_ids_.emplace(dataset.products[i].id, i);
  for (std::size_t i = 0; i < dataset.factories.size(); ++i) {
    factory_ids_.emplace(dataset.factories[i].id, i);
  }
  for (std::size_t i = 0; i < dataset.capacity_sets.size(); ++i) {
    set_ids_.emplace(dataset.capacity_sets[i].id, i);
  }

  children_.resize(n);
  parents_.resize(n);
  usages_.resize(n);
  producers_.resize(n);
  for (const auto& e : dataset.bom_edges) {
    auto p = find_product(e.parent);
    auto c = find_product(e.child);
    if (!p || !c) continue;
    children_[*p].push_back({*c, e.quantity_per});
    parents_[*c].push_back({*p, e.quantity_per});
  }
  set_factory_.resize(dataset.capacity_sets.size(), 0);
  for (std::size_t i = 0; i < dataset.capacity_sets.size(); ++i) {
    if (auto f = find_factory(dataset.capacity_sets[i].factory)) set_factory_[i] = *f;
  }
  for (const auto& u : dataset.usage_rates) {
    auto p = find_product(u.product);
    auto cs = find_capacity_set(u.capacity_set);
    if (!p || !cs) continue;
    usages_[*p].push_back({*cs, u.rate});
  }
  for (std::size_t p = 0; p < n; ++p) {
    for (const auto& [fid, cost] : dataset.products[p].unit_production_cost) {
      if (auto f = find_factory(fid)) producers_[p].emplace_back(*f, cost);
    }
  }

  // Longest-path levels via Kahn's algorithm; nodes on cycles keep level 0.
  levels_.assign(n, 0);
  std::vector<int> indegree(n, 0);
  for (std::size_t c = 0; c < n; ++c) indegree[c] = static_cast<int>(parents_[c].size());
  std::queue<std::size_t> ready;
  for (std::size_t p = 0; p < n; ++p) {
    if (indegree[p] == 0) ready.push(p);
  }
  while (!ready.empty()) {
    auto p = ready.front();
    ready.pop();
    for (const auto& ch : children_[p]) {
      levels_[ch.product] = std::max(levels_[ch.product], levels_[p] + 1);
      if (--indegree[ch.product] == 0) ready.push(ch.product);
    }
  }
}

std::optional<std::size_t> DatasetIndex::find_product(std::string_view id) const {
  auto it = product_ids_.find(std::string(id));
  if (it == product_ids_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> DatasetIndex::find_factory(std::string_view id) const {
  auto it = factory_ids_.find(std::string(id));
  if (it == factory_ids_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> DatasetIndex::find_capacity_set(std::string_view id) const {
  auto it = set_ids_.find(std::string(id));
  if (it == set_ids_.end()) return std::nullopt;
  return it->second;
}

std::size_t DatasetIndex::product(std::string_view id) const {
  if (auto p = find_product(id)) return *p;
  throw DataError("unknown product '" + std::string(id) + "'");
}

std::size_t DatasetIndex::factory(std::string_view id) const {
  if (auto f = find_factory(id)) return *f;
  throw DataError("unknown factory '" + std::string(id) + "'");
}

bool DatasetIndex::is_raw(std::size_t p) const {
  return dataset_->products[p].kind == ProductKind::kRawMaterial;
}

// ---------------------------------------------------------------------------
// Validation

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kDuplicateId: return "duplicate_id";
    case ViolationKind::kUnknownReference: return "unknown_reference";
    case ViolationKind::kBomCycle: return "bom_cycle";
    case ViolationKind::kInvalidQuantity: return "invalid_quantity";
    case ViolationKind::kRawMaterialWithChildren: return "raw_material_with_children";
    case ViolationKind::kNoProducingFactory: return "no_producing_factory";
    case ViolationKind::kPriority: return "priority";
    case ViolationKind::kLengthMismatch: return "length_mismatch";
    case ViolationKind::kNegativeValue: return "negative_value";
    case ViolationKind::kHolidayOutOfRange: return "holiday_out_of_range";
    case ViolationKind::kInvalidWeights: return "invalid_weights";
    case ViolationKind::kInvalidHorizon: return "invalid_horizon";
    case ViolationKind::kFixedComponent: return "fixed_component";
  }
  return "unknown";
}

std::size_t ValidationReport::count(ViolationKind kind) const {
  return static_cast<std::size_t>(std::count_if(
      violations.begin(), violations.end(), [kind](const Violation& v) { return v.kind == kind; }));
}

namespace {

class Reporter {
 public:
  explicit Reporter(ValidationReport& report) : report_(report) {}

  void add(ViolationKind kind, std::string message, std::vector<std::string> subjects = {}) {
    std::sort(subjects.begin(), subjects.end());
    report_.violations.push_back({kind, std::move(message), std::move(subjects)});
  }

 private:
  ValidationReport& report_;
};

template <typename Range, typename IdOf>
std::set<std::string> collect_ids(const Range& items, IdOf id_of, std::string_view what,
                                  Reporter& out) {
  std::set<std::string> seen;
  for (const auto& item : items) {
    const std::string& id = id_of(item);
    if (!seen.insert(id).second) {
      out.add(ViolationKind::kDuplicateId, std::string(what) + " id '" + id + "' is not unique",
              {id});
    }
  }
  return seen;
}

// Tarjan's strongly connected components; every component with more than one
// node, or a self loop, is a cycle.
std::vector<std::vector<std::string>> find_cycles(const Dataset& ds) {
  std::map<std::string, std::vector<std::string>> graph;
  std::set<std::pair<std::string, std::string>> self_loops;
  for (const auto& e : ds.bom_edges) {
    graph[e.parent].push_back(e.child);
    graph.try_emplace(e.child);
    if (e.parent == e.child) self_loops.emplace(e.parent, e.child);
  }

  std::map<std::string, int> index, lowlink;
  std::set<std::string> on_stack;
  std::vector<std::string> stack;
  std::vector<std::vector<std::string>> cycles;
  int counter = 0;

  std::function<void(const std::string&)> connect = [&](const std::string& v) {
    index[v] = lowlink[v] = counter++;
    stack.push_back(v);
    on_stack.insert(v);
    for (const auto& w : graph[v]) {
      if (!index.contains(w)) {
        connect(w);
        lowlink[v] = std::min(lowlink[v], lowlink[w]);
      } else if (on_stack.contains(w)) {
        lowlink[v] = std::min(lowlink[v], index[w]);
      }
    }
    if (lowlink[v] == index[v]) {
      std::vector<std::string> component;
      std::string w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack.erase(w);
        component.push_back(w);
      } while (w != v);
      if (component.size() > 1 || self_loops.contains({v, v})) {
        std::sort(component.begin(), component.end());
        cycles.push_back(std::move(component));
      }
    }
  };
  for (const auto& [v, _] : graph) {
    if (!index.contains(v)) connect(v);
  }
  return cycles;
}

void check_series_length(std::size_t actual, int horizon, std::string_view what,
                         const std::string& id, Reporter& out) {
  if (horizon > 0 && actual != static_cast<std::size_t>(horizon)) {
    std::ostringstream msg;
    msg << what << " series for '" << id << "' has length " << actual << ", expected "
        << horizon;
    out.add(ViolationKind::kLengthMismatch, msg.str(), {id});
  }
}

void check_capacity_series(const CapacitySet& cs, int horizon, Reporter& out) {
  check_series_length(cs.daily_capacity.size(), horizon, "capacity", cs.id, out);
  for (const auto& v : cs.daily_capacity) {
    if (v && (!std::isfinite(*v) || *v < 0.0)) {
      out.add(ViolationKind::kNegativeValue,
              "capacity set '" + cs.id + "' has a negative or non-finite value", {cs.id});
      break;
    }
  }
}

void validate_config_into(const Dataset& ds, const PlanConfig& cfg,
                          const std::set<std::string>& product_ids,
                          const std::set<std::string>& factory_ids, Reporter& out) {
  const int h = cfg.horizon;
  if (h < 1) {
    out.add(ViolationKind::kInvalidHorizon, "horizon must be at least one day");
  }
  for (const auto& [pid, series] : cfg.demand) {
    if (!product_ids.contains(pid)) {
      out.add(ViolationKind::kUnknownReference, "demand refers to unknown product '" + pid + "'",
              {pid});
      continue;
    }
    check_series_length(series.size(), h, "demand", pid, out);
    if (std::any_of(series.begin(), series.end(), [](std::int64_t d) { return d < 0; })) {
      out.add(ViolationKind::kNegativeValue, "demand for '" + pid + "' is negative", {pid});
    }
  }
  for (const auto& [pid, qty] : cfg.initial_inventory) {
    if (!product_ids.contains(pid)) {
      out.add(ViolationKind::kUnknownReference,
              "initial inventory refers to unknown product '" + pid + "'", {pid});
    } else if (qty < 0) {
      out.add(ViolationKind::kNegativeValue, "initial inventory of '" + pid + "' is negative",
              {pid});
    }
  }

  std::set<std::string> dataset_sets;
  for (const auto& cs : ds.capacity_sets) dataset_sets.insert(cs.id);
  std::set<std::string> seen_sets;
  for (const auto& cs : cfg.capacity_sets) {
    if (!seen_sets.insert(cs.id).second) {
      out.add(ViolationKind::kDuplicateId, "config capacity set '" + cs.id + "' repeated",
              {cs.id});
    }
    if (!dataset_sets.contains(cs.id)) {
      out.add(ViolationKind::kUnknownReference,
              "config capacity set '" + cs.id + "' is not defined by the dataset", {cs.id});
    }
    check_capacity_series(cs, h, out);
  }
  for (const auto& cs : ds.capacity_sets) {
    if (!seen_sets.contains(cs.id)) {
      out.add(ViolationKind::kUnknownReference,
              "config has no capacity series for set '" + cs.id + "'", {cs.id});
    }
  }

  for (const auto& [fid, days] : cfg.holidays) {
    if (!factory_ids.contains(fid)) {
      out.add(ViolationKind::kUnknownReference, "holidays refer to unknown factory '" + fid + "'",
              {fid});
    }
    for (int d : days) {
      if (d < 0 || d >= h) {
        out.add(ViolationKind::kHolidayOutOfRange,
                "holiday day " + std::to_string(d) + " of factory '" + fid +
                    "' is outside the horizon",
                {fid});
      }
    }
  }

  const auto& w = cfg.objective_weights;
  const double weights[] = {w.delay, w.production, w.inventory, w.smoothing};
  bool bad = false;
  bool any_positive = false;
  for (double x : weights) {
    if (!std::isfinite(x) || x < 0.0) bad = true;
    if (x > 0.0) any_positive = true;
  }
  if (bad || !any_positive) {
    out.add(ViolationKind::kInvalidWeights,
            "objective weights must be finite, non-negative and not all zero");
  }

  for (const auto& comp : cfg.disabled_fixed_components) {
    bool known = std::any_of(ds.fixed_component_constraints.begin(),
                             ds.fixed_component_constraints.end(),
                             [&](const auto& c) { return c.component == comp; });
    if (!known) {
      out.add(ViolationKind::kUnknownReference,
              "no fixed-component constraint exists for '" + comp + "'", {comp});
    }
  }
}

}  // namespace

ValidationReport validate_dataset(const Dataset& ds) {
  ValidationReport report;
  Reporter out(report);

  auto product_ids =
      collect_ids(ds.products, [](const Product& p) -> const std::string& { return p.id; },
                  "product", out);
  auto factory_ids =
      collect_ids(ds.factories, [](const Factory& f) -> const std::string& { return f.id; },
                  "factory", out);
  auto set_ids = collect_ids(
      ds.capacity_sets, [](const CapacitySet& c) -> const std::string& { return c.id; },
      "capacity set", out);

  // Priorities must be a permutation of 1..N.
  std::map<int, std::vector<std::string>> by_priority;
  for (const auto& p : ds.products) by_priority[p.priority].push_back(p.id);
  for (const auto& [prio, ids] : by_priority) {
    if (ids.size() > 1) {
      out.add(ViolationKind::kPriority, "priority " + std::to_string(prio) + " is not unique",
              ids);
    }
    if (prio < 1 || prio > static_cast<int>(ds.products.size())) {
      out.add(ViolationKind::kPriority,
              "priority " + std::to_string(prio) + " is outside 1.." +
                  std::to_string(ds.products.size()),
              ids);
    }
  }

  std::map<std::string, const Product*> products;
  for (const auto& p : ds.products) products.emplace(p.id, &p);

  std::set<std::pair<std::string, std::string>> edges;
  std::set<std::string> has_children;
  for (const auto& e : ds.bom_edges) {
    for (const auto* id : {&e.parent, &e.child}) {
      if (!product_ids.contains(*id)) {
        out.add(ViolationKind::kUnknownReference,
                "BOM edge refers to unknown product '" + *id + "'", {*id});
      }
    }
    if (e.quantity_per <= 0) {
      out.add(ViolationKind::kInvalidQuantity,
              "BOM edge " + e.parent + " -> " + e.child + " has non-positive quantity",
              {e.parent, e.child});
    }
    if (!edges.emplace(e.parent, e.child).second) {
      out.add(ViolationKind::kDuplicateId, "BOM edge " + e.parent + " -> " + e.child + " repeated",
              {e.parent, e.child});
    }
    has_children.insert(e.parent);
  }
  for (auto& cycle : find_cycles(ds)) {
    std::string names;
    for (const auto& id : cycle) names += (names.empty() ? "" : ", ") + id;
    out.add(ViolationKind::kBomCycle, "BOM cycle through " + names, std::move(cycle));
  }

  for (const auto& p : ds.products) {
    if (p.kind == ProductKind::kRawMaterial) {
      if (has_children.contains(p.id)) {
        out.add(ViolationKind::kRawMaterialWithChildren,
                "raw material '" + p.id + "' has BOM children", {p.id});
      }
    } else if (p.unit_production_cost.empty()) {
      out.add(ViolationKind::kNoProducingFactory,
              "product '" + p.id + "' has no factory with a production cost", {p.id});
    }
    for (const auto& [fid, cost] : p.unit_production_cost) {
      if (!factory_ids.contains(fid)) {
        out.add(ViolationKind::kUnknownReference,
                "product '" + p.id + "' has a cost for unknown factory '" + fid + "'",
                {p.id, fid});
      }
      if (!std::isfinite(cost) || cost < 0.0) {
        out.add(ViolationKind::kNegativeValue,
                "production cost of '" + p.id + "' at '" + fid + "' is invalid", {p.id});
      }
    }
    if (!std::isfinite(p.unit_holding_cost) || p.unit_holding_cost < 0.0) {
      out.add(ViolationKind::kNegativeValue, "holding cost of '" + p.id + "' is invalid",
              {p.id});
    }
  }

  for (const auto& cs : ds.capacity_sets) {
    if (!factory_ids.contains(cs.factory)) {
      out.add(ViolationKind::kUnknownReference,
              "capacity set '" + cs.id + "' belongs to unknown factory '" + cs.factory + "'",
              {cs.id, cs.factory});
    }
    check_capacity_series(cs, ds.default_config.horizon, out);
  }

  std::set<std::pair<std::string, std::string>> usage_pairs;
  for (const auto& u : ds.usage_rates) {
    if (!product_ids.contains(u.product) || !set_ids.contains(u.capacity_set)) {
      out.add(ViolationKind::kUnknownReference,
              "usage rate refers to unknown product or capacity set", {u.product, u.capacity_set});
    }
    if (!(u.rate > 0.0) || !std::isfinite(u.rate)) {
      out.add(ViolationKind::kInvalidQuantity,
              "usage rate of '" + u.product + "' on '" + u.capacity_set + "' must be positive",
              {u.product, u.capacity_set});
    }
    if (!usage_pairs.emplace(u.product, u.capacity_set).second) {
      out.add(ViolationKind::kDuplicateId,
              "usage rate for '" + u.product + "' on '" + u.capacity_set + "' repeated",
              {u.product, u.capacity_set});
    }
  }

  std::set<std::string> constrained;
  for (const auto& fc : ds.fixed_component_constraints) {
    if (!product_ids.contains(fc.component)) {
      out.add(ViolationKind::kUnknownReference,
              "fixed-component constraint on unknown product '" + fc.component + "'",
              {fc.component});
    }
    if (!constrained.insert(fc.component).second) {
      out.add(ViolationKind::kDuplicateId,
              "component '" + fc.component + "' has more than one fixed-component constraint",
              {fc.component});
    }
    if (fc.allowed_parents.empty()) {
      out.add(ViolationKind::kFixedComponent,
              "fixed-component constraint on '" + fc.component + "' allows no parent",
              {fc.component});
    }
    for (const auto& parent : fc.allowed_parents) {
      if (!edges.contains({parent, fc.component})) {
        out.add(ViolationKind::kFixedComponent,
                "'" + parent + "' is not a BOM parent of '" + fc.component + "'",
                {fc.component, parent});
      }
    }
  }

  validate_config_into(ds, ds.default_config, product_ids, factory_ids, out);
  return report;
}

ValidationReport validate_config(const Dataset& ds, const PlanConfig& config) {
  ValidationReport report;
  Reporter out(report);
  std::set<std::string> product_ids, factory_ids;
  for (const auto& p : ds.products) product_ids.insert(p.id);
  for (const auto& f : ds.factories) factory_ids.insert(f.id);
  validate_config_into(ds, config, product_ids, factory_ids, out);
  return report;
}

// ---------------------------------------------------------------------------

std::vector<ClosureEntry> bom_closure(const Dataset& dataset, std::string_view product) {
  DatasetIndex index(dataset);
  const auto root = index.product(product);
  const auto n = index.num_products();

  // Restrict to the sub-DAG reachable from root, then propagate path counts in
  // topological order.
  std::vector<char> reachable(n, 0);
  std::vector<std::size_t> stack{root};
  reachable[root] = 1;
  while (!stack.empty()) {
    auto p = stack.back();
    stack.pop_back();
    for (const auto& ch : index.children(p)) {
      if (!reachable[ch.product]) {
        reachable[ch.product] = 1;
        stack.push_back(ch.product);
      }
    }
  }

  std::vector<int> indegree(n, 0);
  for (std::size_t p = 0; p < n; ++p) {
    if (!reachable[p]) continue;
    for (const auto& ch : index.children(p)) ++indegree[ch.product];
  }
  std::vector<std::int64_t> quantity(n, 0);
  std::vector<int> depth(n, 0);
  quantity[root] = 1;
  std::queue<std::size_t> ready;
  ready.push(root);
  std::size_t visited = 0;
  while (!ready.empty()) {
    auto p = ready.front();
    ready.pop();
    ++visited;
    for (const auto& ch : index.children(p)) {
      quantity[ch.product] += quantity[p] * ch.quantity_per;
      depth[ch.product] = std::max(depth[ch.product], depth[p] + 1);
      if (--indegree[ch.product] == 0) ready.push(ch.product);
    }
  }
  std::size_t reachable_count = static_cast<std::size_t>(std::count(reachable.begin(), reachable.end(), 1));
  if (visited != reachable_count) {
    throw DataError("BOM below '" + std::string(product) + "' contains a cycle");
  }

  std::vector<ClosureEntry> out;
  for (std::size_t p = 0; p < n; ++p) {
    if (reachable[p] && p != root) {
      out.push_back({dataset.products[p].id, depth[p], quantity[p]});
    }
  }
  std::sort(out.begin(), out.end(), [](const ClosureEntry& a, const ClosureEntry& b) {
    return a.depth != b.depth ? a.depth < b.depth : a.product < b.product;
  });
  return out;
}

}  // namespace whatif
