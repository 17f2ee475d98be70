#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace whatif {

inline constexpr int kDefaultHorizon = 30;

/// Raised for malformed input documents and unknown ids.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ProductKind { kFinished, kIntermediate, kRawMaterial };

std::string_view to_string(ProductKind kind);
ProductKind product_kind_from_string(std::string_view text);

struct Product {
  std::string id;
  std::string name;
  ProductKind kind = ProductKind::kFinished;
  int priority = 0;  // 1 is served first
  std::map<std::string, double> unit_production_cost;  // factory id -> cost
  double unit_holding_cost = 0.0;                       // per piece per day

  bool operator==(const Product&) const = default;
};

/// One unit of `parent` consumes `quantity_per` units of `child`.
/// Quantities are whole pieces so that material balances stay integral.
struct BomEdge {
  std::string parent;
  std::string child;
  std::int64_t quantity_per = 1;

  bool operator==(const BomEdge&) const = default;
};

struct Factory {
  std::string id;
  std::string name;

  bool operator==(const Factory&) const = default;
};

/// Daily capacity; std::nullopt marks an unlimited day.
using CapacityValue = std::optional<double>;

struct CapacitySet {
  std::string id;
  std::string factory;
  std::vector<CapacityValue> daily_capacity;

  bool operator==(const CapacitySet&) const = default;
};

struct CapacityUsageRate {
  std::string product;
  std::string capacity_set;
  double rate = 1.0;  // capacity units per piece

  bool operator==(const CapacityUsageRate&) const = default;
};

/// Restricts which parents may consume `component`.
struct FixedComponentConstraint {
  std::string component;
  std::set<std::string> allowed_parents;

  bool operator==(const FixedComponentConstraint&) const = default;
};

struct ObjectiveWeights {
  double delay = 1.0;
  double production = 1.0;
  double inventory = 1.0;
  double smoothing = 1.0;

  bool operator==(const ObjectiveWeights&) const = default;
};

/// The editable inputs of one plan run.
struct PlanConfig {
  int horizon = kDefaultHorizon;
  std::string start_date;
  std::map<std::string, std::vector<std::int64_t>> demand;
  std::map<std::string, std::int64_t> initial_inventory;
  std::vector<CapacitySet> capacity_sets;
  std::map<std::string, std::set<int>> holidays;  // factory id -> day indices
  ObjectiveWeights objective_weights;
  // Components whose fixed-component constraint is switched off for this run.
  std::set<std::string> disabled_fixed_components;

  std::int64_t demand_at(const std::string& product, int day) const;
  std::int64_t initial_inventory_of(const std::string& product) const;
  bool is_holiday(const std::string& factory, int day) const;
  const CapacitySet* find_capacity_set(std::string_view id) const;

  bool operator==(const PlanConfig&) const = default;
};

struct Dataset {
  std::vector<Product> products;
  std::vector<BomEdge> bom_edges;
  std::vector<Factory> factories;
  std::vector<CapacitySet> capacity_sets;
  std::vector<CapacityUsageRate> usage_rates;
  std::vector<FixedComponentConstraint> fixed_component_constraints;
  PlanConfig default_config;

  bool operator==(const Dataset&) const = default;
};

/// Integer-indexed view of a dataset. Built once per dataset and shared
/// read-only; it does not own the dataset it points into.
class DatasetIndex {
 public:
  struct Child {
    std::size_t product;
    std::int64_t quantity_per;
  };
  struct Parent {
    std::size_t product;
    std::int64_t quantity_per;
  };
  struct Usage {
    std::size_t capacity_set;  // index into Dataset::capacity_sets
    double rate;
  };

  explicit DatasetIndex(const Dataset& dataset);

  const Dataset& dataset() const { return *dataset_; }
  std::size_t num_products() const { return dataset_->products.size(); }

  std::optional<std::size_t> find_product(std::string_view id) const;
  std::optional<std::size_t> find_factory(std::string_view id) const;
  std::optional<std::size_t> find_capacity_set(std::string_view id) const;
  std::size_t product(std::string_view id) const;  // throws DataError
  std::size_t factory(std::string_view id) const;  // throws DataError

  const std::vector<Child>& children(std::size_t p) const { return children_[p]; }
  const std::vector<Parent>& parents(std::size_t p) const { return parents_[p]; }
  const std::vector<Usage>& usages(std::size_t p) const { return usages_[p]; }
  /// Factories able to make product p, with the unit cost there.
  const std::vector<std::pair<std::size_t, double>>& factories_of(std::size_t p) const {
    return producers_[p];
  }
  std::size_t factory_of_set(std::size_t cs) const { return set_factory_[cs]; }
  bool is_raw(std::size_t p) const;

  /// Longest path from any root; parents always have a smaller level than
  /// their children. Only meaningful on an acyclic BOM.
  const std::vector<int>& levels() const { return levels_; }

 private:
  const Dataset* dataset_;
  std::unordered_map<std::string, std::size_t> product_ids_;
  std::unordered_map<std::string, std::size_t> factory_ids_;
  std::unordered_map<std::string, std::size_t> set_ids_;
  std::vector<std::vector<Child>> children_;
  std::vector<std::vector<Parent>> parents_;
  std::vector<std::vector<Usage>> usages_;
  std::vector<std::vector<std::pair<std::size_t, double>>> producers_;
  std::vector<std::size_t> set_factory_;
  std::vector<int> levels_;
};

// ---------------------------------------------------------------------------
// Validation

enum class ViolationKind {
  kDuplicateId,
  kUnknownReference,
  kBomCycle,
  kInvalidQuantity,
  kRawMaterialWithChildren,
  kNoProducingFactory,
  kPriority,
  kLengthMismatch,
  kNegativeValue,
  kHolidayOutOfRange,
  kInvalidWeights,
  kInvalidHorizon,
  kFixedComponent,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::string message;
  std::vector<std::string> subjects;  // ids involved, sorted
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::size_t count(ViolationKind kind) const;
};

/// Checks every structural invariant of a dataset, including its default
/// config. Never throws on bad data; problems are returned as violations.
ValidationReport validate_dataset(const Dataset& dataset);

/// Checks a config against the dataset it will be planned with.
ValidationReport validate_config(const Dataset& dataset, const PlanConfig& config);

// ---------------------------------------------------------------------------
// BOM

struct ClosureEntry {
  std::string product;
  int depth = 0;  // longest path from the root, so parents precede children
  std::int64_t cumulative_quantity = 0;
};

/// All transitive components of `product`, ordered by depth then id. The
/// cumulative quantity is the per-path product of edge quantities, summed
/// over every path from `product`.
std::vector<ClosureEntry> bom_closure(const Dataset& dataset, std::string_view product);

}  // namespace whatif
