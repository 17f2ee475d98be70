#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "whatif/json_io.hpp"
#include "whatif/model.hpp"

namespace whatif {

/// A config edit that names an unknown entity or carries a bad value.
class EditError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SetDemandPoint {
  std::string product;
  int day = 0;
  std::int64_t value = 0;
};

struct SetInitialInventory {
  std::string product;
  std::int64_t value = 0;
};

struct SetCapacityPoint {
  std::string capacity_set;
  int day = 0;
  std::optional<double> value;  // nullopt: unlimited
};

/// Multiplies finite capacity by (1 + percent/100) on days first..last
/// (inclusive). Unlimited days stay unlimited.
struct ScaleCapacity {
  std::string capacity_set;
  double percent = 0.0;
  int first_day = 0;
  int last_day = 0;
};

struct ToggleHoliday {
  std::string factory;
  int day = 0;
};

/// Switches off the fixed-component constraint on a component for this run.
struct RemoveFixedConstraint {
  std::string component;
};

using ConfigEdit = std::variant<SetDemandPoint, SetInitialInventory, SetCapacityPoint,
                                ScaleCapacity, ToggleHoliday, RemoveFixedConstraint>;

/// Applies the edits in order. Throws EditError and leaves nothing applied
/// if any edit is invalid.
PlanConfig apply_edits(const Dataset& dataset, const PlanConfig& base,
                       const std::vector<ConfigEdit>& edits);

/// Edits are objects tagged by "kind": set_demand_point, set_initial_inventory,
/// set_capacity_point, scale_capacity, toggle_holiday, remove_fixed_constraint.
/// Throws EditError on malformed input.
ConfigEdit edit_from_json(const Json& doc);
std::vector<ConfigEdit> edits_from_json(const Json& doc);
Json to_json(const ConfigEdit& edit);

}  // namespace whatif
