#pragma once

#include <cstdint>
#include <stdexcept>

#include "whatif/model.hpp"

namespace whatif {

struct GeneratorParams {
  int products = 1038;
  int factories = 5;
  int depth = 3;  // longest BOM path, in edges
  int horizon = kDefaultHorizon;
  std::uint64_t seed = 7;
  /// Mean daily load over capacity across all finite capacity sets.
  double target_utilization = 0.7;
};

/// Synthetic dataset with a layered BOM forest: finished goods at level 0,
/// raw materials at the deepest level, intermediates in between. Each
/// factory has an assembly and a fabrication capacity set. Demand follows a
/// weekly pattern with one peak week per product, and capacity is sized from
/// the exploded demand so that some weeks run over capacity. The same
/// params always give the same dataset with a given standard library.
/// Throws std::invalid_argument if any size is below 1.
Dataset generate_dataset(const GeneratorParams& params);

}  // namespace whatif
