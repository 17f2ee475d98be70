#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "whatif/indicators.hpp"
#include "whatif/lp.hpp"
#include "whatif/model.hpp"
#include "whatif/production.hpp"

namespace whatif {

class PlanningError : public std::runtime_error {
 public:
  enum class Kind { kInvalidConfig, kInfeasible, kUnbounded, kTimeout };

  PlanningError(Kind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct HybridParams {
  enum class Rounding { kFloor };

  int max_repair_passes = 2;
  Rounding rounding = Rounding::kFloor;
  std::int64_t lot_increment = 1;
  /// Above this many LP rows the relaxation is solved product by product
  /// instead of as one program.
  int max_monolithic_rows = 600;
  /// Local-search passes after repair; 0 disables the phase. The budget is
  /// a soft limit: the search stops early and keeps what it has.
  int improvement_passes = 4;
  std::chrono::milliseconds improvement_budget{3000};
  std::optional<std::chrono::steady_clock::time_point> deadline;
  lp::LpOptions lp_options;
};

/// Weighted-sum objective coefficients after per-term normalisation.
struct ObjectiveCoefficients {
  std::vector<double> backlog;                  // per product, per piece-day
  std::vector<double> holding;                  // per product, per piece-day
  std::vector<std::vector<double>> production;  // [product][factory], per piece
  double smoothing = 0.0;                       // per unit of weekly-use change
};

/// Backlog weight is w_delay * 5N * (N - rank + 1) / N; production, holding
/// and smoothing are divided by the largest full unit cost, the largest
/// holding cost times H, and the largest usage rate respectively.
ObjectiveCoefficients objective_coefficients(const Dataset& dataset, const PlanConfig& config);

/// Objective value of an integer plan under the same coefficients the LP uses.
double evaluate_objective(const Dataset& dataset, const PlanConfig& config,
                          const Production& production, const Trajectories& trajectories);

/// The planning LP plus the index maps needed to read a solution back.
/// Column and row maps hold -1 where no variable or row exists.
struct PlanningProblem {
  const Dataset* dataset = nullptr;
  PlanConfig config;
  int horizon = 0;
  std::size_t num_products = 0;
  std::size_t num_factories = 0;
  std::size_t num_capacity_sets = 0;
  int num_weeks = 0;
  ObjectiveCoefficients coefficients;

  lp::LinearProgram lp;
  std::vector<int> x;        // (p * F + f) * H + t
  std::vector<int> inventory;  // p * H + t
  std::vector<int> backlog;    // p * H + t
  std::vector<int> disposal;   // per product: write-off of initial stock
  std::vector<int> smooth_plus;   // cs * W + w, w >= 1
  std::vector<int> smooth_minus;  // cs * W + w, w >= 1
  std::vector<int> balance_rows;       // p * H + t
  std::vector<int> availability_rows;  // p * H + t, products with parents only
  std::vector<int> capacity_rows;      // cs * H + t, finite capacity only
  std::vector<int> smoothing_rows;     // cs * W + w

  /// Effective daily capacity (0 on holidays, +inf when unlimited).
  std::vector<double> capacity;  // cs * H + t
  /// Production allowed: a cost exists, not a holiday, not banned.
  std::vector<std::uint8_t> allowed;  // (p * F + f) * H + t

  std::size_t xi(std::size_t p, std::size_t f, int t) const {
    return (p * num_factories + f) * static_cast<std::size_t>(horizon) +
           static_cast<std::size_t>(t);
  }
  std::size_t pt(std::size_t p, int t) const {
    return p * static_cast<std::size_t>(horizon) + static_cast<std::size_t>(t);
  }
  std::size_t ct(std::size_t cs, int t) const {
    return cs * static_cast<std::size_t>(horizon) + static_cast<std::size_t>(t);
  }
};

/// Throws PlanningError(kInvalidConfig) when the config does not validate.
/// The dataset must outlive the problem.
PlanningProblem build_problem(const Dataset& dataset, const PlanConfig& config);

struct HybridResult {
  Production production;
  lp::LpStatus lp_status = lp::LpStatus::kOptimal;
  double lp_objective = 0.0;
  /// True when the relaxation was the whole program, so lp_objective is a
  /// lower bound on the objective of any integer plan.
  bool lp_exact = true;
  std::int64_t lp_iterations = 0;
  double objective = 0.0;
};

/// LP relaxation, floor, restoration of capacity and material feasibility,
/// then priority-ordered greedy repair and a local
/// improvement search. Deterministic for fixed inputs.
HybridResult solve_hybrid(const PlanningProblem& problem, const HybridParams& params = {});

}  // namespace whatif
