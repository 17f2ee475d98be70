#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "whatif/model.hpp"

namespace whatif {

/// Dense production quantities indexed by (product, factory, day). Carries
/// the product and factory id order it was built with so that it can be
/// serialised without the dataset.
class Production {
 public:
  Production() = default;
  Production(std::vector<std::string> product_ids, std::vector<std::string> factory_ids,
             int horizon);
  /// Zero production shaped after a dataset.
  static Production for_dataset(const Dataset& dataset, int horizon);

  int horizon() const { return horizon_; }
  std::size_t num_products() const { return product_ids_.size(); }
  std::size_t num_factories() const { return factory_ids_.size(); }
  const std::vector<std::string>& product_ids() const { return product_ids_; }
  const std::vector<std::string>& factory_ids() const { return factory_ids_; }

  std::int64_t at(std::size_t p, std::size_t f, int t) const { return q_[offset(p, f, t)]; }
  std::int64_t& at(std::size_t p, std::size_t f, int t) { return q_[offset(p, f, t)]; }
  /// Sum over factories.
  std::int64_t total(std::size_t p, int t) const;
  std::int64_t grand_total() const;

  bool operator==(const Production&) const = default;

 private:
  std::size_t offset(std::size_t p, std::size_t f, int t) const {
    return (p * factory_ids_.size() + f) * static_cast<std::size_t>(horizon_) +
           static_cast<std::size_t>(t);
  }

  std::vector<std::string> product_ids_;
  std::vector<std::string> factory_ids_;
  int horizon_ = 0;
  std::vector<std::int64_t> q_;
};

/// End-of-day stock and backlog per product (dataset order) and day.
struct Trajectories {
  std::vector<std::vector<std::int64_t>> inventory;
  std::vector<std::vector<std::int64_t>> backlog;
};

/// Raised by simulate when production needs more of a component than is on
/// hand that day.
class InfeasibleProduction : public std::runtime_error {
 public:
  InfeasibleProduction(std::string product, int day, std::int64_t shortfall);
  const std::string& product() const { return product_; }
  int day() const { return day_; }
  std::int64_t shortfall() const { return shortfall_; }

 private:
  std::string product_;
  int day_;
  std::int64_t shortfall_;
};

/// Forward day-by-day material balance. Components are consumed on the day
/// their parents are produced; stock is then used for old backlog first and
/// for the day's demand second; the rest carries over.
Trajectories simulate(const Dataset& dataset, const PlanConfig& config,
                      const Production& production);

/// Capacity consumed per (dataset capacity set, day) by a production plan.
std::vector<std::vector<double>> capacity_use(const Dataset& dataset,
                                              const Production& production);

}  // namespace whatif
