#include "whatif/production.hpp"

#include <numeric>

namespace whatif {

Production::Production(std::vector<std::string> product_ids, std::vector<std::string> factory_ids,
                       int horizon)
    : product_ids_(std::move(product_ids)),
      factory_ids_(std::move(factory_ids)),
      horizon_(horizon),
      q_(product_ids_.size() * factory_ids_.size() * static_cast<std::size_t>(horizon), 0) {}

Production Production::for_dataset(const Dataset& dataset, int horizon) {
  std::vector<std::string> products, factories;
  for (const auto& p : dataset.products) products.push_back(p.id);
  for (const auto& f : dataset.factories) factories.push_back(f.id);
  return Production(std::move(products), std::move(factories), horizon);
}

std::int64_t Production::total(std::size_t p, int t) const {
  std::int64_t sum = 0;
  for (std::size_t f = 0; f < factory_ids_.size(); ++f) sum += at(p, f, t);
  return sum;
}

std::int64_t Production::grand_total() const {
  return std::accumulate(q_.begin(), q_.end(), std::int64_t{0});
}

InfeasibleProduction::InfeasibleProduction(std::string product, int day, std::int64_t shortfall)
    : std::runtime_error("production on day " + std::to_string(day) + " needs " +
                         std::to_string(shortfall) + " more '" + product + "' than is available"),
      product_(std::move(product)),
      day_(day),
      shortfall_(shortfall) {}

Trajectories simulate(const Dataset& dataset, const PlanConfig& config,
                      const Production& production) {
  DatasetIndex index(dataset);
  const int h = config.horizon;
  const auto n = dataset.products.size();
  if (production.num_products() != n || production.num_factories() != dataset.factories.size() ||
      production.horizon() != h) {
    throw DataError("production matrix does not match the dataset and horizon");
  }

  Trajectories out;
  out.inventory.assign(n, std::vector<std::int64_t>(static_cast<std::size_t>(h), 0));
  out.backlog.assign(n, std::vector<std::int64_t>(static_cast<std::size_t>(h), 0));
  for (std::size_t p = 0; p < n; ++p) {
    const auto& id = dataset.products[p].id;
    std::int64_t stock = config.initial_inventory_of(id);
    std::int64_t owed = 0;
    for (int t = 0; t < h; ++t) {
      for (std::size_t f = 0; f < production.num_factories(); ++f) {
        if (production.at(p, f, t) < 0) throw DataError("negative production of '" + id + "'");
      }
      std::int64_t consumed = 0;
      for (const auto& parent : index.parents(p)) {
        consumed += parent.quantity_per * production.total(parent.product, t);
      }
      std::int64_t available = stock + production.total(p, t) - consumed;
      if (available < 0) throw InfeasibleProduction(id, t, -available);
      const std::int64_t due = owed + config.demand_at(id, t);
      const std::int64_t served = std::min(available, due);
      stock = available - served;
      owed = due - served;
      out.inventory[p][static_cast<std::size_t>(t)] = stock;
      out.backlog[p][static_cast<std::size_t>(t)] = owed;
    }
  }
  return out;
}

std::vector<std::vector<double>> capacity_use(const Dataset& dataset,
                                              const Production& production) {
  DatasetIndex index(dataset);
  const int h = production.horizon();
  std::vector<std::vector<double>> use(dataset.capacity_sets.size(),
                                       std::vector<double>(static_cast<std::size_t>(h), 0.0));
  for (std::size_t p = 0; p < dataset.products.size(); ++p) {
    for (const auto& u : index.usages(p)) {
      const auto f = index.factory_of_set(u.capacity_set);
      for (int t = 0; t < h; ++t) {
        use[u.capacity_set][static_cast<std::size_t>(t)] +=
            u.rate * static_cast<double>(production.at(p, f, t));
      }
    }
  }
  return use;
}

}  // namespace whatif
