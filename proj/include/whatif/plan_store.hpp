#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "whatif/plan.hpp"

namespace whatif {

class StoreError : public std::runtime_error {
 public:
  enum class Kind { kIo, kNotFound, kInvalid };
  StoreError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct StoreEntry {
  PlanSummary summary;
  /// The parent was deleted; the link is kept so history stays readable.
  bool parent_deleted = false;
};

/// Append-only plan store in one directory. Full plans go to a JSON-lines
/// log; a second JSON-lines index holds denormalised summaries and
/// tombstones, so listing never reads production data. Writers serialise on
/// an exclusive file lock; readers need no lock and only ever see complete
/// records. Safe to share between threads.
class PlanStore {
 public:
  /// Creates the directory if needed.
  explicit PlanStore(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }

  /// Durably appends the plan and returns its id: the plan's own id, or a
  /// fresh one if that id is empty or already stored. The parent, if any,
  /// must be a stored (possibly deleted) plan.
  std::string put(const Plan& plan);
  /// Throws StoreError(kNotFound) for unknown or deleted ids.
  Plan get(const std::string& id);
  bool contains(const std::string& id);
  /// Live plans in creation order.
  std::vector<StoreEntry> list();
  /// Tombstones the plan. Throws StoreError(kNotFound) for unknown or
  /// already deleted ids.
  void remove(const std::string& id);
  /// Rewrites the log without deleted plans.
  void compact();

  /// Tombstoned records still in the log.
  std::size_t dead_records();

  /// Compaction runs after a delete once this many dead records make up
  /// more than half of the log.
  static constexpr std::size_t kCompactionThreshold = 64;

 private:
  struct Record {
    PlanSummary summary;
    std::uint64_t offset = 0;
    std::uint64_t length = 0;
    bool deleted = false;
  };

  void refresh_locked();
  void reload_locked(std::uint64_t generation);
  std::uint64_t read_generation() const;
  std::filesystem::path plans_path(std::uint64_t generation) const;
  std::filesystem::path index_path(std::uint64_t generation) const;
  void compact_locked();

  std::filesystem::path dir_;
  std::mutex mutex_;
  std::uint64_t generation_ = 0;
  std::uint64_t index_read_ = 0;  // bytes of the index consumed so far
  std::vector<Record> records_;
  std::map<std::string, std::size_t> by_id_;
};

/// WHATIF_STORE_DIR if set, else ./whatif-store.
std::filesystem::path default_store_dir();

}  // namespace whatif
