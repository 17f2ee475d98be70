#include "whatif/plan_store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <fstream>

namespace whatif {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void io_error(const std::string& what, const fs::path& path) {
  throw StoreError(StoreError::Kind::kIo, what + " " + path.string() + ": " + std::strerror(errno));
}

class Fd {
 public:
  Fd(const fs::path& path, int flags) : path_(path), fd_(::open(path.c_str(), flags | O_CLOEXEC, 0644)) {
    if (fd_ < 0) io_error("cannot open", path);
  }
  ~Fd() {
    if (fd_ >= 0) ::close(fd_);
  }
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;

  int get() const { return fd_; }

  std::uint64_t size() const {
    struct stat st {};
    if (::fstat(fd_, &st) != 0) io_error("cannot stat", path_);
    return static_cast<std::uint64_t>(st.st_size);
  }

  void write_all(const std::string& data) {
    std::size_t done = 0;
    while (done < data.size()) {
      const auto n = ::write(fd_, data.data() + done, data.size() - done);
      if (n < 0) {
        if (errno == EINTR) continue;
        io_error("cannot write", path_);
      }
      done += static_cast<std::size_t>(n);
    }
  }

  std::string read_at(std::uint64_t offset, std::uint64_t length) const {
    std::string out(length, '\0');
    std::size_t done = 0;
    while (done < length) {
      const auto n = ::pread(fd_, out.data() + done, length - done, static_cast<off_t>(offset + done));
      if (n < 0) {
        if (errno == EINTR) continue;
        io_error("cannot read", path_);
      }
      if (n == 0) break;
      done += static_cast<std::size_t>(n);
    }
    out.resize(done);
    return out;
  }

  void sync() {
    if (::fsync(fd_) != 0) io_error("cannot sync", path_);
  }

  // Drops a trailing partial line left by an interrupted writer.
  void trim_partial_line() {
    auto end = size();
    std::uint64_t keep = end;
    while (keep > 0) {
      const std::uint64_t chunk = std::min<std::uint64_t>(keep, 4096);
      const auto buf = read_at(keep - chunk, chunk);
      const auto pos = buf.find_last_of('\n');
      if (pos != std::string::npos) {
        keep = keep - chunk + pos + 1;
        break;
      }
      keep -= chunk;
    }
    if (keep != end && ::ftruncate(fd_, static_cast<off_t>(keep)) != 0) io_error("cannot truncate", path_);
  }

 private:
  fs::path path_;
  int fd_;
};

class WriteLock {
 public:
  explicit WriteLock(const fs::path& path) : fd_(path, O_RDWR | O_CREAT) {
    while (::flock(fd_.get(), LOCK_EX) != 0) {
      if (errno != EINTR) io_error("cannot lock", path);
    }
  }
  ~WriteLock() { ::flock(fd_.get(), LOCK_UN); }

 private:
  Fd fd_;
};

void sync_dir(const fs::path& dir) {
  Fd d(dir, O_RDONLY | O_DIRECTORY);
  d.sync();
}

}  // namespace

PlanStore::PlanStore(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec || !fs::is_directory(dir_)) {
    throw StoreError(StoreError::Kind::kIo, "cannot create store directory " + dir_.string());
  }
  std::lock_guard lock(mutex_);
  refresh_locked();
}

fs::path PlanStore::plans_path(std::uint64_t g) const {
  return dir_ / ("plans-" + std::to_string(g) + ".jsonl");
}

fs::path PlanStore::index_path(std::uint64_t g) const {
  return dir_ / ("index-" + std::to_string(g) + ".jsonl");
}

std::uint64_t PlanStore::read_generation() const {
  std::ifstream in(dir_ / "CURRENT");
  std::uint64_t g = 0;
  if (in) in >> g;
  return g;
}

void PlanStore::reload_locked(std::uint64_t generation) {
  generation_ = generation;
  index_read_ = 0;
  records_.clear();
  by_id_.clear();
}

void PlanStore::refresh_locked() {
  const auto g = read_generation();
  if (g != generation_) reload_locked(g);
  const auto path = index_path(generation_);
  if (!fs::exists(path)) return;
  Fd fd(path, O_RDONLY);
  const auto size = fd.size();
  if (size <= index_read_) return;
  const auto text = fd.read_at(index_read_, size - index_read_);
  std::size_t start = 0;
  while (true) {
    const auto nl = text.find('\n', start);
    if (nl == std::string::npos) break;  // incomplete tail: not committed yet
    const auto line = std::string_view(text).substr(start, nl - start);
    start = nl + 1;
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
      if (j.contains("put")) {
        Record r{summary_from_json(j.at("put")), j.at("offset").get<std::uint64_t>(),
                 j.at("length").get<std::uint64_t>(), false};
        by_id_[r.summary.id] = records_.size();
        records_.push_back(std::move(r));
      } else {
        const auto it = by_id_.find(j.at("delete").get<std::string>());
        if (it != by_id_.end()) records_[it->second].deleted = true;
      }
    } catch (const std::exception& e) {
      throw StoreError(StoreError::Kind::kIo, "corrupt store index " + path.string() + ": " + e.what());
    }
  }
  index_read_ += start;
}

std::string PlanStore::put(const Plan& plan) {
  std::lock_guard lock(mutex_);
  WriteLock write_lock(dir_ / "LOCK");
  refresh_locked();
  if (plan.parent_id && !by_id_.count(*plan.parent_id)) {
    throw StoreError(StoreError::Kind::kInvalid, "unknown parent plan " + *plan.parent_id);
  }
  Plan stored = plan;
  if (stored.id.empty() || by_id_.count(stored.id)) stored.id = new_plan_id();

  const bool fresh = !fs::exists(index_path(generation_));
  const auto body = to_json(stored).dump() + "\n";
  Fd plans(plans_path(generation_), O_RDWR | O_CREAT | O_APPEND);
  plans.trim_partial_line();
  const auto offset = plans.size();
  plans.write_all(body);
  plans.sync();

  auto summary = summarize(stored);
  const Json entry{{"put", to_json(summary)}, {"offset", offset}, {"length", body.size()}};
  const auto line = entry.dump() + "\n";
  Fd index(index_path(generation_), O_RDWR | O_CREAT | O_APPEND);
  index.trim_partial_line();
  index.write_all(line);
  index.sync();
  if (fresh) sync_dir(dir_);

  by_id_[stored.id] = records_.size();
  records_.push_back({std::move(summary), offset, body.size(), false});
  index_read_ += line.size();
  return stored.id;
}

Plan PlanStore::get(const std::string& id) {
  std::lock_guard lock(mutex_);
  for (int attempt = 0;; ++attempt) {
    refresh_locked();
    const auto it = by_id_.find(id);
    if (it == by_id_.end() || records_[it->second].deleted) {
      throw StoreError(StoreError::Kind::kNotFound, "no plan with id " + id);
    }
    const auto& r = records_[it->second];
    try {
      Fd fd(plans_path(generation_), O_RDONLY);
      const auto text = fd.read_at(r.offset, r.length);
      return plan_from_json(Json::parse(text));
    } catch (const StoreError&) {
      // A concurrent compaction may have retired this generation.
      if (attempt > 0) throw;
      reload_locked(read_generation());
    }
  }
}

bool PlanStore::contains(const std::string& id) {
  std::lock_guard lock(mutex_);
  refresh_locked();
  const auto it = by_id_.find(id);
  return it != by_id_.end() && !records_[it->second].deleted;
}

std::vector<StoreEntry> PlanStore::list() {
  std::lock_guard lock(mutex_);
  refresh_locked();
  std::vector<StoreEntry> out;
  for (const auto& r : records_) {
    if (r.deleted) continue;
    StoreEntry e{r.summary, false};
    if (r.summary.parent_id) {
      const auto it = by_id_.find(*r.summary.parent_id);
      e.parent_deleted = it == by_id_.end() || records_[it->second].deleted;
    }
    out.push_back(std::move(e));
  }
  return out;
}

void PlanStore::remove(const std::string& id) {
  std::lock_guard lock(mutex_);
  WriteLock write_lock(dir_ / "LOCK");
  refresh_locked();
  const auto it = by_id_.find(id);
  if (it == by_id_.end() || records_[it->second].deleted) {
    throw StoreError(StoreError::Kind::kNotFound, "no plan with id " + id);
  }
  const auto line = Json{{"delete", id}}.dump() + "\n";
  Fd index(index_path(generation_), O_RDWR | O_CREAT | O_APPEND);
  index.trim_partial_line();
  index.write_all(line);
  index.sync();
  records_[it->second].deleted = true;
  index_read_ += line.size();

  std::size_t dead = 0;
  for (const auto& r : records_) dead += r.deleted ? 1 : 0;
  if (dead >= kCompactionThreshold && 2 * dead > records_.size()) compact_locked();
}

void PlanStore::compact() {
  std::lock_guard lock(mutex_);
  WriteLock write_lock(dir_ / "LOCK");
  refresh_locked();
  compact_locked();
}

void PlanStore::compact_locked() {
  const auto old = generation_;
  const auto next = old + 1;
  std::vector<Record> live;
  {
    Fd plans_out(plans_path(next), O_WRONLY | O_CREAT | O_TRUNC);
    Fd index_out(index_path(next), O_WRONLY | O_CREAT | O_TRUNC);
    std::optional<Fd> plans_in;
    if (fs::exists(plans_path(old))) plans_in.emplace(plans_path(old), O_RDONLY);
    std::uint64_t offset = 0;
    std::string index_text;
    for (const auto& r : records_) {
      if (r.deleted) continue;
      const auto body = plans_in->read_at(r.offset, r.length);
      plans_out.write_all(body);
      index_text += Json{{"put", to_json(r.summary)}, {"offset", offset}, {"length", body.size()}}.dump() + "\n";
      live.push_back({r.summary, offset, body.size(), false});
      offset += body.size();
    }
    index_out.write_all(index_text);
    plans_out.sync();
    index_out.sync();
  }
  const auto tmp = dir_ / "CURRENT.tmp";
  {
    Fd cur(tmp, O_WRONLY | O_CREAT | O_TRUNC);
    cur.write_all(std::to_string(next) + "\n");
    cur.sync();
  }
  std::error_code ec;
  fs::rename(tmp, dir_ / "CURRENT", ec);
  if (ec) throw StoreError(StoreError::Kind::kIo, "cannot switch store generation: " + ec.message());
  sync_dir(dir_);
  fs::remove(plans_path(old), ec);
  fs::remove(index_path(old), ec);

  reload_locked(next);
  for (auto& r : live) {
    by_id_[r.summary.id] = records_.size();
    records_.push_back(std::move(r));
  }
  index_read_ = Fd(index_path(next), O_RDONLY).size();
}

std::size_t PlanStore::dead_records() {
  std::lock_guard lock(mutex_);
  refresh_locked();
  std::size_t dead = 0;
  for (const auto& r : records_) dead += r.deleted ? 1 : 0;
  return dead;
}

fs::path default_store_dir() {
  if (const char* env = std::getenv("WHATIF_STORE_DIR"); env && *env) return env;
  return "whatif-store";
}

}  // namespace whatif
