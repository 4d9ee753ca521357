#pragma once

// Server-side cache of executed requests, kept until an audit may no longer
// arrive. Entries are shared immutable snapshots: an audit holding one keeps
// it alive even if a concurrent purge drops it from the index.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>

#include "logitaudit/commitment.h"
#include "logitaudit/messages.h"

namespace logitaudit {

struct LogEntry {
  RequestId request_id;
  Prompt prompt;
  ExecutionResult result;
  Commitment commitment;
  std::uint64_t created_at = 0;  // simulated seconds
  bool retained = true;
  // Ran under the server's attack deployment (simulation ground truth).
  bool attacked = false;

  TraceOpening opening() const { return {result.seed_r, result.trace}; }
  bool operator==(const LogEntry&) const = default;
};

Json to_json(const LogEntry& e);
LogEntry log_entry_from_json(const Json& j);

// Serialized JSON size of `e` divided by its token-sampling steps.
double bytes_per_token(const LogEntry& e);

inline constexpr std::size_t kDefaultLogCapacity = 1'000'000;
inline constexpr std::uint64_t kDefaultRetentionSeconds = 24 * 3600;

class LogStore {
 public:
  explicit LogStore(std::size_t capacity = kDefaultLogCapacity);

  // Throws Error(kDuplicateId). At capacity the oldest entry is evicted.
  void put(LogEntry entry);
  std::shared_ptr<const LogEntry> get(const RequestId& id) const;
  // Removes every entry with now - created_at >= max_age; returns how many.
  std::size_t purge(std::uint64_t now, std::uint64_t max_age);
  // Replaces an entry by a modified copy. Returns false if absent. Used to
  // model a server that rewrites its log after responding.
  bool update(const RequestId& id, const std::function<void(LogEntry&)>& edit);

  std::size_t size() const;

  // One JSON object per line in insertion order, plus `<path>.idx` mapping
  // each request id to its line's byte offset.
  void save_jsonl(const std::filesystem::path& path) const;
  // Inserts every line of a file written by save_jsonl.
  void load_jsonl(const std::filesystem::path& path);

 private:
  void evict_oldest_locked();

  mutable std::mutex mu_;
  std::size_t capacity_;
  std::uint64_t next_seq_ = 0;
  struct Slot {
    std::uint64_t seq;
    std::shared_ptr<const LogEntry> entry;
  };
  std::map<RequestId, Slot> entries_;
};

}  // namespace logitaudit
