#include "logitaudit/log_store.h"

#include <algorithm>
#include <fstream>
#include <vector>

#include "logitaudit/error.h"

namespace logitaudit {

Json to_json(const LogEntry& e) {
  return {{"request_id", e.request_id.str()},
          {"prompt", e.prompt},
          {"result", to_json(e.result)},
          {"commitment", e.commitment.hex()},
          {"scheme", e.commitment.scheme_id},
          {"created_at", e.created_at},
          {"retained", e.retained},
          {"attacked", e.attacked}};
}

LogEntry log_entry_from_json(const Json& j) {
  try {
    LogEntry e;
    e.request_id = RequestId::parse(j.at("request_id").get<std::string>());
    e.prompt = j.at("prompt").get<Prompt>();
    e.result = execution_result_from_json(j.at("result"));
    e.commitment = Commitment::from_hex(j.at("commitment").get<std::string>(),
                                        j.at("scheme").get<std::string>());
    e.created_at = j.at("created_at").get<std::uint64_t>();
    e.retained = j.at("retained").get<bool>();
    e.attacked = j.value("attacked", false);
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::kParseError, ex.what());
  }
}

double bytes_per_token(const LogEntry& e) {
  const auto tokens = std::count_if(e.result.trace.begin(), e.result.trace.end(), [](const StepTrace& s) {
    return s.decision_kind == DecisionKind::kTokenSample;
  });
  if (tokens == 0) throw Error(ErrorCode::kEmptyTrace, "entry has no token steps");
  return static_cast<double>(to_json(e).dump().size()) / static_cast<double>(tokens);
}

LogStore::LogStore(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw Error(ErrorCode::kInvalidArgument, "log capacity must be positive");
}

void LogStore::evict_oldest_locked() {
  auto oldest = std::min_element(entries_.begin(), entries_.end(), [](const auto& a, const auto& b) {
    if (a.second.entry->created_at != b.second.entry->created_at) {
      return a.second.entry->created_at < b.second.entry->created_at;
    }
    return a.second.seq < b.second.seq;
  });
  if (oldest != entries_.end()) entries_.erase(oldest);
}

void LogStore::put(LogEntry entry) {
  std::lock_guard lock(mu_);
  if (entries_.count(entry.request_id) != 0) {
    throw Error(ErrorCode::kDuplicateId, entry.request_id.str());
  }
  if (entries_.size() >= capacity_) evict_oldest_locked();
  entry.retained = true;
  const RequestId id = entry.request_id;
  entries_.emplace(id, Slot{next_seq_++, std::make_shared<const LogEntry>(std::move(entry))});
}

std::shared_ptr<const LogEntry> LogStore::get(const RequestId& id) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(id);
  return it == entries_.end() ? nullptr : it->second.entry;
}

std::size_t LogStore::purge(std::uint64_t now, std::uint64_t max_age) {
  std::lock_guard lock(mu_);
  return std::erase_if(entries_, [&](const auto& kv) {
    const std::uint64_t created = kv.second.entry->created_at;
    return now < created ? max_age == 0 : now - created >= max_age;
  });
}

bool LogStore::update(const RequestId& id, const std::function<void(LogEntry&)>& edit) {
  std::lock_guard lock(mu_);
  auto it = entries_.find(id);
  if (it == entries_.end()) return false;
  LogEntry copy = *it->second.entry;
  edit(copy);
  copy.request_id = id;
  it->second.entry = std::make_shared<const LogEntry>(std::move(copy));
  return true;
}

std::size_t LogStore::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

void LogStore::save_jsonl(const std::filesystem::path& path) const {
  std::vector<const Slot*> ordered;
  std::lock_guard lock(mu_);
  for (const auto& kv : entries_) ordered.push_back(&kv.second);
  std::sort(ordered.begin(), ordered.end(), [](const Slot* a, const Slot* b) { return a->seq < b->seq; });

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write " + path.string());
  Json index = Json::object();
  std::uint64_t offset = 0;
  for (const Slot* s : ordered) {
    const std::string line = to_json(*s->entry).dump() + "\n";
    index[s->entry->request_id.str()] = offset;
    out << line;
    offset += line.size();
  }
  std::ofstream idx(path.string() + ".idx", std::ios::binary | std::ios::trunc);
  idx << index.dump() << "\n";
  if (!out || !idx) throw Error(ErrorCode::kInvalidArgument, "failed writing " + path.string());
}

void LogStore::load_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kInvalidArgument, "cannot read " + path.string());
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParseError, e.what());
    }
    put(log_entry_from_json(j));
  }
}

}  // namespace logitaudit
