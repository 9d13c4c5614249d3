#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jcas/controls.hpp"
#include "jcas/ids.hpp"

namespace jcas {

// The six persistent record categories held by the sensing store.
enum class Category : std::uint8_t {
  sensing_policy,
  consent,
  session_policy,
  uc_data,
  disclosure_log,
  transparency,
};

std::string_view to_string(Category c);

struct StoreRecord {
  Category category{Category::uc_data};
  std::string key;
  std::string value;  // canonical-encoded payload
  Tick created_at{0};
  std::optional<Tick> retention_deadline;
  std::uint64_t integrity_tag{0};  // per-record keyed tag
  std::uint64_t chain_tag{0};      // disclosure_log only: chained tag

  bool operator==(const StoreRecord&) const = default;
};

enum class PutStatus : std::uint8_t {
  ok,
  pii_rejected,
  duplicate_append_only,
};

enum class SnapshotMode : std::uint8_t {
  attribute_preserving,  // keeps integrity and chain tags
  attribute_stripping,   // discards security attributes on export
};

// In-memory sensing store with retention, disposal, sanitisation enforcement,
// tamper-evident disclosure logging, and checkpoint/rollback.
class Store {
 public:
  using AlertFn = std::function<void(const std::string&)>;

  explicit Store(TagKey integrity_key) : key_(integrity_key) {}

  void set_alert_handler(AlertFn fn) { alert_ = std::move(fn); }
  void set_verify_on_read(bool on) { verify_on_read_ = on; }

  // Forbidden byte strings for the uc_data sanitisation check: target raw
  // ids and every PII attribute string the world injects.
  void register_pii_string(const std::string& s);

  PutStatus put(Category cat, const std::string& key, std::string value,
                Tick now, std::optional<Tick> retention_deadline);

  // Pure read; never returns purged records. With verify-on-read enabled a
  // record whose integrity tag no longer matches raises an alert and is
  // restored from the last checkpoint when possible.
  std::optional<StoreRecord> get(Category cat, const std::string& key);

  std::vector<StoreRecord> query(
      Category cat,
      const std::function<bool(const StoreRecord&)>& predicate) const;

  std::size_t count(Category cat) const;

  // Removes every record with retention_deadline <= now. Returns the number
  // purged; purged records are unrecoverable through any query.
  std::size_t dispose(Tick now);

  // --- integrity -----------------------------------------------------------
  bool verify_record(const StoreRecord& r) const;
  // Walks the disclosure_log chain; returns the key of the first record that
  // breaks it, or nullopt if intact.
  std::optional<std::string> verify_disclosure_chain() const;

  // --- checkpoint / rollback ----------------------------------------------
  struct Checkpoint {
    std::map<std::pair<std::uint8_t, std::string>, StoreRecord> records;
    std::uint64_t last_chain_tag{0};
  };
  Checkpoint checkpoint() const;
  // Restores checkpoint state exactly, except disclosure logs, which are
  // append-only and instead record the rollback event.
  bool rollback(const Checkpoint& cp, Tick now);

  // --- snapshot file --------------------------------------------------------
  void snapshot_to_file(const std::string& path, SnapshotMode mode) const;
  static std::vector<StoreRecord> load_snapshot(const std::string& path);

  // Direct mutation that bypasses every check. This is the insider/compromise
  // attack surface used by threat scenarios; production code never calls it.
  bool overwrite_unchecked(Category cat, const std::string& key,
                           std::string value);

 private:
  std::uint64_t record_tag(const StoreRecord& r) const;
  bool value_contains_pii(const std::string& value) const;

  TagKey key_;
  std::map<std::pair<std::uint8_t, std::string>, StoreRecord> records_;
  std::vector<std::string> disclosure_order_;  // chain order = append order
  std::uint64_t last_chain_tag_{0};
  std::vector<std::string> pii_strings_;
  bool verify_on_read_{false};
  std::optional<Checkpoint> last_checkpoint_;
  AlertFn alert_;

 public:
  // Remembers the most recent checkpoint for verify-on-read restoration.
  void remember_checkpoint() { last_checkpoint_ = checkpoint(); }
};

}  // namespace jcas
