#include "jcas/store.hpp"

#include <algorithm>
#include <fstream>

#include "jcas/codec.hpp"
#include "jcas/messages.hpp"

namespace jcas {

namespace {

std::string record_core_bytes(const StoreRecord& r) {
  codec::Writer w;
  w.u8(static_cast<std::uint8_t>(r.category));
  w.str(r.key);
  w.str(r.value);
  w.u64(r.created_at);
  w.opt(r.retention_deadline, [](codec::Writer& ww, Tick t) { ww.u64(t); });
  return w.take();
}

}  // namespace

std::string_view to_string(Category c) {
  switch (c) {
    case Category::sensing_policy:
      return "sensing_policy";
    case Category::consent:
      return "consent";
    case Category::session_policy:
      return "session_policy";
    case Category::uc_data:
      return "uc_data";
    case Category::disclosure_log:
      return "disclosure_log";
    case Category::transparency:
      return "transparency";
  }
  return "?";
}

void Store::register_pii_string(const std::string& s) {
  if (s.empty()) return;
  if (std::find(pii_strings_.begin(), pii_strings_.end(), s) ==
      pii_strings_.end()) {
    pii_strings_.push_back(s);
  }
}

std::uint64_t Store::record_tag(const StoreRecord& r) const {
  return keyed_tag(record_core_bytes(r), key_);
}

bool Store::value_contains_pii(const std::string& value) const {
  for (const std::string& s : pii_strings_) {
    if (value.find(s) != std::string::npos) return true;
  }
  if (auto payload = decode_tagged_payload(value)) {
    if (const auto* m = std::get_if<Measurement>(&*payload)) {
      for (const Echo& e : m->echoes) {
        if (!e.raw_object_ref.empty()) return true;
      }
    }
    if (const auto* item = std::get_if<SensingResultItem>(&*payload)) {
      if (item->disclosure_level == DisclosureLevel::raw) return true;
    }
  }
  return false;
}

PutStatus Store::put(Category cat, const std::string& key, std::string value,
                     Tick now, std::optional<Tick> retention_deadline) {
  if (cat == Category::uc_data && value_contains_pii(value)) {
    if (alert_) alert_("uc_data record rejected: sanitisation check failed");
    return PutStatus::pii_rejected;
  }
  const auto map_key = std::make_pair(static_cast<std::uint8_t>(cat), key);
  if (cat == Category::disclosure_log && records_.count(map_key) > 0) {
    return PutStatus::duplicate_append_only;
  }
  StoreRecord r;
  r.category = cat;
  r.key = key;
  r.value = std::move(value);
  r.created_at = now;
  r.retention_deadline = retention_deadline;
  r.integrity_tag = record_tag(r);
  if (cat == Category::disclosure_log) {
    codec::Writer w;
    w.u64(last_chain_tag_);
    w.str(record_core_bytes(r));
    r.chain_tag = keyed_tag(w.bytes(), key_);
    last_chain_tag_ = r.chain_tag;
    disclosure_order_.push_back(key);
  }
  records_[map_key] = std::move(r);
  return PutStatus::ok;
}

std::optional<StoreRecord> Store::get(Category cat, const std::string& key) {
  const auto map_key = std::make_pair(static_cast<std::uint8_t>(cat), key);
  auto it = records_.find(map_key);
  if (it == records_.end()) return std::nullopt;
  if (verify_on_read_ && !verify_record(it->second)) {
    if (alert_) {
      alert_("integrity violation on " + std::string(to_string(cat)) + "/" +
             key);
    }
    if (last_checkpoint_) {
      auto cp_it = last_checkpoint_->records.find(map_key);
      if (cp_it != last_checkpoint_->records.end()) {
        it->second = cp_it->second;
        return it->second;
      }
    }
    return std::nullopt;
  }
  return it->second;
}

std::vector<StoreRecord> Store::query(
    Category cat,
    const std::function<bool(const StoreRecord&)>& predicate) const {
  std::vector<StoreRecord> out;
  for (const auto& [k, r] : records_) {
    if (k.first != static_cast<std::uint8_t>(cat)) continue;
    if (!predicate || predicate(r)) out.push_back(r);
  }
  return out;
}

std::size_t Store::count(Category cat) const {
  std::size_t n = 0;
  for (const auto& [k, r] : records_) {
    if (k.first == static_cast<std::uint8_t>(cat)) ++n;
  }
  return n;
}

std::size_t Store::dispose(Tick now) {
  std::size_t purged = 0;
  for (auto it = records_.begin(); it != records_.end();) {
    if (it->second.retention_deadline && *it->second.retention_deadline <= now) {
      if (it->second.category == Category::disclosure_log) {
        disclosure_order_.erase(std::remove(disclosure_order_.begin(),
                                            disclosure_order_.end(),
                                            it->second.key),
                                disclosure_order_.end());
      }
      it = records_.erase(it);
      ++purged;
    } else {
      ++it;
    }
  }
  return purged;
}

bool Store::verify_record(const StoreRecord& r) const {
  return r.integrity_tag == record_tag(r);
}

std::optional<std::string> Store::verify_disclosure_chain() const {
  std::uint64_t prev = 0;
  for (const std::string& key : disclosure_order_) {
    auto it = records_.find(
        {static_cast<std::uint8_t>(Category::disclosure_log), key});
    if (it == records_.end()) return key;  // removed without disposal
    codec::Writer w;
    w.u64(prev);
    w.str(record_core_bytes(it->second));
    if (keyed_tag(w.bytes(), key_) != it->second.chain_tag) return key;
    prev = it->second.chain_tag;
  }
  return std::nullopt;
}

Store::Checkpoint Store::checkpoint() const {
  return Checkpoint{records_, last_chain_tag_};
}

bool Store::rollback(const Checkpoint& cp, Tick now) {
  // Preserve the append-only disclosure log across the rollback.
  std::map<std::pair<std::uint8_t, std::string>, StoreRecord> kept;
  for (const auto& [k, r] : records_) {
    if (r.category == Category::disclosure_log) kept[k] = r;
  }
  records_ = cp.records;
  for (const auto& [k, r] : kept) records_[k] = r;
  put(Category::disclosure_log,
      "rollback-" + std::to_string(now) + "-" +
          std::to_string(disclosure_order_.size()),
      "store rollback applied", now, std::nullopt);
  return true;
}

void Store::snapshot_to_file(const std::string& path,
                             SnapshotMode mode) const {
  codec::Writer w;
  w.str("JCSS");
  w.u32(1);
  w.u32(static_cast<std::uint32_t>(records_.size()));
  for (const auto& [k, r] : records_) {
    w.u8(static_cast<std::uint8_t>(r.category));
    w.str(r.key);
    w.str(r.value);
    w.u64(r.created_at);
    w.opt(r.retention_deadline, [](codec::Writer& ww, Tick t) { ww.u64(t); });
    const bool strip = mode == SnapshotMode::attribute_stripping;
    w.u64(strip ? 0 : r.integrity_tag);
    w.u64(strip ? 0 : r.chain_tag);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(w.bytes().data(),
            static_cast<std::streamsize>(w.bytes().size()));
}

std::vector<StoreRecord> Store::load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  codec::Reader r(bytes);
  if (r.str() != "JCSS") r.fail("bad snapshot magic");
  if (r.u32() != 1) r.fail("unsupported snapshot version");
  const std::uint32_t n = r.u32();
  std::vector<StoreRecord> out;
  out.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    StoreRecord rec;
    std::uint8_t cat = r.u8();
    if (cat > static_cast<std::uint8_t>(Category::transparency)) {
      r.fail("bad category");
    }
    rec.category = static_cast<Category>(cat);
    rec.key = r.str();
    rec.value = r.str();
    rec.created_at = r.u64();
    rec.retention_deadline =
        r.opt<Tick>([](codec::Reader& rr) { return rr.u64(); });
    rec.integrity_tag = r.u64();
    rec.chain_tag = r.u64();
    out.push_back(std::move(rec));
  }
  r.expect_done();
  return out;
}

bool Store::overwrite_unchecked(Category cat, const std::string& key,
                                std::string value) {
  auto it = records_.find({static_cast<std::uint8_t>(cat), key});
  if (it == records_.end()) return false;
  it->second.value = std::move(value);
  return true;
}

}  // namespace jcas
