#include "jcas/oracles.hpp"

#include <algorithm>
#include <set>

namespace jcas::oracles {

namespace {

template <typename Fn>
void for_each_flow(const Trace& t, Fn&& fn) {
  for (const TraceRecord& r : t.records) {
    if (const auto* f = std::get_if<FlowRecord>(&r)) fn(*f);
  }
}

bool delivered(const FlowRecord& f) {
  return f.verdict == Verdict::delivered || f.verdict == Verdict::tampered;
}

}  // namespace

std::uint64_t count_flow(const Trace& t, Flow f, Verdict v) {
  std::uint64_t n = 0;
  for_each_flow(t, [&](const FlowRecord& r) {
    if (r.envelope.interface == f && r.verdict == v) ++n;
  });
  return n;
}

std::uint64_t count_delivered_to_kind(const Trace& t, Flow f,
                                      PrincipalKind receiver) {
  std::uint64_t n = 0;
  for_each_flow(t, [&](const FlowRecord& r) {
    if (r.envelope.interface == f && delivered(r) &&
        r.envelope.receiver.kind == receiver) {
      ++n;
    }
  });
  return n;
}

std::optional<Tick> first_delivery(const Trace& t, Flow f) {
  std::optional<Tick> out;
  for_each_flow(t, [&](const FlowRecord& r) {
    if (!out && r.envelope.interface == f && delivered(r)) out = r.tick;
  });
  return out;
}

std::optional<Tick> first_delivery_to_kind(const Trace& t, Flow f,
                                           PrincipalKind receiver) {
  std::optional<Tick> out;
  for_each_flow(t, [&](const FlowRecord& r) {
    if (!out && r.envelope.interface == f && delivered(r) &&
        r.envelope.receiver.kind == receiver) {
      out = r.tick;
    }
  });
  return out;
}

std::uint64_t count_alerts(const Trace& t, const std::string& control) {
  std::uint64_t n = 0;
  for (const TraceRecord& r : t.records) {
    if (const auto* e = std::get_if<EventRecord>(&r)) {
      if (e->kind == EventKind::alert &&
          (control.empty() || e->control == control)) {
        ++n;
      }
    }
  }
  return n;
}

bool has_alert(const Trace& t, const std::string& control) {
  return count_alerts(t, control) > 0;
}

SequenceCheck check_happy_sequence(const Trace& t) {
  SequenceCheck out;
  struct Step {
    const char* name;
    std::optional<Tick> tick;
  };
  auto first_data = [&]() -> std::optional<Tick> {
    auto tx = first_delivery(t, Flow::TX_DATA);
    auto rx = first_delivery(t, Flow::RX_DATA);
    if (tx && rx) return std::min(*tx, *rx);
    return tx ? tx : rx;
  };
  std::vector<Step> chain = {
      {"SENS_REQ", first_delivery(t, Flow::SENS_REQ)},
      {"SENS_POL_REQ", first_delivery(t, Flow::SENS_POL_REQ)},
      {"SENS_POL_RESP", first_delivery(t, Flow::SENS_POL_RESP)},
      {"JCAS_API_REQ", first_delivery(t, Flow::JCAS_API_REQ)},
      {"POL_REQ", first_delivery(t, Flow::POL_REQ)},
      {"POL_RESP", first_delivery(t, Flow::POL_RESP)},
      {"PROC_REQ", first_delivery(t, Flow::PROC_REQ)},
      {"PROC_RESP", first_delivery(t, Flow::PROC_RESP)},
      {"CONFIG_RADIO_SESSION", first_delivery(t, Flow::CONFIG_RADIO_SESSION)},
      {"TX/RX_DATA", first_data()},
      {"RESULT_STREAM(NEF)",
       first_delivery_to_kind(t, Flow::RESULT_STREAM, PrincipalKind::NEF)},
      {"RESULT_STREAM(APP)",
       first_delivery_to_kind(t, Flow::RESULT_STREAM, PrincipalKind::APP)},
  };
  for (const Step& s : chain) {
    if (!s.tick) {
      out.errors.push_back(std::string(s.name) + " never delivered");
    }
  }
  if (!out.errors.empty()) return out;
  for (std::size_t i = 1; i < chain.size(); ++i) {
    if (*chain[i].tick < *chain[i - 1].tick) {
      out.errors.push_back(std::string(chain[i].name) + " at tick " +
                           std::to_string(*chain[i].tick) + " precedes " +
                           chain[i - 1].name + " at tick " +
                           std::to_string(*chain[i - 1].tick));
    }
  }
  auto log_tick = first_delivery(t, Flow::DISCLOSURE_LOG);
  if (!log_tick) {
    out.errors.push_back("DISCLOSURE_LOG never delivered");
  } else if (*log_tick < *chain.back().tick) {
    out.errors.push_back("DISCLOSURE_LOG precedes first app delivery");
  }
  out.ok = out.errors.empty();
  return out;
}

std::map<std::string, SessionPolicy> session_policies_from_trace(
    const Trace& t) {
  std::map<std::string, SessionPolicy> out;
  auto consider = [&](const SessionPolicy& p) {
    auto it = out.find(p.session_id);
    if (it == out.end() || p.version >= it->second.version) {
      out[p.session_id] = p;
    }
  };
  for_each_flow(t, [&](const FlowRecord& r) {
    if (!delivered(r)) return;
    if (const auto* reply = std::get_if<NegotiationReply>(&r.envelope.payload)) {
      if (reply->policy) consider(*reply->policy);
    }
    if (const auto* d = std::get_if<PolicyDecision>(&r.envelope.payload)) {
      if (d->bundle && d->unsolicited) consider(*d->bundle);
    }
  });
  return out;
}

std::vector<std::string> sanitisation_violations(
    const Trace& t, const std::vector<std::string>& raw_ids,
    const std::vector<std::string>& pii_strings) {
  std::vector<std::string> out;
  const std::map<std::string, SessionPolicy> policies =
      session_policies_from_trace(t);
  std::set<std::string> forbidden(raw_ids.begin(), raw_ids.end());
  for (const std::string& s : pii_strings) forbidden.insert(s);

  for_each_flow(t, [&](const FlowRecord& r) {
    const Flow f = r.envelope.interface;
    if (f != Flow::RESULT_STREAM && f != Flow::RECORD_STREAM) return;
    const auto* item = std::get_if<SensingResultItem>(&r.envelope.payload);
    if (!item) return;
    const std::string where =
        std::string(to_string(f)) + " msg " +
        std::to_string(r.envelope.msg_id) + " tick " + std::to_string(r.tick);
    if (item->disclosure_level != DisclosureLevel::sanitised) {
      out.push_back(where + ": disclosure level raw");
    }
    double granularity = 0.0;
    auto pol = policies.find(item->session_id);
    if (pol != policies.end()) {
      granularity = pol->second.constraints.min_granularity_m;
    }
    for (const Detection& d : item->detections) {
      if (forbidden.count(d.object_ref) > 0) {
        out.push_back(where + ": raw identifier " + d.object_ref);
      }
      if (granularity > 0.0 && !on_grid(d.position, granularity)) {
        out.push_back(where + ": position finer than granularity " +
                      std::to_string(granularity));
      }
    }
  });
  return out;
}

CompletenessCount disclosure_completeness(const Trace& t) {
  CompletenessCount out;
  for_each_flow(t, [&](const FlowRecord& r) {
    const Flow f = r.envelope.interface;
    if (f == Flow::RESULT_STREAM &&
        r.envelope.receiver.kind == PrincipalKind::APP) {
      if (delivered(r)) {
        ++out.items_delivered_to_apps;
      } else {
        out.losses_on_path = true;
      }
    }
    if (f == Flow::DISCLOSURE_LOG) {
      if (delivered(r)) {
        ++out.disclosure_records_delivered;
      } else {
        out.losses_on_path = true;
      }
    }
  });
  return out;
}

std::vector<std::string> causality_violations(
    const Trace& t, const std::map<std::uint64_t, Channel>& channels) {
  std::vector<std::string> out;
  for_each_flow(t, [&](const FlowRecord& r) {
    auto ch = channels.find(r.channel_id);
    if (ch == channels.end()) {
      out.push_back("flow on unknown channel " +
                    std::to_string(r.channel_id));
      return;
    }
    const Tick expected = r.envelope.sent_at + ch->second.config.latency;
    if (r.tick != expected) {
      out.push_back("msg " + std::to_string(r.envelope.msg_id) +
                    " handled at tick " + std::to_string(r.tick) +
                    ", expected " + std::to_string(expected));
    }
    const bool domains_differ = ch->second.config.endpoint_a.trust_domain !=
                                ch->second.config.endpoint_b.trust_domain;
    if (r.crosses_boundary != domains_differ) {
      out.push_back("msg " + std::to_string(r.envelope.msg_id) +
                    " boundary flag inconsistent");
    }
  });
  return out;
}

std::optional<Tick> response_tick(const Trace& t,
                                  const std::string& request_id,
                                  RespStatus status) {
  std::optional<Tick> out;
  for_each_flow(t, [&](const FlowRecord& r) {
    if (out || r.envelope.interface != Flow::SENS_RESPONSE || !delivered(r)) {
      return;
    }
    const auto* resp = std::get_if<SensingResponse>(&r.envelope.payload);
    if (resp && resp->request_id == request_id && resp->status == status) {
      out = r.tick;
    }
  });
  return out;
}

std::uint64_t deliveries_with_object_after(const Trace& t,
                                           const std::string& object_ref,
                                           Tick after) {
  std::uint64_t n = 0;
  for_each_flow(t, [&](const FlowRecord& r) {
    if (r.envelope.interface != Flow::RESULT_STREAM || !delivered(r)) return;
    if (r.envelope.receiver.kind != PrincipalKind::APP) return;
    if (r.tick <= after) return;
    const auto* item = std::get_if<SensingResultItem>(&r.envelope.payload);
    if (!item) return;
    for (const Detection& d : item->detections) {
      if (d.object_ref == object_ref) {
        ++n;
        break;
      }
    }
  });
  return n;
}

}  // namespace jcas::oracles
