#include "jcas/sim.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "jcas/oracles.hpp"

namespace jcas {

// ---------------------------------------------------------------------------
// Support nodes
// ---------------------------------------------------------------------------

AppNode::AppNode(Fabric& fabric, ControlEngine& engine,
                 const std::string& name)
    : fabric_(fabric),
      engine_(engine),
      id_(make_principal(PrincipalKind::APP, name)) {
  fabric_.register_node(this);
}

void AppNode::on_deliver(const Envelope& env) {
  if (env.interface == Flow::SENS_RESPONSE) {
    responses_.push_back(
        {fabric_.now(), std::get<SensingResponse>(env.payload)});
  } else if (env.interface == Flow::RESULT_STREAM) {
    items_.push_back(
        {fabric_.now(), std::get<SensingResultItem>(env.payload)});
  }
}

void AppNode::submit(SensingRequest req, bool bad_credentials) {
  req.app_id = id_;
  for (std::uint64_t ch : fabric_.channels_for(Flow::SENS_REQ)) {
    const Channel& channel = fabric_.channel(ch);
    if (channel.config.endpoint_a.name != id_.name) continue;
    if (!bad_credentials) {
      engine_.dispatch(id_, channel.config.endpoint_b, Flow::SENS_REQ, req);
      return;
    }
    Envelope env = fabric_.make_envelope(Flow::SENS_REQ, id_,
                                         channel.config.endpoint_b, req);
    Token forged = engine_.token_for(id_);
    forged.tag ^= 0x1;  // guessing credentials
    env.credentials = forged;
    const ControlSwitches& sw = engine_.switches(Flow::SENS_REQ);
    if (sw.seal || sw.replay_protect) {
      engine_.sealer().seal(env, ch, sw.seal);
    }
    fabric_.send(ch, std::move(env));
    return;
  }
}

ThirdPartyNode::ThirdPartyNode(Fabric& fabric, ControlEngine& engine)
    : fabric_(fabric),
      engine_(engine),
      id_(make_principal(PrincipalKind::THIRD_PARTY, "third-party")) {
  fabric_.register_node(this);
}

void ThirdPartyNode::on_deliver(const Envelope& env) {
  if (env.interface == Flow::TRANSPARENCY_DISCLOSURE) {
    const auto& ex = std::get<TransparencyExchange>(env.payload);
    if (!ex.is_query) reports_.push_back(ex);
  }
}

void ThirdPartyNode::query(const std::string& subject) {
  TransparencyExchange ex;
  ex.is_query = true;
  ex.subject = subject;
  for (std::uint64_t ch :
       fabric_.channels_for(Flow::TRANSPARENCY_DISCLOSURE)) {
    const Channel& channel = fabric_.channel(ch);
    if (channel.config.endpoint_a.name != id_.name) continue;
    engine_.dispatch(id_, channel.config.endpoint_b,
                     Flow::TRANSPARENCY_DISCLOSURE, ex);
    return;
  }
}

TargetsNode::TargetsNode(Fabric& fabric)
    : fabric_(fabric), id_(make_principal(PrincipalKind::TARGET, "targets")) {
  fabric_.register_node(this);
}

void TargetsNode::on_deliver(const Envelope& env) {
  if (env.interface == Flow::TRANSPARENCY_BROADCAST) {
    notices_.push_back(std::get<TransparencyNotice>(env.payload));
  }
}

StoreNode::StoreNode(Fabric& fabric, Store& store, Tick retention)
    : fabric_(fabric),
      store_(store),
      retention_(retention),
      id_(make_principal(PrincipalKind::STORE, "store")) {
  fabric_.register_node(this);
}

void StoreNode::on_deliver(const Envelope& env) {
  if (env.interface != Flow::RECORD_STREAM) return;
  const auto& item = std::get<SensingResultItem>(env.payload);
  const std::string key = "uc-" + item.session_id + "-" +
                          std::to_string(item.produced_at) + "-" +
                          std::to_string(++seq_);
  std::optional<Tick> deadline;
  if (retention_ > 0) deadline = fabric_.now() + retention_;
  store_.put(Category::uc_data, key, encode_tagged_payload(item),
             fabric_.now(), deadline);
}

AdversaryNode::AdversaryNode(Fabric& fabric)
    : fabric_(fabric),
      id_(make_adversary("adversary", TrustDomain::third_party)) {
  fabric_.register_node(this);
}

void AdversaryNode::on_deliver(const Envelope& env) {
  captured_.push_back(env);
}

// ---------------------------------------------------------------------------
// Simulation assembly
// ---------------------------------------------------------------------------

namespace {

TagKey derive_key(Rng& rng) {
  TagKey k{};
  for (int half = 0; half < 2; ++half) {
    std::uint64_t v = rng.next_u64();
    for (int i = 0; i < 8; ++i) {
      k[8 * half + i] = static_cast<std::uint8_t>(v >> (8 * i));
    }
  }
  return k;
}

}  // namespace

Simulation::Simulation(Scenario scenario) : scenario_(std::move(scenario)) {
  build();
}

void Simulation::build() {
  fabric_ = std::make_unique<Fabric>(scenario_.seed);

  // All key material derives from the run seed; the registry is trusted by
  // construction.
  Rng kdf(scenario_.seed ^ 0x9E3779B97F4A7C15ull);
  KeyRegistry keys;
  keys.set_token_key(derive_key(kdf));
  keys.set_seal_key(derive_key(kdf));
  keys.set_pseudonym_secret(derive_key(kdf));
  const TagKey store_key = derive_key(kdf);

  engine_ = std::make_unique<ControlEngine>(*fabric_, keys, scenario_.profile,
                                            scenario_.control_options);
  engine_->attach();
  for (const auto& [flow, cfg] : scenario_.rate_limits) {
    engine_->rate_limiter().configure(flow, cfg);
  }

  store_ = std::make_unique<Store>(store_key);
  PrincipalId store_principal = make_principal(PrincipalKind::STORE, "store");
  store_->set_alert_handler([this, store_principal](const std::string& what) {
    fabric_->alert(store_principal, "seal", what);
  });
  store_->set_verify_on_read(
      scenario_.profile.at(Flow::DISCLOSURE_LOG).seal);
  for (const Target& t : scenario_.targets) {
    world_.add_target(t);
    store_->register_pii_string(t.pii.identity);
    store_->register_pii_string(t.pii.home_area);
  }

  store_node_ = std::make_unique<StoreNode>(*fabric_, *store_,
                                            scenario_.spctm.default_retention);
  spctm_ = std::make_unique<Spctm>(*fabric_, *engine_, *store_,
                                   scenario_.spctm);
  nef_ = std::make_unique<NefNode>(*fabric_, *engine_, scenario_.nef);

  std::vector<SuPose> poses;
  std::vector<ScfNode::SuInfo> su_infos;
  for (const SuSpec& spec : scenario_.sus) {
    poses.push_back(spec.pose());
    PrincipalId su_id = make_principal(
        spec.ue_hosted ? PrincipalKind::UE_SU : PrincipalKind::SU, spec.name);
    su_infos.push_back({su_id, spec.pose()});
  }
  scf_ = std::make_unique<ScfNode>(*fabric_, *engine_, su_infos,
                                   scenario_.scf);

  SpfNode::Config spf_cfg = scenario_.spf;
  spf_cfg.classifier =
      [this](const std::string& ref) -> std::optional<TargetClass> {
    const Target* t = world_.find_target(ref);
    if (!t) return std::nullopt;
    return t->cls;
  };
  spf_ = std::make_unique<SpfNode>(*fabric_, *engine_, poses, spf_cfg);

  for (const SuSpec& spec : scenario_.sus) {
    SuNode::Config cfg;
    cfg.ue_hosted = spec.ue_hosted;
    cfg.preprocessed = spec.preprocessed;
    cfg.local.consent_by_purpose = spec.consent;
    cfg.local.allowed_area = spec.allowed_area;
    cfg.local.min_granularity_contribution = spec.min_granularity_contribution;
    sus_.push_back(std::make_unique<SuNode>(*fabric_, *engine_, world_,
                                            spec.pose(), cfg));
  }

  targets_ = std::make_unique<TargetsNode>(*fabric_);
  if (scenario_.with_third_party) {
    third_party_ = std::make_unique<ThirdPartyNode>(*fabric_, *engine_);
  }
  adversary_ = std::make_unique<AdversaryNode>(*fabric_);
  for (const AppSpec& app : scenario_.apps) {
    apps_[app.name] =
        std::make_unique<AppNode>(*fabric_, *engine_, app.name);
    AppRegistration reg;
    reg.app = apps_[app.name]->principal();
    reg.permitted_areas = app.permitted_areas;
    reg.granularity_floor = app.granularity_floor;
    reg.sensing_types = app.sensing_types;
    nef_->register_app(std::move(reg));
  }

  for (const SensingPolicy& p : scenario_.policies) spctm_->add_policy(p);
  for (const ConsentRecord& c : scenario_.consents) spctm_->add_consent(c);
  store_->remember_checkpoint();

  // Channels follow the architecture topology; access rules mirror the
  // channel list exactly, so everything off-topology is default-deny.
  const PrincipalId nef_id = nef_->principal();
  const PrincipalId scf_id = scf_->principal();
  const PrincipalId spf_id = spf_->principal();
  const PrincipalId spctm_id = spctm_->principal();
  const PrincipalId store_id = store_node_->principal();
  const PrincipalId targets_id = targets_->principal();

  auto link = [&](const PrincipalId& a, const PrincipalId& b, Flow f) {
    const ChannelTuning tuning = scenario_.tuning_for(f);
    fabric_->open_channel({a, b, f, tuning.latency, tuning.capacity});
    AccessRule rule;
    rule.subject_name = a.name;
    rule.object_name = b.name;
    rule.operations = {f};
    engine_->access().add_rule(rule);
  };

  for (const auto& [name, app] : apps_) {
    link(app->principal(), nef_id, Flow::SENS_REQ);
    link(nef_id, app->principal(), Flow::SENS_RESPONSE);
    link(nef_id, app->principal(), Flow::RESULT_STREAM);
  }
  link(nef_id, spctm_id, Flow::SENS_POL_REQ);
  link(spctm_id, nef_id, Flow::SENS_POL_RESP);
  link(nef_id, spctm_id, Flow::DISCLOSURE_LOG);
  link(nef_id, scf_id, Flow::JCAS_API_REQ);
  link(scf_id, nef_id, Flow::JCAS_API_RESP);
  link(scf_id, spctm_id, Flow::POL_REQ);
  link(spctm_id, scf_id, Flow::POL_RESP);
  link(spf_id, spctm_id, Flow::POL_REQ);
  link(spctm_id, spf_id, Flow::POL_RESP);
  link(scf_id, spf_id, Flow::PROC_REQ);
  link(spf_id, scf_id, Flow::PROC_RESP);
  link(scf_id, spf_id, Flow::PROCESSING_ORCH_FLOW);
  link(spf_id, spf_id, Flow::PROCESSING_ORCH_FLOW);
  link(spf_id, spf_id, Flow::INTERPROCESS_STREAM);
  link(spf_id, nef_id, Flow::RESULT_STREAM);
  link(spf_id, store_id, Flow::RECORD_STREAM);
  for (const auto& su : sus_) {
    link(scf_id, su->principal(), Flow::CONFIG_RADIO_SESSION);
    link(scf_id, su->principal(), Flow::CONFIG_TRANSPARENCY);
    link(su->principal(), scf_id, Flow::CONFIG_RADIO_ACK);
    link(su->principal(), spf_id, Flow::TX_DATA);
    link(su->principal(), spf_id, Flow::RX_DATA);
    link(su->principal(), targets_id, Flow::TRANSPARENCY_BROADCAST);
  }
  if (third_party_) {
    link(spctm_id, third_party_->principal(), Flow::TRANSPARENCY_DISCLOSURE);
    link(third_party_->principal(), spctm_id, Flow::TRANSPARENCY_DISCLOSURE);
  }

  // One master hook keeps in-tick ordering fixed: world, attacks, script.
  fabric_->add_tick_hook([this](Tick now) {
    if (now > 0) world_.step(1);
    for (auto& hook : attack_hooks_) hook(now);
    script_tick(now);
  });
}

void Simulation::add_attack_hook(std::function<void(Tick)> hook) {
  attack_hooks_.push_back(std::move(hook));
}

void Simulation::script_tick(Tick now) {
  for (const RequestAction& action : scenario_.requests) {
    if (action.at != now) continue;
    AppNode* app = this->app(action.app);
    if (!app) continue;
    for (std::uint32_t i = 0; i < action.repeat; ++i) {
      SensingRequest req = action.request;
      if (action.repeat > 1) {
        req.request_id += "-" + std::to_string(i);
      }
      app->submit(std::move(req), action.bad_credentials);
    }
  }
  for (const ConsentAction& action : scenario_.consent_actions) {
    if (action.at != now) continue;
    if (action.grant) {
      ConsentRecord c;
      c.subject = action.subject;
      c.purpose = action.purpose;
      c.scope = "all";
      c.status = ConsentStatus::granted;
      spctm_->record_consent(c);
    } else {
      spctm_->revoke_consent(action.subject, action.purpose);
    }
  }
  for (const AuditAction& action : scenario_.audits) {
    if (action.at == now && third_party_) {
      third_party_->query(action.subject);
    }
  }
}

void Simulation::run() { fabric_->run_until(scenario_.duration); }

void Simulation::run_until(Tick t) { fabric_->run_until(t); }

AppNode* Simulation::app(const std::string& name) {
  auto it = apps_.find(name);
  return it == apps_.end() ? nullptr : it->second.get();
}

SuNode* Simulation::su(const std::string& name) {
  for (auto& su : sus_) {
    if (su->principal().name == name) return su.get();
  }
  return nullptr;
}

void Simulation::write_trace(const std::string& path) const {
  write_trace_file(path, fabric_->trace());
}

RunSummary Simulation::summarize() const {
  RunSummary out;
  const Trace& t = fabric_->trace();

  auto& c = out.counters;
  for (const TraceRecord& r : t.records) {
    if (const auto* f = std::get_if<FlowRecord>(&r)) {
      c["flow." + std::string(to_string(f->envelope.interface)) + "." +
        std::string(to_string(f->verdict))]++;
      if (f->crosses_boundary &&
          (f->verdict == Verdict::delivered ||
           f->verdict == Verdict::tampered)) {
        c["boundary_crossings"]++;
      }
    } else {
      const auto& e = std::get<EventRecord>(r);
      c["event." + std::string(to_string(e.kind))]++;
      if (e.kind == EventKind::alert) c["alert." + e.control]++;
    }
  }
  for (const TraceRecord& r : t.records) {
    if (const auto* f = std::get_if<FlowRecord>(&r)) {
      if (f->envelope.interface == Flow::SENS_RESPONSE &&
          f->verdict == Verdict::delivered) {
        const auto& resp = std::get<SensingResponse>(f->envelope.payload);
        c["responses." + std::string(to_string(resp.status))]++;
      }
    }
  }
  c["items_delivered_to_apps"] = oracles::count_delivered_to_kind(
      t, Flow::RESULT_STREAM, PrincipalKind::APP);
  c["disclosure_records"] = store_->count(Category::disclosure_log);
  c["uc_data_records"] = store_->count(Category::uc_data);
  c["budget.total"] = scf_->budget().total;
  c["budget.comm"] = scf_->budget().comm;
  c["budget.sensing"] = scf_->budget().sensing;
  c["pending_at_end"] = fabric_->pending();
  c["crossing_domain_pairs"] =
      static_cast<std::uint64_t>(fabric_->crossing_pairs().size());

  // ---- invariant battery ----
  for (const std::string& v :
       oracles::causality_violations(t, fabric_->channels())) {
    out.violations.push_back("causality: " + v);
  }
  if (!scf_->budget().conserved()) {
    out.violations.push_back("budget: comm + sensing exceeds total");
  }
  if (spf_->active_sessions() > spf_->capacity()) {
    out.violations.push_back("spf: active sessions exceed capacity");
  }
  for (const TraceRecord& r : t.records) {
    if (const auto* e = std::get_if<EventRecord>(&r)) {
      if (e->detail.find("budget conservation violated") !=
          std::string::npos) {
        out.violations.push_back("budget: conservation violated mid-run");
      }
    }
  }
  const bool clean_run = scenario_.threats.empty();
  if (clean_run && scenario_.profile.at(Flow::RESULT_STREAM).sanitise) {
    std::vector<std::string> raw_ids;
    std::vector<std::string> pii;
    for (const Target& target : scenario_.targets) {
      raw_ids.push_back(target.id);
      pii.push_back(target.pii.identity);
      pii.push_back(target.pii.home_area);
    }
    for (const std::string& v :
         oracles::sanitisation_violations(t, raw_ids, pii)) {
      out.violations.push_back("sanitisation: " + v);
    }
  }
  if (clean_run && fabric_->pending() == 0) {
    const auto counts = oracles::disclosure_completeness(t);
    if (!counts.losses_on_path &&
        counts.items_delivered_to_apps != counts.disclosure_records_delivered) {
      out.violations.push_back(
          "disclosure completeness: " +
          std::to_string(counts.items_delivered_to_apps) +
          " app deliveries vs " +
          std::to_string(counts.disclosure_records_delivered) + " records");
    }
  }
  return out;
}

std::string RunSummary::render_text() const {
  std::ostringstream os;
  os << "run summary\n";
  for (const auto& [key, value] : counters) {
    os << "  " << key << " = " << value << "\n";
  }
  if (violations.empty()) {
    os << "invariants: all satisfied\n";
  } else {
    os << "invariant violations (" << violations.size() << "):\n";
    for (const std::string& v : violations) os << "  ! " << v << "\n";
  }
  return os.str();
}

std::string RunSummary::render_jsonl() const {
  std::ostringstream os;
  for (const auto& [key, value] : counters) {
    os << "{\"counter\":\"" << key << "\",\"value\":" << value << "}\n";
  }
  for (const std::string& v : violations) {
    std::string escaped;
    for (char ch : v) {
      if (ch == '"' || ch == '\\') escaped.push_back('\\');
      escaped.push_back(ch);
    }
    os << "{\"violation\":\"" << escaped << "\"}\n";
  }
  return os.str();
}

}  // namespace jcas
