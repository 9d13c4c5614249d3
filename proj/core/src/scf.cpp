#include "jcas/scf.hpp"

#include <algorithm>
#include <cmath>

namespace jcas {

namespace {

Tick round_up(Tick value, Tick step) {
  if (step <= 1) return value;
  return ((value + step - 1) / step) * step;
}

}  // namespace

ScfNode::ScfNode(Fabric& fabric, ControlEngine& engine,
                 std::vector<SuInfo> sus, Config config)
    : fabric_(fabric),
      engine_(engine),
      config_(config),
      id_(make_principal(PrincipalKind::SCF, "scf")),
      sus_(std::move(sus)) {
  budget_.total = config_.budget_total;
  budget_.comm = config_.budget_total;
  budget_.sensing = 0;
  fabric_.register_node(this);
}

void ScfNode::respond_parent(const Parent& parent, RespStatus status,
                             std::optional<Reason> reason,
                             const std::string& session_id) {
  SensingResponse resp;
  resp.request_id = parent.request_id;
  resp.status = status;
  resp.reason = reason;
  if (status == RespStatus::accepted) {
    resp.result_channel = session_id;
    resp.policy_id = parent.policy_id;
  }
  for (std::uint64_t ch : fabric_.channels_for(Flow::JCAS_API_RESP)) {
    const Channel& channel = fabric_.channel(ch);
    if (channel.config.endpoint_a.name != id_.name) continue;
    engine_.dispatch(id_, channel.config.endpoint_b, Flow::JCAS_API_RESP,
                     resp);
    break;
  }
}

bool ScfNode::compatible(const Parent& a, const SensingRequest& b) const {
  if (a.purpose != b.purpose) return false;
  const Tick step = std::max(a.granularity_ticks, b.qod.temporal_ticks);
  if (round_up(a.periodicity, step) != round_up(b.periodicity, step)) {
    return false;
  }
  // Area overlap at the coarser granularity must reach the configured
  // fraction of the smaller request.
  const double g = std::max(a.granularity_m, b.qod.spatial_m);
  const Rect everywhere{{-1e12, -1e12}, {1e12, 1e12}};
  CellRegion ca = CellRegion::rasterize(a.area, everywhere, g);
  CellRegion cb = CellRegion::rasterize(b.target_spec.area, everywhere, g);
  if (ca.empty() || cb.empty()) return false;
  const CellRegion overlap = ca.subtract(ca.subtract(cb));
  const double frac =
      static_cast<double>(overlap.size()) /
      static_cast<double>(std::min(ca.size(), cb.size()));
  return frac >= config_.aggregation_overlap_fraction;
}

void ScfNode::plan(std::vector<SensingRequest> batch) {
  std::vector<Task*> planned;
  for (SensingRequest& req : batch) {
    if (req.policy_ref.empty()) {
      fabric_.emit_event(EventKind::warning, id_, "operational",
                         "request " + req.request_id +
                             " arrived without policy reference");
      continue;
    }
    Parent parent;
    parent.request_id = req.request_id;
    parent.policy_id = req.policy_ref;
    parent.area = req.target_spec.area;
    parent.result_spec = req.result_spec;
    parent.qos = req.qos;
    parent.periodicity = req.periodicity;
    parent.duration = req.duration;
    parent.granularity_m = req.qod.spatial_m;
    parent.granularity_ticks = req.qod.temporal_ticks;
    parent.purpose = req.purpose;

    Task* joined = nullptr;
    for (Task* t : planned) {
      bool all_compatible = true;
      for (const Parent& existing : t->parents) {
        if (!compatible(existing, req)) {
          all_compatible = false;
          break;
        }
      }
      if (all_compatible) {
        joined = t;
        break;
      }
    }
    if (joined) {
      joined->parents.push_back(std::move(parent));
    } else {
      Task task;
      task.task_id = "task-" + std::to_string(++next_task_);
      task.parents.push_back(std::move(parent));
      auto [it, inserted] = tasks_.emplace(task.task_id, std::move(task));
      planned.push_back(&it->second);
    }
  }
  for (Task* t : planned) {
    // Aggregated requests run at the coarsest requested granularity and the
    // common (rounded) period.
    for (const Parent& p : t->parents) {
      t->granularity_m = std::max(t->granularity_m, p.granularity_m);
      t->granularity_ticks = std::max(t->granularity_ticks, p.granularity_ticks);
    }
    Tick period = 1, duration = 1;
    for (const Parent& p : t->parents) {
      period = std::max(period, round_up(p.periodicity, t->granularity_ticks));
      duration = std::max(duration, p.duration);
    }
    t->schedule = Schedule{fabric_.now() + config_.setup_lead, period,
                           duration};
    start_negotiation(*t);
  }
}

void ScfNode::start_negotiation(Task& task) {
  task.stage = Stage::negotiating;
  NegotiationProposal proposal;
  proposal.session_id = task.task_id;
  proposal.requester = id_;
  proposal.granularity_m = task.granularity_m;
  proposal.granularity_ticks = task.granularity_ticks;
  proposal.round = task.round;
  for (const Parent& p : task.parents) {
    proposal.source_policy_ids.push_back(p.policy_id);
  }
  proposal.purpose = task.parents.front().purpose;
  for (std::uint64_t ch : fabric_.channels_for(Flow::POL_REQ)) {
    const Channel& channel = fabric_.channel(ch);
    if (channel.config.endpoint_a.name != id_.name) continue;
    engine_.dispatch(id_, channel.config.endpoint_b, Flow::POL_REQ, proposal);
    return;
  }
  fail_task(task, Reason::resource_exhausted);
}

bool ScfNode::assign_sus(Task& task) {
  const Rect& allowed = task.policy.constraints.allowed_area;
  CellRegion cells{task.granularity_m, {}};
  for (const Parent& p : task.parents) {
    cells = cells.unite(
        CellRegion::rasterize(p.area, allowed, task.granularity_m));
  }
  task.area = cells;
  task.su_areas.clear();
  if (cells.empty()) return false;

  auto covers = [&](const SuInfo& su, const CellRegion& region) {
    for (const auto& cell : region.cells()) {
      if (distance(region.cell_center(cell), su.pose.position) >
          su.pose.detection_range) {
        return false;
      }
    }
    return true;
  };
  auto eligible = [&](const SuInfo& su) {
    return std::find(task.declined.begin(), task.declined.end(),
                     su.pose.su_id) == task.declined.end();
  };

  // If any unit covers the whole area, run it as one task; every unit that
  // fully covers joins for redundant measurements (fusion).
  std::vector<const SuInfo*> full;
  for (const SuInfo& su : sus_) {
    if (eligible(su) && covers(su, cells)) full.push_back(&su);
  }
  if (!full.empty()) {
    for (const SuInfo* su : full) task.su_areas[su->pose.su_id] = cells;
    return true;
  }

  // Otherwise partition cells by nearest covering unit.
  std::map<std::string, std::vector<CellRegion::Cell>> pieces;
  for (const auto& cell : cells.cells()) {
    const Vec2 center = cells.cell_center(cell);
    const SuInfo* nearest = nullptr;
    double best = 0.0;
    for (const SuInfo& su : sus_) {
      if (!eligible(su)) continue;
      const double d = distance(center, su.pose.position);
      if (d > su.pose.detection_range) continue;
      if (!nearest || d < best) {
        nearest = &su;
        best = d;
      }
    }
    if (!nearest) return false;  // unplannable: cell out of all coverage
    pieces[nearest->pose.su_id].push_back(cell);
  }
  for (auto& [su_id, piece] : pieces) {
    task.su_areas[su_id] = CellRegion{task.granularity_m, std::move(piece)};
  }
  return true;
}

void ScfNode::handle_pol_resp(const NegotiationReply& reply) {
  auto it = tasks_.find(reply.session_id);
  if (it == tasks_.end()) return;
  Task& task = it->second;
  if (reply.unsolicited) {
    if (reply.verdict == NegotiationVerdict::accepted && reply.policy &&
        task.stage == Stage::active) {
      task.policy = *reply.policy;
    }
    return;
  }
  if (task.stage != Stage::negotiating) return;
  switch (reply.verdict) {
    case NegotiationVerdict::accepted: {
      task.policy = *reply.policy;
      task.granularity_m = task.policy.constraints.min_granularity_m;
      task.granularity_ticks = std::max(
          task.granularity_ticks, task.policy.constraints.min_granularity_ticks);
      task.schedule.period =
          std::max(task.schedule.period, task.granularity_ticks);
      if (!assign_sus(task)) {
        fail_task(task, Reason::resource_exhausted);
        return;
      }
      acquire_processing(task);
      break;
    }
    case NegotiationVerdict::counter: {
      task.round += 1;
      if (config_.accept_counter) {
        task.granularity_m = reply.counter_granularity_m;
        task.granularity_ticks = reply.counter_granularity_ticks;
      }
      start_negotiation(task);
      break;
    }
    case NegotiationVerdict::failed:
      fail_task(task, Reason::policy_violation);
      break;
  }
}

void ScfNode::acquire_processing(Task& task) {
  task.stage = Stage::awaiting_processing;
  ProcessingRequest req;
  req.task_id = task.task_id;
  req.estimate.data_type = "sensing-echoes";
  req.estimate.bytes_per_report = 64 * std::max<std::size_t>(
      1, task.area.size());
  req.estimate.period_ticks = task.schedule.period;
  std::uint8_t priority = 3;
  bool stream = false;
  for (const Parent& p : task.parents) {
    priority = std::min(priority, p.qos);
    stream = stream || p.result_spec != ResultSpec::event_notification;
  }
  req.priority = priority;
  req.reporting = stream ? ReportingStyle::stream : ReportingStyle::event;
  req.policy_id = task.task_id;
  req.policy_version = task.policy.version;
  req.schedule = task.schedule;
  for (std::uint64_t ch : fabric_.channels_for(Flow::PROC_REQ)) {
    const Channel& channel = fabric_.channel(ch);
    if (channel.config.endpoint_a.name != id_.name) continue;
    engine_.dispatch(id_, channel.config.endpoint_b, Flow::PROC_REQ, req);
    return;
  }
  fail_task(task, Reason::resource_exhausted);
}

void ScfNode::handle_proc_resp(const ProcessingResponse& resp) {
  auto it = tasks_.find(resp.task_id);
  if (it == tasks_.end()) return;
  Task& task = it->second;
  if (task.stage != Stage::awaiting_processing) return;
  if (!resp.success || !resp.ingress) {
    // Fail closed: never configure radio without secured processing.
    fail_task(task, resp.reason.value_or(Reason::resource_exhausted));
    return;
  }
  task.ingress = resp.ingress;
  task.session_id = resp.session_id;
  configure_radio(task);
}

bool ScfNode::reserve_budget(Task& task, std::uint64_t need) {
  const std::uint64_t free = budget_.total - budget_.comm - budget_.sensing;
  if (free >= need) {
    budget_.sensing += need;
    task.budget_held = need;
    return true;
  }
  std::uint8_t priority = 3;
  for (const Parent& p : task.parents) priority = std::min(priority, p.qos);
  if (priority == 0) {
    // Highest priority sensing may claim communication capacity down to the
    // configured floor.
    const auto floor_units = static_cast<std::uint64_t>(
        config_.comm_floor_fraction * static_cast<double>(budget_.total));
    const std::uint64_t deficit = need - free;
    if (budget_.comm >= floor_units + deficit) {
      budget_.comm -= deficit;
      budget_.sensing += need;
      task.budget_held = need;
      task.comm_taken = deficit;
      return true;
    }
  }
  return false;
}

void ScfNode::release_budget(Task& task) {
  budget_.sensing -= task.budget_held;
  budget_.comm += task.comm_taken;
  task.budget_held = 0;
  task.comm_taken = 0;
  if (!budget_.conserved()) {
    fabric_.emit_event(EventKind::warning, id_, "operational",
                       "budget conservation violated");
  }
}

void ScfNode::configure_radio(Task& task) {
  const std::uint64_t need = task.su_areas.size();
  if (task.budget_held == 0 && !reserve_budget(task, need)) {
    fail_task(task, Reason::resource_exhausted);
    return;
  }
  task.stage = Stage::configuring;
  task.acks.clear();
  const TransparencyMode mode = task.policy.constraints.transparency;
  for (const auto& [su_id, area] : task.su_areas) {
    RadioSessionConfig cfg;
    cfg.task_id = task.task_id;
    cfg.area = area;
    cfg.schedule = task.schedule;
    cfg.granularity_m = task.granularity_m;
    cfg.granularity_ticks = task.granularity_ticks;
    cfg.ingress = *task.ingress;
    cfg.purpose = task.parents.front().purpose;
    cfg.transparency_expected = mode != TransparencyMode::none;
    PrincipalId su;
    for (const SuInfo& info : sus_) {
      if (info.pose.su_id == su_id) su = info.id;
    }
    engine_.dispatch(id_, su, Flow::CONFIG_RADIO_SESSION, cfg);
    if (mode != TransparencyMode::none) {
      TransparencyConfig tc;
      tc.task_id = task.task_id;
      tc.mode = mode;
      engine_.dispatch(id_, su, Flow::CONFIG_TRANSPARENCY, tc);
    }
  }
}

void ScfNode::handle_ack(const ConfigAck& ack) {
  auto it = tasks_.find(ack.task_id);
  if (it == tasks_.end()) return;
  Task& task = it->second;
  if (task.stage != Stage::configuring) return;
  task.acks[ack.su_id] = ack.accepted;
  if (!ack.accepted) {
    task.declined.push_back(ack.su_id);
  }
  if (task.acks.size() < task.su_areas.size()) return;

  bool all_accepted = true;
  for (const auto& [su, ok] : task.acks) all_accepted = all_accepted && ok;
  if (all_accepted) {
    activate_task(task);
    return;
  }
  // Replan with the remaining units or fail the request.
  release_budget(task);
  if (!assign_sus(task)) {
    fabric_.emit_event(EventKind::warning, id_, "operational",
                       "task " + task.task_id +
                           " lost coverage after unit decline");
    fail_task(task, Reason::no_consent);
    return;
  }
  if (!reserve_budget(task, task.su_areas.size())) {
    fail_task(task, Reason::resource_exhausted);
    return;
  }
  configure_radio(task);
}

void ScfNode::activate_task(Task& task) {
  task.stage = Stage::active;
  for (const Parent& p : task.parents) {
    respond_parent(p, RespStatus::accepted, std::nullopt, task.session_id);
  }
}

void ScfNode::send_orch_end(const Task& task) {
  OrchestrationCommand cmd;
  cmd.verb = OrchVerb::end;
  cmd.session_id = task.session_id.empty() ? task.task_id : task.session_id;
  for (std::uint64_t ch : fabric_.channels_for(Flow::PROCESSING_ORCH_FLOW)) {
    const Channel& channel = fabric_.channel(ch);
    if (channel.config.endpoint_a.name != id_.name) continue;
    engine_.dispatch(id_, channel.config.endpoint_b,
                     Flow::PROCESSING_ORCH_FLOW, cmd);
    break;
  }
}

void ScfNode::fail_task(Task& task, Reason reason) {
  release_budget(task);
  if (!task.session_id.empty() || task.ingress.has_value()) send_orch_end(task);
  for (const Parent& p : task.parents) {
    respond_parent(p, RespStatus::failed, reason, {});
  }
  task.stage = Stage::failed;
}

void ScfNode::finish_task(Task& task) {
  send_orch_end(task);
  release_budget(task);
  task.stage = Stage::ended;
}

void ScfNode::on_deliver(const Envelope& env) {
  switch (env.interface) {
    case Flow::JCAS_API_REQ:
      batch_.push_back(std::get<SensingRequest>(env.payload));
      break;
    case Flow::POL_RESP:
      handle_pol_resp(std::get<NegotiationReply>(env.payload));
      break;
    case Flow::PROC_RESP:
      handle_proc_resp(std::get<ProcessingResponse>(env.payload));
      break;
    case Flow::CONFIG_RADIO_ACK:
      handle_ack(std::get<ConfigAck>(env.payload));
      break;
    default:
      fabric_.emit_event(EventKind::warning, id_, "operational",
                         "unexpected flow " +
                             std::string(to_string(env.interface)));
  }
}

void ScfNode::on_tick() {
  if (!batch_.empty()) {
    std::vector<SensingRequest> batch;
    batch.swap(batch_);
    plan(std::move(batch));
  }
  const Tick now = fabric_.now();
  for (auto& [tid, task] : tasks_) {
    if (task.stage == Stage::active &&
        now >= task.schedule.start + task.schedule.duration +
                   config_.end_grace) {
      finish_task(task);
    }
  }
}

}  // namespace jcas
