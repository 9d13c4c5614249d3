#include "jcas/scenario.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

namespace jcas {

namespace {

using nlohmann::json;

Vec2 parse_vec2(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2) {
    throw ScenarioError(field, "expected [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

Rect parse_rect(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 4) {
    throw ScenarioError(field, "expected [lo_x, lo_y, hi_x, hi_y]");
  }
  Rect r{{j[0].get<double>(), j[1].get<double>()},
         {j[2].get<double>(), j[3].get<double>()}};
  if (!r.valid()) throw ScenarioError(field, "degenerate rectangle");
  return r;
}

ConvexPolygon parse_area(const json& j, const std::string& field) {
  if (j.is_array() && j.size() == 4 && j[0].is_number()) {
    return ConvexPolygon::rectangle(parse_rect(j, field));
  }
  if (j.is_array()) {
    std::vector<Vec2> vertices;
    for (std::size_t i = 0; i < j.size(); ++i) {
      vertices.push_back(
          parse_vec2(j[i], field + "[" + std::to_string(i) + "]"));
    }
    ConvexPolygon p{std::move(vertices)};
    if (!p.valid()) throw ScenarioError(field, "degenerate polygon");
    return p;
  }
  throw ScenarioError(field, "expected rectangle or vertex list");
}

TargetClass parse_class(const json& j, const std::string& field) {
  auto c = target_class_from_string(j.get<std::string>());
  if (!c) throw ScenarioError(field, "unknown target class");
  return *c;
}

ResultSpec parse_result_spec(const json& j, const std::string& field) {
  auto r = result_spec_from_string(j.get<std::string>());
  if (!r) throw ScenarioError(field, "unknown result spec");
  return *r;
}

Flow parse_flow(const std::string& name, const std::string& field) {
  auto f = flow_from_string(name);
  if (!f) throw ScenarioError(field, "unknown interface '" + name + "'");
  return *f;
}

void parse_switches(const json& j, ControlSwitches& sw,
                    const std::string& field) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const bool value = it.value().get<bool>();
    if (key == "authn") sw.authn = value;
    else if (key == "seal") sw.seal = value;
    else if (key == "replay_protect") sw.replay_protect = value;
    else if (key == "access_control") sw.access_control = value;
    else if (key == "rate_limit") sw.rate_limit = value;
    else if (key == "pseudonymise") sw.pseudonymise = value;
    else if (key == "sanitise") sw.sanitise = value;
    else if (key == "validate") sw.validate = value;
    else throw ScenarioError(field + "." + key, "unknown control switch");
  }
}

SensingRequest parse_request(const json& j, const std::string& field) {
  SensingRequest q;
  if (!j.contains("id")) throw ScenarioError(field + ".id", "missing");
  q.request_id = j.at("id").get<std::string>();
  q.target_spec.area = parse_area(j.at("area"), field + ".area");
  if (j.contains("class_filter")) {
    q.target_spec.class_filter =
        parse_class(j.at("class_filter"), field + ".class_filter");
  }
  if (j.contains("result_spec")) {
    q.result_spec = parse_result_spec(j.at("result_spec"),
                                      field + ".result_spec");
  }
  q.qos = j.value("qos", 3);
  q.qod.spatial_m = j.value("granularity_m", 10.0);
  q.qod.temporal_ticks = j.value("granularity_ticks", 1);
  q.periodicity = j.value("periodicity", 5);
  q.duration = j.value("duration", 50);
  q.purpose = j.value("purpose", "sensing");
  return q;
}

SensingPolicy parse_policy(const json& j, const std::string& field) {
  SensingPolicy p;
  if (!j.contains("id")) throw ScenarioError(field + ".id", "missing");
  p.policy_id = j.at("id").get<std::string>();
  PolicyConstraints& c = p.constraints;
  if (j.contains("apps")) {
    for (const auto& a : j.at("apps")) {
      c.app_ids.push_back(a.get<std::string>());
    }
  }
  if (j.contains("target_classes")) {
    for (std::size_t i = 0; i < j.at("target_classes").size(); ++i) {
      c.target_classes.push_back(parse_class(
          j.at("target_classes")[i],
          field + ".target_classes[" + std::to_string(i) + "]"));
    }
  }
  c.allowed_area = parse_rect(j.at("allowed_area"), field + ".allowed_area");
  if (j.contains("restricted_zones")) {
    for (std::size_t i = 0; i < j.at("restricted_zones").size(); ++i) {
      c.restricted_zones.push_back(parse_rect(
          j.at("restricted_zones")[i],
          field + ".restricted_zones[" + std::to_string(i) + "]"));
    }
  }
  if (j.contains("sensing_types")) {
    for (std::size_t i = 0; i < j.at("sensing_types").size(); ++i) {
      c.sensing_types.push_back(parse_result_spec(
          j.at("sensing_types")[i],
          field + ".sensing_types[" + std::to_string(i) + "]"));
    }
  }
  c.min_granularity_m = j.value("min_granularity_m", 1.0);
  c.min_granularity_ticks = j.value("min_granularity_ticks", 1);
  if (c.min_granularity_m <= 0.0) {
    throw ScenarioError(field + ".min_granularity_m", "must be > 0");
  }
  c.obligations = j.value("obligations", "");
  if (j.contains("transparency")) {
    auto m = transparency_mode_from_string(
        j.at("transparency").get<std::string>());
    if (!m) throw ScenarioError(field + ".transparency", "unknown mode");
    c.transparency = *m;
  }
  c.retention_ticks = j.value("retention_ticks", 0);
  return p;
}

}  // namespace

Scenario parse_scenario_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError("(document)", e.what());
  }
  Scenario s;
  try {
    s.name = j.value("name", "scenario");
    s.seed = j.value("seed", 1);
    s.duration = j.value("duration", 200);

    if (j.contains("world")) {
      const json& w = j.at("world");
      if (w.contains("targets")) {
        for (std::size_t i = 0; i < w.at("targets").size(); ++i) {
          const json& t = w.at("targets")[i];
          const std::string field = "world.targets[" + std::to_string(i) + "]";
          Target target;
          target.id = t.at("id").get<std::string>();
          target.position = parse_vec2(t.at("position"), field + ".position");
          if (t.contains("velocity")) {
            target.velocity = parse_vec2(t.at("velocity"), field + ".velocity");
          }
          target.cls = t.contains("class")
                           ? parse_class(t.at("class"), field + ".class")
                           : TargetClass::object;
          target.pii.identity = t.value("identity", "person:" + target.id);
          target.pii.home_area = t.value("home_area", "home:" + target.id);
          s.targets.push_back(std::move(target));
        }
      }
    }
    if (j.contains("sus")) {
      for (std::size_t i = 0; i < j.at("sus").size(); ++i) {
        const json& u = j.at("sus")[i];
        const std::string field = "sus[" + std::to_string(i) + "]";
        SuSpec su;
        su.name = u.at("name").get<std::string>();
        su.position = parse_vec2(u.at("position"), field + ".position");
        su.detection_range = u.value("detection_range", 100.0);
        su.noise_sigma = u.value("noise_sigma", 0.0);
        su.ue_hosted = u.value("ue_hosted", false);
        su.preprocessed = u.value("preprocessed", su.ue_hosted);
        if (u.contains("consent")) {
          for (auto it = u.at("consent").begin(); it != u.at("consent").end();
               ++it) {
            su.consent[it.key()] = it.value().get<bool>();
          }
        }
        if (u.contains("allowed_area")) {
          su.allowed_area =
              parse_rect(u.at("allowed_area"), field + ".allowed_area");
        }
        su.min_granularity_contribution =
            u.value("min_granularity_contribution", 0.0);
        s.sus.push_back(std::move(su));
      }
    }
    if (j.contains("apps")) {
      for (std::size_t i = 0; i < j.at("apps").size(); ++i) {
        const json& a = j.at("apps")[i];
        const std::string field = "apps[" + std::to_string(i) + "]";
        AppSpec app;
        app.name = a.at("name").get<std::string>();
        if (a.contains("areas")) {
          for (std::size_t k = 0; k < a.at("areas").size(); ++k) {
            app.permitted_areas.push_back(parse_rect(
                a.at("areas")[k],
                field + ".areas[" + std::to_string(k) + "]"));
          }
        }
        app.granularity_floor = a.value("granularity_floor", 1.0);
        if (a.contains("sensing_types")) {
          for (std::size_t k = 0; k < a.at("sensing_types").size(); ++k) {
            app.sensing_types.push_back(parse_result_spec(
                a.at("sensing_types")[k],
                field + ".sensing_types[" + std::to_string(k) + "]"));
          }
        }
        s.apps.push_back(std::move(app));
      }
    }
    if (j.contains("policies")) {
      for (std::size_t i = 0; i < j.at("policies").size(); ++i) {
        s.policies.push_back(parse_policy(
            j.at("policies")[i], "policies[" + std::to_string(i) + "]"));
      }
    }
    if (j.contains("consents")) {
      for (std::size_t i = 0; i < j.at("consents").size(); ++i) {
        const json& c = j.at("consents")[i];
        ConsentRecord rec;
        rec.subject = c.at("subject").get<std::string>();
        rec.purpose = c.at("purpose").get<std::string>();
        rec.scope = c.value("scope", "all");
        rec.status = c.value("granted", true) ? ConsentStatus::granted
                                              : ConsentStatus::revoked;
        s.consents.push_back(std::move(rec));
      }
    }
    if (j.contains("script")) {
      for (std::size_t i = 0; i < j.at("script").size(); ++i) {
        const json& a = j.at("script")[i];
        const std::string field = "script[" + std::to_string(i) + "]";
        const std::string action = a.at("action").get<std::string>();
        const Tick at = a.at("at").get<Tick>();
        if (action == "sens_req") {
          RequestAction ra;
          ra.at = at;
          ra.app = a.at("app").get<std::string>();
          ra.request = parse_request(a.at("request"), field + ".request");
          ra.bad_credentials = a.value("bad_credentials", false);
          ra.repeat = a.value("repeat", 1);
          s.requests.push_back(std::move(ra));
        } else if (action == "grant_consent" || action == "revoke_consent") {
          ConsentAction ca;
          ca.at = at;
          ca.subject = a.at("subject").get<std::string>();
          ca.purpose = a.at("purpose").get<std::string>();
          ca.grant = action == "grant_consent";
          s.consent_actions.push_back(std::move(ca));
        } else if (action == "audit") {
          AuditAction aa;
          aa.at = at;
          aa.subject = a.at("subject").get<std::string>();
          s.audits.push_back(std::move(aa));
        } else {
          throw ScenarioError(field + ".action",
                              "unknown action '" + action + "'");
        }
      }
    }
    if (j.contains("controls")) {
      const json& c = j.at("controls");
      const std::string mode = c.value("default", "off");
      if (mode == "on") {
        s.profile = ControlProfile::all_on();
      } else if (mode == "off") {
        s.profile = ControlProfile::all_off();
      } else {
        throw ScenarioError("controls.default", "expected 'on' or 'off'");
      }
      if (c.contains("switches")) {
        parse_switches(c.at("switches"), s.profile.defaults,
                       "controls.switches");
      }
      if (c.contains("overrides")) {
        for (auto it = c.at("overrides").begin(); it != c.at("overrides").end();
             ++it) {
          Flow f = parse_flow(it.key(), "controls.overrides");
          ControlSwitches sw = s.profile.defaults;
          parse_switches(it.value(), sw, "controls.overrides." + it.key());
          s.profile.set(f, sw);
        }
      }
      s.control_options.lockout_failures = c.value("lockout_failures", 3);
      s.control_options.replay_window = c.value("replay_window", 64);
      if (c.contains("rate_limits")) {
        for (auto it = c.at("rate_limits").begin();
             it != c.at("rate_limits").end(); ++it) {
          Flow f = parse_flow(it.key(), "controls.rate_limits");
          RateLimiter::Config cfg;
          cfg.budget = it.value().value("budget", 10);
          cfg.window = it.value().value("window", 10);
          s.rate_limits[f] = cfg;
        }
      }
    }
    if (j.contains("channels")) {
      const json& c = j.at("channels");
      s.channel_defaults.latency = c.value("latency", 1);
      s.channel_defaults.capacity = c.value("capacity", 64);
      if (c.contains("overrides")) {
        for (auto it = c.at("overrides").begin(); it != c.at("overrides").end();
             ++it) {
          Flow f = parse_flow(it.key(), "channels.overrides");
          ChannelTuning t;
          t.latency = it.value().value("latency", s.channel_defaults.latency);
          t.capacity =
              it.value().value("capacity", s.channel_defaults.capacity);
          s.channel_overrides[f] = t;
        }
      }
    }
    if (j.contains("scf")) {
      const json& c = j.at("scf");
      s.scf.aggregation_overlap_fraction =
          c.value("aggregation_overlap_fraction", 0.5);
      s.scf.comm_floor_fraction = c.value("comm_floor_fraction", 0.5);
      s.scf.budget_total = c.value("budget_total", 16);
      s.scf.accept_counter = c.value("accept_counter", true);
      s.scf.setup_lead = c.value("setup_lead", 12);
    }
    if (j.contains("spf")) {
      const json& c = j.at("spf");
      s.spf.capacity = c.value("capacity", 4);
      s.spf.record_uc_data = c.value("record_uc_data", true);
    }
    if (j.contains("spctm")) {
      const json& c = j.at("spctm");
      s.spctm.negotiation_rounds = c.value("negotiation_rounds", 3);
      s.spctm.default_retention = c.value("default_retention", 1000);
    }
    if (j.contains("nef")) {
      s.nef.revalidate_every = j.at("nef").value("revalidate_every", 1);
    }
    s.with_third_party = j.value("with_third_party", true);
    if (j.contains("threats")) {
      for (const auto& t : j.at("threats")) {
        s.threats.push_back(t.get<std::string>());
      }
    }
  } catch (const json::exception& e) {
    throw ScenarioError("(document)", e.what());
  }
  const std::vector<std::string> problems = validate_scenario(s);
  if (!problems.empty()) {
    throw ScenarioError("(references)", problems.front());
  }
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("(file)", "cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_scenario_text(text);
}

std::vector<std::string> validate_scenario(const Scenario& s) {
  std::vector<std::string> problems;
  std::set<std::string> app_names, su_names, target_ids;
  for (const AppSpec& a : s.apps) {
    if (!app_names.insert(a.name).second) {
      problems.push_back("duplicate app name " + a.name);
    }
  }
  for (const SuSpec& u : s.sus) {
    if (!su_names.insert(u.name).second) {
      problems.push_back("duplicate su name " + u.name);
    }
  }
  for (const Target& t : s.targets) {
    if (!target_ids.insert(t.id).second) {
      problems.push_back("duplicate target id " + t.id);
    }
  }
  std::set<std::string> request_ids;
  for (const RequestAction& r : s.requests) {
    if (app_names.count(r.app) == 0) {
      problems.push_back("script references unregistered app " + r.app);
    }
    if (!request_ids.insert(r.request.request_id).second && r.repeat == 1) {
      problems.push_back("duplicate request id " + r.request.request_id);
    }
    if (r.at >= s.duration) {
      problems.push_back("request " + r.request.request_id +
                         " scheduled past scenario duration");
    }
  }
  for (const ConsentAction& c : s.consent_actions) {
    if (c.at >= s.duration) {
      problems.push_back("consent action for " + c.subject +
                         " scheduled past scenario duration");
    }
  }
  return problems;
}

}  // namespace jcas
