#include "jcas/presets.hpp"

namespace jcas::presets {

namespace {

Target vehicle(const std::string& id, Vec2 pos, Vec2 vel) {
  Target t;
  t.id = id;
  t.position = pos;
  t.velocity = vel;
  t.cls = TargetClass::vehicle;
  t.pii = {"owner-of-" + id, "garage-of-" + id};
  return t;
}

Target person(const std::string& id, Vec2 pos, Vec2 vel) {
  Target t;
  t.id = id;
  t.position = pos;
  t.velocity = vel;
  t.cls = TargetClass::person;
  t.pii = {"identity-of-" + id, "home-of-" + id};
  return t;
}

SensingPolicy traffic_policy() {
  SensingPolicy p;
  p.policy_id = "highway-traffic";
  p.constraints.app_ids = {"collision-app"};
  p.constraints.target_classes = {TargetClass::person, TargetClass::vehicle};
  p.constraints.allowed_area = Rect{{0, 0}, {400, 300}};
  p.constraints.sensing_types = {ResultSpec::event_notification,
                                 ResultSpec::object_list,
                                 ResultSpec::track_stream};
  p.constraints.min_granularity_m = 10.0;
  p.constraints.min_granularity_ticks = 1;
  p.constraints.obligations = "no onward transfer";
  p.constraints.transparency = TransparencyMode::broadcast_during;
  p.constraints.retention_ticks = 500;
  return p;
}

}  // namespace

Scenario highway(std::uint64_t seed) {
  Scenario s;
  s.name = "highway-collision-warning";
  s.seed = seed;
  s.duration = 160;

  s.targets.push_back(vehicle("veh-1", {30, 40}, {2.0, 0.0}));
  s.targets.push_back(vehicle("veh-2", {60, 80}, {-1.0, 0.5}));
  s.targets.push_back(person("ped-1", {90, 30}, {0.0, 0.5}));

  SuSpec north{"su-north", {100, 100}, 400.0, 0.5};
  SuSpec south{"su-south", {300, 100}, 400.0, 0.5};
  SuSpec ue;
  ue.name = "ue-7";
  ue.position = {200, 50};
  ue.detection_range = 150.0;
  ue.noise_sigma = 0.5;
  ue.ue_hosted = true;
  ue.preprocessed = true;
  ue.consent["collision-warning"] = true;
  ue.allowed_area = Rect{{0, 0}, {400, 300}};
  s.sus = {north, south, ue};

  AppSpec app;
  app.name = "collision-app";
  app.permitted_areas = {Rect{{0, 0}, {400, 300}}};
  app.granularity_floor = 5.0;
  s.apps = {app};

  s.policies = {traffic_policy()};
  for (const char* subject : {"veh-1", "veh-2", "ped-1"}) {
    s.consents.push_back(
        {subject, "collision-warning", "all", ConsentStatus::granted, 0});
  }

  RequestAction req;
  req.at = 5;
  req.app = "collision-app";
  req.request.request_id = "req-1";
  req.request.target_spec.area =
      ConvexPolygon::rectangle(Rect{{50, 20}, {350, 260}});
  req.request.result_spec = ResultSpec::object_list;
  req.request.qos = 1;
  req.request.qod = {10.0, 1};
  req.request.periodicity = 5;
  req.request.duration = 60;
  req.request.purpose = "collision-warning";
  s.requests = {req};

  s.profile = ControlProfile::all_on();
  s.rate_limits[Flow::SENS_REQ] = {50, 10};
  return s;
}

Scenario health_monitoring(std::uint64_t seed) {
  Scenario s;
  s.name = "health-monitoring";
  s.seed = seed;
  s.duration = 140;

  s.targets.push_back(person("resident-1", {205, 52}, {0.1, 0.0}));
  s.targets.push_back(person("resident-2", {212, 58}, {0.0, 0.1}));

  SuSpec ue;
  ue.name = "ue-home";
  ue.position = {208, 55};
  ue.detection_range = 40.0;
  ue.noise_sigma = 0.3;
  ue.ue_hosted = true;
  ue.preprocessed = true;
  ue.consent["health-monitoring"] = true;
  ue.allowed_area = Rect{{180, 30}, {240, 80}};
  s.sus = {ue};

  AppSpec app;
  app.name = "care-app";
  app.permitted_areas = {Rect{{180, 30}, {240, 80}}};
  app.granularity_floor = 2.0;
  s.apps = {app};

  SensingPolicy p;
  p.policy_id = "home-care";
  p.constraints.app_ids = {"care-app"};
  p.constraints.target_classes = {TargetClass::person};
  p.constraints.allowed_area = Rect{{180, 30}, {240, 80}};
  p.constraints.sensing_types = {ResultSpec::event_notification,
                                 ResultSpec::object_list};
  p.constraints.min_granularity_m = 5.0;
  p.constraints.min_granularity_ticks = 2;
  p.constraints.obligations = "care team only";
  p.constraints.transparency = TransparencyMode::notify_after;
  p.constraints.retention_ticks = 300;
  s.policies = {p};
  s.consents.push_back(
      {"resident-1", "health-monitoring", "all", ConsentStatus::granted, 0});
  s.consents.push_back(
      {"resident-2", "health-monitoring", "all", ConsentStatus::granted, 0});

  RequestAction req;
  req.at = 4;
  req.app = "care-app";
  req.request.request_id = "care-1";
  req.request.target_spec.area =
      ConvexPolygon::rectangle(Rect{{190, 35}, {230, 75}});
  req.request.result_spec = ResultSpec::object_list;
  req.request.qos = 1;
  req.request.qod = {5.0, 2};
  req.request.periodicity = 4;
  req.request.duration = 40;
  req.request.purpose = "health-monitoring";
  s.requests = {req};

  s.profile = ControlProfile::all_on();
  return s;
}

Scenario threatbed(std::uint64_t seed) {
  Scenario s = highway(seed);
  s.name = "threatbed";
  s.duration = 220;
  s.rate_limits[Flow::SENS_REQ] = {10, 10};
  s.rate_limits[Flow::PROC_REQ] = {8, 10};
  s.rate_limits[Flow::RESULT_STREAM] = {64, 10};
  return s;
}

}  // namespace jcas::presets
