#include "jcas/spctm.hpp"

#include <gtest/gtest.h>

#include <algorithm>

#include "testkit.hpp"

namespace jcas {
namespace {

struct Harness {
  Fabric fabric{42};
  KeyRegistry keys;
  ControlEngine engine;
  Store store;
  Spctm spctm;

  Harness()
      : engine(fabric, make_keys(), ControlProfile::all_off()),
        store(make_tag()),
        spctm(fabric, engine, store) {}

  static TagKey make_tag() {
    TagKey k{};
    for (int i = 0; i < 16; ++i) k[i] = static_cast<std::uint8_t>(i + 9);
    return k;
  }
  static KeyRegistry make_keys() {
    KeyRegistry k;
    k.set_token_key(make_tag());
    k.set_seal_key(make_tag());
    k.set_pseudonym_secret(make_tag());
    return k;
  }
};

SensingPolicy base_policy(const std::string& id, double gran_m,
                          Rect area = Rect{{0, 0}, {1000, 1000}}) {
  SensingPolicy p;
  p.policy_id = id;
  p.constraints.target_classes = {TargetClass::person, TargetClass::vehicle,
                                  TargetClass::object};
  p.constraints.allowed_area = area;
  p.constraints.sensing_types = {ResultSpec::event_notification,
                                 ResultSpec::object_list,
                                 ResultSpec::track_stream};
  p.constraints.min_granularity_m = gran_m;
  p.constraints.min_granularity_ticks = 1;
  p.constraints.retention_ticks = 500;
  return p;
}

SensingRequest request_for(const PrincipalId& app, Rect area, double gran) {
  SensingRequest q;
  q.request_id = "req-1";
  q.app_id = app;
  q.target_spec.area = ConvexPolygon::rectangle(area);
  q.result_spec = ResultSpec::event_notification;
  q.qod = {gran, 5};
  q.periodicity = 5;
  q.duration = 50;
  q.purpose = "collision-warning";
  return q;
}

TEST(Compose, CoarsestGranularityWins) {
  auto r = compose_constraints({base_policy("a", 10), base_policy("b", 50)},
                               {}, "p");
  ASSERT_TRUE(r.ok());
  EXPECT_DOUBLE_EQ(r.constraints->min_granularity_m, 50.0);
}

TEST(Compose, SensingTypesIntersect) {
  SensingPolicy a = base_policy("a", 10);
  a.constraints.sensing_types = {ResultSpec::track_stream,
                                 ResultSpec::event_notification};
  SensingPolicy b = base_policy("b", 10);
  b.constraints.sensing_types = {ResultSpec::event_notification};
  auto r = compose_constraints({a, b}, {}, "p");
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.constraints->sensing_types,
            (std::vector<ResultSpec>{ResultSpec::event_notification}));
}

TEST(Compose, EmptyTypeIntersectionUnsatisfiable) {
  SensingPolicy a = base_policy("a", 10);
  a.constraints.sensing_types = {ResultSpec::track_stream};
  SensingPolicy b = base_policy("b", 10);
  b.constraints.sensing_types = {ResultSpec::event_notification};
  auto r = compose_constraints({a, b}, {}, "p");
  EXPECT_FALSE(r.ok());
  EXPECT_EQ(r.error, "unsatisfiable");
}

TEST(Compose, DisjointAreasUnsatisfiable) {
  auto r = compose_constraints(
      {base_policy("a", 10, Rect{{0, 0}, {10, 10}}),
       base_policy("b", 10, Rect{{20, 20}, {30, 30}})},
      {}, "p");
  EXPECT_FALSE(r.ok());
}

TEST(Compose, RevokedSubjectExcluded) {
  ConsentRecord granted{"veh-1", "p", "all", ConsentStatus::granted, 5};
  ConsentRecord revoked{"veh-2", "p", "all", ConsentStatus::revoked, 5};
  ConsentRecord other_purpose{"veh-3", "q", "all", ConsentStatus::revoked, 5};
  auto r = compose_constraints({base_policy("a", 10)},
                               {granted, revoked, other_purpose}, "p");
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.excluded_subjects, (std::vector<std::string>{"veh-2"}));
}

// Brute-force oracle over scope membership: revoking one subject removes it
// and keeps every other subject, for randomized consent populations.
TEST(Compose, RevocationScopeMatchesBruteForce) {
  testkit::Gen gen(303);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ConsentRecord> consents;
    const int n = 2 + static_cast<int>(gen.rng().below(8));
    for (int i = 0; i < n; ++i) consents.push_back(gen.consent("p"));
    // Pick one granted subject and revoke it with a later timestamp.
    std::string revoked_subject;
    for (const auto& c : consents) {
      if (c.status == ConsentStatus::granted) {
        revoked_subject = c.subject;
        break;
      }
    }
    auto before = compose_constraints({base_policy("a", 10)}, consents, "p");
    ASSERT_TRUE(before.ok());
    if (revoked_subject.empty()) continue;
    consents.push_back(
        {revoked_subject, "p", "all", ConsentStatus::revoked, 1000});
    auto after = compose_constraints({base_policy("a", 10)}, consents, "p");
    ASSERT_TRUE(after.ok());

    // Oracle: enumerate expected membership directly.
    std::set<std::string> expected(before.excluded_subjects.begin(),
                                   before.excluded_subjects.end());
    expected.insert(revoked_subject);
    std::set<std::string> got(after.excluded_subjects.begin(),
                              after.excluded_subjects.end());
    EXPECT_EQ(got, expected) << "trial " << trial;
  }
}

// Acceptance-grade property tests: idempotence, permutation invariance, and
// most-restrictive dominance over random policy sets.
TEST(ComposeProperties, IdempotentPermutationInvariantDominant) {
  testkit::Gen gen(20240612);
  int satisfiable = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<SensingPolicy> policies;
    const int n = 1 + static_cast<int>(gen.rng().below(5));
    for (int i = 0; i < n; ++i) policies.push_back(gen.sensing_policy());
    std::vector<ConsentRecord> consents;
    const int m = static_cast<int>(gen.rng().below(5));
    for (int i = 0; i < m; ++i) consents.push_back(gen.consent("p"));

    auto r = compose_constraints(policies, consents, "p");
    // Permutation invariance holds for unsatisfiable outcomes too.
    std::vector<SensingPolicy> shuffled = policies;
    for (std::size_t i = shuffled.size(); i > 1; --i) {
      std::swap(shuffled[i - 1], shuffled[gen.rng().below(i)]);
    }
    auto r2 = compose_constraints(shuffled, consents, "p");
    ASSERT_EQ(r.ok(), r2.ok()) << "trial " << trial;
    if (!r.ok()) continue;
    ++satisfiable;
    EXPECT_EQ(*r.constraints, *r2.constraints) << "trial " << trial;
    EXPECT_EQ(r.excluded_subjects, r2.excluded_subjects);

    // Idempotence: composing the composed bundle changes nothing.
    SensingPolicy folded{"folded", *r.constraints};
    auto r3 = compose_constraints({folded}, consents, "p");
    ASSERT_TRUE(r3.ok());
    EXPECT_EQ(*r3.constraints, *r.constraints) << "trial " << trial;
    EXPECT_EQ(r3.excluded_subjects, r.excluded_subjects);

    // Most-restrictive dominance.
    for (const SensingPolicy& p : policies) {
      EXPECT_GE(r.constraints->min_granularity_m,
                p.constraints.min_granularity_m - 1e-9);
      EXPECT_GE(r.constraints->min_granularity_ticks,
                p.constraints.min_granularity_ticks);
      EXPECT_TRUE(p.constraints.allowed_area.contains(
          r.constraints->allowed_area));
      EXPECT_GE(static_cast<int>(r.constraints->transparency),
                static_cast<int>(p.constraints.transparency));
      if (p.constraints.retention_ticks > 0) {
        EXPECT_LE(r.constraints->retention_ticks,
                  p.constraints.retention_ticks);
      }
      for (ResultSpec t : r.constraints->sensing_types) {
        const auto& ts = p.constraints.sensing_types;
        EXPECT_TRUE(ts.empty() ||
                    std::find(ts.begin(), ts.end(), t) != ts.end());
      }
    }
  }
  EXPECT_GT(satisfiable, 100);  // the generator must exercise the happy path
}

TEST(Evaluate, SubsumptionAllows) {
  Harness h;
  PrincipalId app = make_principal(PrincipalKind::APP, "collision-app");
  SensingPolicy p = base_policy("highway", 10);
  p.constraints.app_ids = {"collision-app"};
  h.spctm.add_policy(p);
  PolicyDecision d = h.spctm.evaluate(
      {app, request_for(app, Rect{{100, 100}, {300, 200}}, 20)});
  EXPECT_TRUE(d.allow);
  EXPECT_FALSE(d.policy_id.empty());
  ASSERT_TRUE(d.bundle.has_value());
  EXPECT_DOUBLE_EQ(d.bundle->constraints.min_granularity_m, 10.0);
}

TEST(Evaluate, FineGranularityDenied) {
  Harness h;
  PrincipalId app = make_principal(PrincipalKind::APP, "collision-app");
  h.spctm.add_policy(base_policy("highway", 10));
  PolicyDecision d = h.spctm.evaluate(
      {app, request_for(app, Rect{{100, 100}, {300, 200}}, 1)});
  EXPECT_FALSE(d.allow);
  EXPECT_EQ(d.reason, Reason::policy_violation);
  EXPECT_EQ(d.violated, "granularity");
}

TEST(Evaluate, RestrictedZoneDenied) {
  Harness h;
  PrincipalId app = make_principal(PrincipalKind::APP, "collision-app");
  SensingPolicy p = base_policy("highway", 10);
  p.constraints.restricted_zones = {Rect{{200, 100}, {400, 300}}};
  h.spctm.add_policy(p);
  PolicyDecision d = h.spctm.evaluate(
      {app, request_for(app, Rect{{100, 100}, {300, 200}}, 20)});
  EXPECT_FALSE(d.allow);
  EXPECT_EQ(d.violated, "geo_restricted");
}

TEST(Evaluate, UnknownAppDenied) {
  Harness h;
  SensingPolicy p = base_policy("highway", 10);
  p.constraints.app_ids = {"someone-else"};
  h.spctm.add_policy(p);
  PrincipalId app = make_principal(PrincipalKind::APP, "collision-app");
  PolicyDecision d = h.spctm.evaluate(
      {app, request_for(app, Rect{{100, 100}, {300, 200}}, 20)});
  EXPECT_FALSE(d.allow);
  EXPECT_EQ(d.reason, Reason::unauthorised);
}

NegotiationProposal proposal_for(const PolicyDecision& d, double gran,
                                 std::uint32_t round = 1) {
  NegotiationProposal p;
  p.session_id = "task-1";
  p.requester = make_principal(PrincipalKind::SCF, "scf");
  p.granularity_m = gran;
  p.granularity_ticks = 5;
  p.round = round;
  p.source_policy_ids = {d.policy_id};
  p.purpose = "collision-warning";
  return p;
}

TEST(Negotiate, CoarserProposalAccepted) {
  Harness h;
  PrincipalId app = make_principal(PrincipalKind::APP, "collision-app");
  h.spctm.add_policy(base_policy("highway", 10));
  PolicyDecision d = h.spctm.evaluate(
      {app, request_for(app, Rect{{100, 100}, {300, 200}}, 20)});
  ASSERT_TRUE(d.allow);
  NegotiationReply r = h.spctm.negotiate(proposal_for(d, 20));
  EXPECT_EQ(r.verdict, NegotiationVerdict::accepted);
  ASSERT_TRUE(r.policy.has_value());
  EXPECT_DOUBLE_EQ(r.policy->constraints.min_granularity_m, 20.0);
  EXPECT_EQ(r.policy->version, 1u);
}

TEST(Negotiate, FinerProposalCounteredThenAccepted) {
  Harness h;
  PrincipalId app = make_principal(PrincipalKind::APP, "collision-app");
  h.spctm.add_policy(base_policy("highway", 10));
  PolicyDecision d = h.spctm.evaluate(
      {app, request_for(app, Rect{{100, 100}, {300, 200}}, 20)});
  NegotiationReply c = h.spctm.negotiate(proposal_for(d, 5, 1));
  EXPECT_EQ(c.verdict, NegotiationVerdict::counter);
  EXPECT_DOUBLE_EQ(c.counter_granularity_m, 10.0);
  NegotiationReply a = h.spctm.negotiate(proposal_for(d, 10, 2));
  EXPECT_EQ(a.verdict, NegotiationVerdict::accepted);
  EXPECT_EQ(a.policy->version, 1u);
}

TEST(Negotiate, InsistingFailsAfterKRounds) {
  Harness h;
  PrincipalId app = make_principal(PrincipalKind::APP, "collision-app");
  h.spctm.add_policy(base_policy("highway", 10));
  PolicyDecision d = h.spctm.evaluate(
      {app, request_for(app, Rect{{100, 100}, {300, 200}}, 20)});
  int counters = 0;
  NegotiationReply last;
  for (std::uint32_t round = 1; round <= 4; ++round) {
    last = h.spctm.negotiate(proposal_for(d, 5, round));
    if (last.verdict == NegotiationVerdict::counter) ++counters;
  }
  EXPECT_EQ(counters, 3);
  EXPECT_EQ(last.verdict, NegotiationVerdict::failed);
}

TEST(Consent, GrantThenQuery) {
  Harness h;
  h.spctm.record_consent(
      {"veh-1", "collision-warning", "all", ConsentStatus::granted, 0});
  EXPECT_EQ(h.spctm.consent_status("veh-1", "collision-warning"),
            ConsentStatus::granted);
}

TEST(Consent, RevokeUnknownIsWarningNoOp) {
  Harness h;
  h.spctm.revoke_consent("ghost", "collision-warning");
  bool warned = false;
  for (const auto& rec : h.fabric.trace().records) {
    if (const auto* e = std::get_if<EventRecord>(&rec)) {
      warned = warned || (e->kind == EventKind::warning &&
                          e->detail.find("unknown consent") !=
                              std::string::npos);
    }
  }
  EXPECT_TRUE(warned);
}

TEST(Consent, RevocationBumpsSessionVersion) {
  Harness h;
  PrincipalId app = make_principal(PrincipalKind::APP, "collision-app");
  h.spctm.add_policy(base_policy("highway", 10));
  h.spctm.record_consent(
      {"veh-1", "collision-warning", "all", ConsentStatus::granted, 0});
  PolicyDecision d = h.spctm.evaluate(
      {app, request_for(app, Rect{{100, 100}, {300, 200}}, 20)});
  NegotiationReply r = h.spctm.negotiate(proposal_for(d, 20));
  ASSERT_EQ(r.verdict, NegotiationVerdict::accepted);
  EXPECT_TRUE(r.policy->excluded_subjects.empty());

  h.spctm.revoke_consent("veh-1", "collision-warning");
  auto sp = h.spctm.session_policy("task-1");
  ASSERT_TRUE(sp.has_value());
  EXPECT_EQ(sp->version, 2u);
  EXPECT_EQ(sp->excluded_subjects, (std::vector<std::string>{"veh-1"}));
}

TEST(Transparency, ReportFiltersBySubject) {
  Harness h;
  PrincipalId nef = make_principal(PrincipalKind::NEF, "nef");
  const auto& secret = h.engine.keys().pseudonym_secret();
  auto log_for = [&](const std::string& subject, const std::string& session) {
    DisclosureRecord rec;
    rec.recipient = make_principal(PrincipalKind::APP, "app-1");
    rec.data_description = "session=" + session + ";items=1;subjects=" +
                           pseudonymize(subject, session, secret);
    rec.purpose = "collision-warning";
    rec.obligations = "none";
    rec.timestamp = 0;
    rec.applied_policy_id = "pol-1";
    h.spctm.log_disclosure(rec);
  };
  log_for("veh-1", "task-1");
  log_for("veh-1", "task-1");
  log_for("veh-1", "task-2");
  log_for("veh-2", "task-1");
  log_for("veh-3", "task-2");

  TransparencyExchange report = h.spctm.transparency_report("veh-1", nef);
  EXPECT_EQ(report.records.size(), 3u);

  // Independent scan of the raw log must agree.
  std::size_t expected = 0;
  for (const auto& rec : h.store.query(Category::disclosure_log, nullptr)) {
    auto payload = decode_tagged_payload(rec.value);
    if (!payload) continue;
    const auto& dr = std::get<DisclosureRecord>(*payload);
    for (const std::string& session : {std::string("task-1"),
                                       std::string("task-2")}) {
      if (dr.data_description.find(pseudonymize("veh-1", session, secret)) !=
          std::string::npos) {
        ++expected;
      }
    }
  }
  EXPECT_EQ(report.records.size(), expected);

  TransparencyExchange empty = h.spctm.transparency_report("nobody", nef);
  EXPECT_TRUE(empty.records.empty());
}

}  // namespace
}  // namespace jcas
