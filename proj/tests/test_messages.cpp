#include "jcas/messages.hpp"

#include <gtest/gtest.h>

#include "jcas/codec.hpp"
#include "testkit.hpp"

namespace jcas {
namespace {

Envelope well_formed_sens_req() {
  testkit::Gen gen(7);
  Envelope e;
  e.msg_id = 1;
  e.interface = Flow::SENS_REQ;
  e.sender = make_principal(PrincipalKind::APP, "collision-app");
  e.receiver = make_principal(PrincipalKind::NEF, "nef");
  e.sent_at = 3;
  SensingRequest q;
  q.request_id = "req-1";
  q.app_id = e.sender;
  q.target_spec.area = ConvexPolygon::rectangle(Rect{{0, 0}, {100, 100}});
  q.result_spec = ResultSpec::event_notification;
  q.qos = 1;
  q.qod = {10.0, 5};
  q.periodicity = 5;
  q.duration = 50;
  q.purpose = "collision-warning";
  e.payload = q;
  return e;
}

TEST(Validate, WellFormedSensReqOk) {
  EXPECT_TRUE(validate(well_formed_sens_req()).ok());
}

TEST(Validate, ZeroGranularityViolation) {
  Envelope e = well_formed_sens_req();
  std::get<SensingRequest>(e.payload).qod.spatial_m = 0.0;
  ValidationResult r = validate(e);
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.violations.front(), "granularity > 0");
}

TEST(Validate, InterfacePayloadMismatch) {
  Envelope e = well_formed_sens_req();
  e.interface = Flow::RESULT_STREAM;
  e.payload = Measurement{};
  ValidationResult r = validate(e);
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.violations.front(), "interface/payload mismatch");
}

TEST(Validate, StreamItemsMustBeSanitised) {
  testkit::Gen gen(11);
  Envelope e = gen.envelope(Flow::RESULT_STREAM);
  std::get<SensingResultItem>(e.payload).disclosure_level =
      DisclosureLevel::raw;
  ValidationResult r = validate(e);
  ASSERT_FALSE(r.ok());
}

TEST(Validate, Pure) {
  Envelope e = well_formed_sens_req();
  std::get<SensingRequest>(e.payload).duration = 0;
  ValidationResult a = validate(e);
  ValidationResult b = validate(e);
  EXPECT_EQ(a.violations, b.violations);
}

TEST(Validate, ResponseShapeInvariants) {
  SensingResponse s;
  s.request_id = "r";
  s.status = RespStatus::accepted;  // missing channel
  Envelope e = well_formed_sens_req();
  e.interface = Flow::SENS_RESPONSE;
  e.payload = s;
  EXPECT_FALSE(validate(e).ok());
  s.result_channel = "chan";
  e.payload = s;
  EXPECT_TRUE(validate(e).ok());
  s.status = RespStatus::rejected;  // missing reason
  e.payload = s;
  EXPECT_FALSE(validate(e).ok());
}

TEST(FlowTable, EveryFlowHasExactlyOnePayloadType) {
  for (std::uint8_t i = 0; i < kFlowCount; ++i) {
    const Flow f = static_cast<Flow>(i);
    const std::size_t idx = payload_index_for(f);
    EXPECT_LT(idx, 17u) << to_string(f);
    testkit::Gen gen(100 + i);
    Envelope e = gen.envelope(f);
    EXPECT_TRUE(payload_matches(f, e.payload)) << to_string(f);
  }
}

TEST(FlowTable, NamesRoundTrip) {
  for (std::uint8_t i = 0; i < kFlowCount; ++i) {
    const Flow f = static_cast<Flow>(i);
    auto parsed = flow_from_string(to_string(f));
    ASSERT_TRUE(parsed.has_value());
    EXPECT_EQ(*parsed, f);
  }
}

TEST(Codec, RoundTripPerFlow) {
  testkit::Gen gen(42);
  for (std::uint8_t i = 0; i < kFlowCount; ++i) {
    Envelope e = gen.envelope(static_cast<Flow>(i));
    Envelope back = decode(encode(e));
    EXPECT_EQ(back, e) << to_string(static_cast<Flow>(i));
  }
}

// Independent oracle for the round-trip property: a seeded generator plus
// structural equality, over 1000 random envelopes.
TEST(Codec, RoundTripThousandRandomEnvelopes) {
  testkit::Gen gen(20240601);
  for (int i = 0; i < 1000; ++i) {
    Envelope e = gen.any_envelope();
    ASSERT_EQ(decode(encode(e)), e) << "iteration " << i;
  }
}

TEST(Codec, TruncationIsParseErrorWithOffset) {
  Envelope e = well_formed_sens_req();
  std::string bytes = encode(e);
  const std::string cut = bytes.substr(0, bytes.size() - 1);
  try {
    decode(cut);
    FAIL() << "expected DecodeError";
  } catch (const codec::DecodeError& err) {
    EXPECT_LE(err.offset(), cut.size());
    EXPECT_NE(std::string(err.what()).find("byte"), std::string::npos);
  }
}

TEST(Codec, TrailingBytesRejected) {
  Envelope e = well_formed_sens_req();
  std::string bytes = encode(e) + "x";
  EXPECT_THROW(decode(bytes), codec::DecodeError);
}

TEST(Codec, GarbageRejected) {
  EXPECT_THROW(decode("not an envelope"), codec::DecodeError);
  EXPECT_THROW(decode(""), codec::DecodeError);
}

TEST(Codec, TaggedPayloadRoundTrip) {
  testkit::Gen gen(9);
  for (std::uint8_t i = 0; i < kFlowCount; ++i) {
    Payload p = gen.payload_for(static_cast<Flow>(i));
    auto back = decode_tagged_payload(encode_tagged_payload(p));
    ASSERT_TRUE(back.has_value());
    EXPECT_EQ(*back, p);
  }
  EXPECT_FALSE(decode_tagged_payload("zz").has_value());
}

TEST(Codec, PolicyRecordsRoundTrip) {
  testkit::Gen gen(13);
  SensingPolicy p = gen.sensing_policy();
  EXPECT_EQ(decode_sensing_policy(encode_record(p)), p);
  ConsentRecord c = gen.consent("purpose-x");
  EXPECT_EQ(decode_consent_record(encode_record(c)), c);
  SessionPolicy s = gen.session_policy();
  EXPECT_EQ(decode_session_policy(encode_record(s)), s);
}

}  // namespace
}  // namespace jcas
