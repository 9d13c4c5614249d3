#pragma once

#include "jcas/scenario.hpp"

namespace jcas::presets {

// Highway collision warning: one application, two network SUs with
// overlapping coverage, one UE-hosted SU, three moving targets, full
// controls. The baseline end-to-end flow.
Scenario highway(std::uint64_t seed = 42);

// In-home health monitoring: a UE-hosted SU is the only unit covering the
// monitored area, so sensing hinges on the user-side consent switch.
Scenario health_monitoring(std::uint64_t seed = 7);

// Compact world used as the substrate for adversarial scenarios.
Scenario threatbed(std::uint64_t seed = 1337);

}  // namespace jcas::presets
