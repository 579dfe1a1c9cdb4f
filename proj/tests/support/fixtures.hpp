#pragma once

#include <string>
#include <vector>

#include "implauth/events.hpp"
#include "implauth/persona.hpp"

namespace fixture {

inline implauth::SensorEvent app(implauth::Timestamp ts, std::string label, std::string loc = "home") {
  return {ts, "u1", implauth::SensorKind::app, std::move(label), std::move(loc)};
}

inline implauth::SensorEvent reading(implauth::Timestamp ts, implauth::SensorKind sensor, double v,
                                     std::string loc = "home") {
  return {ts, "u1", sensor, v, std::move(loc)};
}

/// Single location, single app, no noise.
inline implauth::PersonaSpec degenerate_persona() {
  implauth::PersonaSpec p;
  p.seed = 9;
  p.start_ts = 1370044800;
  p.duration_days = 1;
  implauth::LocationDwell home{"home", {}};
  home.dwell.fill(1.0);
  p.locations = {home};
  p.app_habits[{implauth::kAnyHour, "home"}] = {{"mail", 1.0}};
  p.continuous_baselines[{implauth::SensorKind::light, implauth::kAnyHour}] = {100.0, 0.0};
  return p;
}

}  // namespace fixture
