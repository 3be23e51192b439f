// Copyright 2026 The ActLoc Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "actloc/control.hpp"

#include <algorithm>
#include <cmath>

namespace actloc {

void ControllerGains::validate() const {
  if (!(lambda_p >= 0.0) || !(lambda_d >= 0.0)) {
    throw Error("controller gains must be non-negative");
  }
}

ControlError control_error(Bearing q, Bearing c) {
  return ControlError{wrap_angle(q.pan - c.pan), wrap_angle(q.tilt - c.tilt)};
}

PdResult pd_step(const ControlError& e, const ControllerState& state,
                 const ControllerGains& gains) {
  PdResult r;
  r.state = state;
  if (!std::isfinite(e.first) || !std::isfinite(e.second)) {
    r.incident = true;
    ++r.state.incidents;
    return r;
  }
  double d1 = 0.0, d2 = 0.0;
  if (state.initialized) {
    d1 = e.first - state.prev_error.first;
    d2 = e.second - state.prev_error.second;
  }
  r.command = ControlCommand{gains.lambda_p * e.first + gains.lambda_d * d1,
                             gains.lambda_p * e.second + gains.lambda_d * d2};
  r.state.prev_error = e;
  r.state.initialized = true;
  return r;
}

PdResult follower_map(double distance, double bearing,
                      const ControllerState& state,
                      const ControllerGains& gains, double ideal_distance) {
  // Error order (distance, bearing); the command order is (turn, speed).
  PdResult pd = pd_step(ControlError{distance - ideal_distance, bearing}, state, gains);
  PdResult r = pd;
  r.command = ControlCommand{pd.command.b, std::max(0.0, pd.command.a)};
  return r;
}

}  // namespace actloc
