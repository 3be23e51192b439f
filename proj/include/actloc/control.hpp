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

// Reactive PD camera control. The command is
//
//   u(t) = lambda_p * e(t) + lambda_d * (e(t) - e(t-1))
//
// with e the camera-relative angular error toward the localized action. The
// derivative is a one-step backward difference and is zero on the first call.
// There is no integral term.

#ifndef ACTLOC_CONTROL_HPP_
#define ACTLOC_CONTROL_HPP_

#include "actloc/geometry.hpp"
#include "actloc/world.hpp"

namespace actloc {

struct ControllerGains {
  double lambda_p = 1.0;
  double lambda_d = 0.1;

  void validate() const;
};

/// Two-component error: (pan, tilt) in pan_tilt mode, (distance, bearing) in
/// follower mode.
struct ControlError {
  double first = 0.0;
  double second = 0.0;
};

struct ControllerState {
  ControlError prev_error;
  bool initialized = false;
  int incidents = 0;  ///< non-finite errors seen
};

/// Wrap-aware q - c per component.
ControlError control_error(Bearing q, Bearing c);

struct PdResult {
  ControlCommand command;
  ControllerState state;
  bool incident = false;
};

/// One PD update over both components. A non-finite error yields a zero
/// command, leaves prev_error untouched and counts an incident.
PdResult pd_step(const ControlError& e, const ControllerState& state,
                 const ControllerGains& gains);

/// Follower mapping: turn = PD on the bearing error, forward speed = PD on
/// (distance - ideal_distance) clamped at zero. Bearing is right-positive.
PdResult follower_map(double distance, double bearing,
                      const ControllerState& state,
                      const ControllerGains& gains, double ideal_distance);

}  // namespace actloc

#endif  // ACTLOC_CONTROL_HPP_
