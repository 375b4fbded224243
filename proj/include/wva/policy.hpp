// Copyright 2026 The wva-fisher Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "wva/numerics.hpp"
#include "wva/qstate.hpp"

namespace wva {

/// Numerical thresholds shared by every Fisher-information routine.
struct NumericPolicy {
    TruncationPolicy truncation{};
    /// Post-selection probabilities at or below this are treated as impossible.
    double p_min = 1e-12;
    /// Photon-number terms with P(n) < skip_rel * max P are left out of FI sums.
    double skip_rel = 1e-15;
    /// Quadrature points with P(x) below this are left out of FI integrals.
    double quadrature_skip = 1e-300;
    /// Step-halving Simpson for densities (normalisation, sampling CDFs).
    SimpsonOptions simpson{};
    /// Adaptive Simpson for Fisher-information integrals.
    AdaptiveSimpsonOptions fisher_integration{};
    /// Simpson window half-margin in units of the quadrature standard deviation.
    double window_sigmas = 12.0;
    double weak_value_threshold = 1e-10;
};

} // namespace wva
