// SPDX-License-Identifier: Apache-2.0
//
// dmimo-workbench: distributed-MIMO power allocation and robustness toolkit
// Copyright (C) 2026 the dmimo-workbench contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef DMIMO_ERRORS_HPP
#define DMIMO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dmimo {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ShapeMismatch : Error { using Error::Error; };
struct NonSquareRuCount : Error { using Error::Error; };
struct NegativeSinr : Error { using Error::Error; };
struct ZeroPower : Error { using Error::Error; };
struct DegenerateStd : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct InfeasibleModel : Error { using Error::Error; };
struct DivergedLoss : Error { using Error::Error; };
struct IndexOutOfRange : Error { using Error::Error; };
struct EmptySamples : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
struct BadConfig : Error { using Error::Error; };
struct BudgetViolation : Error { using Error::Error; };

}  // namespace dmimo

#endif  // DMIMO_ERRORS_HPP
