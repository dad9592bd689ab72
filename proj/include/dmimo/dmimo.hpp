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

#ifndef DMIMO_DMIMO_HPP
#define DMIMO_DMIMO_HPP

#include "dmimo/attack.hpp"
#include "dmimo/bench.hpp"
#include "dmimo/core.hpp"
#include "dmimo/dataset.hpp"
#include "dmimo/errors.hpp"
#include "dmimo/mlp.hpp"
#include "dmimo/mmf.hpp"
#include "dmimo/rng.hpp"
#include "dmimo/scenario.hpp"
#include "dmimo/stats.hpp"
#include "dmimo/types.hpp"

#endif  // DMIMO_DMIMO_HPP
