// Copyright 2026 The covertq Authors
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

#ifndef COVERTQ__COVERTQ_HPP_
#define COVERTQ__COVERTQ_HPP_

// Everything except io.hpp, which additionally needs nlohmann/json.

#include "covertq/capacities.hpp"
#include "covertq/channels.hpp"
#include "covertq/covert_sim.hpp"
#include "covertq/divergences.hpp"
#include "covertq/eg_toy.hpp"
#include "covertq/error.hpp"
#include "covertq/operator_core.hpp"
#include "covertq/rng.hpp"

#endif  // COVERTQ__COVERTQ_HPP_
