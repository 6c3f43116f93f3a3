// Copyright 2026 The UBCL Authors. All rights reserved.
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

#ifndef UBCL_UBCL_HPP_
#define UBCL_UBCL_HPP_

#include "ubcl/adam.hpp"
#include "ubcl/arena.hpp"
#include "ubcl/behavior.hpp"
#include "ubcl/checkpoint.hpp"
#include "ubcl/config.hpp"
#include "ubcl/errors.hpp"
#include "ubcl/eval.hpp"
#include "ubcl/network.hpp"
#include "ubcl/observation.hpp"
#include "ubcl/ppo.hpp"
#include "ubcl/replay.hpp"
#include "ubcl/reward.hpp"
#include "ubcl/rng.hpp"
#include "ubcl/serialization.hpp"
#include "ubcl/session.hpp"
#include "ubcl/trainer.hpp"

#endif  // UBCL_UBCL_HPP_
