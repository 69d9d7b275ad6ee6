// Copyright 2026 The macrobell Authors
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

#include "macrobell/bell.hpp"
#include "macrobell/error.hpp"
#include "macrobell/experiment.hpp"
#include "macrobell/macro_game.hpp"
#include "macrobell/numerics.hpp"
#include "macrobell/posner.hpp"
#include "macrobell/random.hpp"
#include "macrobell/spdc.hpp"
#include "macrobell/stats.hpp"
#include "macrobell/strategies.hpp"
#include "macrobell/version.hpp"
