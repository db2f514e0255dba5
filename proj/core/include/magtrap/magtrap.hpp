// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License.  You
// may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied.  See the License for the specific language governing
// permissions and limitations under the License.

#pragma once

// Umbrella header for the magtrap library.

#include <magtrap/adam.hpp>
#include <magtrap/analysis.hpp>
#include <magtrap/constants.hpp>
#include <magtrap/field.hpp>
#include <magtrap/geometry.hpp>
#include <magtrap/grid.hpp>
#include <magtrap/io.hpp>
#include <magtrap/objective.hpp>
#include <magtrap/optimize.hpp>
#include <magtrap/reference_loss.hpp>
#include <magtrap/trap_problem.hpp>
