// Copyright 2026 The memkernel Authors
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

// Umbrella header for the numerical library (the CLI layer lives in cli.hpp).

#pragma once

#include "memkernel/common.hpp"
#include "memkernel/evolution_solver.hpp"
#include "memkernel/exp_sum.hpp"
#include "memkernel/kernel_families.hpp"
#include "memkernel/laplace_tools.hpp"
#include "memkernel/markovianity.hpp"
#include "memkernel/pauli_channel.hpp"
#include "memkernel/polynomial.hpp"
#include "memkernel/tabulated.hpp"
#include "memkernel/time_grid.hpp"
#include "memkernel/waiting_function.hpp"
