// SPDX-License-Identifier: Apache-2.0
//
// uavfd: energy-aware trajectory and wireless power transfer planning for a
// full-duplex MIMO UAV.
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

#pragma once

#include "uavfd/model.hpp"
#include "uavfd/channel.hpp"
#include "uavfd/energy.hpp"
#include "uavfd/conic/program.hpp"
#include "uavfd/conic/solver.hpp"
#include "uavfd/conic/barrier.hpp"
#include "uavfd/conic/simplex.hpp"
#include "uavfd/sca.hpp"
#include "uavfd/planner.hpp"
#include "uavfd/io.hpp"
