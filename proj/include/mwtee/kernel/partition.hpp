// Copyright 2026 The mwtee Authors
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

#pragma once

#include <stdexcept>
#include <string>

#include "mwtee/hw/platform.hpp"
#include "mwtee/kernel/config.hpp"

// Boot-time system partitioning: region validation, per-world SAU tables
// and the one-time setup of the MPC/PPC gates and interrupt targets.
namespace mwtee::kernel {

class PartitionError : public std::runtime_error {
public:
    enum class Kind { Overlap, Capacity, Granularity };

    PartitionError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// The gateway region as a region spec.
MemRegionSpec gateway_region(const hw::PlatformDescription& platform);

// All regions pairwise disjoint, clear of the gateway, and each inside a
// declared memory. Throws PartitionError(Overlap) naming both regions, or
// "unmapped" for a region outside every memory.
void sp_validate(const SystemConfig& config);

// One NonSecure slot per region and per device, one NSC slot for the
// gateway, remaining slots disabled. Throws PartitionError(Capacity).
hw::SauState sp_build_sau_table(const WorldConfig& world, const MemRegionSpec& gateway,
                                const hw::PlatformDescription& platform);

// Marks the blocks under every world region NonSecure, the rest Secure.
// Throws PartitionError(Granularity) for a region whose edges are not
// block-aligned.
hw::MpcState sp_build_mpc(const SystemConfig& config, const hw::MpcState& skeleton);

// One-time gate setup: MPCs per sp_build_mpc, assigned devices NonSecure in
// the PPC, irq priorities loaded, and only the first world's irqs targeted
// NonSecure.
void sp_apply_static(const SystemConfig& config, hw::PlatformState& platform);

}  // namespace mwtee::kernel
