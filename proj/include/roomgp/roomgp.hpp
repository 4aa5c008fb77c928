// Copyright 2026 The roomgp Authors
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

// Umbrella header.

#pragma once

#include "roomgp/config.hpp"
#include "roomgp/geometry.hpp"
#include "roomgp/gpedf.hpp"
#include "roomgp/line_extraction.hpp"
#include "roomgp/metrics.hpp"
#include "roomgp/pipeline.hpp"
#include "roomgp/room_index.hpp"
#include "roomgp/room_segmentation.hpp"
#include "roomgp/rooms.hpp"
#include "roomgp/spectral.hpp"
#include "roomgp/svg.hpp"
#include "roomgp/world_sim.hpp"
