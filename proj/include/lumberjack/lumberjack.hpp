// Copyright 2026 The dp-lumberjack Authors
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

#include "lumberjack/bench.hpp"
#include "lumberjack/count_tree.hpp"
#include "lumberjack/datagen.hpp"
#include "lumberjack/dataset.hpp"
#include "lumberjack/errors.hpp"
#include "lumberjack/forest.hpp"
#include "lumberjack/hh.hpp"
#include "lumberjack/node_label.hpp"
#include "lumberjack/privacy.hpp"
#include "lumberjack/rng.hpp"
#include "lumberjack/schema.hpp"
#include "lumberjack/text_io.hpp"
#include "lumberjack/threshold.hpp"
#include "lumberjack/tree_builder.hpp"
