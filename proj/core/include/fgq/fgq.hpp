// Copyright 2026 The FGQ Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "fgq/distfit.hpp"
#include "fgq/error.hpp"
#include "fgq/fgq_file.hpp"
#include "fgq/fixedpoint.hpp"
#include "fgq/grouping.hpp"
#include "fgq/inference.hpp"
#include "fgq/perf_model.hpp"
#include "fgq/tensor_io.hpp"
#include "fgq/ternary.hpp"
