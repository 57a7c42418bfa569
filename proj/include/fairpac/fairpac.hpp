// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The fairpac Authors

#pragma once

#include "fairpac/error.hpp"
#include "fairpac/harness.hpp"
#include "fairpac/instances.hpp"
#include "fairpac/metrics.hpp"
#include "fairpac/oracle.hpp"
#include "fairpac/rankers.hpp"
#include "fairpac/types.hpp"
#include "fairpac/verify.hpp"
