// Copyright 2026 The shortcut-v2v Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>

namespace sv2v {

/// Worker cap: SHORTCUT_V2V_THREADS when set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
int worker_count();

/// Runs fn(i) for i in [0, n) on up to worker_count() threads. Each index is
/// processed exactly once; results must not depend on scheduling. The first
/// exception thrown by any task is rethrown after all workers finish.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace sv2v
