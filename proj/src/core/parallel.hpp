// Copyright 2026 The qdlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace qdlab {

/// Worker count from QDLAB_WORKERS, falling back to the hardware thread
/// count. Always at least 1.
int worker_count();

/// Override for the current process (0 restores the environment default).
void set_worker_count(int n);

/// Runs body(i) for i in [0, count) on the worker pool. Exceptions thrown by
/// any body are rethrown on the calling thread (the first one by index).
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

/// Fixed reduction block size. Ensemble reductions group realization
/// indices into blocks of this size, reduce each block in index order and
/// then combine blocks in block order, so totals do not depend on how
/// many workers ran.
inline constexpr std::size_t kReductionBlock = 8;

}  // namespace qdlab
