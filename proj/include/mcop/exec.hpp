// Copyright 2026 The MCOP-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace mcop {

// Every data-parallel kernel takes an Exec argument. The Serial path is the
// reference implementation; the Parallel path must produce bit-identical output.
enum class Exec { Serial, Parallel };

/// Number of OpenMP worker threads the Parallel path will use (1 without OpenMP).
int max_threads();

/// Sets the OpenMP thread count for subsequent Parallel kernels; n <= 0 keeps the default.
void set_threads(int n);

}  // namespace mcop
