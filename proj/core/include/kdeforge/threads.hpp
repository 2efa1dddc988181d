#pragma once

#include <cstddef>

namespace kdeforge {

/// Upper bound on worker threads used by grid evaluation, bootstrap
/// replicates and trajectory loops. Defaults to the KDEFORGE_THREADS
/// environment variable when set, otherwise the hardware concurrency.
/// Results never depend on this value.
std::size_t max_threads() noexcept;

/// 0 restores the default.
void set_max_threads(std::size_t count) noexcept;

}  // namespace kdeforge
