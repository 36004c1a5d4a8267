#pragma once

#include <cstddef>
#include <functional>

namespace ldiag {

/// 0 means one worker per hardware thread.
[[nodiscard]] unsigned resolve_workers(unsigned requested) noexcept;

/// Calls body(i) for i in [0, count) on up to `workers` threads. Indices are
/// handed out dynamically, so body must write only to slot i. If any call
/// throws, the exception from the lowest failing index is rethrown after all
/// threads join.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& body);

}  // namespace ldiag
