#pragma once

#include <cstddef>
#include <functional>

namespace stackqa {

// Runs fn(i) for i in [0, count). With jobs > 1 the index range is split into
// contiguous chunks across threads; fn must only write to slots owned by its
// index so results are identical to the serial order.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace stackqa
