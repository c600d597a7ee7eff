#pragma once

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace llcomb {

/// Keep large Jacobian-sized blocks on the heap instead of fresh mmap regions; continuation
/// reallocates them every corrector iteration and page faults otherwise dominate system time.
/// Call once from main before any work.
inline void configure_allocator() noexcept {
#if defined(__GLIBC__)
    mallopt(M_MMAP_THRESHOLD, 64 << 20);
    mallopt(M_TRIM_THRESHOLD, 128 << 20);
#endif
}

} // namespace llcomb
