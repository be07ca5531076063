#pragma once

#include <cstddef>
#include <functional>

namespace maskslic {

/// Worker count used by the parallel kernels. 0 restores the default, which
/// reads MSLIC_THREADS (0 or unset = hardware concurrency).
void set_num_threads(int n);
int num_threads();

/// Calls fn(chunk_index, begin, end) for every chunk of [0, n) split into
/// blocks of chunk_size. Chunk boundaries depend only on n and chunk_size,
/// never on the worker count, so per-chunk partial results merged in chunk
/// order are identical for any thread count.
void parallel_chunks(std::size_t n, std::size_t chunk_size,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

inline std::size_t chunk_count(std::size_t n, std::size_t chunk_size)
{
    return (n + chunk_size - 1) / chunk_size;
}

}  // namespace maskslic
