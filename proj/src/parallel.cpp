#include "maskslic/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace maskslic {

namespace {

std::atomic<int> g_threads{0};

int default_threads()
{
    if (const char* env = std::getenv("MSLIC_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

void set_num_threads(int n) { g_threads = std::max(0, n); }

int num_threads()
{
    int n = g_threads.load();
    return n > 0 ? n : default_threads();
}

void parallel_chunks(std::size_t n, std::size_t chunk_size,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn)
{
    if (n == 0) return;
    chunk_size = std::max<std::size_t>(chunk_size, 1);
    const std::size_t chunks = chunk_count(n, chunk_size);
    const auto workers = static_cast<std::size_t>(std::min<std::size_t>(num_threads(), chunks));

    auto run = [&](std::size_t c) { fn(c, c * chunk_size, std::min(n, (c + 1) * chunk_size)); };

    if (workers <= 1) {
        for (std::size_t c = 0; c < chunks; ++c) run(c);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t c = next++; c < chunks; c = next++) {
            try {
                run(c);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace maskslic
