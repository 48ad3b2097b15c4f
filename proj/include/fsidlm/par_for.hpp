#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace fsidlm {

/// Resolve a thread-count request: 0 means "auto" (FSIDLM_THREADS env var,
/// then hardware concurrency).
int resolve_thread_count(int requested);

/// Static contiguous partition of [0, n) over n_threads workers.
/// fn(begin, end, thread_id) is called once per non-empty chunk.
///
/// The chunk boundaries depend only on n and n_threads, never on scheduling,
/// which is what the deterministic-assembly contract builds on.
template <class Fn>
void par_for(std::size_t n, int n_threads, Fn&& fn) {
    if (n == 0) return;
    const std::size_t nt = n_threads < 1 ? 1 : static_cast<std::size_t>(n_threads);
    if (nt == 1 || n == 1) {
        fn(std::size_t{0}, n, 0);
        return;
    }
    const std::size_t chunk = (n + nt - 1) / nt;
    std::vector<std::thread> workers;
    workers.reserve(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        const std::size_t begin = t * chunk;
        if (begin >= n) break;
        const std::size_t end = std::min(n, begin + chunk);
        workers.emplace_back([&fn, begin, end, t] { fn(begin, end, static_cast<int>(t)); });
    }
    for (auto& w : workers) w.join();
}

} // namespace fsidlm
