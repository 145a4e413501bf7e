#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace tetlb {

struct ExecPolicy {
    unsigned threads = 1;
};

/// Work is cut into shards whose boundaries depend only on `n`, never on the
/// thread count, so per-shard partial results reduced in shard order are
/// bit-identical for any ExecPolicy.
inline constexpr std::size_t shard_size = 8192;

inline std::size_t shard_count(std::size_t n) { return (n + shard_size - 1) / shard_size; }

/// Calls fn(shard, begin, end) once per shard.
template <class Fn>
void for_each_shard(std::size_t n, ExecPolicy exec, Fn&& fn) {
    const std::size_t shards = shard_count(n);
    const auto run = [&](std::size_t s) { fn(s, s * shard_size, std::min(n, (s + 1) * shard_size)); };
    const std::size_t workers = std::min<std::size_t>(std::max(1u, exec.threads), shards);
    if (workers <= 1) {
        for (std::size_t s = 0; s < shards; ++s) run(s);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            for (std::size_t s = next++; s < shards && !failed; s = next++) {
                try {
                    run(s);
                } catch (...) {
                    if (!failed.exchange(true)) failure = std::current_exception();
                }
            }
        });
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

} // namespace tetlb
