#pragma once

#include <algorithm>
#include <cstddef>
#include <future>
#include <thread>
#include <vector>

namespace nmfcast::detail {

inline std::size_t worker_count(std::size_t requested, std::size_t tasks) {
    std::size_t n = requested > 0 ? requested : std::max<std::size_t>(1, std::thread::hardware_concurrency());
    return std::max<std::size_t>(1, std::min(n, tasks));
}

/// Evaluates fn(0) ... fn(count - 1) on up to `workers` threads and returns
/// the results in index order. Exceptions propagate from the lowest index.
template <typename Fn>
auto parallel_map(std::size_t count, std::size_t workers, Fn&& fn) -> std::vector<decltype(fn(std::size_t{}))> {
    using Result = decltype(fn(std::size_t{}));
    std::vector<Result> out;
    out.reserve(count);
    const std::size_t width = worker_count(workers, count);
    if (width <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            out.push_back(fn(i));
        }
        return out;
    }
    for (std::size_t begin = 0; begin < count; begin += width) {
        const std::size_t end = std::min(count, begin + width);
        std::vector<std::future<Result>> batch;
        batch.reserve(end - begin);
        for (std::size_t i = begin; i < end; ++i) {
            batch.push_back(std::async(std::launch::async, [&fn, i] { return fn(i); }));
        }
        for (auto& f : batch) {
            out.push_back(f.get());
        }
    }
    return out;
}

}  // namespace nmfcast::detail
