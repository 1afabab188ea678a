// parallel.hpp
// Deterministic seeding and sharded Monte Carlo execution.

#pragma once

#include <cstdint>
#include <exception>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include "qphoton/qcore.hpp"

namespace qphoton {

// Independent stream for worker `stream` derived from a master seed.
inline Rng make_substream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      0x9e3779b9u};
    return Rng(seq);
}

struct Shard {
    int worker = 0;
    std::uint64_t begin = 0;
    std::uint64_t end = 0;
    std::uint64_t size() const { return end - begin; }
};

// Splits [0, total) into `workers` contiguous shards and runs
// fn(shard, rng) for each on its own thread with a substream of `seed`.
// Results come back in worker order, so merges are deterministic for a fixed
// (seed, workers) pair.
template <class Fn>
auto run_sharded(std::uint64_t total, int workers, std::uint64_t seed, Fn fn) {
    if (workers < 1) throw std::invalid_argument("workers must be >= 1");
    using Result = decltype(fn(std::declval<const Shard&>(), std::declval<Rng&>()));
    std::vector<Result> results(static_cast<std::size_t>(workers));
    std::vector<Shard> shards;
    const std::uint64_t n = static_cast<std::uint64_t>(workers);
    for (std::uint64_t w = 0; w < n; ++w) {
        shards.push_back({static_cast<int>(w), total * w / n, total * (w + 1) / n});
    }
    std::vector<std::exception_ptr> errors(shards.size());
    auto body = [&](std::size_t w) {
        try {
            Rng rng = make_substream(seed, w);
            results[w] = fn(shards[w], rng);
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };
    if (workers == 1) {
        body(0);
    } else {
        std::vector<std::thread> threads;
        threads.reserve(shards.size());
        for (std::size_t w = 0; w < shards.size(); ++w) threads.emplace_back(body, w);
        for (auto& t : threads) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return results;
}

}  // namespace qphoton
