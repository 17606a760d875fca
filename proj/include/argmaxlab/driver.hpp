#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <span>
#include <thread>
#include <vector>

#include "argmaxlab/mc_stats.hpp"
#include "argmaxlab/rng.hpp"

namespace argmaxlab {

// Thread count: explicit request, else ARGMAXLAB_THREADS, else hardware.
inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("ARGMAXLAB_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

struct DriverOptions {
    std::size_t replicates = 0;
    std::uint64_t seed = 0;
    int threads = 0;
    std::size_t block_size = 1024;
    std::vector<std::size_t> collect;  // observable indices stored per replicate
};

struct DriverResult {
    McAccumulator acc;
    std::vector<std::vector<double>> collected;
};

// Runs `replicates` independent replicates partitioned into fixed-size blocks.
// Worker threads pull blocks; block accumulators merge in index order, so the
// result is independent of thread scheduling. `make_worker()` runs once per
// thread and returns a callable (const SeedSpec&, std::span<double> obs).
template <class MakeWorker>
DriverResult run_replicated(std::size_t num_observables, const DriverOptions& opt,
                            MakeWorker&& make_worker) {
    const std::size_t n = opt.replicates;
    const std::size_t bs = std::max<std::size_t>(1, opt.block_size);
    const std::size_t nblocks = n == 0 ? 0 : (n + bs - 1) / bs;
    const int nthreads =
        static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(resolve_threads(opt.threads)),
                                               std::max<std::size_t>(1, nblocks)));

    DriverResult res{McAccumulator(num_observables), {}};
    res.collected.assign(opt.collect.size(), std::vector<double>(n));
    if (n == 0) return res;

    std::vector<McAccumulator> block_acc(nblocks, McAccumulator(num_observables));
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::atomic<bool> failed{false};

    auto run = [&]() {
        try {
            auto worker = make_worker();
            std::vector<double> obs(num_observables);
            for (std::size_t b = next.fetch_add(1); b < nblocks; b = next.fetch_add(1)) {
                if (failed.load(std::memory_order_relaxed)) return;
                const std::size_t lo = b * bs;
                const std::size_t hi = std::min(n, lo + bs);
                McAccumulator& acc = block_acc[b];
                for (std::size_t r = lo; r < hi; ++r) {
                    worker(SeedSpec{opt.seed, r}, std::span<double>(obs));
                    acc.add(obs);
                    for (std::size_t c = 0; c < opt.collect.size(); ++c)
                        res.collected[c][r] = obs[opt.collect[c]];
                }
            }
        } catch (...) {
            if (!failed.exchange(true)) first_error = std::current_exception();
        }
    };

    if (nthreads <= 1) {
        run();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(nthreads));
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(run);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    for (const auto& a : block_acc) res.acc.merge(a);
    return res;
}

}  // namespace argmaxlab
