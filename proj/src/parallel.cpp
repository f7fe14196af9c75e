#include "omfbm/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace omfbm {

namespace {
std::atomic<int> g_threads{0};
}

int default_threads() {
    int t = g_threads.load();
    if (t > 0) return t;
    return std::max(1u, std::thread::hardware_concurrency());
}

void set_default_threads(int threads) { g_threads.store(std::max(0, threads)); }

void parallel_chunks(std::int64_t count, std::int64_t chunk,
                     const std::function<void(std::int64_t, std::int64_t)>& fn, int threads) {
    if (count <= 0) return;
    chunk = std::max<std::int64_t>(1, chunk);
    const std::int64_t nchunks = (count + chunk - 1) / chunk;
    int nt = threads > 0 ? threads : default_threads();
    nt = static_cast<int>(std::min<std::int64_t>(nt, nchunks));
    if (nt <= 1) {
        for (std::int64_t c = 0; c < nchunks; ++c) fn(c * chunk, std::min(count, (c + 1) * chunk));
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto worker = [&] {
        for (;;) {
            std::int64_t c = next.fetch_add(1);
            if (c >= nchunks) return;
            try {
                fn(c * chunk, std::min(count, (c + 1) * chunk));
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mu);
                if (!err) err = std::current_exception();
                next.store(nchunks);
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < nt; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace omfbm
