#include "noprop/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace noprop {

namespace {
std::atomic<int> g_worker_override{0};
} // namespace

void set_worker_override(int n) { g_worker_override.store(n); }

int worker_count() {
    const int ov = g_worker_override.load();
    if (ov > 0) return ov;
    if (const char* env = std::getenv("NOPROP_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_chunks(std::int64_t n_items, std::int64_t chunk_size,
                     const std::function<void(std::int64_t, std::int64_t, std::int64_t)>& fn) {
    if (n_items <= 0) return;
    if (chunk_size < 1) chunk_size = 1;
    const std::int64_t n_chunks = (n_items + chunk_size - 1) / chunk_size;
    const int workers = std::min<std::int64_t>(worker_count(), n_chunks);

    if (workers <= 1) {
        for (std::int64_t c = 0; c < n_chunks; ++c)
            fn(c, c * chunk_size, std::min(n_items, (c + 1) * chunk_size));
        return;
    }

    std::atomic<std::int64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        for (;;) {
            const std::int64_t c = next.fetch_add(1);
            if (c >= n_chunks) return;
            try {
                fn(c, c * chunk_size, std::min(n_items, (c + 1) * chunk_size));
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers) - 1);
    for (int i = 1; i < workers; ++i) pool.emplace_back(body);
    body();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace noprop
