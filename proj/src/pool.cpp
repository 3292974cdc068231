#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "tdlab/errors.hpp"
#include "tdlab/pool.hpp"

namespace tdlab {

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("TD_LAB_THREADS")) {
        try {
            int v = std::stoi(env);
            if (v > 0) return v;
        } catch (const std::exception&) {
        }
        throw ConfigError("TD_LAB_THREADS must be a positive integer, got '" + std::string(env) + "'");
    }
    return 1;
}

std::size_t parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& task,
                         const std::atomic<bool>* stop) {
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex mu;
    auto worker = [&] {
        for (;;) {
            if (stop && stop->load()) return;
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                task(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!err) err = std::current_exception();
                next.store(n);
            }
        }
    };
    int t = std::max(1, std::min<int>(threads, int(n)));
    if (t == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < t; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (err) std::rethrow_exception(err);
    return std::min(next.load(), n);
}

}  // namespace tdlab
