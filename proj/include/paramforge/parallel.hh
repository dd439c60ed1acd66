#pragma once

#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace paramforge
{
    // Runs f(i) for every i in [0, n), striding indices over up to `threads`
    // workers. Callers write results into per-index slots, so the outcome does
    // not depend on the worker count. If any call throws, the exception from
    // the smallest failing index is rethrown after all workers finish.
    template <typename F>
    auto parallel_for(std::size_t n, unsigned threads, F && f) -> void
    {
        if (threads <= 1 || n <= 1) {
            for (std::size_t i = 0 ; i < n ; ++i)
                f(i);
            return;
        }

        unsigned workers = threads < n ? threads : static_cast<unsigned>(n);
        std::vector<std::exception_ptr> errors(workers);
        std::vector<std::size_t> error_index(workers, n);
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0 ; w < workers ; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t i = w ; i < n ; i += workers) {
                    try {
                        f(i);
                    }
                    catch (...) {
                        errors[w] = std::current_exception();
                        error_index[w] = i;
                        return;
                    }
                }
            });
        for (auto & t : pool)
            t.join();

        std::size_t first = n;
        std::exception_ptr error;
        for (unsigned w = 0 ; w < workers ; ++w)
            if (errors[w] && error_index[w] < first) {
                first = error_index[w];
                error = errors[w];
            }
        if (error)
            std::rethrow_exception(error);
    }
}
