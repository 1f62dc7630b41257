#pragma once

#include <cstddef>
#include <exception>
#include <vector>

namespace eidcloud::detail {

// Runs body(i) for i in [0, n) across OpenMP threads. If any iteration throws,
// the exception of the lowest failing index is rethrown after the loop.
template <typename F>
void parallel_for(std::size_t n, F&& body)
{
    std::vector<std::exception_ptr> errors(n);
    const auto count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < count; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

template <typename F>
void serial_for(std::size_t n, F&& body)
{
    for (std::size_t i = 0; i < n; ++i) body(i);
}

}  // namespace eidcloud::detail
