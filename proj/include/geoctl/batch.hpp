#pragma once

// Order-preserving batch evaluation. The OpenMP kernel and the serial reference
// return identical results; each item captures its own failure.

#include "geoctl/control.hpp"

#include <exception>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

namespace geoctl {

template <class R> struct Outcome {
    std::optional<R> value;
    std::string error; ///< empty on success

    bool ok() const { return value.has_value(); }
};

namespace detail {
template <class R, class F, class In> Outcome<R> guarded(F &f, const In &item) {
    Outcome<R> out;
    try {
        out.value.emplace(f(item));
    } catch (const std::exception &e) {
        out.error = e.what();
        if (out.error.empty()) out.error = "unknown failure";
    } catch (...) {
        out.error = "unknown failure";
    }
    return out;
}
} // namespace detail

template <class In, class F> auto serial_map(const std::vector<In> &items, F f) {
    using R = std::decay_t<std::invoke_result_t<F &, const In &>>;
    std::vector<Outcome<R>> out(items.size());
    for (size_t i = 0; i < items.size(); ++i) out[i] = detail::guarded<R>(f, items[i]);
    return out;
}

/// Items run concurrently; result i always belongs to item i.
template <class In, class F> auto parallel_map(const std::vector<In> &items, F f) {
    using R = std::decay_t<std::invoke_result_t<F &, const In &>>;
    std::vector<Outcome<R>> out(items.size());
    const long n = static_cast<long>(items.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) out[static_cast<size_t>(i)] = detail::guarded<R>(f, items[static_cast<size_t>(i)]);
    return out;
}

using StateBatch = std::vector<std::pair<Vec, Vec>>;

/// Column i holds law(q_i, q'_i).
Mat evaluate_law_serial(const FeedbackLaw &law, const StateBatch &states);
Mat evaluate_law_parallel(const FeedbackLaw &law, const StateBatch &states);

/// Number of threads the parallel kernels use.
int worker_threads();

} // namespace geoctl
