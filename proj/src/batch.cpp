#include "geoctl/batch.hpp"

#include <omp.h>

namespace geoctl {

Mat evaluate_law_serial(const FeedbackLaw &law, const StateBatch &states) {
    Mat U(law.controls(), static_cast<Eigen::Index>(states.size()));
    for (size_t i = 0; i < states.size(); ++i)
        U.col(static_cast<Eigen::Index>(i)) = law(states[i].first, states[i].second);
    return U;
}

Mat evaluate_law_parallel(const FeedbackLaw &law, const StateBatch &states) {
    Mat U(law.controls(), static_cast<Eigen::Index>(states.size()));
    const long n = static_cast<long>(states.size());
    // Errors are rethrown after the loop: exceptions must not leave an OpenMP region.
    std::vector<std::string> errors(states.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) {
        try {
            U.col(i) = law(states[static_cast<size_t>(i)].first, states[static_cast<size_t>(i)].second);
        } catch (const std::exception &e) {
            errors[static_cast<size_t>(i)] = e.what();
        }
    }
    for (size_t i = 0; i < errors.size(); ++i)
        if (!errors[i].empty())
            throw Error(ErrorKind::InvalidArgument, "batch item " + std::to_string(i) + ": " + errors[i],
                        states[i].first);
    return U;
}

int worker_threads() { return omp_get_max_threads(); }

} // namespace geoctl
