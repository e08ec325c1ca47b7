#include "geoctl/types.hpp"

#include <sstream>

namespace geoctl {

const char *to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::SingularMetric: return "SingularMetric";
    case ErrorKind::OutsideFeasibleRegion: return "OutsideFeasibleRegion";
    case ErrorKind::HypothesisViolated: return "HypothesisViolated";
    case ErrorKind::MatchingViolated: return "MatchingViolated";
    case ErrorKind::DependentControlFields: return "DependentControlFields";
    case ErrorKind::NonPositiveCoefficient: return "NonPositiveCoefficient";
    case ErrorKind::InfeasibleInitialState: return "InfeasibleInitialState";
    case ErrorKind::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorKind::SingularHessian: return "SingularHessian";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::ParameterOutOfRange: return "ParameterOutOfRange";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

std::string format_point(const Vec &q) {
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (Eigen::Index i = 0; i < q.size(); ++i) {
        if (i) os << ", ";
        os << q[i];
    }
    os << ')';
    return os.str();
}

Error::Error(ErrorKind kind, const std::string &what, Vec where)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what +
                         (where.size() ? " at " + format_point(where) : std::string())),
      kind_(kind), where_(std::move(where)) {}

bool all_finite(const Vec &v) { return v.allFinite(); }
bool all_finite(const Mat &m) { return m.allFinite(); }

} // namespace geoctl
