#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace geoctl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Christoffel symbols stored as one matrix per upper index: gamma[k](i, j) = Γ^k_{ij}.
using Christoffel = std::vector<Mat>;

enum class ErrorKind {
    NotPositiveDefinite,
    SingularMetric,
    OutsideFeasibleRegion,
    HypothesisViolated,
    MatchingViolated,
    DependentControlFields,
    NonPositiveCoefficient,
    InfeasibleInitialState,
    StepSizeUnderflow,
    SingularHessian,
    NoConvergence,
    ParameterOutOfRange,
    NonFiniteValue,
    InvalidArgument,
};

const char *to_string(ErrorKind kind);

/// Library error. Carries the configuration (or state) at which the failure was
/// detected when one is available.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string &what, Vec where = Vec());

    ErrorKind kind() const noexcept { return kind_; }
    const Vec &where() const noexcept { return where_; }

private:
    ErrorKind kind_;
    Vec where_;
};

std::string format_point(const Vec &q);

bool all_finite(const Vec &v);
bool all_finite(const Mat &m);

} // namespace geoctl
