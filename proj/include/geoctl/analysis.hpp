#pragma once

// Local stability: equilibria, numeric linearization, characteristic
// polynomials, eigenvalues and Routh-Hurwitz tables.

#include "geoctl/dynamics.hpp"

#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace geoctl {

/// First-order closed-loop field x = (q, q') -> (q', q'').
using FirstOrderRhs = std::function<Vec(const Vec &x)>;

FirstOrderRhs closed_loop_rhs(const ControlledSystem &sys, const FeedbackLaw &law);
FirstOrderRhs free_first_order(const MetricField &metric, const ScalarField &V);

struct NewtonOptions {
    double tolerance = 1e-10;
    int max_iterations = 100;
};

/// Damped Newton iteration with minimum-norm steps, so equilibria in a
/// continuum (cyclic coordinates) are handled. NoConvergence on failure.
Vec find_equilibrium(const FirstOrderRhs &rhs, const Vec &guess, const NewtonOptions &opts = {});

/// Central-difference Jacobian, relative step 1e-6, one Richardson extrapolation.
/// With `mechanical` set the top blocks are forced to [0 I].
Mat linearize(const FirstOrderRhs &rhs, const Vec &xe, bool mechanical = true, double rel_step = 1e-6);

/// Monic characteristic polynomial det(pI − A) by Faddeev-LeVerrier, highest
/// power first: coeffs[0] = 1.
Vec characteristic_polynomial(const Mat &A);

/// Roots of a polynomial given highest power first, via its companion matrix.
Eigen::VectorXcd polynomial_roots(const Vec &coeffs);

enum class RouthVerdict { Stable, Marginal, Unstable };
const char *to_string(RouthVerdict v);

struct RouthTable {
    std::vector<std::vector<double>> rows;
    int sign_changes = 0;
    bool zero_row = false;   ///< auxiliary polynomial used: roots symmetric about the origin
    bool zero_pivot = false; ///< epsilon substitution used
    RouthVerdict verdict = RouthVerdict::Unstable;
};

/// Routh-Hurwitz table for coefficients given highest power first.
RouthTable routh_table(const Vec &coeffs, double eps = 1e-12);

enum class Classification { CenterCandidate, AsymptoticallyStable, Unstable, Degenerate };
const char *to_string(Classification c);

struct StabilityReport {
    Vec equilibrium;
    Mat A;
    Vec characteristic;  ///< monic, highest power first
    int zero_roots = 0;  ///< structural zero roots removed before the Routh analysis
    Vec factor;          ///< characteristic / p^zero_roots
    Eigen::VectorXcd eigenvalues;
    Classification classification = Classification::Degenerate;
    RouthTable routh;
};

/// Trailing characteristic coefficients below `tol` (relative) are deflated as
/// structural zero roots. The verdict uses the real parts of the remaining
/// factor's roots with band `tol`; structural zeros never yield
/// AsymptoticallyStable, and an all-zero spectrum is Degenerate.
StabilityReport characteristic_and_routh(const Mat &A, double tol = 1e-9);

StabilityReport stability(const FirstOrderRhs &rhs, const Vec &guess, const NewtonOptions &opts = {});

/// Human-readable rendering followed by a key=value block.
std::string render(const StabilityReport &r);

} // namespace geoctl
