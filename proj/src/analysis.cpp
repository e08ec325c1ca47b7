#include "geoctl/analysis.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>
#include <limits>
#include <sstream>

namespace geoctl {

FirstOrderRhs closed_loop_rhs(const ControlledSystem &sys, const FeedbackLaw &law) {
    const int n = sys.dim();
    return [sys, law, n](const Vec &x) {
        Vec out(2 * n);
        out.head(n) = x.tail(n);
        out.tail(n) = forced_rhs(sys, &law, x.head(n), x.tail(n));
        return out;
    };
}

FirstOrderRhs free_first_order(const MetricField &metric, const ScalarField &V) {
    const int n = metric.dim();
    return [metric, V, n](const Vec &x) {
        Vec out(2 * n);
        out.head(n) = x.tail(n);
        out.tail(n) = free_rhs(metric, V, x.head(n), x.tail(n));
        return out;
    };
}

Mat linearize(const FirstOrderRhs &rhs, const Vec &xe, bool mechanical, double rel_step) {
    const auto N = xe.size();
    Mat J(N, N);
    auto central = [&](Eigen::Index j, double h) {
        Vec xp = xe, xm = xe;
        xp[j] += h;
        xm[j] -= h;
        return ((rhs(xp) - rhs(xm)) / (2.0 * h)).eval();
    };
    for (Eigen::Index j = 0; j < N; ++j) {
        double h = rel_step * std::max(1.0, std::abs(xe[j]));
        J.col(j) = (4.0 * central(j, 0.5 * h) - central(j, h)) / 3.0;
    }
    if (mechanical) {
        const auto n = N / 2;
        J.topLeftCorner(n, n).setZero();
        J.topRightCorner(n, n).setIdentity();
    }
    return J;
}

Vec find_equilibrium(const FirstOrderRhs &rhs, const Vec &guess, const NewtonOptions &opts) {
    Vec x = guess;
    Vec F = rhs(x);
    for (int it = 0; it < opts.max_iterations; ++it) {
        if (F.norm() < opts.tolerance) return x;
        Mat J = linearize(rhs, x, false);
        Vec dx = J.completeOrthogonalDecomposition().solve(-F);
        double lambda = 1.0, f0 = F.norm();
        bool improved = false;
        for (int ls = 0; ls < 30; ++ls, lambda *= 0.5) {
            Vec xt = x + lambda * dx;
            Vec Ft;
            try {
                Ft = rhs(xt);
            } catch (const Error &) {
                continue;
            }
            if (all_finite(Ft) && Ft.norm() < f0) {
                x = xt;
                F = Ft;
                improved = true;
                break;
            }
        }
        if (!improved) break;
    }
    if (F.norm() < opts.tolerance) return x;
    throw Error(ErrorKind::NoConvergence, "Newton iteration did not reach an equilibrium", guess);
}

Vec characteristic_polynomial(const Mat &A) {
    const auto n = A.rows();
    Vec c = Vec::Zero(n + 1);
    c[0] = 1.0;
    Mat M = Mat::Zero(n, n);
    Mat I = Mat::Identity(n, n);
    for (Eigen::Index k = 1; k <= n; ++k) {
        M = A * M + c[k - 1] * I;
        c[k] = -(A * M).trace() / static_cast<double>(k);
    }
    return c;
}

Eigen::VectorXcd polynomial_roots(const Vec &coeffs) {
    const auto n = coeffs.size() - 1;
    if (n <= 0) return Eigen::VectorXcd(0);
    Mat C = Mat::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) C(0, j) = -coeffs[j + 1] / coeffs[0];
    for (Eigen::Index i = 1; i < n; ++i) C(i, i - 1) = 1.0;
    return Eigen::EigenSolver<Mat>(C, false).eigenvalues();
}

const char *to_string(RouthVerdict v) {
    switch (v) {
    case RouthVerdict::Stable: return "stable";
    case RouthVerdict::Marginal: return "marginal";
    case RouthVerdict::Unstable: return "unstable";
    }
    return "unknown";
}

RouthTable routh_table(const Vec &coeffs, double eps) {
    RouthTable t;
    const auto n = coeffs.size() - 1;
    if (n < 0) return t;
    const auto width = static_cast<size_t>(n / 2 + 1);
    std::vector<double> r0(width, 0.0), r1(width, 0.0);
    for (Eigen::Index i = 0; i <= n; ++i) (i % 2 == 0 ? r0 : r1)[static_cast<size_t>(i / 2)] = coeffs[i];
    t.rows.push_back(r0);
    if (n >= 1) t.rows.push_back(r1);
    double scale = coeffs.cwiseAbs().maxCoeff();
    double zero = eps * std::max(1.0, scale);
    for (Eigen::Index k = 2; k <= n; ++k) {
        auto &prev = t.rows[static_cast<size_t>(k - 1)];
        const auto &prev2 = t.rows[static_cast<size_t>(k - 2)];
        bool all_zero = true;
        for (double v : prev) all_zero = all_zero && std::abs(v) <= zero;
        if (all_zero) {
            // Replace by the derivative of the auxiliary polynomial built from the row above.
            t.zero_row = true;
            Eigen::Index order = n - (k - 2);
            for (size_t i = 0; i < prev.size(); ++i) {
                double power = static_cast<double>(order - 2 * static_cast<Eigen::Index>(i));
                prev[i] = power > 0 ? power * prev2[i] : 0.0;
            }
        }
        if (std::abs(prev[0]) <= zero) {
            t.zero_pivot = true;
            prev[0] = zero;
        }
        std::vector<double> row(width, 0.0);
        for (size_t i = 0; i + 1 < width; ++i)
            row[i] = (prev[0] * prev2[i + 1] - prev2[0] * prev[i + 1]) / prev[0];
        t.rows.push_back(row);
    }
    double last = t.rows.front()[0];
    for (size_t i = 1; i < t.rows.size(); ++i) {
        double v = t.rows[i][0];
        if ((v > 0) != (last > 0)) ++t.sign_changes;
        last = v;
    }
    if (t.sign_changes > 0)
        t.verdict = RouthVerdict::Unstable;
    else if (t.zero_row || t.zero_pivot)
        t.verdict = RouthVerdict::Marginal;
    else
        t.verdict = RouthVerdict::Stable;
    return t;
}

const char *to_string(Classification c) {
    switch (c) {
    case Classification::CenterCandidate: return "CenterCandidate";
    case Classification::AsymptoticallyStable: return "AsymptoticallyStable";
    case Classification::Unstable: return "Unstable";
    case Classification::Degenerate: return "Degenerate";
    }
    return "Unknown";
}

StabilityReport characteristic_and_routh(const Mat &A, double tol) {
    StabilityReport r;
    r.A = A;
    r.characteristic = characteristic_polynomial(A);
    r.eigenvalues = Eigen::EigenSolver<Mat>(A, false).eigenvalues();

    const auto n = A.rows();
    double scale = std::max(1.0, r.characteristic.cwiseAbs().maxCoeff());
    Eigen::Index deg = n;
    while (deg > 0 && std::abs(r.characteristic[deg]) <= tol * scale) --deg;
    r.zero_roots = static_cast<int>(n - deg);
    r.factor = r.characteristic.head(deg + 1);
    r.routh = routh_table(r.factor);

    // Jordan blocks at zero make raw eigenvalues of A noisy, so the verdict uses the
    // roots of the deflated factor; the removed zero roots only block asymptotic stability.
    Eigen::VectorXcd roots = polynomial_roots(r.factor);
    double max_re = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < roots.size(); ++i) max_re = std::max(max_re, roots[i].real());
    if (deg == 0)
        r.classification = Classification::Degenerate;
    else if (max_re > tol)
        r.classification = Classification::Unstable;
    else if (max_re < -tol && r.zero_roots == 0)
        r.classification = Classification::AsymptoticallyStable;
    else
        r.classification = Classification::CenterCandidate;
    return r;
}

StabilityReport stability(const FirstOrderRhs &rhs, const Vec &guess, const NewtonOptions &opts) {
    Vec xe = find_equilibrium(rhs, guess, opts);
    StabilityReport r = characteristic_and_routh(linearize(rhs, xe));
    r.equilibrium = xe;
    return r;
}

std::string render(const StabilityReport &r) {
    std::ostringstream os;
    os.precision(10);
    Eigen::IOFormat fmt(10, 0, ", ", "\n", "  [", "]");
    os << "equilibrium: " << r.equilibrium.transpose().format(Eigen::IOFormat(10, 0, ", ", "", "", "", "(", ")"))
       << "\n";
    os << "jacobian:\n" << r.A.format(fmt) << "\n";
    os << "characteristic polynomial (highest power first):";
    for (Eigen::Index i = 0; i < r.characteristic.size(); ++i) os << ' ' << r.characteristic[i];
    os << "\nstructural zero roots: " << r.zero_roots << "\n";
    os << "eigenvalues:\n";
    for (Eigen::Index i = 0; i < r.eigenvalues.size(); ++i)
        os << "  " << r.eigenvalues[i].real() << (r.eigenvalues[i].imag() < 0 ? " - " : " + ")
           << std::abs(r.eigenvalues[i].imag()) << "i\n";
    os << "routh table on the nontrivial factor:\n";
    for (const auto &row : r.routh.rows) {
        os << " ";
        for (double v : row) os << ' ' << v;
        os << "\n";
    }
    os << "routh verdict: " << to_string(r.routh.verdict) << "\n";
    os << "classification: " << to_string(r.classification) << "\n";
    os << "--\n";
    os.precision(17);
    os << "classification=" << to_string(r.classification) << "\n";
    os << "routh=" << to_string(r.routh.verdict) << "\n";
    os << "zero_roots=" << r.zero_roots << "\n";
    for (Eigen::Index i = 0; i < r.characteristic.size(); ++i) os << "c" << i << "=" << r.characteristic[i] << "\n";
    for (Eigen::Index i = 0; i < r.eigenvalues.size(); ++i)
        os << "eig" << i << "=" << r.eigenvalues[i].real() << "," << r.eigenvalues[i].imag() << "\n";
    return os.str();
}

} // namespace geoctl
