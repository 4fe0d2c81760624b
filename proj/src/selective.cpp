#include "icsel/selective.hpp"

#include "icsel/errors.hpp"
#include "icsel/truncnorm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace icsel {

namespace {

// Smallest eigenvalue of a symmetric block, NotPositiveDefinite unless > 0.
double require_pd(const Matrix& block, const char* what) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(block), Eigen::EigenvaluesOnly);
    const double low = eig.eigenvalues().size() ? eig.eigenvalues().minCoeff() : 0.0;
    if (eig.info() != Eigen::Success || !(low > 0.0)) {
        std::ostringstream os;
        os << what << ": information block on the selected model is not positive definite"
           << " (smallest eigenvalue " << low << ")";
        throw NotPositiveDefinite(os.str());
    }
    return low;
}

Vector sign_vector(const SelectionEvent& sel) {
    Vector s(static_cast<Eigen::Index>(sel.size()));
    for (std::size_t a = 0; a < sel.size(); ++a) s[static_cast<Eigen::Index>(a)] = sel.signs[a];
    return s;
}

} // namespace

Vector one_step_estimator(const LassoFit& fit, const SelectionEvent& sel, const InfoEstimate& info) {
    const Matrix block = symmetrize(model_block(info.matrix, sel.model));
    require_pd(block, "one-step estimator");
    Vector beta_m(static_cast<Eigen::Index>(sel.size()));
    for (std::size_t a = 0; a < sel.size(); ++a) beta_m[static_cast<Eigen::Index>(a)] = fit.beta[sel.model[a]];
    if (sel.empty()) return beta_m;
    return beta_m + fit.penalty.lambda * block.llt().solve(sign_vector(sel));
}

std::pair<double, double> truncation_limits(const Matrix& A, const Vector& b, const Vector& c,
                                            const Vector& z) {
    if (A.rows() != b.size() || A.cols() != c.size() || c.size() != z.size())
        throw std::invalid_argument("truncation_limits: dimension mismatch");
    const Vector ac = A * c;
    const Vector az = A * z;
    double vminus = -kInf;
    double vplus = kInf;
    const double cnorm = c.norm();
    for (Eigen::Index j = 0; j < A.rows(); ++j) {
        const double scale = A.row(j).norm() * cnorm;
        if (std::abs(ac[j]) <= 1e-14 * scale) {
            if (az[j] > b[j] + 1e-9 * (1.0 + std::abs(b[j]) + std::abs(az[j]))) {
                std::ostringstream os;
                os << "constraint " << j + 1 << " is violated along the whole line";
                throw EmptyTruncation(os.str());
            }
            continue;
        }
        const double t = (b[j] - az[j]) / ac[j];
        if (ac[j] < 0.0) vminus = std::max(vminus, t);
        else vplus = std::min(vplus, t);
    }
    if (!(vminus < vplus)) {
        std::ostringstream os;
        os << "empty truncation region [" << vminus << ", " << vplus << "]";
        throw EmptyTruncation(os.str());
    }
    return {vminus, vplus};
}

PivotSpec polyhedral_pivot(const Matrix& A, const Vector& b, const Vector& gamma,
                           const Matrix& sigma, const Vector& y) {
    PivotSpec spec;
    spec.A = A;
    spec.b = b;
    spec.gamma = gamma;
    const Vector sg = sigma * gamma;
    spec.sigma2 = gamma.dot(sg);
    if (!(spec.sigma2 > 0.0)) throw NotPositiveDefinite("pivot variance gamma' Sigma gamma is not positive");
    spec.c = sg / spec.sigma2;
    spec.z = y - spec.c * gamma.dot(y);
    std::tie(spec.vminus, spec.vplus) = truncation_limits(A, b, spec.c, spec.z);
    return spec;
}

PivotSpec build_pivot(const Vector& theta_bar, const SelectionEvent& sel, const InfoEstimate& info,
                      double lambda, std::size_t n, const Vector& gamma) {
    if (gamma.size() != static_cast<Eigen::Index>(sel.size()) || theta_bar.size() != gamma.size())
        throw std::invalid_argument("build_pivot: dimension mismatch");
    if (gamma.isZero(0.0)) throw std::invalid_argument("build_pivot: contrast must be nonzero");
    const double rn = std::sqrt(static_cast<double>(n));
    const Matrix info_mm = symmetrize(model_block(info.matrix, sel.model)) / static_cast<double>(n);
    require_pd(info_mm, "pivot");
    const auto k = static_cast<Eigen::Index>(sel.size());
    const Matrix cov = info_mm.llt().solve(Matrix::Identity(k, k));
    const Vector s = sign_vector(sel);
    const Matrix A = -Matrix(s.asDiagonal());
    const Vector b = -(lambda / rn) * s.cwiseProduct(cov * s);
    return polyhedral_pivot(A, b, gamma, symmetrize(cov), theta_bar);
}

double pivot_statistic(const PivotSpec& spec, const Vector& y) {
    const double x = spec.gamma.dot(y);
    const double slack = 1e-8 * (1.0 + std::abs(x));
    if (x < spec.vminus - slack || x > spec.vplus + slack) {
        std::ostringstream os;
        os << "observed statistic " << x << " lies outside its truncation region [" << spec.vminus
           << ", " << spec.vplus << "]";
        throw EmptyTruncation(os.str());
    }
    return x;
}

double pivot_cdf(const PivotSpec& spec, const Vector& y, double theta) {
    return truncated_normal_cdf(pivot_statistic(spec, y), theta, spec.sigma2, spec.vminus, spec.vplus);
}

double selective_pvalue(const PivotSpec& spec, const Vector& y, double null_value) {
    const double f = pivot_cdf(spec, y, null_value);
    return std::clamp(2.0 * std::min(f, 1.0 - f), 0.0, 1.0);
}

namespace {

// theta with F_theta(x) = target; F decreases in theta.
double solve_pivot(const PivotSpec& spec, double x, double target) {
    const double sigma = std::sqrt(spec.sigma2);
    auto F = [&](double theta) {
        const double f = truncated_normal_cdf(x, theta, spec.sigma2, spec.vminus, spec.vplus);
        if (!std::isfinite(f)) {
            std::ostringstream os;
            os << "pivot is not finite at theta = " << theta;
            throw BracketFailure(os.str());
        }
        return f;
    };
    const double cap = 1e3 * sigma;

    double reach = 10.0 * sigma;
    double lo = x - reach;
    while (F(lo) < target) {
        if (reach >= cap) return -kInf;
        reach = std::min(2.0 * reach, cap);
        lo = x - reach;
    }
    reach = 10.0 * sigma;
    double hi = x + reach;
    while (F(hi) > target) {
        if (reach >= cap) return kInf;
        reach = std::min(2.0 * reach, cap);
        hi = x + reach;
    }
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const double f = F(mid);
        if (std::abs(f - target) <= 1e-8 || hi - lo <= 1e-10 * sigma) return mid;
        if (f > target) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

std::pair<double, double> selective_ci(const PivotSpec& spec, const Vector& y, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
    const double x = pivot_statistic(spec, y);
    const double low = solve_pivot(spec, x, 1.0 - 0.5 * alpha);
    const double high = solve_pivot(spec, x, 0.5 * alpha);
    return {low, high};
}

std::string error_tag(const std::exception& e) {
    if (dynamic_cast<const NoFiniteIntervals*>(&e)) return "NoFiniteIntervals";
    if (dynamic_cast<const DataError*>(&e)) return "DataError";
    if (dynamic_cast<const DegenerateLikelihood*>(&e)) return "DegenerateLikelihood";
    if (dynamic_cast<const NonConvergence*>(&e)) return "NonConvergence";
    if (dynamic_cast<const KktViolation*>(&e)) return "KktViolation";
    if (dynamic_cast<const SingularGram*>(&e)) return "SingularGram";
    if (dynamic_cast<const NotPositiveDefinite*>(&e)) return "NotPositiveDefinite";
    if (dynamic_cast<const EmptyTruncation*>(&e)) return "EmptyTruncation";
    if (dynamic_cast<const BracketFailure*>(&e)) return "BracketFailure";
    if (dynamic_cast<const RejectionExhausted*>(&e)) return "RejectionExhausted";
    if (dynamic_cast<const NumericalError*>(&e)) return "NumericalError";
    return "Error";
}

bool InferenceReport::all_ok() const {
    return std::all_of(coordinates.begin(), coordinates.end(), [](const auto& c) { return c.ok(); });
}

InferenceReport infer_all(const LassoFit& fit, const SelectionEvent& sel,
                          const InfoEstimate& info_onestep, const InfoEstimate& info_pivot,
                          double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
    InferenceReport report;
    report.alpha = alpha;
    report.method_onestep = info_onestep.method;
    report.method_pivot = info_pivot.method;
    if (sel.empty()) {
        report.status = "empty selection: no coordinates to infer";
        return report;
    }
    const double n = static_cast<double>(fit.n);
    const double rn = std::sqrt(n);
    report.min_eig_onestep = require_pd(symmetrize(model_block(info_onestep.matrix, sel.model)) / n,
                                        "one-step estimator");
    report.min_eig_pivot = require_pd(symmetrize(model_block(info_pivot.matrix, sel.model)) / n, "pivot");

    const Vector beta_bar = one_step_estimator(fit, sel, info_onestep);
    const Vector theta_bar = rn * beta_bar;
    const auto k = static_cast<Eigen::Index>(sel.size());
    std::size_t failed = 0;
    for (Eigen::Index a = 0; a < k; ++a) {
        CoordinateInference coord;
        coord.index = sel.model[static_cast<std::size_t>(a)];
        coord.sign = sel.signs[static_cast<std::size_t>(a)];
        coord.lasso = fit.beta[coord.index];
        coord.one_step = beta_bar[a];
        coord.theta_bar = theta_bar[a];
        try {
            const PivotSpec spec =
                build_pivot(theta_bar, sel, info_pivot, fit.penalty.lambda, fit.n, Vector::Unit(k, a));
            coord.vminus = spec.vminus;
            coord.vplus = spec.vplus;
            coord.sigma2 = spec.sigma2;
            coord.p_value = selective_pvalue(spec, theta_bar);
            const auto [low, high] = selective_ci(spec, theta_bar, alpha);
            coord.ci_low = low / rn;
            coord.ci_high = high / rn;
        } catch (const Error& e) {
            coord.failure = error_tag(e);
            coord.message = e.what();
            ++failed;
        }
        report.coordinates.push_back(std::move(coord));
    }
    if (failed == 0) {
        report.status = "ok";
    } else {
        std::ostringstream os;
        os << failed << " of " << k << " coordinates failed";
        report.status = os.str();
    }
    return report;
}

} // namespace icsel
