#include "icsel/likelihood.hpp"

#include "icsel/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

namespace icsel {

namespace {

// d / (e^d - 1), the interval part of the beta score.
double ratio(double d) {
    if (d < 1e-8) return 1.0 - 0.5 * d;
    return d / std::expm1(d);
}

// Derivative of ratio(d).
double ratio_derivative(double d) {
    if (d < 1e-2) {
        const double d2 = d * d;
        return -0.5 + d / 6.0 - d * d2 / 180.0 + d2 * d2 * d / 5040.0;
    }
    const double em = std::expm1(d);
    return 1.0 / em - d * (1.0 / (em * -std::expm1(-d)));
}

// e^d / (e^d - 1)^2
double curvature(double d) {
    return 1.0 / (std::expm1(d) * -std::expm1(-d));
}

std::string degenerate_message(std::size_t i) {
    std::ostringstream os;
    os << "bracket of subject " << i << " carries no mass under the current hazard";
    return os.str();
}

} // namespace

double log_interval_mass(double a, double d) {
    if (d == kInf) return -a;
    if (!(d >= kMassFloor)) return -kInf;
    return -a + std::log(-std::expm1(-d));
}

// ---------------------------------------------------------------------------

IntervalDataset::IntervalDataset(std::vector<IntervalObservation> observations)
    : observations_(std::move(observations)) {
    if (observations_.empty()) throw DataError("dataset has no observations");
    p_ = observations_.front().covariates.size();
    bool any_finite = false;
    for (std::size_t i = 0; i < observations_.size(); ++i) {
        const auto& obs = observations_[i];
        std::ostringstream where;
        where << "observation " << i + 1 << ": ";
        if (!std::isfinite(obs.left) || obs.left < 0.0)
            throw DataError(where.str() + "left endpoint must be finite and >= 0");
        if (std::isnan(obs.right) || !(obs.right > obs.left))
            throw DataError(where.str() + "right endpoint must exceed left endpoint");
        if (obs.covariates.size() != p_)
            throw DataError(where.str() + "covariate dimension mismatch");
        if (!obs.covariates.allFinite())
            throw DataError(where.str() + "non-finite covariate");
        any_finite = any_finite || !obs.right_censored();
    }
    if (!any_finite) throw NoFiniteIntervals("every observation is right-censored");
    design_.resize(static_cast<Eigen::Index>(observations_.size()), p_);
    for (std::size_t i = 0; i < observations_.size(); ++i)
        design_.row(static_cast<Eigen::Index>(i)) = observations_[i].covariates.transpose();
}

StepFunction::StepFunction(std::vector<double> support, Vector increments)
    : support_(std::move(support)), increments_(std::move(increments)) {
    if (static_cast<Eigen::Index>(support_.size()) != increments_.size())
        throw std::invalid_argument("StepFunction: support and increments differ in length");
    for (std::size_t k = 1; k < support_.size(); ++k)
        if (!(support_[k] > support_[k - 1]))
            throw std::invalid_argument("StepFunction: support must be strictly increasing");
}

double StepFunction::operator()(double t) const {
    const auto it = std::upper_bound(support_.begin(), support_.end(), t);
    const auto count = static_cast<Eigen::Index>(it - support_.begin());
    return increments_.head(count).sum();
}

StepCumHazard::StepCumHazard(std::vector<double> support, Vector jumps)
    : step_(std::move(support), std::move(jumps)) {
    if ((step_.increments().array() < 0.0).any() || !step_.increments().allFinite())
        throw std::invalid_argument("StepCumHazard: jumps must be finite and nonnegative");
}

// ---------------------------------------------------------------------------

double survival_factor(const IntervalObservation& obs, const CoxParams& params, double at) {
    if (at == kInf) return 0.0;
    const double cum = params.lambda0(at);
    if (cum == 0.0) return 1.0;
    return std::exp(-cum * std::exp(params.beta.dot(obs.covariates)));
}

LikelihoodKernel::LikelihoodKernel(const IntervalDataset& data, std::span<const double> support)
    : data_(&data), m_(support.size()), lo_(data.n()), hi_(data.n()) {
    for (std::size_t i = 0; i < data.n(); ++i) {
        const auto& obs = data[i];
        lo_[i] = static_cast<std::size_t>(
            std::upper_bound(support.begin(), support.end(), obs.left) - support.begin());
        hi_[i] = obs.right_censored()
                     ? lo_[i]
                     : static_cast<std::size_t>(
                           std::upper_bound(support.begin(), support.end(), obs.right) -
                           support.begin());
    }
}

double LikelihoodKernel::value(const Vector& beta, const Vector& jumps, bool strict) const {
    const Vector risk = (data_->design() * beta).array().exp();
    double total = 0.0;
    // prefix sums are fine for Lambda(L); the bracket mass is summed directly
    // so that small increments are not lost next to a large Lambda(L).
    std::vector<double> prefix(m_ + 1, 0.0);
    for (std::size_t k = 0; k < m_; ++k) prefix[k + 1] = prefix[k] + jumps[static_cast<Eigen::Index>(k)];
    for (std::size_t i = 0; i < data_->n(); ++i) {
        const double e = risk[static_cast<Eigen::Index>(i)];
        const double a = prefix[lo_[i]] * e;
        if ((*data_)[i].right_censored()) {
            total -= a;
            continue;
        }
        const double mass = jumps.segment(static_cast<Eigen::Index>(lo_[i]),
                                          static_cast<Eigen::Index>(hi_[i] - lo_[i])).sum();
        const double term = log_interval_mass(a, mass * e);
        if (term == -kInf) {
            if (strict) throw DegenerateLikelihood(degenerate_message(i + 1));
            return -kInf;
        }
        total += term;
    }
    return total;
}

LikelihoodKernel::Evaluation LikelihoodKernel::evaluate(const Vector& beta, const Vector& jumps,
                                                        Order order) const {
    const auto n = data_->n();
    const auto p = data_->p();
    const auto m = static_cast<Eigen::Index>(m_);
    const Matrix& X = data_->design();
    const Vector risk = (X * beta).array().exp();

    Evaluation ev;
    const bool grad = order != Order::Value;
    const bool hess = order == Order::Hessian;
    if (grad) {
        ev.grad_beta = Vector::Zero(p);
        ev.grad_jumps = Vector::Zero(m);
    }
    if (hess) {
        ev.hess_beta = Matrix::Zero(p, p);
        ev.hess_jumps = Matrix::Zero(m, m);
    }
    // Difference arrays: range updates over [0, lo) and [lo, hi).
    Vector jump_diff = Vector::Zero(m + 1);
    Matrix cross_diff;
    if (hess) cross_diff = Matrix::Zero(p, m + 1);

    std::vector<double> prefix(m_ + 1, 0.0);
    for (std::size_t k = 0; k < m_; ++k) prefix[k + 1] = prefix[k] + jumps[static_cast<Eigen::Index>(k)];

    for (std::size_t i = 0; i < n; ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        const double e = risk[row];
        const auto lo = static_cast<Eigen::Index>(lo_[i]);
        const auto hi = static_cast<Eigen::Index>(hi_[i]);
        const double a = prefix[lo_[i]] * e;
        const bool censored = (*data_)[i].right_censored();
        double d = kInf;
        if (censored) {
            ev.value -= a;
        } else {
            d = jumps.segment(lo, hi - lo).sum() * e;
            const double term = log_interval_mass(a, d);
            if (term == -kInf) throw DegenerateLikelihood(degenerate_message(i + 1));
            ev.value += term;
        }
        if (!grad) continue;

        const auto x = X.row(row).transpose();
        const double interval = censored ? 0.0 : ratio(d);
        ev.grad_beta.noalias() += x * (interval - a);
        // -e on [0, lo), e / expm1(d) on [lo, hi)
        jump_diff[0] -= e;
        jump_diff[lo] += e;
        if (!censored) {
            const double up = e / std::expm1(d);
            jump_diff[lo] += up;
            jump_diff[hi] -= up;
        }
        if (!hess) continue;

        const double slope = censored ? 0.0 : ratio_derivative(d);
        ev.hess_beta.noalias() += (censored ? -a : (d * slope - a)) * (x * x.transpose());
        cross_diff.col(0).noalias() -= e * x;
        cross_diff.col(lo).noalias() += e * x;
        if (!censored) {
            cross_diff.col(lo).noalias() += (slope * e) * x;
            cross_diff.col(hi).noalias() -= (slope * e) * x;
            const double w = e * e * curvature(d);
            ev.hess_jumps.block(lo, lo, hi - lo, hi - lo).array() -= w;
        }
    }
    if (grad) {
        double run = 0.0;
        for (Eigen::Index k = 0; k < m; ++k) {
            run += jump_diff[k];
            ev.grad_jumps[k] = run;
        }
    }
    if (hess) {
        ev.hess_cross = Matrix::Zero(p, m);
        Vector run = Vector::Zero(p);
        for (Eigen::Index k = 0; k < m; ++k) {
            run += cross_diff.col(k);
            ev.hess_cross.col(k) = run;
        }
    }
    return ev;
}

bool LikelihoodKernel::jump_derivatives(const Vector& risk, const Vector& jumps, double& value,
                                        Vector& gradient, Matrix* hessian) const {
    const auto m = static_cast<Eigen::Index>(m_);
    value = 0.0;
    Vector diff = Vector::Zero(m + 1);
    if (hessian) hessian->setZero(m, m);
    std::vector<double> prefix(m_ + 1, 0.0);
    for (std::size_t k = 0; k < m_; ++k) prefix[k + 1] = prefix[k] + jumps[static_cast<Eigen::Index>(k)];
    for (std::size_t i = 0; i < data_->n(); ++i) {
        const double e = risk[static_cast<Eigen::Index>(i)];
        const auto lo = static_cast<Eigen::Index>(lo_[i]);
        const auto hi = static_cast<Eigen::Index>(hi_[i]);
        const double a = prefix[lo_[i]] * e;
        diff[0] -= e;
        diff[lo] += e;
        if ((*data_)[i].right_censored()) {
            value -= a;
            continue;
        }
        const double d = jumps.segment(lo, hi - lo).sum() * e;
        const double term = log_interval_mass(a, d);
        if (term == -kInf) return false;
        value += term;
        const double up = e / std::expm1(d);
        diff[lo] += up;
        diff[hi] -= up;
        if (hessian) hessian->block(lo, lo, hi - lo, hi - lo).array() -= e * e * curvature(d);
    }
    gradient.resize(m);
    double run = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
        run += diff[k];
        gradient[k] = run;
    }
    return true;
}

// ---------------------------------------------------------------------------

namespace {

LikelihoodKernel kernel_for(const IntervalDataset& data, const CoxParams& params) {
    const auto& support = params.lambda0.support();
    return LikelihoodKernel(data, std::span<const double>(support.data(), support.size()));
}

} // namespace

double log_likelihood(const IntervalDataset& data, const CoxParams& params) {
    return kernel_for(data, params).value(params.beta, params.lambda0.jumps(), true);
}

Vector log_likelihood_per_subject(const IntervalDataset& data, const CoxParams& params) {
    Vector out(static_cast<Eigen::Index>(data.n()));
    for (std::size_t i = 0; i < data.n(); ++i) {
        const auto& obs = data[i];
        const double e = std::exp(params.beta.dot(obs.covariates));
        const double a = params.lambda0(obs.left) * e;
        double term = -a;
        if (!obs.right_censored()) {
            const double d = (params.lambda0(obs.right) - params.lambda0(obs.left)) * e;
            term = log_interval_mass(a, d);
            if (term == -kInf) throw DegenerateLikelihood(degenerate_message(i + 1));
        }
        out[static_cast<Eigen::Index>(i)] = term;
    }
    return out;
}

Matrix score_beta_per_subject(const IntervalDataset& data, const CoxParams& params) {
    const auto kernel = kernel_for(data, params);
    const Vector& jumps = params.lambda0.jumps();
    Matrix out(static_cast<Eigen::Index>(data.n()), data.p());
    for (std::size_t i = 0; i < data.n(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        const auto& obs = data[i];
        const double e = std::exp(params.beta.dot(obs.covariates));
        const auto lo = static_cast<Eigen::Index>(kernel.lower_index(i));
        const auto hi = static_cast<Eigen::Index>(kernel.upper_index(i));
        const double a = jumps.head(lo).sum() * e;
        double coef = -a;
        if (!obs.right_censored()) {
            const double d = jumps.segment(lo, hi - lo).sum() * e;
            if (!(d >= kMassFloor)) throw DegenerateLikelihood(degenerate_message(i + 1));
            coef += ratio(d);
        }
        out.row(row) = coef * obs.covariates.transpose();
    }
    return out;
}

Vector score_beta(const IntervalDataset& data, const CoxParams& params) {
    return score_beta_per_subject(data, params).colwise().mean().transpose();
}

Matrix nuisance_score_basis(const IntervalDataset& data, const CoxParams& params) {
    const auto kernel = kernel_for(data, params);
    const Vector& jumps = params.lambda0.jumps();
    const auto m = static_cast<Eigen::Index>(kernel.m());
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(data.n()), m);
    for (std::size_t i = 0; i < data.n(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        const auto& obs = data[i];
        const double e = std::exp(params.beta.dot(obs.covariates));
        const auto lo = static_cast<Eigen::Index>(kernel.lower_index(i));
        const auto hi = static_cast<Eigen::Index>(kernel.upper_index(i));
        out.row(row).head(lo).setConstant(-e);
        if (!obs.right_censored()) {
            const double d = jumps.segment(lo, hi - lo).sum() * e;
            if (!(d >= kMassFloor)) throw DegenerateLikelihood(degenerate_message(i + 1));
            out.row(row).segment(lo, hi - lo).setConstant(e / std::expm1(d));
        }
    }
    return out;
}

Vector nuisance_score_along(const IntervalDataset& data, const CoxParams& params,
                            const StepFunction& direction) {
    if (direction.support() != params.lambda0.support())
        throw std::invalid_argument("nuisance_score_along: direction must share the hazard support");
    return nuisance_score_basis(data, params) * direction.increments();
}

double nuisance_score_mean(const IntervalDataset& data, const CoxParams& params,
                           const StepFunction& direction) {
    return nuisance_score_along(data, params, direction).mean();
}

} // namespace icsel
