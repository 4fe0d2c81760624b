#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace icsel {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// One subject: the event time lies in (left, right]. right == +inf means
// right-censored, left == 0 means left-censored.
struct IntervalObservation {
    double left = 0.0;
    double right = kInf;
    Vector covariates;

    bool right_censored() const { return right == kInf; }
};

// Validated collection of observations sharing one covariate dimension.
// Construction throws DataError on L < 0, L >= R (zero-width brackets
// included), non-finite covariates, ragged dimensions, or when no
// observation has a finite right endpoint.
class IntervalDataset {
public:
    explicit IntervalDataset(std::vector<IntervalObservation> observations);

    std::size_t n() const { return observations_.size(); }
    Eigen::Index p() const { return p_; }

    const std::vector<IntervalObservation>& observations() const { return observations_; }
    const IntervalObservation& operator[](std::size_t i) const { return observations_[i]; }

    // n x p design matrix, rows in observation order.
    const Matrix& design() const { return design_; }

private:
    std::vector<IntervalObservation> observations_;
    Eigen::Index p_ = 0;
    Matrix design_;
};

// Right-continuous step function f(t) = sum_{k: u_k <= t} increments[k].
// Signed increments are allowed; this is the layout used for directions
// along which the baseline hazard is perturbed.
class StepFunction {
public:
    StepFunction() = default;
    StepFunction(std::vector<double> support, Vector increments);

    double operator()(double t) const;

    const std::vector<double>& support() const { return support_; }
    const Vector& increments() const { return increments_; }
    std::size_t size() const { return support_.size(); }

private:
    std::vector<double> support_;
    Vector increments_;
};

// Baseline cumulative hazard: a StepFunction whose increments are >= 0.
class StepCumHazard {
public:
    StepCumHazard() = default;
    StepCumHazard(std::vector<double> support, Vector jumps);

    double operator()(double t) const { return step_(t); }
    double total() const { return step_.increments().sum(); }

    const std::vector<double>& support() const { return step_.support(); }
    const Vector& jumps() const { return step_.increments(); }
    std::size_t size() const { return step_.size(); }
    const StepFunction& as_step() const { return step_; }

private:
    StepFunction step_;
};

struct CoxParams {
    Vector beta;
    StepCumHazard lambda0;
};

// Q(t) = exp(-Lambda(t) exp(beta'X)), with Q(+inf) = 0 exactly.
double survival_factor(const IntervalObservation& obs, const CoxParams& params, double at);

// Sum over subjects of log{Q(L) - Q(R)}; this is n * P_n l(beta, Lambda).
double log_likelihood(const IntervalDataset& data, const CoxParams& params);

// Per-subject log{Q(L) - Q(R)}.
Vector log_likelihood_per_subject(const IntervalDataset& data, const CoxParams& params);

// Mean score in beta, P_n l_beta(beta, Lambda).
Vector score_beta(const IntervalDataset& data, const CoxParams& params);

// n x p matrix whose i-th row is l_beta for subject i.
Matrix score_beta_per_subject(const IntervalDataset& data, const CoxParams& params);

// Per-subject score along a direction g living on the support of
// params.lambda0 (g need not be monotone).
Vector nuisance_score_along(const IntervalDataset& data, const CoxParams& params,
                            const StepFunction& direction);

double nuisance_score_mean(const IntervalDataset& data, const CoxParams& params,
                           const StepFunction& direction);

// n x m matrix: column k holds the per-subject score along I(t >= u_k).
Matrix nuisance_score_basis(const IntervalDataset& data, const CoxParams& params);

// Low-level evaluator bound to a dataset and a fixed support. All sums are
// on the n * P_n scale. Used by the optimizers, which evaluate the same
// support many times.
class LikelihoodKernel {
public:
    enum class Order { Value, Gradient, Hessian };

    struct Evaluation {
        double value = 0.0;
        Vector grad_beta;
        Vector grad_jumps;
        Matrix hess_beta;
        Matrix hess_cross;  // p x m
        Matrix hess_jumps;  // m x m
    };

    LikelihoodKernel(const IntervalDataset& data, std::span<const double> support);

    const IntervalDataset& data() const { return *data_; }
    std::size_t m() const { return m_; }

    // Index of the first support point > L (so Lambda(L) sums jumps [0, lo)).
    std::size_t lower_index(std::size_t i) const { return lo_[i]; }
    // One past the last support point <= R; equal to lower_index for
    // right-censored subjects.
    std::size_t upper_index(std::size_t i) const { return hi_[i]; }

    // Sum of per-subject log likelihoods. Returns -inf instead of throwing
    // when some bracket carries (numerically) no mass, unless strict.
    double value(const Vector& beta, const Vector& jumps, bool strict = false) const;

    // Value plus derivatives up to the requested order. Throws
    // DegenerateLikelihood on an infeasible point.
    Evaluation evaluate(const Vector& beta, const Vector& jumps, Order order) const;

    // Value and jump derivatives only, for fixed linear predictor exp(X beta).
    // Returns false (leaving outputs unspecified) on an infeasible point.
    bool jump_derivatives(const Vector& risk, const Vector& jumps, double& value,
                          Vector& gradient, Matrix* hessian) const;

private:
    const IntervalDataset* data_;
    std::size_t m_;
    std::vector<std::size_t> lo_;
    std::vector<std::size_t> hi_;
};

// log(exp(-a) - exp(-b)) for 0 <= a < b <= inf written as -a + log(1 - exp(-d)),
// d = b - a. Returns -inf when d is below the underflow floor.
double log_interval_mass(double a, double d);

// Floor on d = (Lambda(R) - Lambda(L)) exp(beta'X) below which the bracket
// is considered to carry no probability.
inline constexpr double kMassFloor = 1e-12;

} // namespace icsel
