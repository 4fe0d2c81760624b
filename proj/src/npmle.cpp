#include "icsel/npmle.hpp"

#include "icsel/augmentation.hpp"
#include "icsel/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace icsel {

std::vector<MaximalIntersection> maximal_intersections(const IntervalDataset& data) {
    // (time, is_right). At equal times right endpoints sort first: (a, t] and
    // (t, b] do not overlap.
    std::vector<std::pair<double, bool>> ends;
    ends.reserve(2 * data.n());
    for (const auto& obs : data.observations()) {
        ends.emplace_back(obs.left, false);
        if (!obs.right_censored()) ends.emplace_back(obs.right, true);
    }
    std::sort(ends.begin(), ends.end(), [](const auto& x, const auto& y) {
        if (x.first != y.first) return x.first < y.first;
        return x.second && !y.second;
    });
    std::vector<MaximalIntersection> out;
    for (std::size_t k = 0; k + 1 < ends.size(); ++k) {
        if (!ends[k].second && ends[k + 1].second) out.push_back({ends[k].first, ends[k + 1].first});
    }
    if (out.empty()) throw NoFiniteIntervals("no maximal intersection: every bracket is right-censored");
    return out;
}

std::vector<double> npmle_support(const IntervalDataset& data) {
    const auto mi = maximal_intersections(data);
    std::vector<double> support;
    support.reserve(mi.size());
    for (const auto& iv : mi) support.push_back(iv.right);
    return support;
}

Vector projected_jump_gradient(const Vector& jumps, const Vector& gradient, double cap) {
    Vector pg = gradient;
    for (Eigen::Index k = 0; k < jumps.size(); ++k) {
        if (jumps[k] <= 0.0 && gradient[k] < 0.0) pg[k] = 0.0;
        if (jumps[k] >= cap && gradient[k] > 0.0) pg[k] = 0.0;
    }
    return pg;
}

namespace {

struct SolverState {
    Vector jumps;
    double value = 0.0;
    double gradient_norm = 0.0;
    int iterations = 0;
    std::vector<double> trace;
};

std::string nonconvergence_message(const char* method, int iterations, double gradient_norm) {
    std::ostringstream os;
    os << "profile NPMLE (" << method << ") did not converge after " << iterations
       << " iterations; projected gradient " << gradient_norm;
    return os.str();
}

// Projected Newton ascent with Armijo backtracking along the projection arc.
void newton_solve(const LikelihoodKernel& kernel, const Vector& risk, const NpmleOptions& opt,
                  SolverState& state) {
    const double n = static_cast<double>(kernel.data().n());
    const auto m = static_cast<Eigen::Index>(kernel.m());
    Vector& x = state.jumps;
    Vector grad;
    Matrix hess;
    double f = 0.0;
    if (!kernel.jump_derivatives(risk, x, f, grad, &hess))
        throw DegenerateLikelihood("profile NPMLE: infeasible starting hazard");

    for (;;) {
        const Vector pg = projected_jump_gradient(x, grad, opt.jump_cap);
        state.gradient_norm = pg.lpNorm<Eigen::Infinity>() / n;
        state.value = f;
        if (state.gradient_norm <= opt.polish_tol) break;
        if (state.iterations >= opt.max_iter) break;

        // epsilon-active set: jumps close to a bound whose gradient pushes outward.
        const double width =
            std::min(1e-4 * std::max(x.maxCoeff(), 1e-8),
                     (x - (x + grad).cwiseMax(0.0).cwiseMin(opt.jump_cap)).lpNorm<Eigen::Infinity>());
        std::vector<Eigen::Index> free;
        std::vector<char> bound(static_cast<std::size_t>(m), 0);
        for (Eigen::Index k = 0; k < m; ++k) {
            const bool lower = x[k] <= width && grad[k] < 0.0;
            const bool upper = x[k] >= opt.jump_cap - width && grad[k] > 0.0;
            if (lower || upper)
                bound[static_cast<std::size_t>(k)] = 1;
            else
                free.push_back(k);
        }
        Vector dir = Vector::Zero(m);
        for (Eigen::Index k = 0; k < m; ++k)
            if (bound[static_cast<std::size_t>(k)])
                dir[k] = grad[k] / std::max(-hess(k, k), 1e-300);
        if (!free.empty()) {
            const auto nf = static_cast<Eigen::Index>(free.size());
            Matrix neg(nf, nf);
            Vector rhs(nf);
            double scale = 0.0;
            for (Eigen::Index a = 0; a < nf; ++a) {
                rhs[a] = grad[free[static_cast<std::size_t>(a)]];
                for (Eigen::Index b = 0; b < nf; ++b)
                    neg(a, b) = -hess(free[static_cast<std::size_t>(a)], free[static_cast<std::size_t>(b)]);
                scale = std::max(scale, neg(a, a));
            }
            double ridge = 1e-13 * std::max(scale, 1.0);
            Eigen::LLT<Matrix> llt;
            for (int attempt = 0; attempt < 12; ++attempt) {
                llt.compute(neg + ridge * Matrix::Identity(nf, nf));
                if (llt.info() == Eigen::Success) break;
                ridge *= 100.0;
            }
            const Vector step = llt.solve(rhs);
            for (Eigen::Index a = 0; a < nf; ++a) dir[free[static_cast<std::size_t>(a)]] = step[a];
        }

        double t = 1.0;
        bool accepted = false;
        Vector trial(m), trial_grad;
        Matrix trial_hess;
        double trial_f = 0.0;
        const double current_norm = pg.lpNorm<Eigen::Infinity>();
        // Below this the change in the summed log likelihood is rounding.
        const double noise = 1e-13 * (1.0 + std::abs(f));
        for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
            trial = (x + t * dir).cwiseMax(0.0).cwiseMin(opt.jump_cap);
            if (!kernel.jump_derivatives(risk, trial, trial_f, trial_grad, &trial_hess)) continue;
            const double predicted = grad.dot(trial - x);
            if (trial_f >= f + 1e-4 * std::max(predicted, 0.0) && trial_f > f) {
                accepted = true;
                break;
            }
            // Within rounding of the optimum: judge by the gradient instead.
            if (std::abs(trial_f - f) <= noise &&
                projected_jump_gradient(trial, trial_grad, opt.jump_cap).lpNorm<Eigen::Infinity>() <
                    0.5 * current_norm) {
                accepted = true;
                break;
            }
        }
        ++state.iterations;
        if (!accepted) {
            state.trace.push_back(f / n);
            // No representable ascent left along the Newton arc.
            break;
        }
        x = trial;
        f = trial_f;
        grad = trial_grad;
        hess = trial_hess;
        state.trace.push_back(f / n);
    }
    const Vector pg = projected_jump_gradient(x, grad, opt.jump_cap);
    state.gradient_norm = pg.lpNorm<Eigen::Infinity>() / n;
    state.value = f;
}

void em_solve(const IntervalDataset& data, std::span<const double> support, const Vector& beta,
              const NpmleOptions& opt, SolverState& state) {
    PoissonAugmentation aug(data, support);
    const double n = static_cast<double>(data.n());
    const Vector risk = (data.design() * beta).array().exp();
    Vector grad;
    double f = 0.0;
    Vector& x = state.jumps;
    if (!aug.kernel().jump_derivatives(risk, x, f, grad, nullptr))
        throw DegenerateLikelihood("profile NPMLE: infeasible starting hazard");
    for (;;) {
        state.gradient_norm = (x - (x + grad / n).cwiseMax(0.0).cwiseMin(opt.jump_cap)).lpNorm<Eigen::Infinity>();
        state.value = f;
        if (state.gradient_norm <= opt.gradient_tol || state.iterations >= opt.max_iter) break;
        x = aug.update_jumps(beta, aug.expectations(beta, x)).cwiseMin(opt.jump_cap);
        if (!aug.kernel().jump_derivatives(risk, x, f, grad, nullptr))
            throw DegenerateLikelihood("profile NPMLE: EM step left the feasible region");
        ++state.iterations;
        state.trace.push_back(f / n);
    }
}

} // namespace

NpmleResult profile_npmle(const IntervalDataset& data, const Vector& beta,
                          const std::optional<StepCumHazard>& init, const NpmleOptions& options) {
    if (beta.size() != data.p()) throw std::invalid_argument("profile_npmle: beta has wrong dimension");
    std::vector<double> support = npmle_support(data);
    const auto m = static_cast<Eigen::Index>(support.size());
    const std::span<const double> span(support.data(), support.size());

    SolverState state;
    if (init && init->support() == support && (init->jumps().array() > 0.0).any()) {
        state.jumps = init->jumps().cwiseMin(options.jump_cap);
    } else {
        state.jumps = Vector::Constant(m, 1.0 / static_cast<double>(m));
    }

    const LikelihoodKernel kernel(data, span);
    const Vector risk = (data.design() * beta).array().exp();
    double f0 = 0.0;
    Vector g0;
    if (!kernel.jump_derivatives(risk, state.jumps, f0, g0, nullptr)) {
        // warm start puts no mass on some bracket; fall back to the default start
        state.jumps = Vector::Constant(m, 1.0 / static_cast<double>(m));
    }

    if (options.method == NpmleMethod::ProjectedNewton)
        newton_solve(kernel, risk, options, state);
    else
        em_solve(data, span, beta, options, state);

    if (!(state.gradient_norm <= options.gradient_tol)) {
        throw NonConvergence(nonconvergence_message(
            options.method == NpmleMethod::Em ? "EM" : "projected Newton", state.iterations,
            state.gradient_norm));
    }

    NpmleResult out;
    out.capped = (state.jumps.array() >= options.jump_cap).any();
    out.loglik = state.value;
    out.gradient_norm = state.gradient_norm;
    out.iterations = state.iterations;
    out.trace = std::move(state.trace);
    out.hazard = StepCumHazard(std::move(support), std::move(state.jumps));
    return out;
}

} // namespace icsel
