#include "icsel/lasso.hpp"

#include "icsel/errors.hpp"
#include "icsel/quadratic_lasso.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace icsel {

PenaltyConfig PenaltyConfig::fixed(double lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("penalty lambda must be finite and >= 0");
    PenaltyConfig p;
    p.rule = PenaltyRule::Fixed;
    p.lambda = lambda;
    return p;
}

PenaltyConfig PenaltyConfig::c_sqrt_n(double c, std::size_t n) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw std::invalid_argument("penalty constant must be >= 0");
    PenaltyConfig p;
    p.rule = PenaltyRule::CSqrtN;
    p.c = c;
    p.lambda = c * std::sqrt(static_cast<double>(n));
    return p;
}

PenaltyConfig PenaltyConfig::aic_grid(std::vector<double> grid) {
    if (grid.empty()) throw std::invalid_argument("AIC grid must be nonempty");
    for (double g : grid)
        if (!(g > 0.0) || !std::isfinite(g)) throw std::invalid_argument("AIC grid values must be positive");
    PenaltyConfig p;
    p.rule = PenaltyRule::AicGrid;
    p.grid = std::move(grid);
    p.resolved = false;
    return p;
}

std::pair<double, double> kkt_measures(const Vector& beta, const Vector& mean_score,
                                       double lambda_over_n) {
    double active = 0.0;
    double slack = kInf;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        if (beta[j] != 0.0) {
            const double target = beta[j] > 0.0 ? lambda_over_n : -lambda_over_n;
            active = std::max(active, std::abs(mean_score[j] - target));
        } else {
            slack = std::min(slack, lambda_over_n - std::abs(mean_score[j]));
        }
    }
    return {active, slack};
}

namespace {

// Negative Hessian of the profile log likelihood in beta, from the joint
// Hessian at the profile maximizer: -H_bb - H_bF (-H_FF)^{-1} H_Fb over the
// jumps that are not held at zero. Eigenvalues are floored to keep the
// proximal model strictly convex.
Matrix profile_curvature(const LikelihoodKernel::Evaluation& ev, const Vector& jumps) {
    std::vector<Eigen::Index> free;
    for (Eigen::Index k = 0; k < jumps.size(); ++k)
        if (jumps[k] > 0.0) free.push_back(k);
    Matrix Q = -ev.hess_beta;
    if (!free.empty()) {
        const auto nf = static_cast<Eigen::Index>(free.size());
        Matrix hff(nf, nf), hbf(ev.hess_beta.rows(), nf);
        for (Eigen::Index a = 0; a < nf; ++a) {
            hbf.col(a) = ev.hess_cross.col(free[static_cast<std::size_t>(a)]);
            for (Eigen::Index b = 0; b < nf; ++b)
                hff(a, b) = -ev.hess_jumps(free[static_cast<std::size_t>(a)], free[static_cast<std::size_t>(b)]);
        }
        const double ridge = 1e-12 * std::max(1.0, hff.diagonal().maxCoeff());
        Eigen::LDLT<Matrix> ldlt(hff + ridge * Matrix::Identity(nf, nf));
        Q -= hbf * ldlt.solve(hbf.transpose());
    }
    Q = 0.5 * (Q + Q.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(Q);
    const Vector values = eig.eigenvalues();
    const double top = std::max(values.cwiseAbs().maxCoeff(), 1e-8);
    const double floor = 1e-8 * top;
    if (values.minCoeff() < floor) {
        const Vector clipped = values.cwiseMax(floor);
        Q = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
    }
    return Q;
}

struct ProfilePoint {
    Vector beta;
    NpmleResult npmle;
    double penalized = 0.0;  // sum scale
};

ProfilePoint evaluate_profile(const IntervalDataset& data, const Vector& beta, double lambda,
                              const std::optional<StepCumHazard>& warm, const NpmleOptions& opt) {
    ProfilePoint pt{beta, profile_npmle(data, beta, warm, opt), 0.0};
    pt.penalized = pt.npmle.loglik - lambda * beta.lpNorm<1>();
    return pt;
}

} // namespace

LassoFit lasso_fit(const IntervalDataset& data, const PenaltyConfig& penalty,
                   const std::optional<CoxParams>& init, const LassoOptions& options) {
    if (!penalty.resolved) throw std::invalid_argument("lasso_fit: penalty must be resolved (run AIC first)");
    const double lambda = penalty.lambda;
    const double n = static_cast<double>(data.n());
    const auto p = data.p();

    Vector beta = Vector::Zero(p);
    std::optional<StepCumHazard> warm;
    if (init) {
        if (init->beta.size() != p) throw std::invalid_argument("lasso_fit: init beta has wrong dimension");
        beta = init->beta;
        warm = init->lambda0;
    }

    ProfilePoint current = evaluate_profile(data, beta, lambda, warm, options.npmle);
    const auto& support = current.npmle.hazard.support();
    const LikelihoodKernel kernel(data, std::span<const double>(support.data(), support.size()));

    LassoFit fit;
    fit.penalty = penalty;
    fit.n = data.n();
    fit.trace.push_back(current.penalized / n);

    double last_gain = kInf;
    bool capped = current.npmle.capped;
    for (int iter = 0;; ++iter) {
        const auto ev = kernel.evaluate(current.beta, current.npmle.hazard.jumps(),
                                        LikelihoodKernel::Order::Hessian);
        const Vector mean_score = ev.grad_beta / n;
        const auto [active, slack] = kkt_measures(current.beta, mean_score, lambda / n);
        const bool kkt_ok = active <= options.tol_kkt && slack >= -options.tol_kkt;
        const bool kkt_tight = active <= 1e-4 * options.tol_kkt && slack >= -1e-4 * options.tol_kkt;
        fit.iterations = iter;
        fit.kkt_active_residual = active;
        fit.kkt_inactive_slack = std::isfinite(slack) ? slack : lambda / n;
        fit.score = mean_score;
        if (kkt_tight || (kkt_ok && last_gain / n < options.objective_tol)) {
            fit.converged = true;
            break;
        }
        if (iter >= options.max_iter) break;

        const Matrix Q = profile_curvature(ev, current.npmle.hazard.jumps());
        const Vector q = Q * current.beta + ev.grad_beta;
        const Vector target = quadratic_lasso(Q, q, lambda, current.beta);
        const Vector dir = target - current.beta;
        // Predicted ascent of the proximal model: G'd - lambda(|b+d|_1 - |b|_1).
        const double decrement =
            ev.grad_beta.dot(dir) - lambda * (target.lpNorm<1>() - current.beta.lpNorm<1>());
        if (!(decrement > 0.0)) {
            last_gain = 0.0;
            if (kkt_ok) {
                fit.converged = true;
                break;
            }
            // Model predicts no ascent yet KKT fails: only rounding is left.
            break;
        }

        bool accepted = false;
        double t = 1.0;
        for (int ls = 0; ls < 50; ++ls, t *= 0.5) {
            Vector trial_beta = (t == 1.0) ? target : Vector(current.beta + t * dir);
            ProfilePoint trial;
            try {
                trial = evaluate_profile(data, trial_beta, lambda, current.npmle.hazard, options.npmle);
            } catch (const DegenerateLikelihood&) {
                continue;
            }
            if (trial.penalized >= current.penalized + 1e-4 * t * decrement) {
                last_gain = trial.penalized - current.penalized;
                current = std::move(trial);
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            last_gain = 0.0;
            if (kkt_ok) {
                fit.converged = true;
                fit.iterations = iter + 1;
                break;
            }
            break;
        }
        capped = capped || current.npmle.capped;
        fit.trace.push_back(current.penalized / n);
    }

    fit.beta = current.beta;
    fit.lambda0 = current.npmle.hazard;
    fit.loglik = current.npmle.loglik;
    fit.objective = current.penalized / n;
    fit.capped = capped || current.npmle.capped;
    if (!fit.converged) {
        std::ostringstream os;
        os << "lasso fit (lambda = " << lambda << ") did not converge after " << fit.iterations
           << " iterations; KKT active residual " << fit.kkt_active_residual << ", inactive slack "
           << fit.kkt_inactive_slack;
        throw NonConvergence(os.str());
    }
    return fit;
}

SelectionEvent extract_selection(const LassoFit& fit, double tol_kkt) {
    SelectionEvent sel;
    for (Eigen::Index j = 0; j < fit.beta.size(); ++j) {
        if (fit.beta[j] != 0.0) {
            sel.model.push_back(j);
            sel.signs.push_back(fit.beta[j] > 0.0 ? 1 : -1);
        }
    }
    const double n = static_cast<double>(fit.n);
    const double lambda = fit.penalty.lambda;
    for (std::size_t a = 0; a < sel.size(); ++a) {
        if (!(sel.signs[a] * fit.beta[sel.model[a]] > 0.0))
            throw KktViolation("active sign constraint fails");
    }
    for (Eigen::Index j = 0; j < fit.beta.size(); ++j) {
        if (fit.beta[j] != 0.0) continue;
        const double total = std::abs(n * fit.score[j]);
        if (!(total <= lambda * (1.0 + tol_kkt))) {
            std::ostringstream os;
            os << "inactive constraint fails for coordinate " << j + 1 << ": |n P_n l_beta| = " << total
               << " exceeds lambda = " << lambda;
            throw KktViolation(os.str());
        }
    }
    return sel;
}

AicSelection select_lambda_aic(const IntervalDataset& data, const std::vector<double>& grid,
                               const LassoOptions& options) {
    if (grid.empty()) throw std::invalid_argument("select_lambda_aic: empty grid");
    AicSelection out;
    double best = kInf;
    double best_lambda = 0.0;
    for (double lambda : grid) {
        LassoFit fit;
        try {
            fit = lasso_fit(data, PenaltyConfig::fixed(lambda), std::nullopt, options);
        } catch (const NonConvergence& e) {
            std::ostringstream os;
            os << "AIC grid point lambda = " << lambda << ": " << e.what();
            throw NonConvergence(os.str());
        }
        std::size_t size = 0;
        for (Eigen::Index j = 0; j < fit.beta.size(); ++j) size += fit.beta[j] != 0.0;
        const double aic = -2.0 * fit.loglik + 2.0 * static_cast<double>(size);
        out.path.push_back({lambda, aic, size});
        if (aic < best || (aic == best && lambda > best_lambda)) {
            best = aic;
            best_lambda = lambda;
        }
    }
    out.lambda = best_lambda;
    return out;
}

PenaltyConfig resolve_penalty(const IntervalDataset& data, const PenaltyConfig& penalty,
                              const LassoOptions& options) {
    if (penalty.resolved) return penalty;
    PenaltyConfig out = penalty;
    out.lambda = select_lambda_aic(data, penalty.grid, options).lambda;
    out.resolved = true;
    return out;
}

} // namespace icsel
