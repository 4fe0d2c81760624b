#include "icsel/info.hpp"

#include "icsel/augmentation.hpp"
#include "icsel/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace icsel {

std::string to_string(InfoMethod method) {
    switch (method) {
    case InfoMethod::LS: return "ls";
    case InfoMethod::SPRES: return "spres";
    case InfoMethod::PRES: return "pres";
    case InfoMethod::PL: return "pl";
    }
    return "unknown";
}

InfoMethod parse_info_method(const std::string& name) {
    if (name == "ls") return InfoMethod::LS;
    if (name == "spres") return InfoMethod::SPRES;
    if (name == "pres") return InfoMethod::PRES;
    if (name == "pl") return InfoMethod::PL;
    throw std::invalid_argument("unknown information method '" + name + "'");
}

Matrix symmetrize(const Matrix& a) { return 0.5 * (a + a.transpose()); }

Matrix model_block(const Matrix& a, const std::vector<Eigen::Index>& model) {
    const auto k = static_cast<Eigen::Index>(model.size());
    Matrix out(k, k);
    for (Eigen::Index r = 0; r < k; ++r)
        for (Eigen::Index c = 0; c < k; ++c)
            out(r, c) = a(model[static_cast<std::size_t>(r)], model[static_cast<std::size_t>(c)]);
    return out;
}

double min_eigen_block(const InfoEstimate& info, const std::vector<Eigen::Index>& model,
                       std::size_t n) {
    if (model.empty()) return std::numeric_limits<double>::quiet_NaN();
    const Matrix block = symmetrize(model_block(info.matrix, model)) / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(block, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff();
}

// ---------------------------------------------------------------------------
// Least squares

Matrix ls_information(const Matrix& beta_scores, const Matrix& nuisance_scores) {
    const double n = static_cast<double>(beta_scores.rows());
    const Matrix a11 = beta_scores.transpose() * beta_scores / n;
    const Matrix a12 = beta_scores.transpose() * nuisance_scores / n;
    const Matrix a22 = nuisance_scores.transpose() * nuisance_scores / n;
    if (a22.size() == 0) return n * symmetrize(a11);

    Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(a22));
    if (eig.info() != Eigen::Success) throw SingularGram("eigendecomposition of A22 failed");
    const Vector values = eig.eigenvalues();
    const double top = values.cwiseAbs().maxCoeff();
    const double cutoff = static_cast<double>(std::max(a22.rows(), a11.rows())) * top * 1e-12;
    if (!std::isfinite(top)) throw SingularGram("A22 has non-finite entries");
    Vector inverse(values.size());
    for (Eigen::Index k = 0; k < values.size(); ++k)
        inverse[k] = values[k] > cutoff ? 1.0 / values[k] : 0.0;
    const Matrix proj = a12 * eig.eigenvectors();  // p x m in the eigenbasis
    const Matrix correction = proj * inverse.asDiagonal() * proj.transpose();
    return n * symmetrize(a11 - correction);
}

InfoEstimate info_ls(const IntervalDataset& data, const LassoFit& fit) {
    const CoxParams params{fit.beta, fit.lambda0};
    const Matrix basis = nuisance_score_basis(data, params);
    // Only points carrying mass span two-sided perturbations of the fitted hazard.
    const Vector& jumps = fit.lambda0.jumps();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index k = 0; k < jumps.size(); ++k)
        if (jumps[k] > 0.0) keep.push_back(k);
    Matrix nuisance(basis.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t a = 0; a < keep.size(); ++a) nuisance.col(static_cast<Eigen::Index>(a)) = basis.col(keep[a]);
    InfoEstimate out;
    out.method = InfoMethod::LS;
    out.matrix = ls_information(score_beta_per_subject(data, params), nuisance);
    out.symmetrized = true;
    return out;
}

// ---------------------------------------------------------------------------
// Profile scores

Vector profile_score(const IntervalDataset& data, const Vector& beta,
                     const std::optional<StepCumHazard>& warm, const NpmleOptions& options) {
    const auto npmle = profile_npmle(data, beta, warm, options);
    const auto& support = npmle.hazard.support();
    const LikelihoodKernel kernel(data, std::span<const double>(support.data(), support.size()));
    return kernel.evaluate(beta, npmle.hazard.jumps(), LikelihoodKernel::Order::Gradient).grad_beta;
}

Vector augmented_profile_score(const IntervalDataset& data, const Vector& beta,
                               const std::optional<StepCumHazard>& warm,
                               const NpmleOptions& options) {
    const auto npmle = profile_npmle(data, beta, warm, options);
    const auto& support = npmle.hazard.support();
    const PoissonAugmentation aug(data, std::span<const double>(support.data(), support.size()));
    const auto& jumps = npmle.hazard.jumps();
    return aug.q_score_beta(beta, jumps, aug.expectations(beta, jumps));
}

Matrix richardson_jacobian(const std::function<Vector(const Vector&)>& fn, const Vector& at,
                           double h) {
    const auto p = at.size();
    Matrix rows(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        auto shifted = [&](double step) {
            Vector x = at;
            x[i] += step;
            return fn(x);
        };
        const Vector plus1 = shifted(h);
        const Vector minus1 = shifted(-h);
        const Vector plus2 = shifted(2.0 * h);
        const Vector minus2 = shifted(-2.0 * h);
        rows.row(i) = ((minus2 - 8.0 * minus1 + 8.0 * plus1 - plus2) / (12.0 * h)).transpose();
    }
    return rows;
}

namespace {

InfoEstimate richardson_info(const IntervalDataset& data, const LassoFit& fit, double epsilon,
                             InfoMethod method) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("increment epsilon must be positive");
    const std::optional<StepCumHazard> warm = fit.lambda0;
    auto score = [&](const Vector& beta) -> Vector {
        try {
            return method == InfoMethod::PRES ? augmented_profile_score(data, beta, warm)
                                              : profile_score(data, beta, warm);
        } catch (const NonConvergence& e) {
            std::ostringstream os;
            os << to_string(method) << ": perturbed profile solve at beta = ["
               << beta.transpose() << "] failed: " << e.what();
            throw NonConvergence(os.str());
        }
    };
    InfoEstimate out;
    out.method = method;
    out.epsilon = epsilon;
    out.matrix = symmetrize(-richardson_jacobian(score, fit.beta, epsilon));
    out.symmetrized = true;
    return out;
}

} // namespace

InfoEstimate info_spres(const IntervalDataset& data, const LassoFit& fit, double epsilon) {
    return richardson_info(data, fit, epsilon, InfoMethod::SPRES);
}

InfoEstimate info_pres(const IntervalDataset& data, const LassoFit& fit, double epsilon) {
    return richardson_info(data, fit, epsilon, InfoMethod::PRES);
}

Matrix second_difference_information(const std::function<double(const Vector&)>& fn,
                                     const Vector& at, double h) {
    const auto p = at.size();
    const double base = fn(at);
    Vector single(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        Vector x = at;
        x[i] += h;
        single[i] = fn(x);
    }
    Matrix out(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = i; j < p; ++j) {
            Vector x = at;
            x[i] += h;
            x[j] += h;
            out(i, j) = -(fn(x) - single[i] - single[j] + base) / (h * h);
            out(j, i) = out(i, j);
        }
    }
    return out;
}

InfoEstimate info_pl(const IntervalDataset& data, const LassoFit& fit, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("increment epsilon must be positive");
    const std::optional<StepCumHazard> warm = fit.lambda0;
    auto profile = [&](const Vector& beta) { return profile_npmle(data, beta, warm).loglik; };
    InfoEstimate out;
    out.method = InfoMethod::PL;
    out.epsilon = epsilon;
    out.matrix = symmetrize(second_difference_information(profile, fit.beta, epsilon));
    out.symmetrized = true;
    return out;
}

InfoEstimate estimate_information(InfoMethod method, const IntervalDataset& data,
                                  const LassoFit& fit, double epsilon) {
    switch (method) {
    case InfoMethod::LS: return info_ls(data, fit);
    case InfoMethod::SPRES: return info_spres(data, fit, epsilon);
    case InfoMethod::PRES: return info_pres(data, fit, epsilon);
    case InfoMethod::PL: return info_pl(data, fit, epsilon);
    }
    throw std::invalid_argument("unknown information method");
}

} // namespace icsel
