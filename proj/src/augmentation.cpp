#include "icsel/augmentation.hpp"

#include "icsel/errors.hpp"

#include <cmath>

namespace icsel {

PoissonAugmentation::PoissonAugmentation(const IntervalDataset& data,
                                         std::span<const double> support)
    : kernel_(data, support) {}

PoissonAugmentation::Expectations PoissonAugmentation::expectations(const Vector& beta,
                                                                    const Vector& jumps) const {
    const auto& data = kernel_.data();
    Expectations out;
    out.offsets.resize(data.n() + 1, 0);
    for (std::size_t i = 0; i < data.n(); ++i)
        out.offsets[i + 1] = out.offsets[i] + (kernel_.upper_index(i) - kernel_.lower_index(i));
    out.values.assign(out.offsets.back(), 0.0);

    for (std::size_t i = 0; i < data.n(); ++i) {
        if (data[i].right_censored()) continue;
        const double e = std::exp(beta.dot(data[i].covariates));
        const auto lo = static_cast<Eigen::Index>(kernel_.lower_index(i));
        const auto hi = static_cast<Eigen::Index>(kernel_.upper_index(i));
        const double d = jumps.segment(lo, hi - lo).sum() * e;
        if (!(d >= kMassFloor))
            throw DegenerateLikelihood("E-step: bracket of subject " + std::to_string(i + 1) +
                                       " carries no mass");
        const double scale = e / -std::expm1(-d);
        for (Eigen::Index k = lo; k < hi; ++k)
            out.values[out.offsets[i] + static_cast<std::size_t>(k - lo)] = jumps[k] * scale;
    }
    return out;
}

double PoissonAugmentation::q_function(const Vector& beta, const Vector& jumps,
                                       const Expectations& e) const {
    const auto& data = kernel_.data();
    double total = 0.0;
    for (std::size_t i = 0; i < data.n(); ++i) {
        const double eta = beta.dot(data[i].covariates);
        const double risk = std::exp(eta);
        const auto lo = kernel_.lower_index(i);
        const auto hi = kernel_.upper_index(i);
        total -= risk * jumps.head(static_cast<Eigen::Index>(hi)).sum();
        for (std::size_t k = lo; k < hi; ++k) {
            const double z = e.values[e.offsets[i] + (k - lo)];
            if (z > 0.0) total += z * (std::log(jumps[static_cast<Eigen::Index>(k)]) + eta);
        }
    }
    return total;
}

Vector PoissonAugmentation::q_score_beta(const Vector& beta, const Vector& jumps,
                                         const Expectations& e) const {
    const auto& data = kernel_.data();
    Vector score = Vector::Zero(data.p());
    for (std::size_t i = 0; i < data.n(); ++i) {
        const double risk = std::exp(beta.dot(data[i].covariates));
        const auto hi = kernel_.upper_index(i);
        double counts = 0.0;
        for (std::size_t j = e.offsets[i]; j < e.offsets[i + 1]; ++j) counts += e.values[j];
        const double at_risk = risk * jumps.head(static_cast<Eigen::Index>(hi)).sum();
        score.noalias() += (counts - at_risk) * data[i].covariates;
    }
    return score;
}

Vector PoissonAugmentation::update_jumps(const Vector& beta, const Expectations& e) const {
    const auto& data = kernel_.data();
    const auto m = static_cast<Eigen::Index>(kernel_.m());
    Vector numer = Vector::Zero(m);
    Vector diff = Vector::Zero(m + 1);
    for (std::size_t i = 0; i < data.n(); ++i) {
        const double risk = std::exp(beta.dot(data[i].covariates));
        const auto lo = kernel_.lower_index(i);
        const auto hi = kernel_.upper_index(i);
        diff[0] += risk;
        diff[static_cast<Eigen::Index>(hi)] -= risk;
        for (std::size_t k = lo; k < hi; ++k)
            numer[static_cast<Eigen::Index>(k)] += e.values[e.offsets[i] + (k - lo)];
    }
    Vector out(m);
    double denom = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
        denom += diff[k];
        out[k] = denom > 0.0 ? numer[k] / denom : 0.0;
    }
    return out;
}

} // namespace icsel
