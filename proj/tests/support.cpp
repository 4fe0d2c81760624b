#include "support.hpp"

#include <algorithm>
#include <cmath>

namespace testing {

using namespace icsel;

IntervalDataset random_dataset(std::size_t n, Eigen::Index p, std::uint64_t seed, int grid,
                               double censor_prob) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> point(0, grid - 1);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (;;) {
        std::vector<IntervalObservation> obs;
        bool finite = false;
        for (std::size_t i = 0; i < n; ++i) {
            IntervalObservation o;
            const int l = point(rng);
            o.left = l;
            if (unif(rng) < censor_prob) {
                o.right = kInf;
            } else {
                std::uniform_int_distribution<int> upper(l + 1, grid);
                o.right = upper(rng);
                finite = true;
            }
            o.covariates.resize(p);
            for (Eigen::Index j = 0; j < p; ++j) o.covariates[j] = normal(rng);
            obs.push_back(std::move(o));
        }
        if (finite) return IntervalDataset(std::move(obs));
    }
}

IntervalDataset generated_dataset(std::size_t n, Eigen::Index p, std::uint64_t seed,
                                  InspectionScheme scheme) {
    SimScenario s = SimScenario::strong(n);
    s.scheme = scheme;
    s.beta_star = Vector::Zero(p);
    for (Eigen::Index j = 0; j < (p + 1) / 2; ++j) s.beta_star[j] = 1.0;
    auto rng = replication_engine(seed, 0);
    return gen_dataset(s, rng);
}

std::vector<MaximalIntersection> brute_maximal_intersections(const IntervalDataset& data) {
    std::vector<double> lefts, rights;
    for (const auto& o : data.observations()) {
        lefts.push_back(o.left);
        if (!o.right_censored()) rights.push_back(o.right);
    }
    std::vector<MaximalIntersection> out;
    for (double l : lefts) {
        for (double u : rights) {
            if (!(l < u)) continue;
            bool inner = true;
            for (double x : lefts) inner = inner && !(l < x && x < u);
            for (double x : rights) inner = inner && !(l < x && x < u);
            bool contained = false;
            for (const auto& o : data.observations()) contained = contained || (o.left <= l && u <= o.right);
            if (inner && contained) out.push_back({l, u});
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.left < b.left; });
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

Matrix residual_ls_information(const Matrix& beta_scores, const Matrix& nuisance_scores) {
    Matrix residual = beta_scores;
    if (nuisance_scores.cols() > 0) {
        Eigen::CompleteOrthogonalDecomposition<Matrix> cod(nuisance_scores);
        cod.setThreshold(1e-12);
        const Matrix coef = cod.solve(beta_scores);
        residual -= nuisance_scores * coef;
    }
    return residual.transpose() * residual;
}

StepCumHazard random_hazard(const IntervalDataset& data, std::mt19937_64& rng) {
    auto support = npmle_support(data);
    std::uniform_real_distribution<double> jump(0.2, 1.2);
    Vector jumps(static_cast<Eigen::Index>(support.size()));
    for (Eigen::Index k = 0; k < jumps.size(); ++k) jumps[k] = jump(rng);
    return StepCumHazard(std::move(support), std::move(jumps));
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

double max_rel_err(const Matrix& a, const Matrix& b) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) worst = std::max(worst, rel_err(a(i, j), b(i, j)));
    return worst;
}

} // namespace testing
