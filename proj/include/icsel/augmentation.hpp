#pragma once

#include "icsel/likelihood.hpp"

#include <vector>

namespace icsel {

// Poisson data augmentation for the interval-censored Cox model.
//
// Subject i carries latent counts Z_ik ~ Poisson(jump_k * exp(beta'X_i)) for
// every support point u_k <= R*_i, where R*_i = R_i if finite and L_i
// otherwise. The observed bracket says the counts on (0, L_i] are zero and,
// when R_i is finite, that the counts on (L_i, R_i] are not all zero.
class PoissonAugmentation {
public:
    PoissonAugmentation(const IntervalDataset& data, std::span<const double> support);

    // E-step: conditional means of Z_ik at (beta, jumps), stored per subject
    // for the bracket indices [lower_index, upper_index) only (all other
    // conditional means are zero).
    struct Expectations {
        std::vector<double> values;
        std::vector<std::size_t> offsets;  // start of subject i in values
    };

    Expectations expectations(const Vector& beta, const Vector& jumps) const;

    // Expected complete-data log likelihood Q(beta, jumps | E), dropping the
    // log-factorial terms that do not depend on the parameters.
    double q_function(const Vector& beta, const Vector& jumps, const Expectations& e) const;

    // dQ/dbeta at (beta, jumps) for fixed expectations, on the sum scale.
    Vector q_score_beta(const Vector& beta, const Vector& jumps, const Expectations& e) const;

    // M-step for the jumps with beta held fixed (closed form).
    Vector update_jumps(const Vector& beta, const Expectations& e) const;

    const LikelihoodKernel& kernel() const { return kernel_; }

private:
    LikelihoodKernel kernel_;
};

} // namespace icsel
