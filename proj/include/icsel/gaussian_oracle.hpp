#pragma once

#include "icsel/selective.hpp"

#include <cstdint>
#include <vector>

namespace icsel {

// argmin 0.5 ||y - X b||^2 + lambda ||b||_1 by coordinate descent.
Vector linear_lasso(const Matrix& x, const Vector& y, double lambda);

// Selection polyhedron {y : A y <= b} of the linear lasso for the event
// (model, signs): the active sign block followed by the two inactive blocks.
struct LinearPolyhedron {
    Matrix A;
    Vector b;
};

LinearPolyhedron linear_lasso_polyhedron(const Matrix& x, const SelectionEvent& sel, double lambda);

SelectionEvent selection_of(const Vector& beta);

struct OracleOptions {
    std::size_t n = 100;
    Eigen::Index p = 5;
    Vector beta_star;  // defaults to (1, -1, 0, ..., 0) when empty
    double sigma = 1.0;
    double lambda = 2.0;
    std::size_t draws = 500;  // conditioned draws wanted
    std::size_t max_attempts = 2'000'000;
    std::uint64_t seed = 1;
};

struct OracleResult {
    Matrix design;
    SelectionEvent event;      // conditioning event, fixed by the first nonempty draw
    Matrix pivots;             // draws x |M|: F at the true gamma' mu
    std::size_t attempts = 0;
    std::size_t accepted = 0;
    double max_violation = -kInf;  // largest (A y - b)_k seen on an accepted draw
};

// Pivot values F(gamma_j' y) with gamma_j = (X_M^+)' e_j, Sigma = sigma^2 I,
// over draws y = X beta* + sigma eps conditioned by rejection on one fixed
// (M, s). Exactly Unif(0, 1) under the polyhedral lemma. Throws
// RejectionExhausted if the budget runs out.
OracleResult gaussian_linear_oracle(const OracleOptions& options);

} // namespace icsel
