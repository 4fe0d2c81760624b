#include "icsel/gaussian_oracle.hpp"

#include "icsel/errors.hpp"
#include "icsel/quadratic_lasso.hpp"
#include "icsel/simulation.hpp"

#include <algorithm>
#include <random>
#include <sstream>

namespace icsel {

Vector linear_lasso(const Matrix& x, const Vector& y, double lambda) {
    const Matrix gram = x.transpose() * x;
    return quadratic_lasso(gram, x.transpose() * y, lambda, Vector::Zero(x.cols()), 1e-15, 100000);
}

SelectionEvent selection_of(const Vector& beta) {
    SelectionEvent sel;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        if (beta[j] == 0.0) continue;
        sel.model.push_back(j);
        sel.signs.push_back(beta[j] > 0.0 ? 1 : -1);
    }
    return sel;
}

namespace {

Matrix columns(const Matrix& x, const std::vector<Eigen::Index>& idx) {
    Matrix out(x.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t a = 0; a < idx.size(); ++a) out.col(static_cast<Eigen::Index>(a)) = x.col(idx[a]);
    return out;
}

bool same_event(const SelectionEvent& a, const SelectionEvent& b) {
    return a.model == b.model && a.signs == b.signs;
}

} // namespace

LinearPolyhedron linear_lasso_polyhedron(const Matrix& x, const SelectionEvent& sel, double lambda) {
    const auto n = x.rows();
    const auto k = static_cast<Eigen::Index>(sel.size());
    std::vector<Eigen::Index> inactive;
    for (Eigen::Index j = 0; j < x.cols(); ++j)
        if (std::find(sel.model.begin(), sel.model.end(), j) == sel.model.end()) inactive.push_back(j);
    const auto q = static_cast<Eigen::Index>(inactive.size());

    const Matrix xm = columns(x, sel.model);
    const Matrix xi = columns(x, inactive);
    Vector s(k);
    for (Eigen::Index a = 0; a < k; ++a) s[a] = sel.signs[static_cast<std::size_t>(a)];

    LinearPolyhedron poly;
    poly.A.resize(k + 2 * q, n);
    poly.b.resize(k + 2 * q);
    Matrix proj = Matrix::Zero(n, n);
    Vector shift = Vector::Zero(n);  // (X_M')^+ s
    if (k > 0) {
        const Eigen::LDLT<Matrix> gram(xm.transpose() * xm);
        const Matrix pinv = gram.solve(xm.transpose());  // X_M^+
        proj = xm * pinv;
        shift = pinv.transpose() * s;
        poly.A.topRows(k) = -(s.asDiagonal() * pinv);
        poly.b.head(k) = -lambda * s.cwiseProduct(gram.solve(s));
    }
    if (q > 0) {
        const Matrix resid = xi.transpose() * (Matrix::Identity(n, n) - proj) / lambda;
        const Vector inner = xi.transpose() * shift;
        poly.A.middleRows(k, q) = resid;
        poly.A.bottomRows(q) = -resid;
        poly.b.segment(k, q) = Vector::Ones(q) - inner;
        poly.b.tail(q) = Vector::Ones(q) + inner;
    }
    return poly;
}

OracleResult gaussian_linear_oracle(const OracleOptions& options) {
    if (options.n < 2 || options.p < 1) throw std::invalid_argument("oracle: need n >= 2 and p >= 1");
    Vector beta = options.beta_star;
    if (beta.size() == 0) {
        beta = Vector::Zero(options.p);
        beta[0] = 1.0;
        if (options.p > 1) beta[1] = -1.0;
    }
    if (beta.size() != options.p) throw std::invalid_argument("oracle: beta_star has wrong length");

    auto design_rng = replication_engine(options.seed, 0);
    std::normal_distribution<double> normal(0.0, 1.0);
    OracleResult out;
    out.design.resize(static_cast<Eigen::Index>(options.n), options.p);
    for (Eigen::Index i = 0; i < out.design.rows(); ++i)
        for (Eigen::Index j = 0; j < options.p; ++j) out.design(i, j) = normal(design_rng);
    for (Eigen::Index j = 0; j < options.p; ++j) out.design.col(j).normalize();
    const Matrix& x = out.design;
    const Vector mu = x * beta;
    const Matrix cov = options.sigma * options.sigma * Matrix::Identity(x.rows(), x.rows());

    auto rng = replication_engine(options.seed, 1);
    LinearPolyhedron poly;
    Matrix contrasts;  // rows gamma_j'
    std::vector<Vector> accepted;
    while (out.accepted < options.draws) {
        if (out.attempts >= options.max_attempts) {
            std::ostringstream os;
            os << "oracle: only " << out.accepted << " of " << options.draws
               << " conditioned draws after " << out.attempts << " attempts";
            throw RejectionExhausted(os.str());
        }
        ++out.attempts;
        Vector y = mu;
        for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += options.sigma * normal(rng);
        const SelectionEvent sel = selection_of(linear_lasso(x, y, options.lambda));
        if (out.event.empty()) {
            if (sel.empty()) continue;
            out.event = sel;
            poly = linear_lasso_polyhedron(x, sel, options.lambda);
            const Matrix xm = columns(x, sel.model);
            contrasts = (xm.transpose() * xm).ldlt().solve(xm.transpose());
            out.pivots.resize(static_cast<Eigen::Index>(options.draws), static_cast<Eigen::Index>(sel.size()));
        } else if (!same_event(sel, out.event)) {
            continue;
        }
        out.max_violation = std::max(out.max_violation, (poly.A * y - poly.b).maxCoeff());
        const auto row = static_cast<Eigen::Index>(out.accepted);
        for (Eigen::Index a = 0; a < contrasts.rows(); ++a) {
            const Vector gamma = contrasts.row(a).transpose();
            const PivotSpec spec = polyhedral_pivot(poly.A, poly.b, gamma, cov, y);
            out.pivots(row, a) = pivot_cdf(spec, y, gamma.dot(mu));
        }
        ++out.accepted;
    }
    return out;
}

} // namespace icsel
