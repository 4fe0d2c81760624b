#include "icsel/simulation.hpp"

#include "icsel/errors.hpp"
#include "icsel/format.hpp"
#include "icsel/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace icsel {

std::string to_string(InspectionScheme scheme) {
    return scheme == InspectionScheme::Strong ? "strong" : "weak";
}

InspectionScheme parse_scheme(const std::string& name) {
    if (name == "strong") return InspectionScheme::Strong;
    if (name == "weak") return InspectionScheme::Weak;
    throw std::invalid_argument("unknown scenario '" + name + "' (expected strong or weak)");
}

namespace {

Vector signal_vector(double magnitude) {
    Vector beta = Vector::Zero(10);
    for (int j : {0, 1, 8, 9}) beta[j] = magnitude;
    return beta;
}

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

void SimScenario::validate() const {
    if (n < 2) throw std::invalid_argument("scenario: n must be at least 2");
    if (beta_star.size() == 0) throw std::invalid_argument("scenario: beta_star is empty");
    if (!(rho > -1.0 && rho < 1.0)) throw std::invalid_argument("scenario: rho must lie in (-1, 1)");
    if (!(weibull_kappa > 0.0) || !(weibull_eta > 0.0))
        throw std::invalid_argument("scenario: Weibull parameters must be positive");
    if (!(epsilon > 0.0)) throw std::invalid_argument("scenario: epsilon must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("scenario: alpha must lie in (0, 1)");
    if (reps < 1) throw std::invalid_argument("scenario: reps must be at least 1");
}

PenaltyConfig reference_penalty(double C, std::size_t n) {
    return PenaltyConfig::c_sqrt_n(C / std::sqrt(200.0), n);
}

SimScenario SimScenario::strong(std::size_t n) {
    SimScenario s;
    s.n = n;
    s.beta_star = signal_vector(1.0);
    s.scheme = InspectionScheme::Strong;
    s.lambda_rule = reference_penalty(8.5, n);
    return s;
}

SimScenario SimScenario::weak(std::size_t n) {
    SimScenario s;
    s.n = n;
    s.beta_star = signal_vector(0.5);
    s.scheme = InspectionScheme::Weak;
    s.lambda_rule = reference_penalty(14.5, n);
    return s;
}

std::vector<double> default_aic_grid(std::size_t n, std::size_t points) {
    const double rn = std::sqrt(static_cast<double>(n));
    const double lo = std::log(0.1 * rn);
    const double hi = std::log(30.0 * rn);
    std::vector<double> grid(points);
    for (std::size_t k = 0; k < points; ++k)
        grid[k] = std::exp(points == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1));
    return grid;
}

PenaltyConfig scenario_penalty(const SimScenario& scenario, std::size_t n) {
    const auto& rule = scenario.lambda_rule;
    switch (rule.rule) {
    case PenaltyRule::Fixed: return rule;
    case PenaltyRule::CSqrtN: return PenaltyConfig::c_sqrt_n(rule.c, n);
    case PenaltyRule::AicGrid:
        return PenaltyConfig::aic_grid(rule.grid.empty() ? default_aic_grid(n) : rule.grid);
    }
    return rule;
}

std::mt19937_64 replication_engine(std::uint64_t seed, std::uint64_t rep) {
    std::uint64_t state = seed;
    const std::uint64_t a = splitmix64(state);
    state ^= rep * 0xd1b54a32d192ed03ULL;
    const std::uint64_t b = splitmix64(state);
    const std::uint64_t c = splitmix64(state);
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                      static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
    return std::mt19937_64(seq);
}

double failure_time(double e, const Vector& x, const Vector& beta, double kappa, double eta) {
    return std::pow(e * std::exp(-beta.dot(x)), 1.0 / kappa) / eta;
}

double draw_failure_time(const Vector& x, const Vector& beta, double kappa, double eta,
                         std::mt19937_64& rng) {
    std::exponential_distribution<double> unit(1.0);
    return failure_time(unit(rng), x, beta, kappa, eta);
}

std::array<double, 3> draw_inspections(InspectionScheme scheme, std::mt19937_64& rng) {
    const bool strong = scheme == InspectionScheme::Strong;
    std::uniform_real_distribution<double> first(strong ? 3.2 : 2.4, strong ? 4.8 : 3.2);
    std::uniform_real_distribution<double> gap(1.5, 2.5);
    std::array<double, 3> u{};
    u[0] = first(rng);
    u[1] = u[0] + gap(rng);
    u[2] = u[1] + gap(rng);
    return u;
}

Matrix draw_covariates(std::size_t n, Eigen::Index p, double rho, std::mt19937_64& rng) {
    Matrix sigma(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < p; ++j) sigma(i, j) = std::pow(rho, std::abs(static_cast<double>(i - j)));
    const Matrix chol = sigma.llt().matrixL();
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix z(static_cast<Eigen::Index>(n), p);
    for (Eigen::Index i = 0; i < z.rows(); ++i)
        for (Eigen::Index j = 0; j < p; ++j) z(i, j) = normal(rng);
    return z * chol.transpose();
}

IntervalDataset gen_dataset(const SimScenario& scenario, std::size_t n, std::mt19937_64& rng,
                            std::vector<double>* latent) {
    const Matrix x = draw_covariates(n, scenario.p(), scenario.rho, rng);
    std::vector<IntervalObservation> obs;
    obs.reserve(n);
    if (latent) latent->clear();
    for (std::size_t i = 0; i < n; ++i) {
        const Vector xi = x.row(static_cast<Eigen::Index>(i)).transpose();
        const double t = draw_failure_time(xi, scenario.beta_star, scenario.weibull_kappa,
                                           scenario.weibull_eta, rng);
        const auto u = draw_inspections(scenario.scheme, rng);
        double left = 0.0;
        double right = kInf;
        for (double uk : u) {
            if (uk < t) left = uk;
            else {
                right = uk;
                break;
            }
        }
        if (!(left < t && t <= right)) throw std::logic_error("generator: bracket does not contain T");
        if (latent) latent->push_back(t);
        obs.push_back({left, right, xi});
    }
    return IntervalDataset(std::move(obs));
}

IntervalDataset gen_dataset(const SimScenario& scenario, std::mt19937_64& rng) {
    return gen_dataset(scenario, scenario.n, rng);
}

double right_censoring_rate(const SimScenario& scenario, std::size_t subjects, std::uint64_t seed) {
    auto rng = replication_engine(seed, 0);
    const auto data = gen_dataset(scenario, subjects, rng);
    std::size_t censored = 0;
    for (const auto& o : data.observations()) censored += o.right_censored();
    return static_cast<double>(censored) / static_cast<double>(subjects);
}

ReplicationResult run_replication(const SimScenario& scenario, std::size_t rep) {
    ReplicationResult out;
    out.rep = rep;
    try {
        auto rng = replication_engine(scenario.seed, rep);
        const auto data = gen_dataset(scenario, rng);
        PenaltyConfig penalty = scenario_penalty(scenario, data.n());
        penalty = resolve_penalty(data, penalty);
        out.lambda = penalty.lambda;
        const LassoFit fit = lasso_fit(data, penalty);
        out.selection = extract_selection(fit);

        out.screened = true;
        for (Eigen::Index j = 0; j < scenario.p(); ++j) {
            if (scenario.beta_star[j] == 0.0) continue;
            if (std::find(out.selection.model.begin(), out.selection.model.end(), j) == out.selection.model.end())
                out.screened = false;
        }
        if (out.selection.empty()) {
            out.report.alpha = scenario.alpha;
            out.report.status = "empty selection: no coordinates to infer";
            return out;
        }

        const InfoEstimate info1 = estimate_information(scenario.info_onestep, data, fit, scenario.epsilon);
        const InfoEstimate info2 = scenario.info_pivot == scenario.info_onestep
                                       ? info1
                                       : estimate_information(scenario.info_pivot, data, fit, scenario.epsilon);
        out.report = infer_all(fit, out.selection, info1, info2, scenario.alpha);
        for (const auto& c : out.report.coordinates) {
            if (!c.ok()) {
                out.failure = c.failure;
                out.message = c.message;
                break;
            }
        }
        if (out.screened && !out.failure) {
            for (const auto& c : out.report.coordinates) {
                const double target = scenario.beta_star[c.index];
                out.covered.push_back(c.ci_low <= target && target <= c.ci_high);
                if (target == 0.0) out.null_pvalues.push_back(c.p_value);
            }
        }
    } catch (const Error& e) {
        out.failure = error_tag(e);
        out.message = e.what();
    }
    return out;
}

std::vector<ReplicationResult> run_replications(const SimScenario& scenario) {
    scenario.validate();
    std::vector<ReplicationResult> results(scenario.reps);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t r = next++; r < scenario.reps; r = next++) results[r] = run_replication(scenario, r);
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(scenario.threads, static_cast<unsigned>(scenario.reps)));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return results;
}

CoverageTable coverage_table(const SimScenario& scenario, const std::vector<ReplicationResult>& results) {
    CoverageTable table;
    table.reps = results.size();
    std::vector<std::size_t> hits(static_cast<std::size_t>(scenario.p()), 0);
    std::size_t used = 0;
    double length = 0.0;
    std::size_t intervals = 0;
    for (const auto& r : results) {
        if (r.failure) {
            ++table.failures;
            continue;
        }
        if (!r.screened) continue;
        ++table.screened;
        ++used;
        for (std::size_t a = 0; a < r.covered.size(); ++a) {
            const auto& c = r.report.coordinates[a];
            if (scenario.beta_star[c.index] == 0.0) continue;
            hits[static_cast<std::size_t>(c.index)] += r.covered[a];
            length += c.ci_high - c.ci_low;
            ++intervals;
        }
    }
    for (Eigen::Index j = 0; j < scenario.p(); ++j) {
        if (scenario.beta_star[j] == 0.0) continue;
        CoverageRow row;
        row.coordinate = j;
        row.reps_used = used;
        row.failures = table.failures;
        if (used > 0) row.coverage = static_cast<double>(hits[static_cast<std::size_t>(j)]) / static_cast<double>(used);
        table.rows.push_back(row);
    }
    if (intervals > 0) table.mean_ci_length = length / static_cast<double>(intervals);
    return table;
}

CoverageTable coverage_experiment(const SimScenario& scenario) {
    return coverage_table(scenario, run_replications(scenario));
}

std::string CoverageTable::to_csv() const {
    std::ostringstream os;
    os << "coordinate,coverage,reps_used,failures\n";
    for (const auto& r : rows)
        os << 'x' << r.coordinate + 1 << ',' << format_double(r.coverage) << ',' << r.reps_used << ','
           << r.failures << '\n';
    return os.str();
}

QqResult qq_from_results(const std::vector<ReplicationResult>& results) {
    QqResult qq;
    for (const auto& r : results) {
        if (r.failure) {
            ++qq.failures;
            continue;
        }
        qq.empirical.insert(qq.empirical.end(), r.null_pvalues.begin(), r.null_pvalues.end());
    }
    std::sort(qq.empirical.begin(), qq.empirical.end());
    qq.uniform = uniform_quantiles(qq.empirical.size());
    qq.ks = ks_statistic_uniform(qq.empirical);
    if (qq.empirical.empty()) qq.status = "no null coordinates were selected";
    else qq.status = "ok";
    return qq;
}

QqResult null_pvalue_qq(const SimScenario& scenario) {
    return qq_from_results(run_replications(scenario));
}

std::string QqResult::to_csv() const {
    std::ostringstream os;
    os << "empirical_q,uniform_q\n";
    for (std::size_t i = 0; i < empirical.size(); ++i)
        os << format_double(empirical[i]) << ',' << format_double(uniform[i]) << '\n';
    return os.str();
}

} // namespace icsel
