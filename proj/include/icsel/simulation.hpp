#pragma once

#include "icsel/info.hpp"
#include "icsel/lasso.hpp"
#include "icsel/selective.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace icsel {

enum class InspectionScheme { Strong, Weak };

std::string to_string(InspectionScheme scheme);
InspectionScheme parse_scheme(const std::string& name);

// lambda = C sqrt(n / 200): equals C at n = 200 and keeps lambda / sqrt(n) fixed.
PenaltyConfig reference_penalty(double C, std::size_t n);

struct SimScenario {
    std::size_t n = 200;
    Vector beta_star;
    double rho = 0.2;
    double weibull_kappa = 1.5;
    // Baseline Lambda(t) = (eta t)^kappa. 0.2 reproduces the reported
    // right-censoring proportions under both inspection schemes.
    double weibull_eta = 0.2;
    InspectionScheme scheme = InspectionScheme::Strong;
    PenaltyConfig lambda_rule = reference_penalty(8.5, 200);  // c sqrt(n) rules are rescaled per n
    InfoMethod info_onestep = InfoMethod::SPRES;
    InfoMethod info_pivot = InfoMethod::SPRES;
    double epsilon = kDefaultEpsilon;
    double alpha = 0.05;
    std::size_t reps = 200;
    std::uint64_t seed = 1;
    unsigned threads = 1;

    Eigen::Index p() const { return beta_star.size(); }
    void validate() const;

    // Ten covariates, beta_j = magnitude for j in {1, 2, 9, 10}, zero otherwise.
    static SimScenario strong(std::size_t n = 200);  // magnitude 1, C = 8.5
    static SimScenario weak(std::size_t n = 200);    // magnitude 0.5, C = 14.5
};

// Concrete penalty for a sample of size n: c sqrt(n) rules are rescaled and
// an AIC rule with an empty grid gets 20 log-spaced points in
// [0.1 sqrt(n), 30 sqrt(n)].
PenaltyConfig scenario_penalty(const SimScenario& scenario, std::size_t n);

std::vector<double> default_aic_grid(std::size_t n, std::size_t points = 20);

// Engine for replication rep of a run seeded with seed; independent of the
// order in which replications are executed.
std::mt19937_64 replication_engine(std::uint64_t seed, std::uint64_t rep);

// Inverse transform: the T solving (eta T)^kappa exp(beta'x) = e.
double failure_time(double e, const Vector& x, const Vector& beta, double kappa, double eta);

// T with Lambda(T | x) = (eta T)^kappa exp(beta'x) equal to a unit exponential.
double draw_failure_time(const Vector& x, const Vector& beta, double kappa, double eta,
                         std::mt19937_64& rng);

// Inspection times U1 < U2 < U3 for the scheme.
std::array<double, 3> draw_inspections(InspectionScheme scheme, std::mt19937_64& rng);

// X ~ N_p(0, Sigma) with Sigma_ij = rho^|i-j|.
Matrix draw_covariates(std::size_t n, Eigen::Index p, double rho, std::mt19937_64& rng);

// Observed brackets (L, R] for n subjects; the latent failure times are
// checked against their brackets and discarded unless latent is given.
IntervalDataset gen_dataset(const SimScenario& scenario, std::size_t n, std::mt19937_64& rng,
                            std::vector<double>* latent = nullptr);
IntervalDataset gen_dataset(const SimScenario& scenario, std::mt19937_64& rng);

// Fraction of right-censored subjects among `subjects` generated ones.
double right_censoring_rate(const SimScenario& scenario, std::size_t subjects, std::uint64_t seed);

struct ReplicationResult {
    std::size_t rep = 0;
    double lambda = 0.0;
    SelectionEvent selection;
    bool screened = false;
    InferenceReport report;
    // Per selected coordinate (same order as selection.model): target
    // beta*_j inside the interval. Filled only when screened and not failed.
    std::vector<int> covered;
    std::vector<double> null_pvalues;
    std::optional<std::string> failure;
    std::string message;
};

ReplicationResult run_replication(const SimScenario& scenario, std::size_t rep);

// All replications in rep order, spread over scenario.threads workers.
std::vector<ReplicationResult> run_replications(const SimScenario& scenario);

struct CoverageRow {
    Eigen::Index coordinate = 0;  // 0-based
    double coverage = std::numeric_limits<double>::quiet_NaN();
    std::size_t reps_used = 0;
    std::size_t failures = 0;
};

struct CoverageTable {
    std::vector<CoverageRow> rows;  // one per signal coordinate
    std::size_t reps = 0;
    std::size_t screened = 0;
    std::size_t failures = 0;
    double mean_ci_length = std::numeric_limits<double>::quiet_NaN();

    std::string to_csv() const;
};

CoverageTable coverage_table(const SimScenario& scenario, const std::vector<ReplicationResult>& results);
CoverageTable coverage_experiment(const SimScenario& scenario);

struct QqResult {
    std::vector<double> empirical;  // sorted pooled null p-values
    std::vector<double> uniform;
    double ks = 0.0;
    std::size_t failures = 0;
    std::string status;

    std::string to_csv() const;
};

QqResult qq_from_results(const std::vector<ReplicationResult>& results);
QqResult null_pvalue_qq(const SimScenario& scenario);

} // namespace icsel
