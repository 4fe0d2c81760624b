// One PASS/FAIL line per acceptance criterion. Non-gating checks and [info]
// lines report related diagnostics without affecting the exit status.
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "support.hpp"

#include "icsel/gaussian_oracle.hpp"
#include "icsel/stats.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

using namespace icsel;
using namespace testing;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(const std::string& id, bool pass, const std::string& detail, bool gating = true) {
    std::printf("[%s] %s%s: %s\n", pass ? "PASS" : "FAIL", id.c_str(), gating ? "" : " (non-gating)",
                detail.c_str());
    std::fflush(stdout);
    if (gating && !pass) ++failures;
}

void info(const std::string& id, const std::string& detail) {
    std::printf("[info] %s: %s\n", id.c_str(), detail.c_str());
    std::fflush(stdout);
}

std::string fmt(double v, int digits = 4) {
    std::ostringstream os;
    os.precision(digits);
    os << v;
    return os.str();
}

void guarded(const std::string& id, const std::function<void()>& body) {
    try {
        body();
    } catch (const std::exception& e) {
        report(id, false, std::string("threw: ") + e.what());
    }
}

// Coverage of the signal coordinates against per-coordinate targets.
bool coverage_check(const CoverageTable& table, const std::vector<double>& targets, double tol, std::string& detail) {
    bool pass = table.rows.size() == targets.size();
    std::ostringstream os;
    for (std::size_t k = 0; k < table.rows.size() && k < targets.size(); ++k) {
        const auto& row = table.rows[k];
        const bool ok = std::isfinite(row.coverage) && std::abs(row.coverage - targets[k]) <= tol;
        pass = pass && ok;
        os << "x" << row.coordinate + 1 << " " << fmt(row.coverage, 3) << " (target " << targets[k] << ") ";
    }
    os << "| reps " << table.reps << ", screened " << table.screened << ", failures " << table.failures;
    detail = os.str();
    return pass;
}

void criterion1() {
    const auto t0 = Clock::now();
    OracleOptions opt;  // n = 100, p = 5, sigma = 1, lambda = 2, 500 draws
    auto run = [](const OracleOptions& o, std::string& detail) {
        const auto res = gaussian_linear_oracle(o);
        bool pass = res.max_violation <= 1e-9;
        std::ostringstream os;
        os << "event M = {";
        for (std::size_t a = 0; a < res.event.size(); ++a) os << (a ? "," : "") << res.event.model[a] + 1;
        os << "}, " << res.accepted << " draws;";
        for (Eigen::Index c = 0; c < res.pivots.cols(); ++c) {
            std::vector<double> col(res.pivots.col(c).data(), res.pivots.col(c).data() + res.pivots.rows());
            const double d = ks_statistic_uniform(col);
            const double pv = ks_pvalue(d, col.size());
            pass = pass && pv >= 0.01;
            os << " KS p-value " << fmt(pv, 3);
        }
        os << "; max (Ay - b) " << fmt(res.max_violation, 3);
        detail = os.str();
        return pass;
    };
    std::string detail;
    bool pass = run(opt, detail);
    if (!pass) {
        // a single failure at level 0.01 is rerun with ten times the draws
        OracleOptions big = opt;
        big.draws *= 10;
        std::string rerun;
        pass = run(big, rerun);
        detail += " | rerun x10: " + rerun;
    }
    const double secs = seconds_since(t0);
    report("criterion 1 exact Gaussian pivot oracle", pass && secs < 60, detail + "; " + fmt(secs, 3) + " s");
}

void criterion2() {
    const auto t0 = Clock::now();
    SimScenario s = SimScenario::strong(200);
    const auto results = run_replications(s);
    const auto table = coverage_table(s, results);
    std::string detail;
    const bool pass = coverage_check(table, {0.96, 0.955, 0.935, 0.945}, 0.05, detail);
    report("criterion 2 coverage, strong signal, n = 200, lambda = 8.5 sqrt(n / 200), sPRES", pass,
           detail + "; " + fmt(seconds_since(t0), 3) + " s");

    SimScenario smoke = SimScenario::strong(100);
    smoke.reps = 50;
    std::string smoke_detail;
    const bool smoke_pass = coverage_check(coverage_experiment(smoke), {0.96, 0.955, 0.935, 0.945}, 0.10, smoke_detail);
    report("criterion 2 smoke variant, n = 100, 50 reps, tolerance 0.10", smoke_pass, smoke_detail);

    // the same constant read as lambda = C sqrt(n) on the summed likelihood
    SimScenario literal = SimScenario::strong(200);
    literal.lambda_rule = PenaltyConfig::c_sqrt_n(8.5, 200);
    literal.reps = 50;
    std::size_t screened = 0, selected = 0;
    for (const auto& r : run_replications(literal)) {
        screened += r.screened;
        selected += r.selection.size();
    }
    info("screening with lambda = 8.5 sqrt(n) (n = 200, 50 reps)",
         "screened " + std::to_string(screened) + " of 50, mean model size " + fmt(selected / 50.0, 3));
}

void criterion3() {
    const auto t0 = Clock::now();
    SimScenario s = SimScenario::weak(200);
    s.info_onestep = InfoMethod::SPRES;
    s.info_pivot = InfoMethod::LS;
    const auto table = coverage_experiment(s);
    std::string detail;
    const bool pass = coverage_check(table, {0.96, 0.965, 0.975, 0.98}, 0.05, detail);
    report("criterion 3 coverage, weak signal, n = 200, lambda = 14.5 sqrt(n / 200), sPRES + LS", pass,
           detail + "; " + fmt(seconds_since(t0), 3) + " s");
    const double fail_rate = static_cast<double>(table.failures) / static_cast<double>(table.reps);
    info("replication failure rate in the sPRES + LS run", fmt(fail_rate, 3));
}

void criterion4() {
    const auto t0 = Clock::now();
    const double strong = right_censoring_rate(SimScenario::strong(200), 100000, 1);
    const double weak = right_censoring_rate(SimScenario::weak(200), 100000, 2);
    const double secs = seconds_since(t0);
    const bool pass = std::abs(strong - 0.31) <= 0.01 && std::abs(weak - 0.276) <= 0.01 && secs < 10;
    report("criterion 4 right-censoring proportions over 1e5 subjects", pass,
           "strong " + fmt(strong) + " (target 0.31), weak " + fmt(weak) + " (target 0.276); " + fmt(secs, 3) + " s");
    SimScenario stated = SimScenario::strong(200);
    stated.weibull_eta = 0.5;
    SimScenario stated_weak = SimScenario::weak(200);
    stated_weak.weibull_eta = 0.5;
    info("proportions with Weibull rate 0.5",
         "strong " + fmt(right_censoring_rate(stated, 100000, 1)) + ", weak " +
             fmt(right_censoring_rate(stated_weak, 100000, 2)));
}

void criterion5() {
    const auto t0 = Clock::now();
    SimScenario s = SimScenario::strong(400);
    const auto qq = null_pvalue_qq(s);
    const bool pass = qq.empirical.size() >= 100 && qq.ks <= 0.12;
    report("criterion 5 null p-value uniformity, strong signal, n = 400", pass,
           "KS distance " + fmt(qq.ks, 3) + " over " + std::to_string(qq.empirical.size()) + " pooled nulls, " +
               std::to_string(qq.failures) + " failed reps; " + fmt(seconds_since(t0), 3) + " s");
}

void criterion6() {
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        SimScenario s = seed % 2 ? SimScenario::strong(seed % 4 == 1 ? 200 : 50) : SimScenario::weak(200);
        auto rng = replication_engine(1000 + seed, 0);
        const auto d = gen_dataset(s, rng);
        const auto fit = lasso_fit(d, scenario_penalty(s, d.n()));
        const auto a = info_spres(d, fit);
        const auto b = info_pres(d, fit);
        worst = std::max(worst, max_rel_err(a.matrix, b.matrix));
    }
    report("criterion 6 PRES equals sPRES on 20 seeded fits", worst <= 1e-3,
           "largest elementwise relative difference " + fmt(worst, 3));
}

void criterion7() {
    double worst = 0.0;
    int instances = 0;
    for (std::uint64_t seed = 1; instances < 200 && seed < 5000; ++seed) {
        const auto d = random_dataset(3 + seed % 8, 1 + static_cast<Eigen::Index>(seed % 3), 7000 + seed, 3, 0.3);
        if (npmle_support(d).size() > 3) continue;
        std::mt19937_64 rng(seed);
        const auto h = random_hazard(d, rng);
        std::normal_distribution<double> normal(0.0, 0.5);
        Vector beta(d.p());
        for (Eigen::Index j = 0; j < d.p(); ++j) beta[j] = normal(rng);
        const CoxParams par{beta, h};
        const Matrix sb = score_beta_per_subject(d, par);
        const Matrix nb = nuisance_score_basis(d, par);
        const Matrix diff = ls_information(sb, nb) - residual_ls_information(sb, nb);
        const Matrix ref = residual_ls_information(sb, nb);
        worst = std::max(worst, diff.lpNorm<Eigen::Infinity>() / std::max(1.0, ref.lpNorm<Eigen::Infinity>()));
        ++instances;
    }
    report("criterion 7 LS Schur form equals residual least squares", worst <= 1e-6 && instances == 200,
           std::to_string(instances) + " instances (n <= 10, m <= 3), largest difference " + fmt(worst, 3));
}

void criterion8() {
    struct Suite {
        const char* label;
        const char* cases;
    };
    const Suite suites[] = {
        {"score gradients vs finite differences", "beta score matches central differences,nuisance score"},
        {"EM objective monotonicity", "EM iterations increase the likelihood and reach the Newton optimum,"
                                      "profile NPMLE postconditions"},
        {"KKT postconditions", "KKT postconditions and selection soundness on seeded fits"},
        {"truncated CDF endpoints and monotonicity",
         "untruncated and symmetric cases,endpoints and monotonicity in x,strictly decreasing in theta,"
         "tail evaluations against 50-digit references"},
        {"Richardson exactness on quartics", "Richardson Jacobian is exact on quartics"},
        {"LS estimator PSD", "LS estimates are positive semidefinite"},
        {"truncation-limit grid oracle", "truncation limits agree with a grid over the line"},
        {"CI / p-value duality", "intervals: ordering, nesting and duality with p-values"},
        {"brute-force lasso equivalence", "lasso objective matches brute-force search on tiny problems"},
    };
    bool all = true;
    std::ostringstream os;
    for (const auto& suite : suites) {
        doctest::Context ctx;
        ctx.setOption("test-case", suite.cases);
        ctx.setOption("minimal", true);
        ctx.setOption("no-run", false);
        const int rc = ctx.run();
        all = all && rc == 0;
        os << (os.tellp() > 0 ? "; " : "") << suite.label << " " << (rc == 0 ? "ok" : "FAILED");
    }
    report("criterion 8 property suites", all, os.str());
}

void ls_gap_note() {
    // relative operator-norm gap between LS and sPRES on the selected block
    std::ostringstream os;
    std::vector<double> gaps;
    for (std::size_t n : {200, 800, 2000, 3200}) {
        SimScenario s = SimScenario::strong(n);
        auto rng = replication_engine(77, 0);
        const auto d = gen_dataset(s, rng);
        const auto fit = lasso_fit(d, scenario_penalty(s, n));
        const auto sel = extract_selection(fit);
        const Matrix a = model_block(info_ls(d, fit).matrix, sel.model) / static_cast<double>(n);
        const Matrix b = model_block(info_spres(d, fit).matrix, sel.model) / static_cast<double>(n);
        Eigen::JacobiSVD<Matrix> num(a - b), den(b);
        gaps.push_back(num.singularValues()[0] / den.singularValues()[0]);
        os << (gaps.size() > 1 ? ", " : "") << "n " << n << ": " << fmt(gaps.back(), 3);
    }
    const bool decreasing = gaps[0] > gaps[1] && gaps[1] > gaps[3];
    report("LS vs sPRES relative gap decreases with n (200, 800, 3200)", decreasing, os.str(), false);
    report("LS vs sPRES within 15% at n = 2000", gaps[2] <= 0.15, fmt(gaps[2], 3), false);
}

void epsilon_note() {
    std::ostringstream os;
    std::vector<std::vector<double>> cov;
    for (double eps : {1e-2, 1e-5, 1e-7}) {
        SimScenario s = SimScenario::strong(200);
        s.epsilon = eps;
        const auto table = coverage_experiment(s);
        std::vector<double> row;
        os << "eps " << eps << ":";
        for (const auto& r : table.rows) {
            row.push_back(r.coverage);
            os << " " << fmt(r.coverage, 3);
        }
        os << "; ";
        cov.push_back(row);
    }
    double spread = 0.0;
    for (std::size_t k = 0; k < cov[0].size(); ++k)
        for (const auto& row : cov) spread = std::max(spread, std::abs(row[k] - cov[1][k]));
    report("coverage insensitive to the Richardson increment (<= 0.01)", spread <= 0.01,
           os.str() + "max change " + fmt(spread, 3), false);
}

} // namespace

int main() {
    const auto t0 = Clock::now();
    guarded("criterion 1 exact Gaussian pivot oracle", criterion1);
    guarded("criterion 2 coverage, strong signal", criterion2);
    guarded("criterion 3 coverage, weak signal", criterion3);
    guarded("criterion 4 right-censoring proportions", criterion4);
    guarded("criterion 5 null p-value uniformity", criterion5);
    guarded("criterion 6 PRES equals sPRES", criterion6);
    guarded("criterion 7 LS Schur vs residual form", criterion7);
    guarded("criterion 8 property suites", criterion8);
    try {
        ls_gap_note();
        epsilon_note();
    } catch (const std::exception& e) {
        std::printf("[FAIL] non-gating diagnostics threw: %s\n", e.what());
    }
    std::printf("%d gating criteria failed; total %.1f s\n", failures, seconds_since(t0));
    return failures == 0 ? 0 : 1;
}
