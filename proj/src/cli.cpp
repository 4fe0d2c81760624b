#include "icsel/cli.hpp"

#include "icsel/errors.hpp"
#include "icsel/format.hpp"
#include "icsel/gaussian_oracle.hpp"
#include "icsel/info.hpp"
#include "icsel/io.hpp"
#include "icsel/lasso.hpp"
#include "icsel/selective.hpp"
#include "icsel/simulation.hpp"
#include "icsel/stats.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>

namespace icsel {

namespace {

using nlohmann::json;

struct Options {
    std::string input;
    std::string output;
    std::optional<double> lambda;
    std::optional<double> lambda_c;
    std::string lambda_aic;
    double alpha = 0.05;
    std::string info_onestep = "spres";
    std::string info_pivot = "spres";
    double epsilon = kDefaultEpsilon;
    std::optional<std::uint64_t> seed;
    std::size_t reps = 200;
    std::string scenario = "strong";
    std::size_t n = 200;
    unsigned threads = 1;
    // oracle only
    Eigen::Index p = 5;
    double sigma = 1.0;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

json number(double v) {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

json number_array(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v[i]));
    return out;
}

// Re-raises library errors with the pipeline stage prepended, keeping the
// data/numerical distinction that decides the exit code.
template <class F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const DataError& e) {
        throw DataError(name + ": " + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(name + ": " + error_tag(e) + ": " + e.what());
    }
}

std::vector<double> parse_aic_spec(const std::string& spec) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, ',')) parts.push_back(part);
    double lo = 0.0, hi = 0.0, k = 0.0;
    if (parts.size() != 3 || !parse_double(parts[0], lo) || !parse_double(parts[1], hi) ||
        !parse_double(parts[2], k))
        throw UsageError("--lambda-aic expects lo,hi,k");
    if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi) || !(k >= 1.0) || k != std::floor(k))
        throw UsageError("--lambda-aic needs 0 < lo <= hi and an integer k >= 1");
    const auto count = static_cast<std::size_t>(k);
    std::vector<double> grid(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
        grid[i] = std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)));
    }
    return grid;
}

// nullopt when no lambda flag was given.
std::optional<PenaltyConfig> penalty_from(const Options& o, std::size_t n) {
    const int given = (o.lambda ? 1 : 0) + (o.lambda_c ? 1 : 0) + (o.lambda_aic.empty() ? 0 : 1);
    if (given > 1) throw UsageError("give at most one of --lambda, --lambda-c, --lambda-aic");
    try {
        if (o.lambda) return PenaltyConfig::fixed(*o.lambda);
        if (o.lambda_c) return PenaltyConfig::c_sqrt_n(*o.lambda_c, n);
        if (!o.lambda_aic.empty()) return PenaltyConfig::aic_grid(parse_aic_spec(o.lambda_aic));
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return std::nullopt;
}

InfoMethod method_from(const std::string& name) {
    try {
        return parse_info_method(name);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");
}

std::uint64_t resolve_seed(const Options& o, std::ostream& err) {
    if (o.seed) return *o.seed;
    std::random_device rd;
    const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    err << "seed: " << seed << '\n';
    return seed;
}

void emit(const Options& o, std::ostream& out, const std::string& text) {
    if (o.output.empty()) {
        out << text;
        return;
    }
    std::ofstream file(o.output, std::ios::binary);
    if (!file) throw DataError("cannot open output file '" + o.output + "'");
    file << text;
    if (!file) throw DataError("failed writing output file '" + o.output + "'");
}

struct LoadedData {
    CsvData csv;
    IntervalDataset data;
};

LoadedData load(const Options& o) {
    auto csv = stage("reading input", [&] { return read_csv_file(o.input); });
    auto data = stage("validating input", [&] { return to_dataset(csv); });
    if (data.n() < 2) throw DataError("validating input: need at least 2 subjects");
    return {std::move(csv), std::move(data)};
}

struct FittedModel {
    PenaltyConfig penalty;
    std::optional<AicSelection> aic;
    LassoFit fit;
};

FittedModel fit_model(const Options& o, const IntervalDataset& data) {
    FittedModel m;
    auto penalty = penalty_from(o, data.n());
    if (!penalty) penalty = PenaltyConfig::aic_grid(default_aic_grid(data.n()));
    if (penalty->rule == PenaltyRule::AicGrid) {
        m.aic = stage("lambda selection (AIC)", [&] { return select_lambda_aic(data, penalty->grid); });
        m.penalty = PenaltyConfig::fixed(m.aic->lambda);
        m.penalty.rule = PenaltyRule::AicGrid;
        m.penalty.grid = penalty->grid;
    } else {
        m.penalty = *penalty;
    }
    m.fit = stage("lasso fit", [&] { return lasso_fit(data, m.penalty); });
    return m;
}

json penalty_json(const FittedModel& m) {
    json j;
    switch (m.penalty.rule) {
    case PenaltyRule::Fixed: j["rule"] = "fixed"; break;
    case PenaltyRule::CSqrtN:
        j["rule"] = "c_sqrt_n";
        j["c"] = m.penalty.c;
        break;
    case PenaltyRule::AicGrid: {
        j["rule"] = "aic";
        json path = json::array();
        for (const auto& pt : m.aic->path)
            path.push_back({{"lambda", pt.lambda}, {"aic", number(pt.aic)}, {"model_size", pt.model_size}});
        j["path"] = path;
        break;
    }
    }
    return j;
}

json kkt_json(const LassoFit& fit) {
    return {{"active_residual", number(fit.kkt_active_residual)},
            {"inactive_slack", number(fit.kkt_inactive_slack)}};
}

int cmd_fit(const Options& o, std::ostream& out, std::ostream&) {
    const auto loaded = load(o);
    const auto m = fit_model(o, loaded.data);
    const auto& fit = m.fit;
    json j;
    j["n"] = loaded.data.n();
    j["p"] = loaded.data.p();
    j["covariates"] = loaded.csv.covariate_names;
    j["lambda"] = fit.penalty.lambda;
    j["penalty"] = penalty_json(m);
    j["beta"] = number_array(fit.beta);
    j["baseline"] = {{"support", fit.lambda0.support()},
                     {"jumps", number_array(fit.lambda0.jumps())}};
    j["loglik"] = number(fit.loglik);
    j["objective"] = number(fit.objective);
    j["kkt"] = kkt_json(fit);
    j["iterations"] = fit.iterations;
    j["converged"] = fit.converged;
    emit(o, out, j.dump(2) + "\n");
    return kExitOk;
}

int cmd_infer(const Options& o, std::ostream& out, std::ostream& err) {
    check_alpha(o.alpha);
    const InfoMethod m1 = method_from(o.info_onestep);
    const InfoMethod m2 = method_from(o.info_pivot);
    const auto loaded = load(o);
    const auto& names = loaded.csv.covariate_names;
    const auto m = fit_model(o, loaded.data);
    const auto& fit = m.fit;
    const auto sel = stage("selection", [&] { return extract_selection(fit); });

    json j;
    j["n"] = loaded.data.n();
    j["p"] = loaded.data.p();
    j["lambda"] = fit.penalty.lambda;
    j["alpha"] = o.alpha;
    j["methods"] = {{"onestep", to_string(m1)}, {"pivot", to_string(m2)}};
    json indices = json::array(), signs = json::array();
    for (std::size_t k = 0; k < sel.size(); ++k) {
        indices.push_back(sel.model[k] + 1);
        signs.push_back(sel.signs[k]);
    }
    j["selection"] = {{"indices", indices}, {"signs", signs}};
    json coords = json::array();
    json failures = json::array();
    json min_eig = {{"onestep", nullptr}, {"pivot", nullptr}};
    int code = kExitOk;

    if (sel.empty()) {
        j["status"] = "empty selection: no coordinates to infer";
    } else {
        const auto info1 = stage("information (" + to_string(m1) + ")",
                                 [&] { return estimate_information(m1, loaded.data, fit, o.epsilon); });
        const auto info2 = m2 == m1 ? info1
                                    : stage("information (" + to_string(m2) + ")", [&] {
                                          return estimate_information(m2, loaded.data, fit, o.epsilon);
                                      });
        const auto report = stage("inference", [&] { return infer_all(fit, sel, info1, info2, o.alpha); });
        min_eig = {{"onestep", number(report.min_eig_onestep)}, {"pivot", number(report.min_eig_pivot)}};
        for (const auto& c : report.coordinates) {
            const auto& name = names[static_cast<std::size_t>(c.index)];
            coords.push_back({{"name", name},
                              {"lasso", number(c.lasso)},
                              {"one_step", number(c.one_step)},
                              {"ci_low", number(c.ci_low)},
                              {"ci_high", number(c.ci_high)},
                              {"p_value", number(c.p_value)}});
            if (!c.ok()) {
                failures.push_back({{"name", name}, {"error", c.failure}, {"message", c.message}});
                err << "inference: " << name << ": " << c.failure << ": " << c.message << '\n';
            }
        }
        j["status"] = report.status;
        if (!report.all_ok()) code = kExitNumerical;
    }
    j["coordinates"] = coords;
    j["diagnostics"] = {{"kkt", kkt_json(fit)}, {"min_eig_MM", min_eig}, {"failures", failures}};
    emit(o, out, j.dump(2) + "\n");
    return code;
}

SimScenario scenario_from(const Options& o, std::ostream& err) {
    SimScenario s;
    if (o.scenario == "strong") s = SimScenario::strong(o.n);
    else if (o.scenario == "weak") s = SimScenario::weak(o.n);
    else throw UsageError("--scenario must be strong or weak");
    if (auto penalty = penalty_from(o, o.n)) s.lambda_rule = *penalty;
    check_alpha(o.alpha);
    s.alpha = o.alpha;
    s.info_onestep = method_from(o.info_onestep);
    s.info_pivot = method_from(o.info_pivot);
    s.epsilon = o.epsilon;
    s.reps = o.reps;
    s.threads = std::max(1u, o.threads);
    s.seed = resolve_seed(o, err);
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return s;
}

std::size_t failed_count(const std::vector<ReplicationResult>& results) {
    return static_cast<std::size_t>(
        std::count_if(results.begin(), results.end(), [](const auto& r) { return r.failure.has_value(); }));
}

int replication_exit(std::size_t failures, std::size_t reps, std::ostream& err) {
    if (2 * failures > reps) {
        err << "error: " << failures << " of " << reps
            << " replications failed; the configuration is likely wrong\n";
        return kExitNumerical;
    }
    return kExitOk;
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
    const auto s = scenario_from(o, err);
    const auto results = run_replications(s);
    const auto table = coverage_table(s, results);
    emit(o, out, table.to_csv());
    err << "reps " << table.reps << ", screened " << table.screened << ", failures " << table.failures
        << ", mean CI length " << format_double(table.mean_ci_length) << '\n';
    return replication_exit(failed_count(results), results.size(), err);
}

int cmd_qq(const Options& o, std::ostream& out, std::ostream& err) {
    const auto s = scenario_from(o, err);
    const auto results = run_replications(s);
    const auto qq = qq_from_results(results);
    emit(o, out, qq.to_csv());
    err << "null p-values " << qq.empirical.size() << ", KS distance " << format_double(qq.ks)
        << ", failures " << qq.failures << '\n';
    return replication_exit(failed_count(results), results.size(), err);
}

int cmd_oracle(const Options& o, std::ostream& out, std::ostream& err) {
    OracleOptions opt;
    opt.n = o.n;
    opt.p = o.p;
    opt.sigma = o.sigma;
    opt.lambda = o.lambda.value_or(2.0);
    opt.draws = o.reps;
    if (opt.n < 2 || opt.p < 2 || !(opt.sigma > 0.0) || !(opt.lambda > 0.0) || opt.draws == 0)
        throw UsageError("oracle needs --n >= 2, --p >= 2, --sigma > 0, --lambda > 0, --reps >= 1");
    opt.seed = resolve_seed(o, err);
    const auto res = stage("oracle", [&] { return gaussian_linear_oracle(opt); });
    std::ostringstream csv;
    csv << "draw";
    for (auto idx : res.event.model) csv << ",x" << idx + 1;
    csv << '\n';
    for (Eigen::Index r = 0; r < res.pivots.rows(); ++r) {
        csv << r + 1;
        for (Eigen::Index c = 0; c < res.pivots.cols(); ++c) csv << ',' << format_double(res.pivots(r, c));
        csv << '\n';
    }
    emit(o, out, csv.str());
    err << "accepted " << res.accepted << " of " << res.attempts << " draws\n";
    for (Eigen::Index c = 0; c < res.pivots.cols(); ++c) {
        std::vector<double> col(res.pivots.col(c).data(), res.pivots.col(c).data() + res.pivots.rows());
        const double d = ks_statistic_uniform(col);
        err << "x" << res.event.model[static_cast<std::size_t>(c)] + 1 << ": KS distance " << format_double(d)
            << ", p-value " << format_double(ks_pvalue(d, col.size())) << '\n';
    }
    return kExitOk;
}

void add_lambda(CLI::App* sub, Options& o) {
    sub->add_option("--lambda", o.lambda, "fixed penalty on the summed log likelihood");
    sub->add_option("--lambda-c", o.lambda_c, "penalty C sqrt(n)");
    sub->add_option("--lambda-aic", o.lambda_aic, "AIC over lo,hi,k log-spaced penalties");
}

void add_inference(CLI::App* sub, Options& o) {
    sub->add_option("--alpha", o.alpha, "miscoverage level")->capture_default_str();
    sub->add_option("--info-onestep", o.info_onestep, "ls|spres|pres|pl")->capture_default_str();
    sub->add_option("--info-pivot", o.info_pivot, "ls|spres|pres|pl")->capture_default_str();
    sub->add_option("--epsilon", o.epsilon, "Richardson increment")->capture_default_str();
}

void add_simulation(CLI::App* sub, Options& o) {
    sub->add_option("--scenario", o.scenario, "strong|weak; default penalty 8.5 or 14.5 times sqrt(n / 200)")->capture_default_str();
    sub->add_option("--n", o.n, "subjects per replication")->capture_default_str();
    sub->add_option("--reps", o.reps, "replications")->capture_default_str();
    sub->add_option("--seed", o.seed, "base seed; drawn and printed when absent");
    sub->add_option("--threads", o.threads, "worker threads")->capture_default_str();
    sub->add_option("--output", o.output, "CSV destination (stdout when absent)");
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Selective inference for the lasso-penalized interval-censored Cox model", "icsel"};
    app.require_subcommand(1);

    auto* fit = app.add_subcommand("fit", "fit the penalized model and write JSON");
    fit->add_option("--input", o.input, "CSV input")->required();
    fit->add_option("--output", o.output, "JSON destination (stdout when absent)");
    add_lambda(fit, o);

    auto* infer = app.add_subcommand("infer", "fit, select and report selective inference as JSON");
    infer->add_option("--input", o.input, "CSV input")->required();
    infer->add_option("--output", o.output, "JSON destination (stdout when absent)");
    add_lambda(infer, o);
    add_inference(infer, o);

    auto* simulate = app.add_subcommand("simulate", "coverage experiment; writes coverage CSV");
    add_simulation(simulate, o);
    add_lambda(simulate, o);
    add_inference(simulate, o);

    auto* qq = app.add_subcommand("qq", "pooled null p-values; writes Q-Q CSV");
    add_simulation(qq, o);
    add_lambda(qq, o);
    add_inference(qq, o);

    auto* oracle = app.add_subcommand("oracle", "Gaussian linear lasso pivot draws");
    oracle->add_option("--n", o.n, "observations")->default_val(100);
    oracle->add_option("--p", o.p, "covariates")->capture_default_str();
    oracle->add_option("--sigma", o.sigma, "noise standard deviation")->capture_default_str();
    oracle->add_option("--lambda", o.lambda, "lasso penalty (default 2)");
    oracle->add_option("--reps", o.reps, "conditioned draws")->default_val(500);
    oracle->add_option("--seed", o.seed, "seed; drawn and printed when absent");
    oracle->add_option("--output", o.output, "CSV destination (stdout when absent)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (fit->parsed()) return cmd_fit(o, out, err);
        if (infer->parsed()) return cmd_infer(o, out, err);
        if (simulate->parsed()) return cmd_simulate(o, out, err);
        if (qq->parsed()) return cmd_qq(o, out, err);
        if (oracle->parsed()) return cmd_oracle(o, out, err);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitUsage;
}

} // namespace icsel
