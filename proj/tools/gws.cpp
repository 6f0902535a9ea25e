// Command-line front end for the tree-count experiments: sampling
// conditioned trees, counting pattern occurrences, exact small-size
// moments, Monte Carlo moment scans, normality checks, truncated-variance
// decay, the two heavy-tail growth runs, and the degeneracy probes.
//
// Reports embed their configuration so a run is reproducible from the
// report alone. The worker count is deliberately not part of that echo:
// the harness guarantees bit-identical results for any worker count, and
// the golden-file tests hold the output bytes fixed across 1, 4, and 8
// workers. Errors print a one-record JSON object and exit with a stable
// code: 2 usage, 3 invalid distribution, 4 infeasible size, 5 enumeration
// guard, 1 anything else.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gws/degeneracy.hpp"
#include "gws/errors.hpp"
#include "gws/harness.hpp"
#include "gws/offspring.hpp"
#include "gws/oracle.hpp"
#include "gws/pattern.hpp"
#include "gws/rng.hpp"
#include "gws/sampler.hpp"
#include "gws/tree.hpp"

using json = nlohmann::ordered_json;
using namespace gws;

namespace {

struct Opts {
    std::string dist = "geom";
    std::string pattern;
    std::string trees;
    std::string mode = "total";
    std::string window;
    std::uint64_t n = 0;
    std::vector<std::uint64_t> ns;
    std::vector<std::size_t> plist;
    std::uint64_t reps = 0;
    std::uint64_t seed = 1;
    bool centered = false;
    int example = 0;
    std::uint64_t bound = 8;
    unsigned workers = 1;
    std::string out;
    std::string format = "json";
};

// Shortest round-trip decimal form, shared between the JSON and CSV
// emitters so the two formats agree byte for byte on every number.
std::string fmt(double x) { return json(x).dump(); }

void write_report(const std::string& out, const std::string& text) {
    if (out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream file(out, std::ios::binary);
    if (!file)
        throw std::runtime_error("cannot open output file: " + out);
    file << text;
}

void add_out(json& config, const Opts& o) {
    if (!o.out.empty())
        config["out"] = o.out;
}

// One "# key=value" line per configuration field, so a CSV report carries
// the same provenance as its JSON twin.
void csv_config(std::ostringstream& os, const json& config) {
    for (auto it = config.begin(); it != config.end(); ++it) {
        os << "# " << it.key() << "=";
        if (it->is_string())
            os << it->get<std::string>();
        else
            os << it->dump();
        os << "\n";
    }
}

TruncationWindow parse_window(const std::string& text) {
    auto colon = text.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("window must be lo:hi with hi an integer or inf, got: " +
                                    text);
    TruncationWindow w;
    w.lo = std::stoull(text.substr(0, colon));
    const std::string hi = text.substr(colon + 1);
    w.hi = hi == "inf" ? TruncationWindow::unbounded : std::stoull(hi);
    if (w.lo < 1 || w.lo > w.hi)
        throw std::invalid_argument("window bounds must satisfy 1 <= lo <= hi, got: " + text);
    return w;
}

void run_sample(const Opts& o) {
    auto dist = OffspringDistribution::parse(o.dist);
    dist.require_valid();
    if (!dist.feasible_size(o.n))
        throw InfeasibleSize("no tree of size " + std::to_string(o.n) + " under " + o.dist);
    const OffspringSampler sampler(dist);
    std::ostringstream os;
    for (std::uint64_t rep = 0; rep < o.reps; ++rep) {
        SeededRng rng(o.seed, streams::conditioned(o.n, rep));
        os << serialize_tree(sample_conditioned(dist, sampler, o.n, rng)) << "\n";
    }
    write_report(o.out, os.str());
}

void run_count(const Opts& o) {
    Pattern pat(parse_tree(o.pattern));
    std::optional<TruncationWindow> window;
    if (!o.window.empty())
        window = parse_window(o.window);
    std::ifstream in(o.trees);
    if (!in)
        throw std::runtime_error("cannot open tree file: " + o.trees);
    std::ostringstream os;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        OrderedTree tree = [&] {
            try {
                return parse_tree(line);
            } catch (const ParseError& e) {
                throw ParseError(o.trees + " line " + std::to_string(line_no) + ": " + e.what(),
                                 e.offset());
            }
        }();
        std::uint64_t value;
        if (o.mode == "toll")
            value = window ? truncated_toll(pat, *window, tree) : toll_count(pat, tree);
        else if (window)
            // Uncentered gated totals are sums of integer tolls, exact in
            // a double up to 2^53.
            value = static_cast<std::uint64_t>(std::llround(truncated_additive(pat, *window, tree)));
        else
            value = subtree_count(pat, tree);
        os << value << "\n";
    }
    write_report(o.out, os.str());
}

void run_oracle(const Opts& o) {
    auto dist = OffspringDistribution::parse(o.dist);
    dist.require_valid();
    Pattern pat(parse_tree(o.pattern));
    ExactMoments m = exact_moments(dist, pat, o.n);

    json config{{"command", "oracle"}, {"dist", o.dist},     {"pattern", o.pattern},
                {"n", o.n},            {"format", o.format}};
    add_out(config, o);
    if (o.format == "json") {
        json hist = json::object();
        for (const auto& [value, prob] : m.histogram)
            hist[std::to_string(value)] = prob;
        json report{{"config", config},
                    {"mean", m.mean},
                    {"variance", m.variance},
                    {"histogram", hist}};
        write_report(o.out, report.dump(2) + "\n");
        return;
    }
    std::ostringstream os;
    csv_config(os, config);
    os << "# mean=" << fmt(m.mean) << "\n";
    os << "# variance=" << fmt(m.variance) << "\n";
    os << "value,probability\n";
    for (const auto& [value, prob] : m.histogram)
        os << value << "," << fmt(prob) << "\n";
    write_report(o.out, os.str());
}

void run_mc(const Opts& o) {
    auto dist = OffspringDistribution::parse(o.dist);
    Pattern pat(parse_tree(o.pattern));
    SeededRng rng(o.seed, 0);
    MomentReport r = mc_moments(dist, pat, o.n, o.reps, rng, o.workers);

    json config{{"command", "mc"},  {"dist", o.dist}, {"pattern", o.pattern},
                {"n", o.n},         {"reps", o.reps}, {"seed", o.seed},
                {"format", o.format}};
    add_out(config, o);
    if (o.format == "json") {
        json report{{"config", config},
                    {"n", r.n},
                    {"reps", r.reps},
                    {"mean", r.mean},
                    {"se_mean", r.se_mean},
                    {"variance", r.variance},
                    {"se_variance", r.se_variance},
                    {"mean_over_n", r.mean_over_n},
                    {"var_over_n", r.var_over_n}};
        if (r.mu_n_estimate)
            report["mu_n"] = *r.mu_n_estimate;
        if (r.se_mu_n)
            report["se_mu_n"] = *r.se_mu_n;
        write_report(o.out, report.dump(2) + "\n");
        return;
    }
    std::ostringstream os;
    csv_config(os, config);
    os << "n,reps,mean,se_mean,variance,se_variance,mean_over_n,var_over_n,mu_n,se_mu_n\n";
    os << r.n << "," << r.reps << "," << fmt(r.mean) << "," << fmt(r.se_mean) << ","
       << fmt(r.variance) << "," << fmt(r.se_variance) << "," << fmt(r.mean_over_n) << ","
       << fmt(r.var_over_n) << "," << (r.mu_n_estimate ? fmt(*r.mu_n_estimate) : "") << ","
       << (r.se_mu_n ? fmt(*r.se_mu_n) : "") << "\n";
    write_report(o.out, os.str());
}

void run_clt_test(const Opts& o) {
    auto dist = OffspringDistribution::parse(o.dist);
    Pattern pat(parse_tree(o.pattern));
    SeededRng rng(o.seed, 0);
    NormalityReport r = normality_test(dist, pat, o.n, o.reps, rng, Standardization::self,
                                       0.0, 0.0, o.workers);

    json config{{"command", "clt-test"}, {"dist", o.dist}, {"pattern", o.pattern},
                {"n", o.n},              {"reps", o.reps}, {"seed", o.seed},
                {"format", o.format}};
    add_out(config, o);
    if (o.format == "json") {
        json report{{"config", config},
                    {"ks", r.ks},
                    {"skewness", r.skewness},
                    {"excess_kurtosis", r.excess_kurtosis},
                    {"center", r.center},
                    {"scale", r.scale},
                    {"degenerate_scale", r.degenerate_scale}};
        write_report(o.out, report.dump(2) + "\n");
        return;
    }
    std::ostringstream os;
    csv_config(os, config);
    os << "ks,skewness,excess_kurtosis,center,scale,degenerate_scale\n";
    os << fmt(r.ks) << "," << fmt(r.skewness) << "," << fmt(r.excess_kurtosis) << ","
       << fmt(r.center) << "," << fmt(r.scale) << ","
       << (r.degenerate_scale ? "true" : "false") << "\n";
    write_report(o.out, os.str());
}

void run_truncation(const Opts& o) {
    auto dist = OffspringDistribution::parse(o.dist);
    Pattern pat(parse_tree(o.pattern));
    SeededRng rng(o.seed, 0);
    TruncationReport r =
        truncation_decay(dist, pat, o.n, o.plist, o.reps, rng, o.workers, o.centered);

    json config{{"command", "truncation"}, {"dist", o.dist}, {"pattern", o.pattern},
                {"n", o.n},                {"plist", o.plist}, {"reps", o.reps},
                {"centered", o.centered},  {"seed", o.seed},   {"format", o.format}};
    add_out(config, o);
    if (o.format == "json") {
        json rows = json::array();
        for (const auto& row : r.rows)
            rows.push_back(json{{"p", row.p},
                                {"var_over_n", row.var_over_n},
                                {"se_var_over_n", row.se_var_over_n}});
        json report{{"config", config}, {"rows", rows}};
        write_report(o.out, report.dump(2) + "\n");
        return;
    }
    std::ostringstream os;
    csv_config(os, config);
    os << "p,var_over_n,se_var_over_n\n";
    for (const auto& row : r.rows)
        os << row.p << "," << fmt(row.var_over_n) << "," << fmt(row.se_var_over_n) << "\n";
    write_report(o.out, os.str());
}

void run_heavy_tail(const Opts& o) {
    SeededRng rng(o.seed, 0);
    HeavyTailReport r = heavy_tail_experiment(o.example, o.ns, o.reps, rng, o.workers);

    json config{{"command", "heavy-tail"}, {"example", o.example}, {"ns", o.ns},
                {"reps", o.reps},          {"seed", o.seed},       {"format", o.format}};
    add_out(config, o);
    if (o.format == "json") {
        json rows = json::array();
        for (const auto& row : r.rows)
            rows.push_back(json{{"n", row.n},
                                {"reps", row.reps},
                                {"mean", row.mean},
                                {"variance", row.variance},
                                {"se_variance", row.se_variance},
                                {"var_over_n", row.var_over_n},
                                {"variance_ci", {row.variance_ci.lo, row.variance_ci.hi}}});
        json report{{"config", config},
                    {"example", r.example},
                    {"dist", r.dist_spec},
                    {"pattern", r.pattern},
                    {"rows", rows},
                    {"variance_increasing", r.variance_increasing},
                    {"ratio_non_increasing", r.ratio_non_increasing},
                    {"ratio_increasing", r.ratio_increasing},
                    {"min_step_ratio", r.min_step_ratio},
                    {"ratio_ci_disjoint", r.ratio_ci_disjoint}};
        write_report(o.out, report.dump(2) + "\n");
        return;
    }
    std::ostringstream os;
    csv_config(os, config);
    os << "# dist=" << r.dist_spec << "\n";
    os << "# pattern=" << r.pattern << "\n";
    os << "# variance_increasing=" << (r.variance_increasing ? "true" : "false") << "\n";
    os << "# ratio_non_increasing=" << (r.ratio_non_increasing ? "true" : "false") << "\n";
    os << "# ratio_increasing=" << (r.ratio_increasing ? "true" : "false") << "\n";
    os << "# min_step_ratio=" << fmt(r.min_step_ratio) << "\n";
    os << "# ratio_ci_disjoint=" << (r.ratio_ci_disjoint ? "true" : "false") << "\n";
    os << "n,reps,mean,variance,se_variance,var_over_n,ci_lo,ci_hi\n";
    for (const auto& row : r.rows)
        os << row.n << "," << row.reps << "," << fmt(row.mean) << "," << fmt(row.variance)
           << "," << fmt(row.se_variance) << "," << fmt(row.var_over_n) << ","
           << fmt(row.variance_ci.lo) << "," << fmt(row.variance_ci.hi) << "\n";
    write_report(o.out, os.str());
}

void run_degeneracy(const Opts& o) {
    auto dist = OffspringDistribution::parse(o.dist);
    Pattern pat(parse_tree(o.pattern));
    auto cert = find_certificate(dist, pat, o.bound);
    auto fit = fit_linear_decomposition(dist, pat, o.bound);

    json config{{"command", "degeneracy"}, {"dist", o.dist}, {"pattern", o.pattern},
                {"bound", o.bound},        {"format", o.format}};
    add_out(config, o);

    json g = json::object();
    for (const auto& [size, value] : fit.g)
        g[std::to_string(size)] = value;
    json alphas = json::object();
    for (const auto& [fringe, value] : fit.alphas)
        alphas[serialize_tree(fringe)] = value;
    json decomposition{{"g", g},
                       {"alphas", alphas},
                       {"residual", fit.max_residual},
                       {"rank_deficient", fit.rank_deficient},
                       {"caveat", fit.caveat}};

    if (o.format == "json") {
        json jcert = nullptr;
        json jcoeff = nullptr;
        if (cert) {
            jcert = json{{"tau1", serialize_tree(cert->tau1)},
                         {"tau2", serialize_tree(cert->tau2)},
                         {"p1", cert->p1},
                         {"p2", cert->p2},
                         {"delta", cert->delta},
                         {"coefficient", cert->coefficient}};
            jcoeff = cert->coefficient;
        }
        json report{{"config", config},
                    {"certificate", jcert},
                    {"lower_bound_coefficient", jcoeff},
                    {"decomposition", decomposition}};
        write_report(o.out, report.dump(2) + "\n");
        return;
    }
    std::ostringstream os;
    csv_config(os, config);
    if (cert) {
        os << "# certificate_tau1=" << serialize_tree(cert->tau1) << "\n";
        os << "# certificate_tau2=" << serialize_tree(cert->tau2) << "\n";
        os << "# certificate_p1=" << fmt(cert->p1) << "\n";
        os << "# certificate_p2=" << fmt(cert->p2) << "\n";
        os << "# certificate_delta=" << cert->delta << "\n";
        os << "# lower_bound_coefficient=" << fmt(cert->coefficient) << "\n";
    } else {
        os << "# certificate=none\n";
    }
    os << "# rank_deficient=" << (fit.rank_deficient ? "true" : "false") << "\n";
    os << "term,key,value\n";
    for (const auto& [size, value] : fit.g)
        os << "g," << size << "," << fmt(value) << "\n";
    for (const auto& [fringe, value] : fit.alphas)
        os << "alpha," << serialize_tree(fringe) << "," << fmt(value) << "\n";
    os << "residual,," << fmt(fit.max_residual) << "\n";
    write_report(o.out, os.str());
}

int fail(int code, const std::string& kind, const std::string& message) {
    json record{{"error", json{{"code", code}, {"kind", kind}, {"message", message}}}};
    std::cout << record.dump(2) << "\n";
    return code;
}

void add_common(CLI::App* cmd, Opts& o, bool with_dist = true) {
    if (with_dist)
        cmd->add_option("--dist", o.dist,
                        "Offspring law: geom, poisson, table:0=0.5,2=0.5, heavytail:beta=3")
            ->capture_default_str();
    // Accepted everywhere so sweep scripts can pass one flag set; output
    // bytes never depend on it.
    cmd->add_option("--workers", o.workers, "Worker threads")->capture_default_str();
    cmd->add_option("--out", o.out, "Output file (stdout when absent)");
}

void add_format(CLI::App* cmd, Opts& o) {
    cmd->add_option("--format", o.format, "Report format")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
}

} // namespace

int main(int argc, char** argv) {
    Opts o;
    CLI::App app{"Occurrence counts of a fixed pattern in conditioned random trees:\n"
                 "samplers, exact oracles, Monte Carlo experiments, and degeneracy probes."};
    app.require_subcommand(1);

    auto* sample = app.add_subcommand(
        "sample", "Write conditioned trees, one parenthesis string per line");
    add_common(sample, o);
    sample->add_option("--n", o.n, "Tree size")->required()->check(CLI::PositiveNumber);
    sample->add_option("--reps", o.reps, "Number of trees")
        ->required()
        ->check(CLI::PositiveNumber);
    sample->add_option("--seed", o.seed, "Master seed")->capture_default_str();
    sample->callback([&] { run_sample(o); });

    auto* count = app.add_subcommand(
        "count", "Count pattern occurrences per tree read from a file, one count per line");
    add_common(count, o, false);
    count->add_option("--pattern", o.pattern, "Pattern, parenthesis form")->required();
    count->add_option("--trees", o.trees, "Input file, one tree per line")->required();
    count->add_option("--mode", o.mode, "total: all occurrences; toll: root-anchored only")
        ->check(CLI::IsMember({"toll", "total"}))
        ->capture_default_str();
    count->add_option("--window", o.window,
                      "Keep only tolls on fringe sizes in [lo,hi), as lo:hi, hi may be inf");
    count->callback([&] { run_count(o); });

    auto* oracle = app.add_subcommand(
        "oracle", "Exact mean, variance, and histogram of the count by full enumeration");
    add_common(oracle, o);
    add_format(oracle, o);
    oracle->add_option("--pattern", o.pattern, "Pattern, parenthesis form")->required();
    oracle->add_option("--n", o.n, "Tree size")->required()->check(CLI::PositiveNumber);
    oracle->callback([&] { run_oracle(o); });

    auto* mc = app.add_subcommand(
        "mc", "Monte Carlo mean and variance of the count over conditioned trees");
    add_common(mc, o);
    add_format(mc, o);
    mc->add_option("--pattern", o.pattern, "Pattern, parenthesis form")->required();
    mc->add_option("--n", o.n, "Tree size")->required()->check(CLI::PositiveNumber);
    mc->add_option("--reps", o.reps, "Replicates")->required()->check(CLI::PositiveNumber);
    mc->add_option("--seed", o.seed, "Master seed")->capture_default_str();
    mc->callback([&] { run_mc(o); });

    auto* clt = app.add_subcommand(
        "clt-test", "Distance of the standardized counts from the standard normal");
    add_common(clt, o);
    add_format(clt, o);
    clt->add_option("--pattern", o.pattern, "Pattern, parenthesis form")->required();
    clt->add_option("--n", o.n, "Tree size")->required()->check(CLI::PositiveNumber);
    clt->add_option("--reps", o.reps, "Replicates")->required()->check(CLI::PositiveNumber);
    clt->add_option("--seed", o.seed, "Master seed")->capture_default_str();
    clt->callback([&] { run_clt_test(o); });

    auto* truncation = app.add_subcommand(
        "truncation", "Variance per node of the fringe-size-gated count at each threshold");
    add_common(truncation, o);
    add_format(truncation, o);
    truncation->add_option("--pattern", o.pattern, "Pattern, parenthesis form")->required();
    truncation->add_option("--n", o.n, "Tree size")->required()->check(CLI::PositiveNumber);
    truncation->add_option("--plist", o.plist, "Lower thresholds, increasing, first must be 1")
        ->required()
        ->delimiter(',');
    truncation->add_flag("--centered", o.centered,
                         "Subtract the exact mean toll per fringe size (star patterns); "
                         "this is the variant whose variance per node decays in p");
    truncation->add_option("--reps", o.reps, "Replicates")
        ->required()
        ->check(CLI::PositiveNumber);
    truncation->add_option("--seed", o.seed, "Master seed")->capture_default_str();
    truncation->callback([&] { run_truncation(o); });

    auto* heavy = app.add_subcommand(
        "heavy-tail", "Variance growth scans under the two heavy-tail offspring laws");
    add_common(heavy, o, false);
    add_format(heavy, o);
    heavy->add_option("--example", o.example,
                      "1: beta=3 tail with the three-node path; 2: beta=6 tail with the "
                      "three-leaf star")
        ->required()
        ->check(CLI::IsMember({1, 2}));
    heavy->add_option("--ns", o.ns, "Tree sizes, increasing")->required()->delimiter(',');
    heavy->add_option("--reps", o.reps, "Replicates per size")
        ->required()
        ->check(CLI::PositiveNumber);
    heavy->add_option("--seed", o.seed, "Master seed")->capture_default_str();
    heavy->callback([&] { run_heavy_tail(o); });

    auto* degeneracy = app.add_subcommand(
        "degeneracy", "Variance certificate search and linear-decomposition fit");
    add_common(degeneracy, o);
    add_format(degeneracy, o);
    degeneracy->add_option("--pattern", o.pattern, "Pattern, parenthesis form")->required();
    degeneracy->add_option("--bound", o.bound, "Enumerate trees up to this size")
        ->capture_default_str();
    degeneracy->callback([&] { run_degeneracy(o); });

    try {
        app.parse(argc, argv);
        return 0;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0)
            return app.exit(e); // --help and friends
        return fail(2, "usage", e.what());
    } catch (const InvalidDistribution& e) {
        return fail(3, "invalid-distribution", e.what());
    } catch (const InfeasibleSize& e) {
        return fail(4, "infeasible-size", e.what());
    } catch (const OracleTooLarge& e) {
        return fail(5, "oracle-guard", e.what());
    } catch (const ParseError& e) {
        return fail(1, "parse-error", e.what());
    } catch (const DegenerateSample& e) {
        return fail(1, "degenerate-sample", e.what());
    } catch (const std::invalid_argument& e) {
        return fail(1, "invalid-argument", e.what());
    } catch (const std::exception& e) {
        return fail(1, "error", e.what());
    }
}
