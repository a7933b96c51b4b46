#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "permclust/experiments.hpp"

using permclust::ExperimentSpec;

namespace {

std::uint64_t default_seed() {
    if (const char* env = std::getenv("PERMCLUST_SEED")) {
        try {
            return std::stoull(env);
        } catch (...) {
            std::cerr << "warning: ignoring unparsable PERMCLUST_SEED\n";
        }
    }
    return 1;
}

// Flags shared by every subcommand; each writes straight into the spec.
void add_common_options(CLI::App* cmd, ExperimentSpec& spec) {
    cmd->add_option("--q", [&spec](const CLI::results_t& res) {
        spec.q = std::stod(res[0]);
        return true;
    }, "Mallows parameter q > 0 (q=1 is uniform)");
    cmd->add_option("--dist", [&spec](const CLI::results_t& res) {
        spec.dist = res[0];
        return true;
    }, "distribution spec: geom:q=0.5 | finitetail:w=0.5,0.2;r=0.5 | power:s=3");
    cmd->add_option("--n", spec.n_values, "size(s); comma separated where a grid applies")
        ->delimiter(',');
    cmd->add_option("--l", spec.l, "block length (>= 2)");
    cmd->add_option("--k", [&spec](const CLI::results_t& res) {
        spec.k = std::stoi(res[0]);
        return true;
    }, "block start; omitted: all starts (exact/bounds) or the interior limit (supercluster)");
    cmd->add_option("--pattern", [&spec](const CLI::results_t& res) {
        spec.pattern = res[0];
        return true;
    }, "internal block order, e.g. 3,2,1");
    cmd->add_option("--samples", spec.samples, "Monte Carlo sample count / renewal prefixes");
    cmd->add_option("--seed", spec.seed, "RNG seed (default: PERMCLUST_SEED or 1)");
    cmd->add_option("--confidence", spec.confidence, "confidence level, default 0.99");
    cmd->add_option("--workers", spec.workers, "worker threads (never changes results)");
    cmd->add_option("--out", spec.out, "output path (default: stdout)");
    cmd->add_option("--format", [&spec](const CLI::results_t& res) {
        if (res[0] == "csv") {
            spec.format = ExperimentSpec::Format::csv;
        } else if (res[0] == "json") {
            spec.format = ExperimentSpec::Format::json;
        } else {
            return false;
        }
        return true;
    }, "csv | json");
    cmd->add_flag("--cap-override", spec.cap_override,
                  "raise the enumeration cap from 10 to the hard limit 12");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"p-shifted and Mallows random permutations: exact, bounded and "
                 "Monte Carlo clustering experiments"};
    app.require_subcommand(1);
    app.set_config("--config")->description("flat key=value file mirroring the flags");

    ExperimentSpec spec;
    spec.seed = default_seed();
    spec.n_values.clear();

    auto* exact = app.add_subcommand("exact", "enumeration over S_n");
    add_common_options(exact, spec);
    exact->add_option("--stat", spec.stat, "cluster | nl");

    auto* estimate = app.add_subcommand("estimate", "Monte Carlo estimates");
    add_common_options(estimate, spec);
    estimate->add_option("--stat", spec.stat, "cluster | nl | inversions");

    auto* bounds = app.add_subcommand("bounds", "certified lower/upper bounds vs exact");
    add_common_options(bounds, spec);

    auto* scaling = app.add_subcommand(
        "scaling", "q_n = 1 - c/n^alpha trend runs with envelope columns");
    add_common_options(scaling, spec);
    scaling->add_option("--alpha", spec.alpha, "exponent alpha in (0,1]");
    scaling->add_option("--c", spec.c, "rate constant c > 0");
    scaling->add_option("--d", spec.d_fraction, "block start fraction: k_n = round(d n)");

    auto* supercluster =
        app.add_subcommand("supercluster", "limit values plus a Monte Carlo approach curve");
    add_common_options(supercluster, spec);
    supercluster->add_option("--l-list", spec.l_values, "block lengths for the curve")
        ->delimiter(',');

    auto* renewal = app.add_subcommand("renewal", "empirical vs formula renewal statistics");
    add_common_options(renewal, spec);

    auto* verify = app.add_subcommand("verify", "run the cross-module invariant suite");
    add_common_options(verify, spec);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (exact->parsed()) spec.command = ExperimentSpec::Command::exact;
    if (estimate->parsed()) spec.command = ExperimentSpec::Command::estimate;
    if (bounds->parsed()) spec.command = ExperimentSpec::Command::bounds;
    if (scaling->parsed()) spec.command = ExperimentSpec::Command::scaling;
    if (supercluster->parsed()) spec.command = ExperimentSpec::Command::supercluster;
    if (renewal->parsed()) spec.command = ExperimentSpec::Command::renewal;
    if (verify->parsed()) spec.command = ExperimentSpec::Command::verify;

    return permclust::run_experiment(spec, std::cerr);
}
