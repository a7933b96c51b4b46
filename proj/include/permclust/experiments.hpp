#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "permclust/mc.hpp"

namespace permclust {

/// A fully parsed experiment invocation. The textual form is a flat
/// key=value document (one pair per line) mirroring the CLI flag names, and
/// parsing round-trips: from_text(to_text(spec)) == spec.
struct ExperimentSpec {
    enum class Command { exact, estimate, bounds, scaling, supercluster, renewal, verify };
    enum class Format { csv, json };

    Command command = Command::verify;

    // measure: at most one of the two
    std::optional<double> q;
    std::optional<std::string> dist;

    std::vector<long long> n_values;  // one entry for single-n commands
    int l = 2;
    std::vector<int> l_values;        // supercluster approach curve
    std::optional<int> k;             // absent: all starts, or the interior limit
    std::optional<std::string> pattern;
    std::string stat = "cluster";     // estimate: cluster | nl | inversions

    double alpha = 0.5;
    double c = 1.0;
    double d_fraction = 0.5;

    long long samples = 100000;
    std::uint64_t seed = 1;
    double confidence = 0.99;
    int workers = 1;
    bool cap_override = false;

    std::string out;                  // output path; empty writes to stdout
    Format format = Format::csv;

    bool operator==(const ExperimentSpec&) const = default;

    std::string to_text() const;
    static ExperimentSpec from_text(std::string_view text);
};

/// Executes the experiment: emits the table to spec.out (or stdout) and
/// diagnostics to `log`. Returns the process exit code: 0 on success, 1 on
/// invalid specs, 2 on capacity/numeric refusals.
int run_experiment(const ExperimentSpec& spec, std::ostream& log);

/// The deterministic cross-module invariant suite behind `verify`: prints a
/// PASS/FAIL line per check to `log` and returns the number of failures.
int run_verification(std::ostream& log);

}  // namespace permclust
