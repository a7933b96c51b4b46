#include "permclust/experiments.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "permclust/analytic.hpp"
#include "permclust/numeric.hpp"
#include "permclust/quadrature.hpp"
#include "permclust/sampler.hpp"
#include "permclust/statistics.hpp"

namespace permclust {

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string fmt(long long x) { return std::to_string(x); }

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::vector<std::string>& add_row() {
        rows.emplace_back(columns.size());
        return rows.back();
    }
};

std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char ch : s) {
        if (ch == '"') quoted += '"';
        quoted += ch;
    }
    quoted += '"';
    return quoted;
}

void write_csv(const Table& t, std::ostream& os) {
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
        if (i) os << ',';
        os << csv_cell(t.columns[i]);
    }
    os << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) os << ',';
            os << csv_cell(row[i]);
        }
        os << '\n';
    }
}

bool looks_numeric(const std::string& s) {
    if (s.empty()) return false;
    double x = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, x);
    return ec == std::errc() && ptr == end;
}

void write_json(const Table& t, const std::string& command, std::ostream& os) {
    nlohmann::ordered_json doc;
    doc["command"] = command;
    doc["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : t.rows) {
        nlohmann::ordered_json obj;
        for (std::size_t i = 0; i < t.columns.size(); ++i) {
            const auto& cell = row[i];
            if (cell.empty()) {
                obj[t.columns[i]] = nullptr;
            } else if (cell.find_first_of(".eE") == std::string::npos && looks_numeric(cell)) {
                obj[t.columns[i]] = std::stoll(cell);
            } else if (looks_numeric(cell)) {
                obj[t.columns[i]] = std::stod(cell);
            } else {
                obj[t.columns[i]] = cell;
            }
        }
        doc["rows"].push_back(std::move(obj));
    }
    os << doc.dump(2) << '\n';
}

void emit(const Table& t, const ExperimentSpec& spec, const char* command_name) {
    std::ostringstream buf;
    if (spec.format == ExperimentSpec::Format::csv) {
        write_csv(t, buf);
    } else {
        write_json(t, command_name, buf);
    }
    if (spec.out.empty()) {
        std::cout << buf.str();
    } else {
        std::ofstream file(spec.out, std::ios::binary);
        if (!file) throw ValidationError("cannot open output file: " + spec.out);
        file << buf.str();
    }
}

const char* command_name(ExperimentSpec::Command c) {
    switch (c) {
        case ExperimentSpec::Command::exact: return "exact";
        case ExperimentSpec::Command::estimate: return "estimate";
        case ExperimentSpec::Command::bounds: return "bounds";
        case ExperimentSpec::Command::scaling: return "scaling";
        case ExperimentSpec::Command::supercluster: return "supercluster";
        case ExperimentSpec::Command::renewal: return "renewal";
        case ExperimentSpec::Command::verify: return "verify";
    }
    return "?";
}

ExperimentSpec::Command parse_command(std::string_view name) {
    for (auto c : {ExperimentSpec::Command::exact, ExperimentSpec::Command::estimate,
                   ExperimentSpec::Command::bounds, ExperimentSpec::Command::scaling,
                   ExperimentSpec::Command::supercluster, ExperimentSpec::Command::renewal,
                   ExperimentSpec::Command::verify}) {
        if (name == command_name(c)) return c;
    }
    throw ValidationError("unknown command: '" + std::string(name) + "'");
}

Measure resolve_measure(const ExperimentSpec& spec) {
    if (spec.q && spec.dist) throw ValidationError("give either --q or --dist, not both");
    if (spec.q) return MallowsMeasure{*spec.q};
    if (spec.dist) return ShiftDistribution::parse(*spec.dist);
    throw ValidationError("a measure is required: --q or --dist");
}

ShiftDistribution resolve_dist(const ExperimentSpec& spec) {
    if (spec.q && spec.dist) throw ValidationError("give either --q or --dist, not both");
    if (spec.dist) return ShiftDistribution::parse(*spec.dist);
    if (spec.q) {
        if (!(*spec.q > 0.0 && *spec.q < 1.0)) {
            throw ValidationError("--q here means the geometric family and needs q in (0,1)");
        }
        return ShiftDistribution::geometric(*spec.q);
    }
    throw ValidationError("a distribution is required: --dist (or geometric --q)");
}

long long single_n(const ExperimentSpec& spec) {
    if (spec.n_values.size() != 1) {
        throw ValidationError("this command takes exactly one --n value");
    }
    return spec.n_values[0];
}

std::optional<Permutation> resolve_pattern(const ExperimentSpec& spec) {
    if (!spec.pattern || spec.pattern->empty()) return std::nullopt;
    std::string text = *spec.pattern;
    for (auto& ch : text) {
        if (ch == ',') ch = ' ';
    }
    return Permutation::parse(text);
}

McConfig mc_config(const ExperimentSpec& spec, std::uint64_t seed_offset = 0) {
    return McConfig{spec.samples, spec.seed + seed_offset, spec.confidence, spec.workers};
}

EnumerationOptions enum_options(const ExperimentSpec& spec) {
    EnumerationOptions opts;
    opts.cap = spec.cap_override ? EnumerationOptions::kHardCap : 10;
    opts.workers = spec.workers;
    return opts;
}

std::vector<int> block_starts(const ExperimentSpec& spec, long long n) {
    if (spec.k) return {*spec.k};
    std::vector<int> ks;
    for (int k = 1; k + spec.l - 1 <= n; ++k) ks.push_back(k);
    return ks;
}

void run_exact(const ExperimentSpec& spec) {
    const auto measure = resolve_measure(spec);
    const auto n = static_cast<int>(single_n(spec));
    const auto opts = enum_options(spec);
    Table t;
    if (spec.stat == "nl") {
        t.columns = {"n", "l", "expected_nl", "support_size", "method"};
        auto& row = t.add_row();
        row[0] = fmt(static_cast<long long>(n));
        row[1] = fmt(static_cast<long long>(spec.l));
        row[2] = fmt(exact_expected_Nl(n, measure, spec.l, opts));
        row[3] = fmt(static_cast<long long>(
            exact_event_prob(n, measure, [](auto) { return true; }, opts).support_size));
        row[4] = "enumeration";
    } else if (spec.stat == "cluster") {
        const auto pattern = resolve_pattern(spec);
        t.columns = {"n", "l", "k", "pattern", "probability", "support_size", "method"};
        for (int k : block_starts(spec, n)) {
            ClusterQuery query{n, spec.l, k, pattern};
            auto& row = t.add_row();
            row[0] = fmt(static_cast<long long>(n));
            row[1] = fmt(static_cast<long long>(spec.l));
            row[2] = fmt(static_cast<long long>(k));
            row[3] = pattern ? pattern->to_string() : "";
            row[4] = fmt(exact_cluster_prob(n, measure, query, opts));
            row[5] = fmt(static_cast<long long>(
                exact_event_prob(n, measure, [](auto) { return true; }, opts).support_size));
            row[6] = "enumeration";
        }
    } else {
        throw ValidationError("exact supports --stat cluster or nl");
    }
    emit(t, spec, "exact");
}

void run_estimate(const ExperimentSpec& spec) {
    const auto n = static_cast<int>(single_n(spec));
    Table t;
    if (spec.stat == "cluster") {
        if (!spec.k) throw ValidationError("estimate --stat cluster needs --k");
        const auto measure = resolve_measure(spec);
        const auto pattern = resolve_pattern(spec);
        ClusterQuery query{n, spec.l, *spec.k, pattern};
        const auto rep = estimate_cluster_prob(measure, n, query, mc_config(spec));
        t.columns = {"n", "l",      "k",      "pattern", "estimate",
                     "std_error", "ci_low", "ci_high", "samples"};
        auto& row = t.add_row();
        row = {fmt(static_cast<long long>(n)), fmt(static_cast<long long>(spec.l)),
               fmt(static_cast<long long>(*spec.k)), pattern ? pattern->to_string() : "",
               fmt(rep.estimate), fmt(rep.std_error), fmt(rep.ci_low), fmt(rep.ci_high),
               fmt(rep.samples)};
    } else if (spec.stat == "nl") {
        const auto measure = resolve_measure(spec);
        const auto rep = estimate_expected_Nl(measure, n, spec.l, mc_config(spec));
        t.columns = {"n", "l", "estimate", "std_error", "ci_low", "ci_high", "samples"};
        auto& row = t.add_row();
        row = {fmt(static_cast<long long>(n)), fmt(static_cast<long long>(spec.l)),
               fmt(rep.estimate), fmt(rep.std_error), fmt(rep.ci_low), fmt(rep.ci_high),
               fmt(rep.samples)};
    } else if (spec.stat == "inversions") {
        const auto d = resolve_dist(spec);
        const auto rep = estimate_inversion_rate(d, n, mc_config(spec));
        t.columns = {"n", "estimate", "std_error", "ci_low", "ci_high", "samples"};
        auto& row = t.add_row();
        row = {fmt(static_cast<long long>(n)), fmt(rep.estimate), fmt(rep.std_error),
               fmt(rep.ci_low), fmt(rep.ci_high), fmt(rep.samples)};
    } else {
        throw ValidationError("estimate supports --stat cluster, nl or inversions");
    }
    emit(t, spec, "estimate");
}

void run_bounds(const ExperimentSpec& spec) {
    const auto d = resolve_dist(spec);
    const auto n = single_n(spec);
    const auto opts = enum_options(spec);
    Table t;
    t.columns = {"n",     "l",     "k",     "measure", "lower",
                 "mallows_lower", "upper", "exact",   "notes"};
    for (int k : block_starts(spec, n)) {
        const auto rep = bounds_report(d, n, spec.l, k, n <= opts.cap, opts);
        auto& row = t.add_row();
        row[0] = fmt(rep.n);
        row[1] = fmt(static_cast<long long>(rep.l));
        row[2] = fmt(static_cast<long long>(rep.k));
        row[3] = rep.measure;
        row[4] = fmt(rep.lower);
        row[5] = rep.mallows_lower ? fmt(*rep.mallows_lower) : "";
        row[6] = rep.upper ? fmt(*rep.upper) : "";
        row[7] = rep.exact ? fmt(*rep.exact) : "";
        row[8] = rep.notes;
    }
    emit(t, spec, "bounds");
}

void run_scaling(const ExperimentSpec& spec) {
    ScalingGrid grid;
    grid.alpha = spec.alpha;
    grid.c = spec.c;
    grid.l = spec.l;
    grid.n_values = spec.n_values;
    grid.k_fraction = spec.d_fraction;
    const auto rows = scaling_envelope(grid);
    Table t;
    t.columns = {"n",          "q_n",     "k_n",     "estimate",
                 "std_error",  "ci_low",  "ci_high", "normalized",
                 "envelope_lower", "envelope_upper_general", "envelope_upper_improved"};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& env = rows[i];
        ClusterQuery query{static_cast<int>(env.n), spec.l, static_cast<int>(env.k_n), {}};
        const auto rep = estimate_cluster_prob(MallowsMeasure{env.q_n},
                                               static_cast<int>(env.n), query,
                                               mc_config(spec, i));
        const double normalized =
            rep.estimate * std::pow(static_cast<double>(env.n),
                                    spec.alpha * static_cast<double>(spec.l - 1));
        auto& row = t.add_row();
        row = {fmt(env.n),       fmt(env.q_n),   fmt(env.k_n),  fmt(rep.estimate),
               fmt(rep.std_error), fmt(rep.ci_low), fmt(rep.ci_high), fmt(normalized),
               fmt(env.lower),   fmt(env.upper_general), fmt(env.upper_improved)};
    }
    emit(t, spec, "scaling");
}

void run_supercluster(const ExperimentSpec& spec) {
    const auto d = resolve_dist(spec);
    const double limit = supercluster_limit(d, spec.k);
    const auto ls = spec.l_values.empty() ? std::vector<int>{spec.l} : spec.l_values;
    Table t;
    t.columns = {"n", "l", "k", "estimate", "std_error", "ci_low", "ci_high", "limit"};
    std::uint64_t offset = 0;
    for (long long n : spec.n_values) {
        for (int l : ls) {
            const int k_used = spec.k ? *spec.k
                                      : static_cast<int>(std::min<long long>(
                                            n - l + 1, std::max<long long>(1, n / 2)));
            ClusterQuery query{static_cast<int>(n), l, k_used, {}};
            const auto rep = estimate_cluster_prob(Measure(d), static_cast<int>(n), query,
                                                   mc_config(spec, offset++));
            auto& row = t.add_row();
            row = {fmt(n),
                   fmt(static_cast<long long>(l)),
                   fmt(static_cast<long long>(k_used)),
                   fmt(rep.estimate),
                   fmt(rep.std_error),
                   fmt(rep.ci_low),
                   fmt(rep.ci_high),
                   fmt(limit)};
        }
    }
    emit(t, spec, "supercluster");
}

void run_renewal(const ExperimentSpec& spec, std::ostream& log) {
    const auto d = resolve_dist(spec);
    const auto length = static_cast<int>(single_n(spec));
    const auto stats =
        renewal_statistics(d, spec.samples, length, RngStream(spec.seed, 0), spec.workers);
    const auto u = d.renewal_prob_prefix(length);
    const auto f = d.first_renewal_pmf(length);
    Table t;
    t.columns = {"pos", "u_formula", "u_empirical", "u_std_error", "f_formula",
                 "f_empirical"};
    for (int pos = 1; pos <= length; ++pos) {
        auto& row = t.add_row();
        row = {fmt(static_cast<long long>(pos)),
               fmt(u[static_cast<std::size_t>(pos)]),
               fmt(stats.u_empirical[static_cast<std::size_t>(pos - 1)]),
               fmt(stats.u_std_error[static_cast<std::size_t>(pos - 1)]),
               fmt(f[static_cast<std::size_t>(pos - 1)]),
               fmt(stats.t1_pmf[static_cast<std::size_t>(pos - 1)])};
    }
    emit(t, spec, "renewal");
    log << "prefixes=" << stats.prefixes << " mean_gap=" << fmt(stats.mean_gap)
        << " mean_gap_std_error=" << fmt(stats.mean_gap_std_error)
        << " censored_fraction=" << fmt(stats.t1_censored_fraction) << '\n';
}

}  // namespace

std::string ExperimentSpec::to_text() const {
    std::ostringstream os;
    os << "command=" << command_name(command) << '\n';
    os << "q=" << (q ? fmt(*q) : "") << '\n';
    os << "dist=" << (dist ? *dist : "") << '\n';
    os << "n=";
    for (std::size_t i = 0; i < n_values.size(); ++i) os << (i ? "," : "") << n_values[i];
    os << '\n';
    os << "l=" << l << '\n';
    os << "l_list=";
    for (std::size_t i = 0; i < l_values.size(); ++i) os << (i ? "," : "") << l_values[i];
    os << '\n';
    os << "k=" << (k ? std::to_string(*k) : "") << '\n';
    os << "pattern=" << (pattern ? *pattern : "") << '\n';
    os << "stat=" << stat << '\n';
    os << "alpha=" << fmt(alpha) << '\n';
    os << "c=" << fmt(c) << '\n';
    os << "d=" << fmt(d_fraction) << '\n';
    os << "samples=" << samples << '\n';
    os << "seed=" << seed << '\n';
    os << "confidence=" << fmt(confidence) << '\n';
    os << "workers=" << workers << '\n';
    os << "cap-override=" << (cap_override ? "true" : "false") << '\n';
    os << "out=" << out << '\n';
    os << "format=" << (format == Format::csv ? "csv" : "json") << '\n';
    return os.str();
}

ExperimentSpec ExperimentSpec::from_text(std::string_view text) {
    ExperimentSpec spec;
    spec.n_values.clear();
    std::istringstream is{std::string(text)};
    std::string line;
    auto split_list = [](const std::string& v, auto push) {
        std::size_t start = 0;
        while (start < v.size()) {
            auto comma = v.find(',', start);
            if (comma == std::string::npos) comma = v.size();
            push(v.substr(start, comma - start));
            start = comma + 1;
        }
    };
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ValidationError("bad spec line: '" + line + "'");
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "command") {
            spec.command = parse_command(value);
        } else if (key == "q") {
            spec.q = value.empty() ? std::nullopt : std::optional<double>(std::stod(value));
        } else if (key == "dist") {
            spec.dist = value.empty() ? std::nullopt : std::optional<std::string>(value);
        } else if (key == "n") {
            split_list(value, [&](const std::string& v) { spec.n_values.push_back(std::stoll(v)); });
        } else if (key == "l") {
            spec.l = std::stoi(value);
        } else if (key == "l_list") {
            split_list(value, [&](const std::string& v) { spec.l_values.push_back(std::stoi(v)); });
        } else if (key == "k") {
            spec.k = value.empty() ? std::nullopt : std::optional<int>(std::stoi(value));
        } else if (key == "pattern") {
            spec.pattern = value.empty() ? std::nullopt : std::optional<std::string>(value);
        } else if (key == "stat") {
            spec.stat = value;
        } else if (key == "alpha") {
            spec.alpha = std::stod(value);
        } else if (key == "c") {
            spec.c = std::stod(value);
        } else if (key == "d") {
            spec.d_fraction = std::stod(value);
        } else if (key == "samples") {
            spec.samples = std::stoll(value);
        } else if (key == "seed") {
            spec.seed = std::stoull(value);
        } else if (key == "confidence") {
            spec.confidence = std::stod(value);
        } else if (key == "workers") {
            spec.workers = std::stoi(value);
        } else if (key == "cap-override") {
            spec.cap_override = value == "true" || value == "1";
        } else if (key == "out") {
            spec.out = value;
        } else if (key == "format") {
            if (value == "csv") {
                spec.format = Format::csv;
            } else if (value == "json") {
                spec.format = Format::json;
            } else {
                throw ValidationError("format must be csv or json");
            }
        } else {
            throw ValidationError("unknown spec key: '" + key + "'");
        }
    }
    return spec;
}

int run_experiment(const ExperimentSpec& spec, std::ostream& log) {
    try {
        switch (spec.command) {
            case ExperimentSpec::Command::exact: run_exact(spec); break;
            case ExperimentSpec::Command::estimate: run_estimate(spec); break;
            case ExperimentSpec::Command::bounds: run_bounds(spec); break;
            case ExperimentSpec::Command::scaling: run_scaling(spec); break;
            case ExperimentSpec::Command::supercluster: run_supercluster(spec); break;
            case ExperimentSpec::Command::renewal: run_renewal(spec, log); break;
            case ExperimentSpec::Command::verify: return run_verification(log) == 0 ? 0 : 1;
        }
        return 0;
    } catch (const CapacityError& e) {
        log << "refused: " << e.what() << '\n';
        return 2;
    } catch (const ValidationError& e) {
        log << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace permclust
