// report.hpp - run execution, statistics report, JSON/CSV serialization
//
// JSON keys are emitted in a fixed order; CSV is one header row plus one
// data row with the columns listed in kCsvColumns. Doubles are written as
// the shortest decimal that round-trips. An empty class has no mean
// fidelity: null in JSON, empty cell in CSV.

#pragma once

#include "hyperdistill/config.hpp"
#include "hyperdistill/protocol.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace hyperdistill {

struct ClassStats {
    std::size_t count = 0;
    double frequency = 0.0;
    std::optional<double> mean_fidelity_plus;   // to Phi+ (or Psi+)
    std::optional<double> mean_fidelity_minus;  // to Phi- (or Psi-)

    friend bool operator==(const ClassStats&, const ClassStats&) = default;
};

struct RunReport {
    // config echo
    std::size_t pairs = 0;
    std::array<double, 4> fidelities{};
    double theta = 0.0;
    double alpha = 0.0;
    double dephase_p = 0.0;
    double homodyne_error = 0.0;
    double evil_bob_flip_p = 0.0;
    std::uint64_t seed = 0;

    // as inferred by Alice
    ClassStats phi;
    ClassStats psi;
    // from the projected outcomes
    ClassStats true_phi;
    ClassStats true_psi;
    std::size_t misinferred = 0;

    double analytic_phi_probability = 0.0;           // same-outcome probability, F + F1
    double analytic_reported_phi_probability = 0.0;  // including readout errors and report flips
    std::size_t discarded_pairs = 0;
    std::array<std::size_t, kAngleSteps> angle_counts{};
    std::size_t bob1_zero_results = 0;
    bool audit_pass = false;
    std::size_t audit_violations = 0;
    std::optional<double> duration_ms;  // serialized only when timing is requested

    friend bool operator==(const RunReport&, const RunReport&) = default;
};

inline ProtocolConfig protocol_config(const RunConfig& cfg) {
    ProtocolConfig p;
    p.pairs = cfg.pairs;
    p.fidelities = cfg.fidelities;
    p.device = {cfg.theta, cfg.alpha, cfg.homodyne_error};
    p.dephase_p = cfg.dephase_p;
    p.faults.bob1_flip_p = cfg.evil_bob_flip_p;
    return p;
}

inline std::string run_id_for(std::uint64_t seed) { return "hyperdistill-" + std::to_string(seed); }

// Probability that Alice's same/different verdict is toggled by readout
// errors (both servers) and Bob1's report flips.
inline double verdict_toggle_probability(double homodyne_error, double bob1_flip_p) {
    const double e1 = homodyne_error * (1.0 - bob1_flip_p) + (1.0 - homodyne_error) * bob1_flip_p;
    const double e2 = homodyne_error;
    return e1 * (1.0 - e2) + e2 * (1.0 - e1);
}

namespace detail {

inline double bell_fidelity(const StateVector& s, PolarizationBell k) { return std::norm(bell_vector(k).inner(s)); }

inline ClassStats class_stats(const std::vector<DistilledPair>& pairs, const std::vector<BellClass>& classes,
                              BellClass which) {
    const PolarizationBell plus = which == BellClass::Phi ? PolarizationBell::PhiPlus : PolarizationBell::PsiPlus;
    const PolarizationBell minus = which == BellClass::Phi ? PolarizationBell::PhiMinus : PolarizationBell::PsiMinus;
    ClassStats s;
    double fp = 0.0, fm = 0.0;
    for (std::size_t j = 0; j < pairs.size(); ++j) {
        if (classes[j] != which) continue;
        ++s.count;
        fp += bell_fidelity(pairs[j].pol_state, plus);
        fm += bell_fidelity(pairs[j].pol_state, minus);
    }
    s.frequency = pairs.empty() ? 0.0 : static_cast<double>(s.count) / static_cast<double>(pairs.size());
    if (s.count > 0) {
        s.mean_fidelity_plus = fp / static_cast<double>(s.count);
        s.mean_fidelity_minus = fm / static_cast<double>(s.count);
    }
    return s;
}

}  // namespace detail

struct RunResult {
    RunReport report;
    ProtocolRun run;
};

inline RunResult execute_run(const RunConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    ProtocolEngine engine(protocol_config(cfg), cfg.seed, run_id_for(cfg.seed));
    ProtocolRun run = engine.run();

    RunReport r;
    r.pairs = cfg.pairs;
    r.fidelities = cfg.fidelities.weights();
    r.theta = cfg.theta;
    r.alpha = cfg.alpha;
    r.dephase_p = cfg.dephase_p;
    r.homodyne_error = cfg.homodyne_error;
    r.evil_bob_flip_p = cfg.evil_bob_flip_p;
    r.seed = cfg.seed;

    const auto& d = run.distillation;
    r.phi = detail::class_stats(d.pairs, d.classes, BellClass::Phi);
    r.psi = detail::class_stats(d.pairs, d.classes, BellClass::Psi);
    r.true_phi = detail::class_stats(d.pairs, d.true_classes, BellClass::Phi);
    r.true_psi = detail::class_stats(d.pairs, d.true_classes, BellClass::Psi);
    for (std::size_t j = 0; j < d.pairs.size(); ++j) r.misinferred += (d.classes[j] != d.true_classes[j]);

    r.analytic_phi_probability = analytic_same_probability(cfg.fidelities);
    const double t = verdict_toggle_probability(cfg.homodyne_error, cfg.evil_bob_flip_p);
    r.analytic_reported_phi_probability = r.analytic_phi_probability * (1.0 - t) + (1.0 - r.analytic_phi_probability) * t;
    r.discarded_pairs = cfg.pairs - d.pairs.size();
    for (const auto& round : run.rounds) ++r.angle_counts[static_cast<std::size_t>(round.angle_step)];
    for (const auto& m : run.measurements) r.bob1_zero_results += (m.bit == 0);
    r.audit_pass = run.audit.pass();
    r.audit_violations = run.audit.violations.size();
    r.duration_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return {std::move(r), std::move(run)};
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace detail {

using ojson = nlohmann::ordered_json;

inline ojson opt(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

inline std::optional<double> opt_from(const nlohmann::json& v) {
    if (v.is_null()) return std::nullopt;
    return v.get<double>();
}

inline ojson stats_json(const ClassStats& s, const char* plus_key, const char* minus_key) {
    ojson j;
    j["count"] = s.count;
    j["frequency"] = s.frequency;
    j[plus_key] = opt(s.mean_fidelity_plus);
    j[minus_key] = opt(s.mean_fidelity_minus);
    return j;
}

inline ClassStats stats_from(const nlohmann::json& j, const char* plus_key, const char* minus_key) {
    return {j.at("count").get<std::size_t>(), j.at("frequency").get<double>(), opt_from(j.at(plus_key)),
            opt_from(j.at(minus_key))};
}

}  // namespace detail

inline nlohmann::ordered_json report_to_json(const RunReport& r, bool include_timing = false) {
    detail::ojson j;
    detail::ojson c;
    c["pairs"] = r.pairs;
    c["fidelities"] = r.fidelities;
    c["theta"] = r.theta;
    c["alpha"] = r.alpha;
    c["dephase_p"] = r.dephase_p;
    c["homodyne_error"] = r.homodyne_error;
    c["evil_bob_flip_p"] = r.evil_bob_flip_p;
    c["seed"] = r.seed;
    j["config"] = c;
    j["inferred"] = {{"phi_class", detail::stats_json(r.phi, "mean_fidelity_phi_plus", "mean_fidelity_phi_minus")},
                     {"psi_class", detail::stats_json(r.psi, "mean_fidelity_psi_plus", "mean_fidelity_psi_minus")}};
    j["ground_truth"] = {
        {"phi_class", detail::stats_json(r.true_phi, "mean_fidelity_phi_plus", "mean_fidelity_phi_minus")},
        {"psi_class", detail::stats_json(r.true_psi, "mean_fidelity_psi_plus", "mean_fidelity_psi_minus")},
        {"misinferred", r.misinferred}};
    j["analytic"] = {{"phi_class_probability", r.analytic_phi_probability},
                     {"reported_phi_class_probability", r.analytic_reported_phi_probability}};
    j["discarded_pairs"] = r.discarded_pairs;
    j["angle_counts"] = r.angle_counts;
    j["bob1_zero_results"] = r.bob1_zero_results;
    j["audit"] = {{"pass", r.audit_pass}, {"violations", r.audit_violations}};
    if (include_timing) j["duration_ms"] = detail::opt(r.duration_ms);
    return j;
}

inline RunReport report_from_json(const nlohmann::json& j) {
    RunReport r;
    const auto& c = j.at("config");
    r.pairs = c.at("pairs").get<std::size_t>();
    r.fidelities = c.at("fidelities").get<std::array<double, 4>>();
    r.theta = c.at("theta").get<double>();
    r.alpha = c.at("alpha").get<double>();
    r.dephase_p = c.at("dephase_p").get<double>();
    r.homodyne_error = c.at("homodyne_error").get<double>();
    r.evil_bob_flip_p = c.at("evil_bob_flip_p").get<double>();
    r.seed = c.at("seed").get<std::uint64_t>();
    r.phi = detail::stats_from(j.at("inferred").at("phi_class"), "mean_fidelity_phi_plus", "mean_fidelity_phi_minus");
    r.psi = detail::stats_from(j.at("inferred").at("psi_class"), "mean_fidelity_psi_plus", "mean_fidelity_psi_minus");
    r.true_phi =
        detail::stats_from(j.at("ground_truth").at("phi_class"), "mean_fidelity_phi_plus", "mean_fidelity_phi_minus");
    r.true_psi =
        detail::stats_from(j.at("ground_truth").at("psi_class"), "mean_fidelity_psi_plus", "mean_fidelity_psi_minus");
    r.misinferred = j.at("ground_truth").at("misinferred").get<std::size_t>();
    r.analytic_phi_probability = j.at("analytic").at("phi_class_probability").get<double>();
    r.analytic_reported_phi_probability = j.at("analytic").at("reported_phi_class_probability").get<double>();
    r.discarded_pairs = j.at("discarded_pairs").get<std::size_t>();
    r.angle_counts = j.at("angle_counts").get<std::array<std::size_t, kAngleSteps>>();
    r.bob1_zero_results = j.at("bob1_zero_results").get<std::size_t>();
    r.audit_pass = j.at("audit").at("pass").get<bool>();
    r.audit_violations = j.at("audit").at("violations").get<std::size_t>();
    if (j.contains("duration_ms")) r.duration_ms = detail::opt_from(j.at("duration_ms"));
    else r.duration_ms.reset();
    return r;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> cols = [] {
        std::vector<std::string> c = {"pairs",
                                      "f",
                                      "f1",
                                      "f2",
                                      "f3",
                                      "theta",
                                      "alpha",
                                      "dephase_p",
                                      "homodyne_error",
                                      "evil_bob_flip_p",
                                      "seed",
                                      "phi_count",
                                      "phi_frequency",
                                      "phi_mean_fidelity_phi_plus",
                                      "phi_mean_fidelity_phi_minus",
                                      "psi_count",
                                      "psi_frequency",
                                      "psi_mean_fidelity_psi_plus",
                                      "psi_mean_fidelity_psi_minus",
                                      "true_phi_count",
                                      "true_phi_frequency",
                                      "true_phi_mean_fidelity_phi_plus",
                                      "true_phi_mean_fidelity_phi_minus",
                                      "true_psi_count",
                                      "true_psi_frequency",
                                      "true_psi_mean_fidelity_psi_plus",
                                      "true_psi_mean_fidelity_psi_minus",
                                      "misinferred",
                                      "analytic_phi_probability",
                                      "analytic_reported_phi_probability",
                                      "discarded_pairs"};
        for (int k = 0; k < kAngleSteps; ++k) c.push_back("angle_count_" + std::to_string(k));
        c.insert(c.end(), {"bob1_zero_results", "audit_pass", "audit_violations"});
        return c;
    }();
    return cols;
}

namespace detail {

inline std::string cell(double x) { return format_double(x); }
inline std::string cell(std::size_t x) { return std::to_string(x); }
inline std::string cell(const std::optional<double>& x) { return x ? format_double(*x) : std::string(); }

inline void stats_cells(std::vector<std::string>& row, const ClassStats& s) {
    row.push_back(cell(s.count));
    row.push_back(cell(s.frequency));
    row.push_back(cell(s.mean_fidelity_plus));
    row.push_back(cell(s.mean_fidelity_minus));
}

inline std::vector<std::string> csv_row(const RunReport& r) {
    std::vector<std::string> row = {cell(r.pairs)};
    for (double f : r.fidelities) row.push_back(cell(f));
    row.insert(row.end(), {cell(r.theta), cell(r.alpha), cell(r.dephase_p), cell(r.homodyne_error),
                           cell(r.evil_bob_flip_p), std::to_string(r.seed)});
    stats_cells(row, r.phi);
    stats_cells(row, r.psi);
    stats_cells(row, r.true_phi);
    stats_cells(row, r.true_psi);
    row.insert(row.end(), {cell(r.misinferred), cell(r.analytic_phi_probability),
                           cell(r.analytic_reported_phi_probability), cell(r.discarded_pairs)});
    for (auto n : r.angle_counts) row.push_back(cell(n));
    row.insert(row.end(), {cell(r.bob1_zero_results), r.audit_pass ? "true" : "false", cell(r.audit_violations)});
    return row;
}

inline std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += v[i];
    }
    return s;
}

}  // namespace detail

inline std::string report_to_csv(const RunReport& r, bool include_timing = false) {
    auto header = csv_columns();
    auto row = detail::csv_row(r);
    if (include_timing) {
        header.push_back("duration_ms");
        row.push_back(detail::cell(r.duration_ms));
    }
    return detail::join(header) + '\n' + detail::join(row) + '\n';
}

inline RunReport report_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string header_line, data_line;
    std::getline(in, header_line);
    std::getline(in, data_line);
    const auto header = detail::split_fields(header_line, ',');
    const auto data = detail::split_fields(data_line, ',');
    if (header.size() != data.size()) throw std::invalid_argument("report_from_csv: header/row length mismatch");
    std::map<std::string, std::string> f;
    for (std::size_t i = 0; i < header.size(); ++i) f[std::string(header[i])] = std::string(data[i]);

    auto num = [&](const std::string& k) { return parse_double(f.at(k)); };
    auto cnt = [&](const std::string& k) { return static_cast<std::size_t>(std::stoull(f.at(k))); };
    auto opt = [&](const std::string& k) -> std::optional<double> {
        return f.at(k).empty() ? std::nullopt : std::optional<double>(parse_double(f.at(k)));
    };
    auto stats = [&](const std::string& p, const char* plus, const char* minus) {
        return ClassStats{cnt(p + "_count"), num(p + "_frequency"), opt(p + "_mean_fidelity_" + plus),
                          opt(p + "_mean_fidelity_" + minus)};
    };
    RunReport r;
    r.pairs = cnt("pairs");
    r.fidelities = {num("f"), num("f1"), num("f2"), num("f3")};
    r.theta = num("theta");
    r.alpha = num("alpha");
    r.dephase_p = num("dephase_p");
    r.homodyne_error = num("homodyne_error");
    r.evil_bob_flip_p = num("evil_bob_flip_p");
    r.seed = std::stoull(f.at("seed"));
    r.phi = stats("phi", "phi_plus", "phi_minus");
    r.psi = stats("psi", "psi_plus", "psi_minus");
    r.true_phi = stats("true_phi", "phi_plus", "phi_minus");
    r.true_psi = stats("true_psi", "psi_plus", "psi_minus");
    r.misinferred = cnt("misinferred");
    r.analytic_phi_probability = num("analytic_phi_probability");
    r.analytic_reported_phi_probability = num("analytic_reported_phi_probability");
    r.discarded_pairs = cnt("discarded_pairs");
    for (int k = 0; k < kAngleSteps; ++k) r.angle_counts[static_cast<std::size_t>(k)] = cnt("angle_count_" + std::to_string(k));
    r.bob1_zero_results = cnt("bob1_zero_results");
    r.audit_pass = f.at("audit_pass") == "true";
    r.audit_violations = cnt("audit_violations");
    if (f.contains("duration_ms")) r.duration_ms = opt("duration_ms");
    else r.duration_ms.reset();
    return r;
}

inline std::string serialize_report(const RunReport& r, OutputFormat fmt, bool include_timing = false) {
    if (fmt == OutputFormat::Csv) return report_to_csv(r, include_timing);
    return report_to_json(r, include_timing).dump(2) + '\n';
}

// Writes to `path`, or to `fallback` when no path is given.
inline void emit_text(const std::string& text, const std::optional<std::string>& path, std::ostream& fallback) {
    if (!path) {
        fallback << text;
        return;
    }
    std::ofstream out(*path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + *path + "' for writing");
    out << text;
    if (!out) throw std::runtime_error("write to '" + *path + "' failed");
}

inline void emit_report(const RunReport& r, OutputFormat fmt, const std::optional<std::string>& path,
                        std::ostream& fallback, bool include_timing = false) {
    emit_text(serialize_report(r, fmt, include_timing), path, fallback);
}

// ---------------------------------------------------------------------------
// Seed sweep
// ---------------------------------------------------------------------------

struct SweepEntry {
    std::uint64_t seed = 0;
    std::size_t phi_count = 0;
    double phi_frequency = 0.0;
    double z = 0.0;  // (frequency - analytic) / sigma
    bool audit_pass = false;
};

struct SweepReport {
    double analytic_phi_probability = 0.0;
    double sigma = 0.0;
    std::vector<SweepEntry> entries;  // ascending seed
    double max_abs_z = 0.0;
    bool all_within_4sigma = false;
    bool all_audits_pass = false;
};

// Seeds cfg.seed .. cfg.seed + n - 1, spread over worker threads. Each run
// owns its streams; results land in per-seed slots.
inline SweepReport execute_sweep(const RunConfig& cfg, std::size_t n, std::size_t workers = 0) {
    if (n == 0) throw std::invalid_argument("execute_sweep: need at least one seed");
    if (workers == 0) workers = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    workers = std::min(workers, n);

    SweepReport s;
    s.entries.resize(n);
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers) {
                    RunConfig c = cfg;
                    c.seed = cfg.seed + i;
                    const auto result = execute_run(c);
                    s.entries[i] = {c.seed, result.report.phi.count, result.report.phi.frequency, 0.0,
                                    result.report.audit_pass};
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    const double t = verdict_toggle_probability(cfg.homodyne_error, cfg.evil_bob_flip_p);
    const double same = analytic_same_probability(cfg.fidelities);
    s.analytic_phi_probability = same * (1.0 - t) + (1.0 - same) * t;
    const double p = s.analytic_phi_probability;
    s.sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(cfg.pairs));
    s.all_audits_pass = true;
    for (auto& e : s.entries) {
        const double dev = e.phi_frequency - p;
        e.z = s.sigma > 0.0 ? dev / s.sigma : (std::abs(dev) > kEpsNorm ? INFINITY : 0.0);
        s.max_abs_z = std::max(s.max_abs_z, std::abs(e.z));
        s.all_audits_pass = s.all_audits_pass && e.audit_pass;
    }
    s.all_within_4sigma = s.max_abs_z <= 4.0;
    return s;
}

inline nlohmann::ordered_json sweep_to_json(const SweepReport& s) {
    detail::ojson j;
    j["analytic_phi_probability"] = s.analytic_phi_probability;
    j["sigma"] = s.sigma;
    j["max_abs_z"] = s.max_abs_z;
    j["all_within_4sigma"] = s.all_within_4sigma;
    j["all_audits_pass"] = s.all_audits_pass;
    detail::ojson runs = detail::ojson::array();
    for (const auto& e : s.entries)
        runs.push_back({{"seed", e.seed}, {"phi_count", e.phi_count}, {"phi_frequency", e.phi_frequency}, {"z", e.z},
                        {"audit_pass", e.audit_pass}});
    j["runs"] = runs;
    return j;
}

inline std::string sweep_to_csv(const SweepReport& s) {
    std::string out = "seed,phi_count,phi_frequency,z,audit_pass\n";
    for (const auto& e : s.entries)
        out += std::to_string(e.seed) + ',' + std::to_string(e.phi_count) + ',' + format_double(e.phi_frequency) + ',' +
               format_double(e.z) + ',' + (e.audit_pass ? "true" : "false") + '\n';
    return out;
}

}  // namespace hyperdistill
