// cli.hpp - command-line driver shared by the executable and its tests
//
// Exit codes: 0 success, 1 audit failed, 2 bad configuration or I/O error,
// 3 internal invariant violation.

#pragma once

#include "hyperdistill/audit.hpp"
#include "hyperdistill/config.hpp"
#include "hyperdistill/report.hpp"

#include <fstream>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace hyperdistill {

inline constexpr int kExitOk = 0;
inline constexpr int kExitAuditFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInternal = 3;

inline nlohmann::ordered_json audit_to_json(const AuditReport& a, std::size_t messages) {
    nlohmann::ordered_json j;
    j["pass"] = a.pass();
    j["messages"] = messages;
    nlohmann::ordered_json v = nlohmann::ordered_json::array();
    for (const auto& x : a.violations) v.push_back({{"kind", to_string(x.kind)}, {"seq", x.seq}, {"line", x.line}});
    j["violations"] = v;
    return j;
}

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = parse_config(args);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (cfg.audit_path) {
            std::ifstream in(*cfg.audit_path);
            if (!in) throw std::runtime_error("cannot open transcript '" + *cfg.audit_path + "'");
            Transcript t = [&] {
                try {
                    return Transcript::read(in);
                } catch (const std::invalid_argument& e) {
                    throw std::runtime_error("malformed transcript '" + *cfg.audit_path + "': " + e.what());
                }
            }();
            const AuditReport a = audit(t);
            emit_text(audit_to_json(a, t.size()).dump(2) + '\n', cfg.out, out);
            return a.pass() || cfg.allow_audit_fail ? kExitOk : kExitAuditFailed;
        }

        if (cfg.entropy) {
            std::random_device rd;
            cfg.seed = (static_cast<std::uint64_t>(rd()) << 32) | rd();
            err << "seed: " << cfg.seed << '\n';
        }

        if (cfg.sweep) {
            const SweepReport s = execute_sweep(cfg, *cfg.sweep);
            emit_text(cfg.format == OutputFormat::Csv ? sweep_to_csv(s) : sweep_to_json(s).dump(2) + '\n', cfg.out, out);
            return s.all_audits_pass || cfg.allow_audit_fail ? kExitOk : kExitAuditFailed;
        }

        RunResult result = execute_run(cfg);
        if (cfg.transcript) {
            std::ostringstream buf;
            result.run.transcript.write(buf);
            emit_text(buf.str(), cfg.transcript, out);
        }
        emit_report(result.report, cfg.format, cfg.out, out, cfg.timing);
        err << "completed " << cfg.pairs << " pairs in " << format_double(*result.report.duration_ms) << " ms\n";
        if (!result.report.audit_pass) {
            err << "audit FAILED with " << result.report.audit_violations << " violation(s)\n";
            return cfg.allow_audit_fail ? kExitOk : kExitAuditFailed;
        }
        return kExitOk;
    } catch (const std::logic_error& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitInternal;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}

}  // namespace hyperdistill
