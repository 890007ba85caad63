#include "hessgeo/hessgeo.h"

#include <chrono>
#include <new>
#include <string>

#include "harness.hpp"
#include "json_out.hpp"

struct hg_report {
    std::string json;
    int pass = 0;
};

namespace {

using hg::Status;
using nlohmann::json;

hg_status to_c_status(Status s) { return static_cast<hg_status>(static_cast<int>(s)); }

json error_report(const hg::Error& e) {
    json r;
    r["engine_version"] = hg::harness::kEngineVersion;
    json err;
    err["message"] = e.what();
    err["status"] = static_cast<int>(e.status);
    if (const auto* de = dynamic_cast<const hg::DomainError*>(&e)) err["subexpression"] = de->subexpr;
    if (const auto* se = dynamic_cast<const hg::SingularMetricError*>(&e)) err["det"] = se->det;
    if (const auto* pe = dynamic_cast<const hg::ParseError*>(&e))
        err["offset"] = static_cast<std::uint64_t>(pe->offset);
    r["errors"] = json::array({err});
    r["overall_pass"] = false;
    return r;
}

hg_status finish(hg_report** out, json report, Status status, double wall_ms) {
    if (!out) return to_c_status(status);
    report["wall_time_ms"] = wall_ms;
    auto* rep = new (std::nothrow) hg_report;
    if (!rep) return HG_INTERNAL_ERROR;
    rep->json = hg::dump_json_17(report);
    rep->pass = status == Status::ok ? 1 : 0;
    *out = rep;
    return to_c_status(status);
}

template <class Fn>
hg_status guarded(hg_report** out, Fn&& fn) {
    if (out) *out = nullptr;
    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();
    };
    try {
        hg::harness::RunResult r = fn();
        return finish(out, std::move(r.report), r.status, elapsed());
    } catch (const hg::Error& e) {
        return finish(out, error_report(e), e.status, elapsed());
    } catch (const nlohmann::json::exception& e) {
        return finish(out, error_report(hg::ValidationError(std::string("JSON error: ") + e.what())),
                      Status::invalid_input, elapsed());
    } catch (const std::exception& e) {
        return finish(out, error_report(hg::Error(Status::internal, e.what())), Status::internal,
                      elapsed());
    }
}

json parse_text(const char* text, const char* what) {
    if (!text) throw hg::ValidationError(std::string(what) + " must not be null");
    return json::parse(text);
}

}  // namespace

extern "C" {

const char* hg_version(void) { return hg::harness::kEngineVersion; }

hg_status hg_run_scenario(const char* scenario_json, const char* options_json,
                          hg_report** out_report) {
    return guarded(out_report, [&] {
        const auto opt = hg::harness::parse_options(
            options_json ? json::parse(options_json) : json(nullptr));
        const auto sc = hg::harness::parse_scenario(parse_text(scenario_json, "scenario"));
        return hg::harness::run_scenario(sc, opt);
    });
}

hg_status hg_inspect_point(const char* scenario_json, const double* point, size_t point_len,
                           const char* options_json, hg_report** out_report) {
    return guarded(out_report, [&] {
        if (!point && point_len > 0)
            throw hg::ValidationError("inspect point must not be null");
        const auto opt = hg::harness::parse_options(
            options_json ? json::parse(options_json) : json(nullptr));
        const auto sc = hg::harness::parse_scenario(parse_text(scenario_json, "scenario"));
        return hg::harness::inspect_point(sc, {point, point_len}, opt);
    });
}

hg_status hg_run_corpus(const char* options_json, hg_report** out_report) {
    return guarded(out_report, [&] {
        const auto opt = hg::harness::parse_options(
            options_json ? json::parse(options_json) : json(nullptr));
        return hg::harness::run_corpus(opt);
    });
}

hg_status hg_fd_audit(const char* scenario_json, const char* options_json,
                      hg_report** out_report) {
    return guarded(out_report, [&] {
        const auto opt = hg::harness::parse_options(
            options_json ? json::parse(options_json) : json(nullptr));
        auto doc = parse_text(scenario_json, "scenario");
        doc["checks"] = nlohmann::json::array({"fd-audit"});
        doc.erase("expected_failures");
        const auto sc = hg::harness::parse_scenario(doc);
        return hg::harness::run_scenario(sc, opt);
    });
}

const char* hg_report_json(const hg_report* report) { return report ? report->json.c_str() : nullptr; }

int hg_report_pass(const hg_report* report) { return report ? report->pass : 0; }

void hg_report_free(hg_report* report) { delete report; }

int hg_corpus_count(void) { return hg::harness::kBuiltinScenarioCount; }

const char* hg_corpus_name(int index) {
    if (index < 0 || index >= hg::harness::kBuiltinScenarioCount) return nullptr;
    return hg::harness::kBuiltinScenarios[index].name;
}

const char* hg_corpus_scenario_json(const char* name) {
    if (!name) return nullptr;
    const auto* b = hg::harness::find_builtin(name);
    return b ? b->json : nullptr;
}

}  // extern "C"
