// Command-line front end; talks to the engine through the C API only.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hessgeo/hessgeo.h"

namespace {

struct CommonOpts {
    std::optional<std::uint64_t> seed;
    double tolerance_scale = 1.0;
    bool dump_tensors = false;
    std::string report_path;
};

std::string options_json(const CommonOpts& o) {
    std::ostringstream os;
    os << "{";
    bool first = true;
    auto sep = [&] {
        if (!first) os << ", ";
        first = false;
    };
    if (o.seed) {
        sep();
        os << "\"seed\": " << *o.seed;
    }
    if (o.tolerance_scale != 1.0) {
        sep();
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", o.tolerance_scale);
        os << "\"tolerance_scale\": " << buf;
    }
    if (o.dump_tensors) {
        sep();
        os << "\"dump_tensors\": true";
    }
    os << "}";
    return os.str();
}

int read_file(const std::string& path, std::string& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::cerr << "error: cannot open '" << path << "'\n";
        return 2;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    out = ss.str();
    return 0;
}

int emit(const CommonOpts& o, hg_report* rep, hg_status status) {
    if (rep) {
        const char* text = hg_report_json(rep);
        if (!o.report_path.empty()) {
            std::ofstream out(o.report_path, std::ios::binary);
            if (!out) {
                std::cerr << "error: cannot write '" << o.report_path << "'\n";
                hg_report_free(rep);
                return 2;
            }
            out << text;
        } else {
            std::cout << text;
        }
        hg_report_free(rep);
    }
    if (status != HG_OK) std::cerr << "hessgeo: exit status " << static_cast<int>(status) << "\n";
    return static_cast<int>(status);
}

void add_common(CLI::App* cmd, CommonOpts& o, bool with_dump = true) {
    cmd->add_option("--report", o.report_path, "write the report JSON to this path");
    cmd->add_option("--seed", o.seed, "override the scenario sampling seed");
    cmd->add_option("--tolerance-scale", o.tolerance_scale,
                    "multiply every check tolerance by this factor");
    if (with_dump)
        cmd->add_flag("--dump-tensors", o.dump_tensors, "include per-point tensor dumps");
}

std::vector<double> parse_point(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw CLI::ValidationError("--point", "expected comma-separated numbers");
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hessgeo: Hessian / Lagrange curvature verification engine"};
    app.require_subcommand(1);

    CommonOpts run_o, inspect_o, corpus_o, fd_o;
    std::string run_file, inspect_file, fd_file, point_text;

    auto* run = app.add_subcommand("run", "run every check of a scenario file");
    run->add_option("scenario", run_file, "scenario JSON file")->required();
    add_common(run, run_o);

    auto* inspect = app.add_subcommand("inspect", "dump all tensors at one point");
    inspect->add_option("scenario", inspect_file, "scenario JSON file")->required();
    inspect->add_option("--point", point_text, "comma-separated coordinates")->required();
    add_common(inspect, inspect_o, false);

    auto* corpus = app.add_subcommand("corpus", "run all built-in scenarios");
    add_common(corpus, corpus_o);

    auto* fd = app.add_subcommand("fd-audit", "jet vs finite-difference audit only");
    fd->add_option("scenario", fd_file, "scenario JSON file")->required();
    add_common(fd, fd_o, false);

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        std::string text;
        if (const int rc = read_file(run_file, text)) return rc;
        hg_report* rep = nullptr;
        const hg_status s = hg_run_scenario(text.c_str(), options_json(run_o).c_str(), &rep);
        return emit(run_o, rep, s);
    }
    if (inspect->parsed()) {
        std::string text;
        if (const int rc = read_file(inspect_file, text)) return rc;
        const auto pt = parse_point(point_text);
        hg_report* rep = nullptr;
        const hg_status s = hg_inspect_point(text.c_str(), pt.data(), pt.size(),
                                             options_json(inspect_o).c_str(), &rep);
        return emit(inspect_o, rep, s);
    }
    if (corpus->parsed()) {
        hg_report* rep = nullptr;
        const hg_status s = hg_run_corpus(options_json(corpus_o).c_str(), &rep);
        return emit(corpus_o, rep, s);
    }
    if (fd->parsed()) {
        std::string text;
        if (const int rc = read_file(fd_file, text)) return rc;
        hg_report* rep = nullptr;
        const hg_status s = hg_fd_audit(text.c_str(), options_json(fd_o).c_str(), &rep);
        return emit(fd_o, rep, s);
    }
    return 0;
}
