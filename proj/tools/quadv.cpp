// quadv: run adversarial-integrand sweeps against quadrature rule families.
//
//   quadv run --theorem 1 --k 1 --family composite-trapezoid --interval 0 1 --n 4..4096
//   quadv dump-spline --nodes 0,4 --k 3 --kind global --output unit.csv
//
// Exit codes: 0 success, 1 a bound check failed, 2 invalid input, 3 numerical or I/O failure.

#include "qadv/experiment.hpp"
#include "qadv/format.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kInvalid = 2;
constexpr int kFailure = 3;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw qadv::ConfigError("config", "cannot read '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct RunFlags {
    std::string config;
    std::optional<int> theorem;
    std::optional<int> k;
    std::vector<std::string> families;
    std::vector<std::string> interval;
    std::optional<std::string> n;
    std::optional<std::string> steps;
    std::optional<std::string> tail_fraction;
    std::optional<std::string> output;
    std::optional<std::string> emit;
};

int do_run(const RunFlags& f) {
    qadv::ExperimentConfig config;
    try {
        if (!f.config.empty()) config = qadv::parse_config(read_file(f.config));
        if (f.theorem) qadv::apply_setting(config, "theorem", std::to_string(*f.theorem));
        if (f.k) qadv::apply_setting(config, "k", std::to_string(*f.k));
        if (!f.families.empty()) config.families = f.families;
        if (!f.interval.empty()) qadv::apply_setting(config, "interval", f.interval[0] + " " + f.interval[1]);
        if (f.n) qadv::apply_setting(config, "n", *f.n);
        if (f.steps) qadv::apply_setting(config, "steps", *f.steps);
        if (f.tail_fraction) qadv::apply_setting(config, "tail_fraction", *f.tail_fraction);
        if (f.output) qadv::apply_setting(config, "output", *f.output);
        if (f.emit) qadv::apply_setting(config, "emit", *f.emit);
        config.threads = qadv::thread_budget();
        qadv::validate(config);
    } catch (const qadv::ConfigError& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return kInvalid;
    }

    qadv::RunSummary summary;
    try {
        summary = qadv::run_experiment(config);
    } catch (const qadv::Error& e) {
        std::cerr << "numerical failure in sweep: " << e.what() << "\n";
        return kFailure;
    }
    try {
        qadv::write_artifacts(config, summary);
    } catch (const qadv::Error& e) {
        std::cerr << "output failure: " << e.what() << "\n";
        return kFailure;
    }
    std::cout << qadv::render_summary(config, summary);
    return summary.all_bounds_pass ? 0 : 1;
}

struct DumpFlags {
    std::string nodes;
    int k = 1;
    std::string kind = "global";
    std::vector<std::string> interval;
    std::string output;
    std::size_t samples = 2001;
};

int do_dump(const DumpFlags& f) {
    std::vector<double> nodes;
    std::optional<qadv::Interval> iv;
    std::optional<qadv::AdversarialSpline> spline;
    try {
        std::string token;
        std::istringstream in(f.nodes);
        while (std::getline(in, token, ',')) {
            if (!token.empty()) nodes.push_back(qadv::parse_double(token));
        }
        if (nodes.empty()) throw qadv::ConfigError("nodes", "node list is empty");
        if (!f.interval.empty()) {
            iv.emplace(qadv::parse_double(f.interval[0]), qadv::parse_double(f.interval[1]));
        } else {
            iv.emplace(nodes.front(), nodes.back());
        }
        const qadv::SmoothnessOrder k(f.k);
        if (f.kind == "global") {
            spline.emplace(qadv::build_global(nodes, k, *iv));
        } else if (f.kind == "local") {
            spline.emplace(qadv::build_local(nodes, k, *iv));
        } else {
            throw qadv::ConfigError("kind", "expected global or local");
        }
        if (f.samples < 2) throw qadv::ConfigError("samples", "need at least 2");
    } catch (const qadv::Error& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kInvalid;
    }
    try {
        qadv::dump_spline(*spline, f.output, f.samples);
    } catch (const qadv::Error& e) {
        std::cerr << "dump_spline: " << e.what() << "\n";
        return kFailure;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stress-test quadrature rules with adversarial spline integrands"};
    app.require_subcommand(1);

    RunFlags rf;
    auto* run = app.add_subcommand("run", "Error sweep, order fit, bound and smoothness checks per family");
    run->add_option("--config", rf.config, "key = value config file; flags override it");
    run->add_option("--theorem", rf.theorem, "1: adversary on every gap, 2: on the largest gap only");
    run->add_option("--k", rf.k, "smoothness order, 1..12");
    run->add_option("--family", rf.families,
                    "composite-trapezoid, composite-simpson, composite-simpson38, composite-nc<d>, "
                    "gauss-legendre, clenshaw-curtis, explicit:<file.json>; repeatable");
    run->add_option("--interval", rf.interval, "a b")->expected(2);
    run->add_option("--n", rf.n, "size range N..M (node counts)");
    run->add_option("--steps", rf.steps, "geometric sizes per doubling");
    run->add_option("--tail-fraction", rf.tail_fraction, "fraction of the sweep used in the order fit");
    run->add_option("--output", rf.output, "output directory");
    run->add_option("--emit", rf.emit, "comma list of csv, jsonl, spline");

    DumpFlags df;
    auto* dump = app.add_subcommand("dump-spline", "Sample an adversary and write its piece table");
    dump->add_option("--nodes", df.nodes, "comma-separated nodes")->required();
    dump->add_option("--k", df.k, "smoothness order, 1..12");
    dump->add_option("--kind", df.kind, "global or local");
    dump->add_option("--interval", df.interval, "a b (default: first and last node)")->expected(2);
    dump->add_option("--samples", df.samples, "sample count");
    dump->add_option("--output", df.output, "samples file; pieces go to <output>.pieces")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInvalid;
    }

    if (run->parsed()) return do_run(rf);
    return do_dump(df);
}
