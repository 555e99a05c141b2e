// nielsen: coincidence classes, index and trace for maps between flat manifolds.
//
//   nielsen classes        [config]     Reidemeister classes of (f#, g#)
//   nielsen index          [config]     Z + Z2 index over U
//   nielsen trace          [config]     Reidemeister trace and semi-index over U
//   nielsen verify-axioms                randomized axiom checks
//
// Without a config path (or with "-") the problem is read from stdin.
// Exit codes: 0 success, 1 computation error or failed check, 2 bad input.

#include <CLI11.hpp>

#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>

#include "nielsen/nielsen.hpp"

namespace {

using namespace nielsen;

struct Overrides {
    std::string path = "-";
    bool exact = false;
    bool numeric = false;
    std::optional<double> tol;
    std::optional<unsigned> seed;
    bool regularize = false;
    std::string domain_marker;
};

ProblemConfig read_problem(const Overrides& o) {
    ProblemConfig p;
    if (o.path == "-") {
        std::string text((std::istreambuf_iterator<char>(std::cin)), std::istreambuf_iterator<char>());
        p = parse_problem(text);
    } else {
        p = load_problem(o.path);
    }
    if (o.exact) p.compute.solver.exact = true;
    if (o.numeric) p.compute.solver.exact = false;
    if (o.tol) p.compute.solver.tol = *o.tol;
    if (o.seed) p.compute.seed = *o.seed;
    if (o.regularize) p.compute.regularize = true;
    if (!o.domain_marker.empty()) {
        if (o.domain_marker == "whole") {
            p.domain = DomainMarker::whole_manifold();
        } else {
            ConfigEntry e{"domain-marker", o.domain_marker, 0};
            p.domain = DomainMarker::from_box(detail::Reader::box(e, "--domain-marker", p.source.size()));
            try {
                p.domain.validate(p.source);
            } catch (const NielsenError& err) {
                throw ConfigError(0, "--domain-marker", err.what());
            }
        }
    }
    return p;
}

Analysis run_analysis(const ProblemConfig& p) {
    return analyze(p.f, p.g, p.region, p.domain, p.orientation, p.compute);
}

void print_points(const Analysis& a) {
    for (const auto& r : a.records) {
        std::cout << "  x = " << format_point(r) << "  class " << to_string(r.class_rep)
                  << (r.degenerate ? "  degenerate" : "") << "  sign " << r.aligned_sign << "\n";
    }
}

int cmd_classes(const Overrides& o) {
    ProblemConfig p = read_problem(o);
    TwistedConjugacy tc(p.f.hom(), p.g.hom(), p.domain);
    ReidemeisterClassSet cs = tc.classes();
    if (cs.finite)
        std::cout << cs.representatives.size() << " Reidemeister classes\n";
    else
        std::cout << "infinitely many Reidemeister classes; listing " << cs.representatives.size()
                  << " coset representatives\n";
    for (std::size_t i = 0; i < cs.representatives.size(); ++i)
        std::cout << "  " << to_string(cs.representatives[i]) << (cs.degenerate_flags[i] ? "  degenerate" : "") << "\n";
    std::cout << report_block("classes", nullptr, &cs);
    return 0;
}

int cmd_index(const Overrides& o) {
    ProblemConfig p = read_problem(o);
    Analysis a = run_analysis(p);
    std::cout << "index " << to_string(a.index) << " from " << a.records.size() << " coincidences"
              << (a.regularized ? " (after regularization)" : "") << "\n";
    print_points(a);
    std::cout << report_block("index", &a, nullptr);
    return 0;
}

int cmd_trace(const Overrides& o) {
    ProblemConfig p = read_problem(o);
    Analysis a = run_analysis(p);
    std::cout << "trace over " << nielsen_count(a.trace) << " essential classes, epsilon "
              << to_string(epsilon(a.trace)) << ", semi-index " << semi_index(a.index) << "\n";
    for (const auto& [rep, e] : a.trace.entries)
        std::cout << "  " << to_string(rep) << "  " << (e.degenerate ? "Z2 " : "Z  ") << e.coefficient << "\n";
    print_points(a);
    std::cout << report_block("trace", &a, nullptr);
    return 0;
}

int cmd_verify(const HarnessOptions& h) {
    AxiomHarness harness(h);
    auto reports = harness.run_all();
    bool ok = true;
    std::ostringstream block;
    block << kReportBegin << "\n[report]\ncommand = verify-axioms\nseed = " << h.seed << "\ntrials = " << h.trials << "\n";
    for (const auto& r : reports) {
        std::cout << (r.ok() ? "PASS " : "FAIL ") << r.name << " " << r.passed << "/" << r.trials << "\n";
        for (const auto& f : r.failures) {
            std::cout << "  trial " << f.trial << ": " << f.detail;
            if (!f.counterexample.empty()) std::cout << " [" << f.counterexample << "]";
            std::cout << "\n";
        }
        block << "[check." << r.name << "]\npassed = " << r.passed << "\nfailures = " << r.failures.size() << "\n";
        ok = ok && r.ok();
    }
    block << kReportEnd << "\n";
    std::cout << block.str();
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nielsen coincidence invariants for maps between flat manifolds"};
    app.require_subcommand(1);

    Overrides o;
    auto add_problem = [&](CLI::App* sub) {
        sub->add_option("config", o.path, "problem file, or - for stdin");
        auto* ex = sub->add_flag("--exact", o.exact, "exact rational solver");
        auto* nu = sub->add_flag("--numeric", o.numeric, "interval + Newton solver");
        ex->excludes(nu);
        sub->add_option("--tol", o.tol, "Newton tolerance")->check(CLI::PositiveNumber);
        sub->add_option("--seed", o.seed, "regularization seed");
        sub->add_flag("--regularize", o.regularize, "perturb to a regular pair first");
        sub->add_option("--domain-marker", o.domain_marker, "'whole' or a box 'lo:hi|full ...'");
    };
    auto* classes = app.add_subcommand("classes", "list Reidemeister classes");
    auto* index = app.add_subcommand("index", "compute the Z + Z2 index");
    auto* trace = app.add_subcommand("trace", "compute the Reidemeister trace");
    add_problem(classes);
    add_problem(index);
    add_problem(trace);

    HarnessOptions h;
    auto* verify = app.add_subcommand("verify-axioms", "randomized axiom checks");
    verify->add_option("--seed", h.seed, "base seed");
    verify->add_option("--trials", h.trials, "trials per check")->check(CLI::PositiveNumber);
    verify->add_option("--counterexamples", h.counterexample_dir, "directory for failing configs");
    verify->add_flag("--inject-sign-fault", h.inject_sign_fault)->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*classes) return cmd_classes(o);
        if (*index) return cmd_index(o);
        if (*trace) return cmd_trace(o);
        return cmd_verify(h);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const NielsenError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
