#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "nielsen/axiom_harness.hpp"

using namespace nielsen;

namespace {

struct CliRun {
    int code = -1;
    std::string out;
};

CliRun run(const std::string& args) {
    std::string cmd = std::string(NIELSEN_CLI_PATH) + " " + args + " 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    CliRun r;
    std::array<char, 4096> buf;
    while (std::size_t n = std::fread(buf.data(), 1, buf.size(), p)) r.out.append(buf.data(), n);
    int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string sample(const std::string& name) { return std::string(NIELSEN_SAMPLES_DIR) + "/" + name; }

std::string report_value(const std::string& out, const std::string& key) {
    ConfigDocument doc = parse_report(out);
    const ConfigEntry* e = doc.find("report")->find(key);
    return e ? e->value : "";
}

} // namespace

TEST(Cli, ClassesOnCircle) {
    CliRun r = run("classes " + sample("circle.cfg"));
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(report_value(r.out, "class_count"), "2");
    EXPECT_EQ(report_value(r.out, "finite"), "true");
}

TEST(Cli, IndexOnTorusSample) {
    CliRun r = run("index " + sample("torus6.cfg"));
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(report_value(r.out, "z"), "6");
    EXPECT_EQ(report_value(r.out, "nielsen_count"), "6");
    CliRun n = run("index --numeric " + sample("torus6.cfg"));
    EXPECT_EQ(report_value(n.out, "z"), "6");
}

TEST(Cli, TraceFromStdin) {
    CliRun r = run("trace - < " + sample("circle.cfg"));
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(report_value(r.out, "epsilon_z"), "-2");
    EXPECT_EQ(report_value(r.out, "semi_index"), "2");
}

TEST(Cli, KleinDegenerateSample) {
    CliRun r = run("trace " + sample("klein_degenerate.cfg"));
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(report_value(r.out, "point_count"), "2");
    EXPECT_EQ(report_value(r.out, "z2"), "0");
    CliRun local = run("index --domain-marker '4/5:6/5 1/10:9/10' " + sample("klein_degenerate.cfg"));
    EXPECT_EQ(local.code, 0) << local.out;
    CliRun bad = run("index --domain-marker '0:1 1/10:9/10' " + sample("klein_degenerate.cfg"));
    EXPECT_EQ(bad.code, 2) << bad.out;
}

TEST(Cli, ExitCodes) {
    CliRun malformed = run("index " + sample("malformed.cfg"));
    EXPECT_EQ(malformed.code, 2);
    EXPECT_NE(malformed.out.find("map.f.L"), std::string::npos);
    EXPECT_EQ(run("index --bogus " + sample("circle.cfg")).code, 2);
    EXPECT_EQ(run("index --exact --numeric " + sample("circle.cfg")).code, 2);
    EXPECT_EQ(run("").code, 2);

    auto path = std::filesystem::temp_directory_path() / "nielsen_cli_same_map.cfg";
    ProblemConfig p = load_problem(sample("circle.cfg"));
    p.g = p.f;
    std::ofstream(path) << serialize_problem(p);
    CliRun same = run("index " + path.string());
    EXPECT_EQ(same.code, 1);
    EXPECT_NE(same.out.find("singular"), std::string::npos);
    std::filesystem::remove(path);
}

TEST(Cli, VerifyAxioms) {
    CliRun ok = run("verify-axioms --trials 4 --seed 9");
    EXPECT_EQ(ok.code, 0) << ok.out;
    ConfigDocument doc = parse_report(ok.out);
    ASSERT_NE(doc.find("check.swap"), nullptr);
    EXPECT_EQ(doc.find("check.swap")->find("failures")->value, "0");
    CliRun bad = run("verify-axioms --trials 12 --inject-sign-fault");
    EXPECT_EQ(bad.code, 1);
    EXPECT_NE(bad.out.find("FAIL"), std::string::npos);
}
