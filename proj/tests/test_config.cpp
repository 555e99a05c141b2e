#include <gtest/gtest.h>

#include <random>

#include "nielsen/axiom_harness.hpp"

using namespace nielsen;

namespace {

std::string sample(const std::string& name) { return std::string(NIELSEN_SAMPLES_DIR) + "/" + name; }

const char* kCircle = R"([manifold.M]
dim = 1
kind = torus

[map.f]
source = M
target = M
hom.e1 = 0 | 3
L = 3
v = 0

[map.g]
source = M
target = M
hom.e1 = 0 | 1
L = 1
v = 0
)";

int error_line(const std::string& text) {
    try {
        parse_problem(text);
    } catch (const ConfigError& e) {
        return e.line();
    }
    return -1;
}

std::string error_field(const std::string& text) {
    try {
        parse_problem(text);
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "";
}

} // namespace

TEST(Config, DefaultsForMissingSections) {
    ProblemConfig p = parse_problem(kCircle);
    EXPECT_TRUE(p.region.is_whole());
    EXPECT_TRUE(p.domain.whole);
    EXPECT_EQ(p.orientation, OrientationChoice::global(1));
    EXPECT_TRUE(p.compute.solver.exact);
    EXPECT_EQ(p.f.linear()(0, 0), Rational(3));
}

TEST(Config, SerializeParseRoundTrip) {
    AxiomHarness h;
    for (int trial = 0; trial < 40; ++trial) {
        std::mt19937_64 rng(200 + trial);
        Instance in = h.mixed_instance(rng, trial);
        if (trial % 5 == 0) in.region = OpenRegion::empty(in.f.source().size());
        if (trial % 7 == 3 && !in.orientation.is_global())
            in.orientation = OrientationChoice::per_class({{DeckElement{0, {1, 0}}, -1}}, -1);
        ProblemConfig p = to_config(in);
        p.compute.solver.tol = 1e-11;
        p.compute.seed = 17;
        ProblemConfig q = parse_problem(serialize_problem(p));
        EXPECT_EQ(q, p) << serialize_problem(p);
    }
}

TEST(Config, SamplesLoad) {
    for (const char* name : {"circle.cfg", "torus6.cfg", "klein_degenerate.cfg"}) EXPECT_NO_THROW(load_problem(sample(name)));
    ProblemConfig k = load_problem(sample("klein_degenerate.cfg"));
    EXPECT_TRUE(k.source.is_glide());
    EXPECT_EQ(k.g.terms().size(), 2u);
    EXPECT_FALSE(k.compute.solver.exact);
}

TEST(Config, ErrorsCarryLineAndField) {
    try {
        load_problem(sample("malformed.cfg"));
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.line(), 10);
        EXPECT_EQ(e.field(), "map.f.L");
    }
    std::string bad_solver = std::string(kCircle) + "\n[solver]\nspeed = fast\n";
    EXPECT_EQ(error_field(bad_solver), "solver.speed");
    EXPECT_EQ(error_line(bad_solver), 20);
    std::string bad_hom = kCircle;
    bad_hom.replace(bad_hom.find("hom.e1 = 0 | 3"), 14, "hom.e1 = 0 | 3 4");
    EXPECT_EQ(error_field(bad_hom), "map.f.hom.e1");
    std::string bad_arc = std::string(kCircle) + "\n[region.U]\nbox = 1/2:1/4\n";
    EXPECT_EQ(error_field(bad_arc), "region.U.box");
    EXPECT_THROW(parse_problem("[manifold.M]\ndim = 1\nkind = torus\n"), ConfigError);
    EXPECT_THROW(load_problem(sample("does_not_exist.cfg")), ConfigError);
}

TEST(Config, GlobalOrientationNeedsOrientationTrueG) {
    ProblemConfig p;
    auto f = klein_glide_lift(0, 0, 1, Rational(0));
    auto g = klein_translation_lift(1, 0, {Rational(0), Rational(0)});
    Instance in{"", f, g, OpenRegion::whole(2), DomainMarker::whole_manifold(), OrientationChoice::per_class({}), true};
    std::string text = serialize_problem(to_config(in));
    text.replace(text.find("scope = per-class"), 17, "scope = global");
    EXPECT_EQ(error_field(text), "orientation.scope");
}

TEST(Config, ReportBlockRoundTrip) {
    ProblemConfig p = load_problem(sample("torus6.cfg"));
    Analysis a = analyze(p.f, p.g, p.region, p.domain, p.orientation, p.compute);
    std::string out = "noise before\n" + report_block("index", &a, nullptr) + "noise after\n";
    ConfigDocument doc = parse_report(out);
    const ConfigSection* r = doc.find("report");
    ASSERT_NE(r, nullptr);
    EXPECT_EQ(r->find("z")->value, "6");
    EXPECT_EQ(r->find("z2")->value, "0");
    EXPECT_EQ(r->find("point_count")->value, "6");
    EXPECT_NE(doc.find("point.5"), nullptr);
    EXPECT_THROW(parse_report("nothing here"), ConfigError);
}
