#pragma once

// Problem configuration: a small key-value block format with "p/q"
// rationals, used for input files, counterexamples and report blocks.
//
//   [manifold.M]          dim, kind = torus|glide, D = 1 -1, t = 1/2 0
//   [map.f] / [map.g]     source, target, hom.e1 .. hom.eN, hom.glide = "eps | k...",
//                         L = "row ; row", v, term = "amplitudes | freq | phase" (repeatable)
//   [region.U]            box = "arc arc ..." with arc = full | lo:hi (repeatable, none = empty)
//   [domain]              kind = whole|box, box = "arc arc ..."
//   [orientation]         scope = global|per-class, sign (default for unlisted classes
//                         under per-class), class = "eps | k... | sign"
//   [solver]              mode = exact|numeric, tol, regularity, dedup, depth, regularize, seed

#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "equivariant_map.hpp"
#include "errors.hpp"
#include "flat_space.hpp"
#include "invariants.hpp"
#include "orientation.hpp"

namespace nielsen {

struct ConfigEntry {
    std::string key;
    std::string value;
    int line = 0;
};

struct ConfigSection {
    std::string name;
    int line = 0;
    std::vector<ConfigEntry> entries;

    const ConfigEntry* find(const std::string& key) const {
        for (const auto& e : entries)
            if (e.key == key) return &e;
        return nullptr;
    }
    std::vector<const ConfigEntry*> all(const std::string& key) const {
        std::vector<const ConfigEntry*> out;
        for (const auto& e : entries)
            if (e.key == key) out.push_back(&e);
        return out;
    }
};

struct ConfigDocument {
    std::vector<ConfigSection> sections;

    const ConfigSection* find(const std::string& name) const {
        for (const auto& s : sections)
            if (s.name == name) return &s;
        return nullptr;
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(trim(cur));
    if (!s.empty() && s.back() == sep) out.push_back("");
    return out;
}

inline std::vector<std::string> words(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

inline std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace detail

inline ConfigDocument parse_document(std::istream& in) {
    ConfigDocument doc;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string s = raw;
        if (auto hash = s.find('#'); hash != std::string::npos) s = s.substr(0, hash);
        s = detail::trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError(line, "", "unterminated section header");
            doc.sections.push_back({detail::trim(s.substr(1, s.size() - 2)), line, {}});
            continue;
        }
        auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError(line, "", "expected key = value");
        if (doc.sections.empty()) throw ConfigError(line, "", "entry outside of any section");
        std::string key = detail::trim(s.substr(0, eq));
        std::string value = detail::trim(s.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        doc.sections.back().entries.push_back({key, value, line});
    }
    return doc;
}

inline ConfigDocument parse_document(const std::string& text) {
    std::istringstream in(text);
    return parse_document(in);
}

struct ProblemConfig {
    FlatManifold source;
    FlatManifold target;
    EquivariantLift f;
    EquivariantLift g;
    OpenRegion region;
    DomainMarker domain;
    OrientationChoice orientation;
    ComputeOptions compute;

    bool operator==(const ProblemConfig& o) const {
        return source == o.source && target == o.target && f == o.f && g == o.g && region == o.region &&
               domain == o.domain && orientation == o.orientation && compute.solver.exact == o.compute.solver.exact &&
               compute.solver.tol == o.compute.solver.tol && compute.solver.regularity == o.compute.solver.regularity &&
               compute.solver.dedup == o.compute.solver.dedup && compute.solver.depth == o.compute.solver.depth &&
               compute.regularize == o.compute.regularize && compute.seed == o.compute.seed;
    }
};

namespace detail {

class Reader {
public:
    explicit Reader(const ConfigDocument& doc) : doc_(doc) {}

    const ConfigSection& section(const std::string& name) const {
        const ConfigSection* s = doc_.find(name);
        if (!s) throw ConfigError(0, name, "missing section [" + name + "]");
        return *s;
    }

    static const ConfigEntry& require(const ConfigSection& s, const std::string& key) {
        const ConfigEntry* e = s.find(key);
        if (!e) throw ConfigError(s.line, s.name + "." + key, "missing field");
        return *e;
    }

    static Rational rational(const ConfigEntry& e, const std::string& path, const std::string& text) {
        auto r = parse_rational(text);
        if (!r) throw ConfigError(e.line, path, "not a rational number: '" + text + "'");
        return *r;
    }

    static std::int64_t integer(const ConfigEntry& e, const std::string& path, const std::string& text) {
        auto r = parse_rational(text);
        if (!r || r->get_den() != 1) throw ConfigError(e.line, path, "not an integer: '" + text + "'");
        return to_int64(r->get_num());
    }

    static double real(const ConfigEntry& e, const std::string& path, const std::string& text) {
        try {
            std::size_t used = 0;
            double x = std::stod(text, &used);
            if (used != text.size()) throw std::invalid_argument(text);
            return x;
        } catch (const std::exception&) {
            throw ConfigError(e.line, path, "not a number: '" + text + "'");
        }
    }

    static Vector<Rational> rational_vector(const ConfigEntry& e, const std::string& path, std::size_t n) {
        auto w = words(e.value);
        if (w.size() != n) throw ConfigError(e.line, path, "expected " + std::to_string(n) + " entries");
        Vector<Rational> v;
        for (const auto& x : w) v.push_back(rational(e, path, x));
        return v;
    }

    static IntVector int_vector(const ConfigEntry& e, const std::string& path, const std::string& text, std::size_t n) {
        auto w = words(text);
        if (w.size() != n) throw ConfigError(e.line, path, "expected " + std::to_string(n) + " integers");
        IntVector v;
        for (const auto& x : w) v.push_back(integer(e, path, x));
        return v;
    }

    static DeckElement deck(const ConfigEntry& e, const std::string& path, const std::string& text, std::size_t n) {
        auto parts = split(text, '|');
        if (parts.size() != 2) throw ConfigError(e.line, path, "deck element must read 'eps | k1 ... kn'");
        std::int64_t eps = integer(e, path, parts[0]);
        if (eps != 0 && eps != 1) throw ConfigError(e.line, path, "eps must be 0 or 1");
        return {static_cast<int>(eps), int_vector(e, path, parts[1], n)};
    }

    static Box box(const ConfigEntry& e, const std::string& path, std::size_t n) {
        auto w = words(e.value);
        if (w.size() != n) throw ConfigError(e.line, path, "expected " + std::to_string(n) + " arcs");
        Box b;
        for (const auto& a : w) {
            if (a == "full") {
                b.arcs.push_back(Arc::whole());
                continue;
            }
            auto colon = a.find(':');
            if (colon == std::string::npos) throw ConfigError(e.line, path, "arc must be 'full' or 'lo:hi'");
            Rational lo = rational(e, path, a.substr(0, colon)), hi = rational(e, path, a.substr(colon + 1));
            try {
                b.arcs.push_back(Arc::open(lo, hi));
            } catch (const NielsenError& err) {
                throw ConfigError(e.line, path, err.what());
            }
        }
        return b;
    }

    FlatManifold manifold(const std::string& label) const {
        const ConfigSection& s = section("manifold." + label);
        const std::string base = s.name + ".";
        const ConfigEntry& d = require(s, "dim");
        std::int64_t dim = integer(d, base + "dim", d.value);
        if (dim <= 0 || dim > 8) throw ConfigError(d.line, base + "dim", "dimension must be in 1..8");
        const ConfigEntry& k = require(s, "kind");
        if (k.value == "torus") {
            for (const char* key : {"D", "t"})
                if (const ConfigEntry* extra = s.find(key))
                    throw ConfigError(extra->line, base + key, "a torus takes no glide data");
            return FlatManifold::torus(static_cast<int>(dim), label);
        }
        if (k.value != "glide") throw ConfigError(k.line, base + "kind", "kind must be torus or glide");
        const ConfigEntry& de = require(s, "D");
        const ConfigEntry& te = require(s, "t");
        IntVector dv = int_vector(de, base + "D", de.value, static_cast<std::size_t>(dim));
        std::vector<int> diag(dv.begin(), dv.end());
        Vector<Rational> t = rational_vector(te, base + "t", static_cast<std::size_t>(dim));
        try {
            return FlatManifold::glide(diag, t, label);
        } catch (const InvalidGlide& err) {
            std::string msg = err.what();
            const bool about_d = msg.find("D entries") != std::string::npos;
            throw ConfigError(about_d ? de.line : te.line, base + (about_d ? "D" : "t"), msg);
        }
    }

    EquivariantLift lift(const std::string& name, const std::map<std::string, FlatManifold>& manifolds) const {
        const ConfigSection& s = section("map." + name);
        const std::string base = s.name + ".";
        auto pick = [&](const char* key) -> const FlatManifold& {
            const ConfigEntry& e = require(s, key);
            auto it = manifolds.find(e.value);
            if (it == manifolds.end()) throw ConfigError(e.line, base + key, "unknown manifold '" + e.value + "'");
            return it->second;
        };
        const FlatManifold& m = pick("source");
        const FlatManifold& n = pick("target");
        if (m.size() != n.size()) throw ConfigError(s.line, base + "target", "source and target dimensions differ");
        std::vector<DeckElement> images;
        for (std::size_t i = 0; i < m.size(); ++i) {
            std::string key = "hom.e" + std::to_string(i + 1);
            const ConfigEntry& e = require(s, key);
            images.push_back(deck(e, base + key, e.value, n.size()));
        }
        if (m.is_glide()) {
            const ConfigEntry& e = require(s, "hom.glide");
            images.push_back(deck(e, base + "hom.glide", e.value, n.size()));
        } else if (const ConfigEntry* e = s.find("hom.glide")) {
            throw ConfigError(e->line, base + "hom.glide", "source is a torus and has no glide");
        }
        std::optional<InducedHom> hom;
        try {
            hom.emplace(m, n, images);
        } catch (const InvalidHomomorphism& err) {
            throw ConfigError(s.line, base + "hom", err.what());
        }
        const ConfigEntry& le = require(s, "L");
        auto rows = split(le.value, ';');
        if (rows.size() != n.size()) throw ConfigError(le.line, base + "L", "expected " + std::to_string(n.size()) + " rows");
        Matrix<Rational> l(n.size(), m.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            auto w = words(rows[i]);
            if (w.size() != m.size()) throw ConfigError(le.line, base + "L", "row " + std::to_string(i + 1) + " has wrong length");
            for (std::size_t j = 0; j < w.size(); ++j) l(i, j) = rational(le, base + "L", w[j]);
        }
        const ConfigEntry& ve = require(s, "v");
        Vector<Rational> v = rational_vector(ve, base + "v", n.size());
        std::vector<TrigTerm> terms;
        for (const ConfigEntry* te : s.all("term")) {
            auto parts = split(te->value, '|');
            if (parts.size() != 3) throw ConfigError(te->line, base + "term", "term must read 'amplitudes | freq | phase'");
            TrigTerm t;
            for (const auto& a : words(parts[0])) t.amplitude.push_back(real(*te, base + "term", a));
            if (t.amplitude.size() != n.size()) throw ConfigError(te->line, base + "term", "amplitude has wrong length");
            t.freq = int_vector(*te, base + "term", parts[1], m.size());
            t.phase = real(*te, base + "term", parts[2]);
            terms.push_back(t);
        }
        try {
            return EquivariantLift(*hom, l, v, terms);
        } catch (const NotEquivariant& err) {
            throw ConfigError(s.line, s.name, err.what());
        }
    }

    OpenRegion region(const ConfigSection& s, std::size_t n) const {
        std::vector<Box> boxes;
        for (const ConfigEntry* e : s.all("box")) boxes.push_back(box(*e, s.name + ".box", n));
        return OpenRegion(n, boxes);
    }

private:
    const ConfigDocument& doc_;
};

} // namespace detail

inline ProblemConfig parse_problem(const ConfigDocument& doc) {
    detail::Reader rd(doc);
    ProblemConfig p;
    std::map<std::string, FlatManifold> manifolds;
    for (const auto& s : doc.sections)
        if (s.name.rfind("manifold.", 0) == 0) {
            std::string label = s.name.substr(9);
            manifolds.emplace(label, rd.manifold(label));
        }
    p.f = rd.lift("f", manifolds);
    p.g = rd.lift("g", manifolds);
    if (!(p.f.source() == p.g.source()) || !(p.f.target() == p.g.target()))
        throw ConfigError(rd.section("map.g").line, "map.g", "f and g must share source and target");
    p.source = p.f.source();
    p.target = p.f.target();
    const std::size_t n = p.source.size();

    const ConfigSection* u = doc.find("region.U");
    p.region = u ? rd.region(*u, n) : OpenRegion::whole(n);

    if (const ConfigSection* d = doc.find("domain")) {
        const ConfigEntry* kind = d->find("kind");
        std::string k = kind ? kind->value : "whole";
        if (k == "box") {
            const ConfigEntry& b = detail::Reader::require(*d, "box");
            p.domain = DomainMarker::from_box(detail::Reader::box(b, "domain.box", n));
            try {
                p.domain.validate(p.source);
            } catch (const DomainMismatch& err) {
                throw ConfigError(b.line, "domain.box", err.what());
            }
        } else if (k != "whole") {
            throw ConfigError(kind->line, "domain.kind", "kind must be whole or box");
        }
    }

    const bool otrue = is_orientation_true(p.g.hom());
    p.orientation = otrue ? OrientationChoice::global(1) : OrientationChoice::per_class({});
    if (const ConfigSection* o = doc.find("orientation")) {
        const ConfigEntry* scope = o->find("scope");
        std::string sc = scope ? scope->value : (otrue ? "global" : "per-class");
        if (sc == "global") {
            int sign = 1;
            if (const ConfigEntry* e = o->find("sign")) sign = static_cast<int>(detail::Reader::integer(*e, "orientation.sign", e->value));
            if (sign != 1 && sign != -1) throw ConfigError(o->line, "orientation.sign", "sign must be 1 or -1");
            if (!otrue) throw ConfigError(scope ? scope->line : o->line, "orientation.scope",
                                          "global orientation needs g to be orientation true");
            p.orientation = OrientationChoice::global(sign);
        } else if (sc == "per-class") {
            int fallback = 1;
            if (const ConfigEntry* e = o->find("sign")) fallback = static_cast<int>(detail::Reader::integer(*e, "orientation.sign", e->value));
            if (fallback != 1 && fallback != -1) throw ConfigError(o->line, "orientation.sign", "sign must be 1 or -1");
            std::map<DeckElement, int> table;
            for (const ConfigEntry* e : o->all("class")) {
                auto parts = detail::split(e->value, '|');
                if (parts.size() != 3) throw ConfigError(e->line, "orientation.class", "class must read 'eps | k... | sign'");
                DeckElement rep = detail::Reader::deck(*e, "orientation.class", parts[0] + "|" + parts[1], n);
                std::int64_t sign = detail::Reader::integer(*e, "orientation.class", parts[2]);
                if (sign != 1 && sign != -1) throw ConfigError(e->line, "orientation.class", "sign must be 1 or -1");
                table[rep] = static_cast<int>(sign);
            }
            p.orientation = OrientationChoice::per_class(table, fallback);
        } else {
            throw ConfigError(scope->line, "orientation.scope", "scope must be global or per-class");
        }
    }

    if (const ConfigSection* s = doc.find("solver")) {
        for (const auto& e : s->entries) {
            const std::string path = "solver." + e.key;
            if (e.key == "mode") {
                if (e.value != "exact" && e.value != "numeric") throw ConfigError(e.line, path, "mode must be exact or numeric");
                p.compute.solver.exact = e.value == "exact";
            } else if (e.key == "tol") {
                p.compute.solver.tol = detail::Reader::real(e, path, e.value);
            } else if (e.key == "regularity") {
                p.compute.solver.regularity = detail::Reader::real(e, path, e.value);
            } else if (e.key == "dedup") {
                p.compute.solver.dedup = detail::Reader::real(e, path, e.value);
            } else if (e.key == "depth") {
                p.compute.solver.depth = static_cast<int>(detail::Reader::integer(e, path, e.value));
            } else if (e.key == "regularize") {
                if (e.value != "true" && e.value != "false") throw ConfigError(e.line, path, "expected true or false");
                p.compute.regularize = e.value == "true";
            } else if (e.key == "seed") {
                p.compute.seed = static_cast<unsigned>(detail::Reader::integer(e, path, e.value));
            } else {
                throw ConfigError(e.line, path, "unknown solver option");
            }
        }
    }
    return p;
}

inline ProblemConfig parse_problem(const std::string& text) { return parse_problem(parse_document(text)); }

inline ProblemConfig load_problem(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(0, "", "cannot open " + path);
    return parse_problem(parse_document(in));
}

// ---------------------------------------------------------------------------
// Serialization

inline std::string format_deck(const DeckElement& g) {
    std::string s = std::to_string(g.eps) + " |";
    for (auto k : g.k) s += " " + std::to_string(k);
    return s;
}

inline std::string format_arc(const Arc& a) {
    if (a.full) return "full";
    return to_string(a.lo) + ":" + to_string(a.hi);
}

inline std::string format_box(const Box& b) {
    std::string s;
    for (std::size_t i = 0; i < b.arcs.size(); ++i) s += (i ? " " : "") + format_arc(b.arcs[i]);
    return s;
}

inline std::string serialize_manifold(const FlatManifold& m, const std::string& label) {
    std::ostringstream os;
    os << "[manifold." << label << "]\n";
    os << "dim = " << m.dim() << "\n";
    os << "kind = " << to_string(m.kind()) << "\n";
    if (m.is_glide()) {
        os << "D =";
        for (int d : m.glide_diagonal()) os << " " << d;
        os << "\nt = " << format_vector(m.glide_translation()) << "\n";
    }
    return os.str();
}

inline std::string serialize_lift(const EquivariantLift& f, const std::string& name, const std::string& src,
                                  const std::string& tgt) {
    std::ostringstream os;
    os << "[map." << name << "]\n";
    os << "source = " << src << "\ntarget = " << tgt << "\n";
    const auto& imgs = f.hom().images();
    for (std::size_t i = 0; i < f.source().size(); ++i) os << "hom.e" << i + 1 << " = " << format_deck(imgs[i]) << "\n";
    if (f.source().is_glide()) os << "hom.glide = " << format_deck(imgs.back()) << "\n";
    os << "L = ";
    for (std::size_t i = 0; i < f.linear().rows(); ++i) os << (i ? " ; " : "") << format_vector(f.linear().row(i));
    os << "\nv = " << format_vector(f.offset()) << "\n";
    for (const auto& t : f.terms()) {
        os << "term =";
        for (double a : t.amplitude) os << " " << detail::format_double(a);
        os << " |";
        for (auto m : t.freq) os << " " << m;
        os << " | " << detail::format_double(t.phase) << "\n";
    }
    return os.str();
}

inline std::string serialize_problem(const ProblemConfig& p) {
    std::ostringstream os;
    const bool same = p.source == p.target;
    const std::string src = "M", tgt = same ? "M" : "N";
    os << serialize_manifold(p.source, src) << "\n";
    if (!same) os << serialize_manifold(p.target, tgt) << "\n";
    os << serialize_lift(p.f, "f", src, tgt) << "\n";
    os << serialize_lift(p.g, "g", src, tgt) << "\n";
    os << "[region.U]\n";
    for (const auto& b : p.region.boxes()) os << "box = " << format_box(b) << "\n";
    os << "\n[domain]\n";
    if (p.domain.whole)
        os << "kind = whole\n";
    else
        os << "kind = box\nbox = " << format_box(p.domain.box) << "\n";
    os << "\n[orientation]\n";
    if (p.orientation.is_global()) {
        os << "scope = global\nsign = " << p.orientation.global_sign() << "\n";
    } else {
        os << "scope = per-class\nsign = " << p.orientation.global_sign() << "\n";
        for (const auto& [rep, s] : p.orientation.table()) os << "class = " << format_deck(rep) << " | " << s << "\n";
    }
    os << "\n[solver]\n";
    os << "mode = " << (p.compute.solver.exact ? "exact" : "numeric") << "\n";
    os << "tol = " << detail::format_double(p.compute.solver.tol) << "\n";
    os << "regularity = " << detail::format_double(p.compute.solver.regularity) << "\n";
    os << "dedup = " << detail::format_double(p.compute.solver.dedup) << "\n";
    os << "depth = " << p.compute.solver.depth << "\n";
    os << "regularize = " << (p.compute.regularize ? "true" : "false") << "\n";
    os << "seed = " << p.compute.seed << "\n";
    return os.str();
}

// ---------------------------------------------------------------------------
// Report blocks

inline const char* kReportBegin = "--- BEGIN nielsen-report ---";
inline const char* kReportEnd = "--- END nielsen-report ---";

inline std::string format_point(const CoincidenceRecord& r) {
    if (r.exact_point) return format_vector(*r.exact_point);
    std::string s;
    for (std::size_t i = 0; i < r.point.size(); ++i) s += (i ? " " : "") + detail::format_double(r.point[i]);
    return s;
}

/// Machine-readable block in the same key-value format.
inline std::string report_block(const std::string& command, const Analysis* a, const ReidemeisterClassSet* classes) {
    std::ostringstream os;
    os << kReportBegin << "\n[report]\ncommand = " << command << "\n";
    if (classes) {
        os << "finite = " << (classes->finite ? "true" : "false") << "\n";
        os << "class_count = " << classes->representatives.size() << "\n";
        for (std::size_t i = 0; i < classes->representatives.size(); ++i) {
            os << "[class." << i << "]\nrep = " << format_deck(classes->representatives[i]) << "\n";
            os << "degenerate = " << (classes->degenerate_flags[i] ? "true" : "false") << "\n";
        }
    }
    if (a) {
        os << "z = " << a->index.z << "\nz2 = " << a->index.z2 << "\n";
        os << "semi_index = " << semi_index(a->index) << "\n";
        os << "nielsen_count = " << nielsen_count(a->trace) << "\n";
        os << "point_count = " << a->records.size() << "\n";
        IndexValue eps = epsilon(a->trace);
        os << "epsilon_z = " << eps.z << "\nepsilon_z2 = " << eps.z2 << "\n";
        std::size_t i = 0;
        for (const auto& [rep, e] : a->trace.entries) {
            os << "[trace." << i++ << "]\nrep = " << format_deck(rep) << "\n";
            os << "degenerate = " << (e.degenerate ? "true" : "false") << "\ncoefficient = " << e.coefficient << "\n";
        }
        i = 0;
        for (const auto& r : a->records) {
            os << "[point." << i++ << "]\nx = " << format_point(r) << "\nalpha = " << format_deck(r.alpha) << "\n";
            os << "class = " << format_deck(r.class_rep) << "\nregular = " << (r.regular ? "true" : "false") << "\n";
            os << "degenerate = " << (r.degenerate ? "true" : "false") << "\nlift_sign = " << r.lift_sign << "\n";
            os << "aligned_sign = " << r.aligned_sign << "\n";
        }
    }
    os << kReportEnd << "\n";
    return os.str();
}

/// Extracts the fenced report block from command output.
inline ConfigDocument parse_report(const std::string& output) {
    auto b = output.find(kReportBegin);
    auto e = output.find(kReportEnd);
    if (b == std::string::npos || e == std::string::npos || e < b) throw ConfigError(0, "", "no report block found");
    b += std::string(kReportBegin).size();
    return parse_document(output.substr(b, e - b));
}

} // namespace nielsen
