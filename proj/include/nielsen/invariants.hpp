#pragma once

// Z + Z2 coincidence index, Reidemeister trace and semi-index assembled
// from coincidence records.

#include <cstdint>
#include <cstdlib>
#include <map>
#include <vector>

#include "coincidence_solver.hpp"
#include "equivariant_map.hpp"
#include "errors.hpp"
#include "orientation.hpp"
#include "regularize.hpp"

namespace nielsen {

struct IndexValue {
    std::int64_t z = 0;
    int z2 = 0;

    IndexValue operator+(const IndexValue& o) const { return {z + o.z, (z2 + o.z2) % 2}; }
    IndexValue operator-() const { return {-z, z2}; }
    bool operator==(const IndexValue&) const = default;
};

inline std::string to_string(const IndexValue& v) {
    return "(" + std::to_string(v.z) + "," + std::to_string(v.z2) + ")";
}

struct TraceEntry {
    bool degenerate = false;
    std::int64_t coefficient = 0;  ///< integer, or 0/1 for degenerate classes

    bool operator==(const TraceEntry&) const = default;
};

struct TraceValue {
    std::map<DeckElement, TraceEntry> entries;

    bool operator==(const TraceValue&) const = default;
};

inline IndexValue epsilon(const TraceValue& t) {
    IndexValue v;
    for (const auto& [rep, e] : t.entries) {
        if (e.degenerate)
            v.z2 = (v.z2 + static_cast<int>(e.coefficient)) % 2;
        else
            v.z += e.coefficient;
    }
    return v;
}

inline TraceValue operator+(const TraceValue& a, const TraceValue& b) {
    TraceValue out = a;
    for (const auto& [rep, e] : b.entries) {
        auto [it, fresh] = out.entries.try_emplace(rep, e);
        if (fresh) continue;
        if (it->second.degenerate != e.degenerate) throw NielsenError("class " + to_string(rep) + " changed degeneracy");
        it->second.coefficient = e.degenerate ? (it->second.coefficient + e.coefficient) % 2
                                              : it->second.coefficient + e.coefficient;
        if (it->second.coefficient == 0) out.entries.erase(it);
    }
    return out;
}

inline IndexValue local_index(const CoincidenceRecord& r, const OrientationChoice& o) {
    if (!r.regular) throw NotRegular("local index needs a regular coincidence at " + format_vector(r.point));
    if (r.degenerate) return {0, 1};
    return {static_cast<std::int64_t>(r.aligned_sign * o.sign(r.class_rep)), 0};
}

inline std::int64_t semi_index(const IndexValue& v) { return std::llabs(v.z) + v.z2; }

inline std::size_t nielsen_count(const TraceValue& t) { return t.entries.size(); }

/// Semi-index per class: |coefficient| for nondegenerate classes, the parity bit otherwise.
inline std::map<DeckElement, std::int64_t> class_semi_indices(const TraceValue& t) {
    std::map<DeckElement, std::int64_t> out;
    for (const auto& [rep, e] : t.entries)
        out[rep] = e.degenerate ? e.coefficient : std::llabs(e.coefficient);
    return out;
}

inline TraceValue trace_from_records(const std::vector<CoincidenceRecord>& records, const OrientationChoice& o) {
    TraceValue t;
    for (const auto& r : records) {
        IndexValue li = local_index(r, o);
        auto& e = t.entries[r.class_rep];
        e.degenerate = r.degenerate;
        e.coefficient = r.degenerate ? (e.coefficient + li.z2) % 2 : e.coefficient + li.z;
    }
    for (auto it = t.entries.begin(); it != t.entries.end();) {
        if (it->second.coefficient == 0)
            it = t.entries.erase(it);
        else
            ++it;
    }
    return t;
}

inline IndexValue index_from_records(const std::vector<CoincidenceRecord>& records, const OrientationChoice& o) {
    IndexValue v;
    for (const auto& r : records) v = v + local_index(r, o);
    return v;
}

struct ComputeOptions {
    SolverOptions solver;
    bool regularize = false;
    unsigned seed = 1;
};

/// Records, index and trace of one problem instance.
struct Analysis {
    std::vector<CoincidenceRecord> records;
    IndexValue index;
    TraceValue trace;
    bool regularized = false;
};

inline Analysis analyze(const EquivariantLift& f, const EquivariantLift& g, const OpenRegion& u,
                        const DomainMarker& v, const OrientationChoice& o, const ComputeOptions& options = {}) {
    if (o.is_global() && !is_orientation_true(g.hom()))
        throw NotOrientationTrue("global orientation given but g is not orientation true");
    Analysis a;
    EquivariantLift f1 = f, g1 = g;
    if (options.regularize) {
        RegularizeOptions ro;
        ro.solver = options.solver;
        auto reg = regularize(f, g, u, options.seed, v, ro);
        f1 = reg.f;
        g1 = reg.g;
        a.regularized = reg.changed;
    }
    SolverOptions so = options.solver;
    if (!(f1.is_affine() && g1.is_affine())) so.exact = false;
    a.records = CoincidenceSolver(f1, g1, v, so).solve(u);
    OrientationChoice o1 = o;
    a.index = index_from_records(a.records, o1);
    a.trace = trace_from_records(a.records, o1);
    return a;
}

inline IndexValue total_index(const EquivariantLift& f, const EquivariantLift& g, const OpenRegion& u,
                              const DomainMarker& v, const OrientationChoice& o, const ComputeOptions& options = {}) {
    return analyze(f, g, u, v, o, options).index;
}

inline TraceValue reidemeister_trace(const EquivariantLift& f, const EquivariantLift& g, const OpenRegion& u,
                                     const OrientationChoice& o, const ComputeOptions& options = {},
                                     const DomainMarker& v = DomainMarker::whole_manifold()) {
    return analyze(f, g, u, v, o, options).trace;
}

} // namespace nielsen
