// Built-in family catalog for the five-qubit system 2x2x2x2x2.
//
// The flattened pencil of a five-qubit state is 4x4.  Families whose pencil
// has full effective support correspond to the sixteen standard-form
// structures of a proper 4x4 pair; the remaining families have degenerate
// support and reduce to the full-size structures of the effective shapes
// 2x2, 2x3, 2x4, 3x3 and 3x4 (2, 2, 1, 6 and 5 families), thirty-two in
// total.  Entries 1..16 are the degenerate families as explicit basis-ket
// combinations; entries 17..32 are synthesized directly from the canonical
// block pairs of the full-size structures.
#pragma once

#include "slocc/classify.hpp"

#include <optional>

namespace slocc {

struct CatalogEntry {
    int id = 0;
    std::string name;
    std::string source_system;  // effective tripartite shape
    std::string note;
    bool parameterized = false;  // family carries a free eigenvalue parameter
    StateTensor state;
    FamilyLabel label;

    Json to_json(bool with_state = true) const {
        Json j;
        j["id"] = id;
        j["name"] = name;
        j["source_system"] = source_system;
        j["note"] = note;
        j["parameterized"] = parameterized;
        j["structure"] = label.structure;
        j["params_text"] = label.params_text();
        if (with_state) j["state"] = save_state(state);
        return j;
    }
};

namespace detail {

// State with coefficient one on each listed basis ket (1-based indices).
inline StateTensor ket_state(const std::vector<std::array<int, 5>>& kets) {
    std::vector<Complex> data(32, Complex(0, 0));
    for (const std::array<int, 5>& k : kets) {
        long off = 0;
        for (int j = 0; j < 5; ++j) off = off * 2 + (k[j] - 1);
        data[off] += Complex(1, 0);
    }
    return StateTensor({2, 2, 2, 2, 2}, std::move(data));
}

// Five-qubit state whose pencil is the synthesized canonical pair of the
// given full-size structure.
inline StateTensor structure_state(const std::vector<int>& eps, const std::vector<int>& eta,
                                   const std::vector<EigenCluster>& clusters) {
    auto [e, j] = synthesize_pair(eps, eta, clusters);
    if (e.rows() != 4 || e.cols() != 4) throw Error("catalog: structure is not 4x4");
    return state_from_pair(e, j, {2, 2, 2, 2, 2});
}

inline EigenCluster at_inf(std::vector<int> sizes) {
    EigenCluster c;
    c.center = EigPoint::inf();
    c.sizes = std::move(sizes);
    return c;
}

inline EigenCluster at(Complex z, std::vector<int> sizes) {
    EigenCluster c;
    c.center = EigPoint::finite(z);
    c.sizes = std::move(sizes);
    return c;
}

inline std::vector<CatalogEntry> build_catalog() {
    std::vector<CatalogEntry> out;
    auto add = [&out](const char* name, const char* src, const char* note, bool param,
                      StateTensor st) {
        FamilyLabel lb = classify(st).label;
        out.push_back(CatalogEntry{static_cast<int>(out.size()) + 1, name, src, note, param,
                                   std::move(st), std::move(lb)});
    };

    // -- degenerate support: effective 2x2 --
    add("fam01", "2x2x2", "rank-two pair, two simple eigenvalue positions", false,
        ket_state({{1, 1, 1, 1, 1}, {2, 2, 2, 2, 2}}));
    add("fam02", "2x2x2", "rank-two pair, one size-two eigenvalue block", false,
        ket_state({{1, 1, 1, 1, 1}, {1, 2, 2, 2, 2}, {2, 1, 1, 2, 2}}));

    // -- effective 2x3 --
    add("fam03", "2x2x3", "degree-one column chain plus a simple eigenvalue", false,
        ket_state({{1, 1, 1, 1, 1}, {1, 1, 2, 1, 2}, {2, 1, 2, 2, 1}}));
    add("fam04", "2x2x3", "degree-two column chain", false,
        ket_state({{1, 1, 1, 1, 1}, {1, 1, 2, 1, 2}, {2, 1, 1, 1, 2}, {2, 1, 2, 2, 1}}));

    // -- effective 2x4 --
    add("fam05", "2x2x4", "two degree-one column chains", false,
        ket_state({{1, 1, 1, 1, 1}, {1, 1, 2, 1, 2}, {2, 1, 1, 2, 1}, {2, 1, 2, 2, 2}}));

    // -- effective 3x3 --
    add("fam06", "2x3x3", "blocks [1,1] and [1] at two positions", false,
        ket_state({{1, 1, 1, 1, 1}, {1, 1, 2, 1, 2}, {2, 2, 1, 2, 1}}));
    add("fam07", "2x3x3", "blocks [2,1] at one position", false,
        ket_state({{1, 1, 1, 1, 1}, {1, 1, 2, 1, 2}, {1, 2, 1, 2, 1}, {2, 1, 1, 1, 2}}));
    add("fam08", "2x3x3", "three simple eigenvalue positions", false,
        ket_state({{1, 1, 1, 1, 1}, {1, 1, 2, 1, 2}, {2, 1, 2, 1, 2}, {2, 2, 1, 2, 1}}));
    add("fam09", "2x3x3", "blocks [2] and [1] at two positions", false,
        ket_state({{1, 1, 1, 1, 1}, {1, 1, 2, 1, 2}, {2, 1, 1, 1, 2}, {2, 2, 1, 2, 1}}));
    add("fam10", "2x3x3", "degree-one chains on both sides, no eigenvalues", false,
        ket_state({{1, 1, 1, 1, 1}, {1, 1, 2, 1, 2}, {2, 1, 2, 2, 1}, {2, 2, 1, 1, 1}}));
    add("fam11", "2x3x3", "single size-three eigenvalue block", false,
        ket_state({{1, 1, 1, 1, 1}, {1, 1, 2, 1, 2}, {1, 2, 1, 2, 1}, {2, 1, 1, 1, 2},
                   {2, 1, 2, 2, 1}}));

    // -- effective 3x4 --
    add("fam12", "2x3x4", "degree-one column chain plus blocks [1,1]", false,
        ket_state({{1, 1, 1, 1, 1}, {1, 1, 2, 1, 2}, {1, 2, 1, 2, 1}, {2, 2, 1, 2, 2}}));
    add("fam13", "2x3x4", "degree-one column chain plus a size-two block", false,
        ket_state({{1, 1, 1, 1, 1}, {1, 1, 2, 1, 2}, {1, 2, 1, 2, 1}, {2, 1, 1, 1, 2},
                   {2, 2, 1, 2, 2}}));
    add("fam14", "2x3x4", "degree-one column chain plus two simple positions", false,
        ket_state({{1, 1, 1, 1, 1}, {1, 1, 2, 1, 2}, {1, 2, 1, 2, 1}, {2, 1, 1, 1, 1},
                   {2, 2, 1, 2, 2}}));
    add("fam15", "2x3x4", "degree-two column chain plus a simple eigenvalue", false,
        ket_state({{1, 1, 1, 1, 1}, {1, 1, 2, 1, 2}, {1, 2, 1, 2, 1}, {2, 1, 2, 2, 1},
                   {2, 2, 1, 2, 2}}));
    add("fam16", "2x3x4", "degree-three column chain", false,
        ket_state({{1, 1, 1, 1, 1}, {1, 1, 2, 1, 2}, {1, 2, 1, 2, 1}, {2, 1, 1, 1, 2},
                   {2, 1, 2, 2, 1}, {2, 2, 1, 2, 2}}));

    // -- full support: proper 4x4 structures --
    const Complex zero(0, 0), one(1, 0), lam(-1, 0);
    add("fam17", "2x4x4", "single size-four eigenvalue block", false,
        structure_state({}, {}, {at_inf({4})}));
    add("fam18", "2x4x4", "blocks [3,1] at one position", false,
        structure_state({}, {}, {at_inf({3, 1})}));
    add("fam19", "2x4x4", "blocks [2,2] at one position", false,
        structure_state({}, {}, {at_inf({2, 2})}));
    add("fam20", "2x4x4", "blocks [2,1,1] at one position", false,
        structure_state({}, {}, {at_inf({2, 1, 1})}));
    add("fam21", "2x4x4", "blocks [3] and [1] at two positions", false,
        structure_state({}, {}, {at_inf({3}), at(zero, {1})}));
    add("fam22", "2x4x4", "blocks [2,1] and [1] at two positions", false,
        structure_state({}, {}, {at_inf({2, 1}), at(zero, {1})}));
    add("fam23", "2x4x4", "blocks [2] and [2] at two positions", false,
        structure_state({}, {}, {at_inf({2}), at(zero, {2})}));
    add("fam24", "2x4x4", "blocks [2] and [1,1] at two positions", false,
        structure_state({}, {}, {at_inf({2}), at(zero, {1, 1})}));
    add("fam25", "2x4x4", "blocks [1,1] and [1,1] at two positions", false,
        structure_state({}, {}, {at_inf({1, 1}), at(zero, {1, 1})}));
    add("fam26", "2x4x4", "blocks [1,1,1] and [1] at two positions", false,
        structure_state({}, {}, {at_inf({1, 1, 1}), at(zero, {1})}));
    add("fam27", "2x4x4", "blocks [2], [1], [1] at three positions", false,
        structure_state({}, {}, {at_inf({2}), at(zero, {1}), at(one, {1})}));
    add("fam28", "2x4x4", "blocks [1,1], [1], [1] at three positions", false,
        structure_state({}, {}, {at_inf({1, 1}), at(zero, {1}), at(one, {1})}));
    add("fam29", "2x4x4", "four simple positions, free cross-ratio parameter", true,
        structure_state({}, {}, {at_inf({1}), at(zero, {1}), at(one, {1}), at(lam, {1})}));
    add("fam30", "2x4x4", "degree-one chains on both sides plus a simple eigenvalue", false,
        structure_state({1}, {1}, {at_inf({1})}));
    add("fam31", "2x4x4", "degree-one column chain, degree-two row chain", false,
        structure_state({1}, {2}, {}));
    add("fam32", "2x4x4", "degree-two column chain, degree-one row chain", false,
        structure_state({2}, {1}, {}));

    return out;
}

}  // namespace detail

class Catalog {
public:
    static const Catalog& instance() {
        static Catalog c;
        return c;
    }

    const std::vector<CatalogEntry>& entries() const { return entries_; }

    const CatalogEntry& representative(int id) const {
        for (const CatalogEntry& e : entries_)
            if (e.id == id) return e;
        throw Error("catalog: no entry with id " + std::to_string(id));
    }

    // Catalog slot of a label; parameterized entries match any value of
    // their free parameter.
    std::optional<int> match(const FamilyLabel& lb) const {
        for (const CatalogEntry& e : entries_) {
            if (e.label.dims != lb.dims || e.label.transposed != lb.transposed ||
                e.label.structure != lb.structure)
                continue;
            if (e.parameterized || same_family(e.label, lb)) return e.id;
        }
        return std::nullopt;
    }

    Json to_json(bool with_states = true) const {
        Json j;
        j["system"] = "2x2x2x2x2";
        j["count"] = entries_.size();
        Json arr = Json::array();
        for (const CatalogEntry& e : entries_) arr.push_back(e.to_json(with_states));
        j["entries"] = arr;
        return j;
    }

private:
    Catalog() : entries_(detail::build_catalog()) {}
    std::vector<CatalogEntry> entries_;
};

// Random-state census: classify `samples` seeded states and tally which
// catalog slot each lands in.
struct CensusReport {
    std::vector<int> dims;
    int samples = 0;
    std::vector<long> counts;  // aligned with catalog entry order
    long unmatched = 0;
    long unstable = 0;
    std::vector<std::string> unmatched_keys;

    Json to_json() const {
        const Catalog& cat = Catalog::instance();
        Json j;
        j["dims"] = dims;
        j["samples"] = samples;
        Json rows = Json::array();
        for (std::size_t i = 0; i < counts.size(); ++i)
            if (counts[i] > 0)
                rows.push_back(Json{{"id", cat.entries()[i].id},
                                    {"name", cat.entries()[i].name},
                                    {"count", counts[i]}});
        j["matched"] = rows;
        j["unmatched"] = unmatched;
        j["unstable"] = unstable;
        j["unmatched_keys"] = unmatched_keys;
        return j;
    }
};

inline CensusReport family_census(const std::vector<int>& dims, int samples,
                                  std::uint64_t seed) {
    const Catalog& cat = Catalog::instance();
    CensusReport r;
    r.dims = dims;
    r.samples = samples;
    r.counts.assign(cat.entries().size(), 0);
    for (int i = 0; i < samples; ++i) {
        StateTensor st = random_state(dims, mix_seed(seed, 0xce9505 + i));
        try {
            FamilyLabel lb = classify(st).label;
            if (std::optional<int> id = cat.match(lb)) {
                ++r.counts[*id - 1];
            } else {
                ++r.unmatched;
                bool seen = false;
                for (const std::string& k : r.unmatched_keys) seen = seen || k == lb.structure;
                if (!seen) r.unmatched_keys.push_back(lb.structure);
            }
        } catch (const RankDecisionUnstable&) {
            ++r.unstable;
        }
    }
    return r;
}

}  // namespace slocc
