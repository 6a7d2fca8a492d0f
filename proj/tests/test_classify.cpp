#include <slocc/classify.hpp>

#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"

using namespace slocc;

namespace {

std::string label_key(const FamilyLabel& lb) {
    std::string k = lb.structure;
    k += lb.transposed ? "|T" : "";
    k += "|";
    k += lb.params_text();
    return k;
}

StateTensor ghz() {
    return oracle::kets({2, 2, 2}, {{{0, 0, 0}, Complex(1)}, {{1, 1, 1}, Complex(1)}});
}

StateTensor w_state() {
    return oracle::kets({2, 2, 2}, {{{0, 0, 1}, Complex(1)},
                                    {{0, 1, 0}, Complex(1)},
                                    {{1, 0, 0}, Complex(1)}});
}

}  // namespace

TEST_CASE("three-qubit labels separate the classical classes") {
    StateTensor product = oracle::kets({2, 2, 2}, {{{0, 0, 0}, Complex(1)}});
    StateTensor bisep_a = oracle::kets(  // A free, BC entangled
        {2, 2, 2}, {{{0, 0, 0}, Complex(1)}, {{0, 1, 1}, Complex(1)}});
    StateTensor bisep_b = oracle::kets(  // B free, AC entangled
        {2, 2, 2}, {{{0, 0, 0}, Complex(1)}, {{1, 0, 1}, Complex(1)}});
    StateTensor bisep_c = oracle::kets(  // C free, AB entangled
        {2, 2, 2}, {{{0, 0, 0}, Complex(1)}, {{1, 1, 0}, Complex(1)}});

    std::vector<StateTensor> states{product, bisep_a, bisep_b, bisep_c, ghz(), w_state()};
    std::vector<std::string> oracle_class, keys;
    for (const StateTensor& s : states) {
        oracle_class.push_back(oracle::three_qubit_class(s));
        keys.push_back(label_key(classify(s).label));
    }
    // six pairwise-distinct classes on both sides
    for (std::size_t i = 0; i < states.size(); ++i)
        for (std::size_t j = i + 1; j < states.size(); ++j) {
            CHECK(oracle_class[i] != oracle_class[j]);
            CHECK(keys[i] != keys[j]);
        }
}

TEST_CASE("generic three-qubit states agree with the discriminant oracle") {
    std::map<std::string, std::string> class_of_key;
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        StateTensor s = random_state({2, 2, 2}, seed);
        std::string cls = oracle::three_qubit_class(s);
        std::string key = label_key(classify(s).label);
        auto it = class_of_key.find(key);
        if (it == class_of_key.end())
            class_of_key[key] = cls;
        else
            CHECK(it->second == cls);
    }
    // random states are generically GHZ-class; the map has a single cell
    CHECK(class_of_key.size() == 1);
    CHECK(class_of_key.begin()->second == "GHZ");
}

TEST_CASE("genuine entanglement flag matches the regime") {
    Classification ghz_c = classify(ghz());
    CHECK(ghz_c.genuine);
    Classification prod_c = classify(oracle::kets({2, 2, 2}, {{{1, 1, 1}, Complex(1)}}));
    CHECK(!prod_c.genuine);
}

TEST_CASE("classification is invariant under local invertible operators") {
    StateTensor s = random_state({2, 3, 4}, 5);
    FamilyLabel base = classify(s).label;
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        LocalOperatorTuple t = random_local_tuple(s.dims(), seed, 100.0);
        FamilyLabel moved = classify(apply_local_ops(s, t)).label;
        CHECK(same_family(base, moved));
        CHECK(moved.structure == base.structure);
    }
}

TEST_CASE("compare is reflexive through the direct phase") {
    StateTensor s = random_state({2, 2, 2, 2, 2}, 6);
    CompareResult r = compare(s, s);
    REQUIRE(r.status == CompareStatus::Equivalent);
    REQUIRE(r.certificate.has_value());
    CHECK(r.certificate->phase == "direct");
    CHECK(r.certificate->residual < 1e-10);
}

TEST_CASE("compare distinguishes dims mismatch from inequivalence") {
    StateTensor a = random_state({2, 2, 2}, 7);
    StateTensor b = random_state({2, 2, 3}, 7);
    CHECK(compare(a, b).status == CompareStatus::DimsMismatch);

    CompareResult r = compare(ghz(), w_state());
    CHECK(r.status == CompareStatus::Inequivalent);
    CHECK(!r.reason.empty());
}

TEST_CASE("certificates reproduce the target state when applied") {
    for (const std::vector<int>& dims :
         {std::vector<int>{2, 3, 3}, std::vector<int>{2, 2, 2, 2, 2}}) {
        StateTensor a = random_state(dims, 8);
        LocalOperatorTuple t = random_local_tuple(dims, 9, 50.0);
        StateTensor b = apply_local_ops(a, t);

        CompareOptions opts;
        opts.budget.seed = 1;
        CompareResult r = compare(a, b, opts);
        REQUIRE(r.status == CompareStatus::Equivalent);
        REQUIRE(r.certificate.has_value());
        REQUIRE(r.certificate->ops.size() == dims.size());

        // independent check: apply the certified operators to a
        LocalOperatorTuple cert;
        cert.ops = r.certificate->ops;
        StateTensor image = apply_local_ops(a, cert);
        double rel = state_distance(image, b) / b.norm();
        CHECK(rel <= 1e-8);
        CHECK(r.certificate->residual <= 1e-8);
    }
}

TEST_CASE("compare verdicts are deterministic for a fixed seed") {
    StateTensor a = random_state({2, 2, 2, 2, 2}, 10);
    LocalOperatorTuple t = random_local_tuple(a.dims(), 11, 50.0);
    StateTensor b = apply_local_ops(a, t);

    CompareOptions opts;
    opts.budget.seed = 5;
    CompareResult r1 = compare(a, b, opts);
    CompareResult r2 = compare(a, b, opts);
    CHECK(r1.status == r2.status);
    CHECK(r1.best_residual == r2.best_residual);
    if (r1.certificate && r2.certificate) {
        CHECK(r1.certificate->phase == r2.certificate->phase);
        CHECK((r1.certificate->ops[0] - r2.certificate->ops[0]).norm() == 0.0);
    }
}

TEST_CASE("json reports carry the full verdict") {
    StateTensor a = random_state({2, 2, 2}, 12);
    Classification c = classify(a);
    Json j = c.to_json();
    CHECK(j.contains("family"));
    CHECK(j.contains("standard_form"));
    CHECK(j["family"].contains("structure"));

    CompareResult r = compare(a, a);
    Json jr = r.to_json();
    CHECK(jr["status"] == "equivalent");
    CHECK(jr.contains("certificate"));
}
