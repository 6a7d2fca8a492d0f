#include <slocc/canonical.hpp>
#include <slocc/tensor.hpp>

#include <set>
#include <string>
#include <vector>

#include "doctest.h"

using namespace slocc;

namespace {

MatrixPencil pencil_of(const Matrix& g1, const Matrix& g2) {
    MatrixPencil pc;
    pc.g1 = g1;
    pc.g2 = g2;
    pc.row_group = {1, static_cast<int>(g1.rows())};
    pc.col_group = {static_cast<int>(g1.cols()), 1};
    return pc;
}

// Relative error of the claimed transforms: P (T-mix of the input) Q against
// the synthesized canonical pair.
double transform_error(const Matrix& g1, const Matrix& g2, const CanonicalResult& res) {
    auto [m1, m2] = apply_pair_transforms(g1, g2, res.tf);
    double num = std::sqrt((m1 - res.form.e).squaredNorm() + (m2 - res.form.j).squaredNorm());
    double den = std::sqrt(res.form.e.squaredNorm() + res.form.j.squaredNorm());
    return num / den;
}

Matrix scramble_mix(const Matrix& g1, const Matrix& g2, const Transforms& tf, int which) {
    auto [m1, m2] = apply_pair_transforms(g1, g2, tf);
    return which == 0 ? m1 : m2;
}

}  // namespace

TEST_CASE("regular pencil with two simple eigenvalues") {
    Matrix e = Matrix::Identity(2, 2), j(2, 2);
    j << Complex(1), Complex(0), Complex(0), Complex(2);
    CanonicalResult res = canonical_form(pencil_of(e, j));
    // two point clusters, no minimal indices
    CHECK(res.form.minimal_col.empty());
    CHECK(res.form.minimal_row.empty());
    int finite_total = 0;
    for (const FiniteBlock& b : res.form.finite_blocks) finite_total += b.size;
    int inf_total = 0;
    for (int s : res.form.inf_blocks) inf_total += s;
    CHECK(finite_total + inf_total == 2);
    CHECK(transform_error(e, j, res) < 1e-10);
}

TEST_CASE("jordan block is kept whole") {
    // J has a single eigenvalue with a 2-chain; the key must record one
    // size-2 block, not two 1-blocks
    Matrix e = Matrix::Identity(2, 2), j(2, 2);
    j << Complex(3), Complex(1), Complex(0), Complex(3);
    CanonicalResult res = canonical_form(pencil_of(e, j));
    bool has_2block = false;
    for (const FiniteBlock& b : res.form.finite_blocks) has_2block |= b.size == 2;
    for (int s : res.form.inf_blocks) has_2block |= s == 2;
    CHECK(has_2block);
    CHECK(transform_error(e, j, res) < 1e-10);
}

TEST_CASE("singular pencil yields minimal indices") {
    // 1x2 pencil (x, y): one right minimal index of 1, nothing else
    Matrix e(1, 2), j(1, 2);
    e << Complex(1), Complex(0);
    j << Complex(0), Complex(1);
    CanonicalResult res = canonical_form(pencil_of(e, j));
    CHECK(res.form.minimal_col == std::vector<int>{1});
    CHECK(res.form.minimal_row.empty());
    CHECK(res.form.finite_blocks.empty());
    CHECK(res.form.inf_blocks.empty());
    CHECK(transform_error(e, j, res) < 1e-10);
}

TEST_CASE("synthesized structures round-trip exactly") {
    struct Recipe {
        std::vector<int> eps, eta;
        std::vector<EigenCluster> clusters;
    };
    std::vector<Recipe> recipes = {
        {{0}, {}, {{EigPoint::inf(), {2}}, {EigPoint::finite(Complex(0)), {1}}}},
        {{}, {0}, {{EigPoint::inf(), {1, 1}}, {EigPoint::finite(Complex(1)), {1}}}},
        {{1}, {}, {{EigPoint::inf(), {2}}}},
        {{}, {}, {{EigPoint::inf(), {2, 2}}}},
        {{}, {}, {{EigPoint::inf(), {1}},
                  {EigPoint::finite(Complex(0)), {1}},
                  {EigPoint::finite(Complex(1)), {1}},
                  {EigPoint::finite(Complex(0.25, 0.5)), {1}}}},
        {{0, 1}, {0}, {{EigPoint::inf(), {1}}}},
    };
    for (const Recipe& rec : recipes) {
        auto [e, j] = detail::synthesize_pair(rec.eps, rec.eta, rec.clusters);
        CanonicalResult res = canonical_form(pencil_of(e, j));
        CHECK(res.form.minimal_col == rec.eps);
        CHECK(res.form.minimal_row == rec.eta);
        int want_blocks = 0;
        for (const EigenCluster& cl : rec.clusters) want_blocks += int(cl.sizes.size());
        CHECK(int(res.form.finite_blocks.size() + res.form.inf_blocks.size()) == want_blocks);
        CHECK(transform_error(e, j, res) < 1e-8);
    }
}

TEST_CASE("structure key is invariant under pencil equivalence") {
    auto [e, j] = detail::synthesize_pair(
        {0}, {}, {{EigPoint::inf(), {2}}, {EigPoint::finite(Complex(0)), {1}}});
    std::string key0 = canonical_form(pencil_of(e, j)).form.key();
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Transforms rnd;
        rnd.t = random_invertible(2, mix_seed(seed, 1), 20.0);
        rnd.p = random_invertible(int(e.rows()), mix_seed(seed, 2), 20.0);
        rnd.q = random_invertible(int(e.cols()), mix_seed(seed, 3), 20.0);
        Matrix h1 = scramble_mix(e, j, rnd, 0);
        Matrix h2 = scramble_mix(e, j, rnd, 1);
        CanonicalResult res = canonical_form(pencil_of(h1, h2));
        CHECK(res.form.key() == key0);
        CHECK(transform_error(h1, h2, res) < 1e-8);
    }
}

TEST_CASE("eigenvalue parameters survive equivalence up to the anchor map") {
    // four distinct simple eigenvalues: three are pinned by the gauge and the
    // fourth becomes the family parameter, which must be transform-invariant
    Complex lam(0.3, 0.7);
    auto [e, j] = detail::synthesize_pair({}, {},
                                          {{EigPoint::inf(), {1}},
                                           {EigPoint::finite(Complex(0)), {1}},
                                           {EigPoint::finite(Complex(1)), {1}},
                                           {EigPoint::finite(lam), {1}}});
    CanonicalResult base = canonical_form(pencil_of(e, j));
    REQUIRE(base.form.params.size() == 1);
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Transforms rnd;
        rnd.t = random_invertible(2, mix_seed(seed, 11), 10.0);
        rnd.p = random_invertible(4, mix_seed(seed, 12), 10.0);
        rnd.q = random_invertible(4, mix_seed(seed, 13), 10.0);
        Matrix h1 = scramble_mix(e, j, rnd, 0);
        Matrix h2 = scramble_mix(e, j, rnd, 1);
        CanonicalResult res = canonical_form(pencil_of(h1, h2));
        REQUIRE(res.form.params.size() == 1);
        CHECK(res.form.key() == base.form.key());
        CHECK(std::abs(res.form.params[0] - base.form.params[0]) < 1e-6);
    }
}

TEST_CASE("rank profile reads off the obvious ranks") {
    Matrix g1 = Matrix::Zero(3, 3), g2 = Matrix::Zero(3, 3);
    g1(0, 0) = g1(1, 1) = Complex(1);       // rank 2
    g2(1, 1) = g2(2, 2) = Complex(1);       // rank 2
    RankProfile rp = rank_profile(pencil_of(g1, g2));
    CHECK(rp.rank_g1 == 2);
    CHECK(rp.rank_g2 == 2);
    CHECK(rp.normal_rank == 3);
    CHECK(rp.rank_col_span == 3);
    CHECK(rp.rank_row_span == 3);
}

TEST_CASE("zero pencil is rejected") {
    Matrix z = Matrix::Zero(2, 2);
    CHECK_THROWS_AS(canonical_form(pencil_of(z, z)), Error);
}

TEST_CASE("keys of distinct structures differ") {
    std::set<std::string> keys;
    std::vector<std::pair<Matrix, Matrix>> pairs;
    pairs.push_back(detail::synthesize_pair({}, {}, {{EigPoint::inf(), {2}}}));
    pairs.push_back(detail::synthesize_pair({}, {}, {{EigPoint::inf(), {1, 1}}}));
    pairs.push_back(detail::synthesize_pair({0}, {0}, {{EigPoint::inf(), {1}}}));
    pairs.push_back(detail::synthesize_pair(
        {}, {}, {{EigPoint::inf(), {1}}, {EigPoint::finite(Complex(0)), {1}}}));
    for (const auto& [e, j] : pairs)
        keys.insert(canonical_form(pencil_of(e, j)).form.key());
    CHECK(keys.size() == pairs.size());
}

TEST_CASE("commutant pairs satisfy the defining equations") {
    auto [e, j] = detail::synthesize_pair(
        {}, {}, {{EigPoint::inf(), {2}}, {EigPoint::finite(Complex(0)), {2}}});
    auto [xs, ys] = commutant_pairs(e, j, Matrix::Identity(2, 2));
    REQUIRE(!xs.empty());
    REQUIRE(xs.size() == ys.size());
    for (std::size_t k = 0; k < xs.size(); ++k) {
        CHECK((xs[k] * e - e * ys[k]).norm() < 1e-9);
        CHECK((xs[k] * j - j * ys[k]).norm() < 1e-9);
    }
    // the identity pair is always a member of the V = I component
    StandardForm form;
    form.e = e;
    form.j = j;
    CommutantDescriptor d = commutant_basis(form);
    CHECK(d.dim == int(xs.size()));
    CHECK(d.identity_in_span);
}
