#include <slocc/linalg.hpp>
#include <slocc/realign.hpp>

#include <vector>

#include "doctest.h"

using namespace slocc;

namespace {

Matrix random_dense(long r, long c, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(r, c);
    for (long i = 0; i < m.size(); ++i) m.data()[i] = rng.cgaussian();
    return m;
}

Matrix swap_gate() {
    Matrix s = Matrix::Zero(4, 4);
    s(0, 0) = s(1, 2) = s(2, 1) = s(3, 3) = Complex(1);
    return s;
}

}  // namespace

TEST_CASE("realign flattens each block into a row") {
    GroupShape g{2, 2, 2, 2};
    Matrix a = random_dense(2, 2, 1), b = random_dense(2, 2, 2);
    Matrix r = realign(kron(a, b), g);
    REQUIRE(r.rows() == 4);
    REQUIRE(r.cols() == 4);
    // realignment of a Kronecker product is an outer product, so rank one
    Eigen::JacobiSVD<Matrix> svd(r);
    CHECK(svd.singularValues()[1] < 1e-12 * svd.singularValues()[0]);
    CHECK(std::abs(r.norm() - kron(a, b).norm()) < 1e-12);

    CHECK_THROWS_AS(realign(Matrix::Identity(3, 3), g), Error);
}

TEST_CASE("kron_factor recovers both factors across shapes") {
    struct Case {
        GroupShape g;
        std::uint64_t seed;
    };
    for (const Case& cs : {Case{{2, 2, 2, 2}, 3}, Case{{2, 3, 2, 3}, 4}, Case{{3, 2, 3, 2}, 5},
                           Case{{3, 3, 3, 3}, 6}, Case{{2, 4, 2, 4}, 7}}) {
        Matrix a = random_dense(cs.g.d1, cs.g.e1, cs.seed);
        Matrix b = random_dense(cs.g.d2, cs.g.e2, cs.seed + 100);
        Matrix p = kron(a, b);
        KronFactors f = kron_factor(p, cs.g);
        CHECK(f.residual <= 1e-10);
        CHECK((kron(f.a, f.b) - p).norm() <= 1e-10 * p.norm());
        CHECK(f.sigma_ratio < 1e-8);
    }
}

TEST_CASE("kron_factor tolerates a small additive perturbation") {
    GroupShape g{2, 2, 2, 2};
    Matrix p = kron(random_dense(2, 2, 8), random_dense(2, 2, 9));
    Matrix noise = 1e-11 * random_dense(4, 4, 10);
    KronFactors f = kron_factor(p + noise, g, 1e-8);
    CHECK((kron(f.a, f.b) - p).norm() < 1e-9 * p.norm());
}

TEST_CASE("kron_factor rejects the swap gate") {
    GroupShape g{2, 2, 2, 2};
    CHECK_THROWS_AS(kron_factor(swap_gate(), g), NotAProduct);
}

TEST_CASE("kron_factor rejects generic invertible matrices") {
    GroupShape g{2, 2, 2, 2};
    int rejected = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Matrix m = random_invertible(4, seed, 100.0);
        double ratio;
        {
            Eigen::JacobiSVD<Matrix> svd(realign(m, g));
            ratio = svd.singularValues()[1] / svd.singularValues()[0];
        }
        if (ratio <= 1e-3) continue;  // not a clear non-product, skip
        try {
            kron_factor(m, g);
        } catch (const NotAProduct&) {
            ++rejected;
            continue;
        }
        FAIL("kron_factor accepted a matrix with realignment ratio " << ratio);
    }
    CHECK(rejected >= 18);
}

TEST_CASE("nearest_kron always returns the best rank-one fit") {
    GroupShape g{2, 2, 2, 2};
    Matrix p = kron(random_dense(2, 2, 11), random_dense(2, 2, 12));
    KronFactors f = nearest_kron(p, g);
    CHECK(f.residual < 1e-12);

    // swap has a flat realignment spectrum; the fit is poor but well defined
    KronFactors fs = nearest_kron(swap_gate(), g);
    CHECK(fs.residual > 0.5);
    CHECK(fs.a.rows() == 2);
    CHECK(fs.b.rows() == 2);
    // optimality: perturbing the factors does not improve the fit
    double base = (swap_gate() - kron(fs.a, fs.b)).norm();
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        Matrix da = fs.a + 1e-3 * random_dense(2, 2, 200 + seed);
        CHECK((swap_gate() - kron(da, fs.b)).norm() >= base - 1e-9);
    }
}

TEST_CASE("factor scale is balanced between the two sides") {
    GroupShape g{2, 2, 2, 2};
    Matrix a = 1e6 * random_dense(2, 2, 13);
    Matrix b = 1e-6 * random_dense(2, 2, 14);
    KronFactors f = kron_factor(kron(a, b), g);
    // the product is what matters; neither factor should carry an extreme norm
    CHECK(f.a.norm() < 1e4);
    CHECK(f.b.norm() < 1e4);
    CHECK((kron(f.a, f.b) - kron(a, b)).norm() < 1e-10 * kron(a, b).norm());
}
