#include <slocc/linalg.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"

using namespace slocc;

TEST_CASE("rng streams are deterministic and seed-separated") {
    Rng a(42), b(42), c(43);
    for (int i = 0; i < 64; ++i) CHECK(a.bits() == b.bits());
    int differ = 0;
    Rng a2(42);
    for (int i = 0; i < 64; ++i)
        if (a2.bits() != c.bits()) ++differ;
    CHECK(differ > 32);
}

TEST_CASE("rng uniform and gaussian moments") {
    Rng rng(7);
    const int n = 20000;
    double usum = 0.0, gsum = 0.0, gsq = 0.0;
    for (int i = 0; i < n; ++i) {
        double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        usum += u;
        double g = rng.gaussian();
        gsum += g;
        gsq += g * g;
    }
    CHECK(std::abs(usum / n - 0.5) < 0.02);
    CHECK(std::abs(gsum / n) < 0.05);
    CHECK(std::abs(gsq / n - 1.0) < 0.08);
}

TEST_CASE("mix_seed separates stream labels") {
    CHECK(mix_seed(1, 2) == mix_seed(1, 2));
    CHECK(mix_seed(1, 2) != mix_seed(2, 1));
    CHECK(mix_seed(0, 0) != mix_seed(0, 1));
}

TEST_CASE("kron acts factorwise on products") {
    Rng rng(11);
    Matrix a(2, 3), b(3, 2);
    for (long i = 0; i < a.size(); ++i) a.data()[i] = rng.cgaussian();
    for (long i = 0; i < b.size(); ++i) b.data()[i] = rng.cgaussian();
    Vector x(3), y(2);
    for (long i = 0; i < 3; ++i) x[i] = rng.cgaussian();
    for (long i = 0; i < 2; ++i) y[i] = rng.cgaussian();

    Vector lhs = kron(a, b) * kron(Matrix(x), Matrix(y)).col(0);
    Vector rhs = kron(Matrix(a * x), Matrix(b * y)).col(0);
    CHECK((lhs - rhs).norm() < 1e-12 * rhs.norm());
}

TEST_CASE("vec_cm turns two-sided products into kron actions") {
    // vec(A X B) = (B^T kron A) vec(X), column-major vec
    Rng rng(12);
    Matrix a(3, 2), x(2, 4), b(4, 3);
    for (long i = 0; i < a.size(); ++i) a.data()[i] = rng.cgaussian();
    for (long i = 0; i < x.size(); ++i) x.data()[i] = rng.cgaussian();
    for (long i = 0; i < b.size(); ++i) b.data()[i] = rng.cgaussian();

    Vector lhs = vec_cm(a * x * b);
    Vector rhs = kron(b.transpose(), a) * vec_cm(x);
    CHECK((lhs - rhs).norm() < 1e-12 * rhs.norm());
    CHECK((unvec_cm(lhs, 3, 3) - a * x * b).norm() < 1e-14);
}

TEST_CASE("poly_roots on factored references") {
    // t^2 - 3t + 2 = (t-1)(t-2), ascending coefficients
    int infs = -1;
    std::vector<Complex> r = poly_roots({Complex(2), Complex(-3), Complex(1)}, &infs);
    REQUIRE(r.size() == 2);
    CHECK(infs == 0);
    std::sort(r.begin(), r.end(),
              [](const Complex& u, const Complex& v) { return u.real() < v.real(); });
    CHECK(std::abs(r[0] - Complex(1)) < 1e-12);
    CHECK(std::abs(r[1] - Complex(2)) < 1e-12);
}

TEST_CASE("poly_roots reports degree drops as roots at infinity") {
    // 2t + 4 padded with two (near-)zero leading coefficients
    int infs = -1;
    std::vector<Complex> r =
        poly_roots({Complex(4), Complex(2), Complex(0), Complex(1e-18)}, &infs);
    REQUIRE(r.size() == 1);
    CHECK(infs == 2);
    CHECK(std::abs(r[0] + Complex(2)) < 1e-12);

    // constant polynomial: no roots, nothing at infinity
    r = poly_roots({Complex(5)}, &infs);
    CHECK(r.empty());
    CHECK(infs == 0);
}

TEST_CASE("poly_roots handles complex conjugate pairs") {
    // t^2 + 1
    int infs = -1;
    std::vector<Complex> r = poly_roots({Complex(1), Complex(0), Complex(1)}, &infs);
    REQUIRE(r.size() == 2);
    std::sort(r.begin(), r.end(),
              [](const Complex& u, const Complex& v) { return u.imag() < v.imag(); });
    CHECK(std::abs(r[0] - Complex(0, -1)) < 1e-12);
    CHECK(std::abs(r[1] - Complex(0, 1)) < 1e-12);
}

TEST_CASE("random_invertible respects the condition bound") {
    for (int dim : {2, 3, 4}) {
        for (std::uint64_t seed : {1ull, 2ull, 3ull, 99ull}) {
            Matrix m = random_invertible(dim, seed, 100.0);
            REQUIRE(m.rows() == dim);
            Eigen::JacobiSVD<Matrix> svd(m);
            const auto& sv = svd.singularValues();
            CHECK(sv[sv.size() - 1] > 0.0);
            CHECK(sv[0] / sv[sv.size() - 1] <= 100.0 * (1.0 + 1e-12));
            // deterministic
            CHECK((m - random_invertible(dim, seed, 100.0)).norm() == 0.0);
        }
    }
}

TEST_CASE("smallest_singular_value matches a full SVD") {
    Rng rng(5);
    Matrix m(4, 4);
    for (long i = 0; i < m.size(); ++i) m.data()[i] = rng.cgaussian();
    Eigen::JacobiSVD<Matrix> svd(m);
    double ref = svd.singularValues()[3];
    CHECK(std::abs(smallest_singular_value(m) - ref) < 1e-10 * ref);

    m.col(3) = m.col(0);  // exactly singular
    CHECK(smallest_singular_value(m) < 1e-12 * m.norm());
}

TEST_CASE("chordal distance on the eigenvalue sphere") {
    EigPoint zero = EigPoint::finite(Complex(0));
    EigPoint one = EigPoint::finite(Complex(1));
    EigPoint inf = EigPoint::inf();
    CHECK(chordal_distance(zero, zero) == 0.0);
    CHECK(chordal_distance(inf, inf) == 0.0);
    CHECK(chordal_distance(zero, inf) > 0.9);
    CHECK(std::abs(chordal_distance(zero, one) - chordal_distance(one, zero)) < 1e-15);
    // large eigenvalues approach the point at infinity
    EigPoint big = EigPoint::finite(Complex(1e9));
    CHECK(chordal_distance(big, inf) < 1e-8);
}

TEST_CASE("null_space spans the kernel") {
    Matrix k(2, 3);
    k << 1, 0, 1,
         0, 1, 0;
    Matrix ns = null_space(k, 1e-10);
    REQUIRE(ns.cols() == 1);
    CHECK((k * ns).norm() < 1e-12);
    CHECK(std::abs(ns.col(0).norm() - 1.0) < 1e-12);
}
