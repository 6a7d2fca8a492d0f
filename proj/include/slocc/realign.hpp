// Kronecker-structure tests through matrix realignment.  A block matrix P
// of shape (d1*d2) x (e1*e2) is rearranged so that P = A kron B holds
// exactly when the rearranged matrix has rank one:
//
//   realign(A kron B) = vec(A) vec(B)^T   (column-major vec)
//
// with realign(P)[(b-1)*d1 + a, (d-1)*d2 + c] = P[(a-1)*d2 + c, (b-1)*e2 + d]
// in 1-based notation.
#pragma once

#include "slocc/linalg.hpp"

namespace slocc {

struct NotAProduct : Error {
    explicit NotAProduct(const std::string& what) : Error(what) {}
};

struct GroupShape {
    int d1, d2;  // row blocks: d1 blocks of height d2
    int e1, e2;  // column blocks: e1 blocks of width e2
};

inline Matrix realign(const Matrix& p, const GroupShape& g) {
    if (p.rows() != long(g.d1) * g.d2 || p.cols() != long(g.e1) * g.e2)
        throw Error("realign: shape does not match grouping");
    Matrix r(long(g.d1) * g.e1, long(g.d2) * g.e2);
    for (int a = 0; a < g.d1; ++a)
        for (int b = 0; b < g.e1; ++b)
            for (int c = 0; c < g.d2; ++c)
                for (int d = 0; d < g.e2; ++d)
                    r(b * g.d1 + a, d * g.d2 + c) = p(a * g.d2 + c, b * g.e2 + d);
    return r;
}

inline Matrix unrealign(const Matrix& r, const GroupShape& g) {
    if (r.rows() != long(g.d1) * g.e1 || r.cols() != long(g.d2) * g.e2)
        throw Error("unrealign: shape does not match grouping");
    Matrix p(long(g.d1) * g.d2, long(g.e1) * g.e2);
    for (int a = 0; a < g.d1; ++a)
        for (int b = 0; b < g.e1; ++b)
            for (int c = 0; c < g.d2; ++c)
                for (int d = 0; d < g.e2; ++d)
                    p(a * g.d2 + c, b * g.e2 + d) = r(b * g.d1 + a, d * g.d2 + c);
    return p;
}

struct RealignmentReport {
    RealVector singular_values;
    int rank = 0;
    double sigma_ratio = 0.0;  // sigma_2 / sigma_1, zero when rank <= 1
    bool is_kron = false;
};

inline RealignmentReport realignment_report(const Matrix& p, const GroupShape& g,
                                            double tol = 1e-8) {
    Matrix r = realign(p, g);
    Eigen::JacobiSVD<Matrix> svd(r);
    RealignmentReport rep;
    rep.singular_values = svd.singularValues();
    double smax = rep.singular_values.size() ? rep.singular_values[0] : 0.0;
    if (smax > 0.0) {
        int k = 0;
        while (k < rep.singular_values.size() && rep.singular_values[k] > tol * smax) ++k;
        rep.rank = k;
        if (rep.singular_values.size() > 1) rep.sigma_ratio = rep.singular_values[1] / smax;
    }
    rep.is_kron = (smax > 0.0) && rep.sigma_ratio <= tol;
    return rep;
}

struct KronFactors {
    Matrix a;             // d1 x e1
    Matrix b;             // d2 x e2
    double sigma_ratio;   // sigma_2 / sigma_1 of the realigned matrix
    double residual;      // ||P - A kron B||_F / ||P||_F
};

namespace detail {

inline KronFactors kron_split(const Matrix& p, const GroupShape& g) {
    Matrix r = realign(p, g);
    Eigen::JacobiSVD<Matrix> svd(r, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RealVector& sv = svd.singularValues();
    double s1 = sv.size() ? sv[0] : 0.0;
    if (s1 == 0.0) throw Error("kron factorization: zero matrix");
    KronFactors f;
    f.sigma_ratio = sv.size() > 1 ? sv[1] / s1 : 0.0;
    double tail2 = 0.0, all2 = 0.0;
    for (int i = 0; i < sv.size(); ++i) {
        all2 += sv[i] * sv[i];
        if (i > 0) tail2 += sv[i] * sv[i];
    }
    f.residual = std::sqrt(tail2 / all2);
    // realign(A kron B) = vec(A) vec(B)^T, while the SVD gives s1 * u * v^H;
    // hence vec(B) is the conjugate of v.
    Vector va = std::sqrt(s1) * svd.matrixU().col(0);
    Vector vb = std::sqrt(s1) * svd.matrixV().col(0).conjugate();
    f.a = unvec_cm(va, g.d1, g.e1);
    f.b = unvec_cm(vb, g.d2, g.e2);
    // Fix the scalar gauge: first nonzero entry of A in row-major order is
    // made real positive.
    Complex pivot(0.0, 0.0);
    for (int i = 0; i < f.a.rows() && pivot == Complex(0.0, 0.0); ++i)
        for (int j = 0; j < f.a.cols() && pivot == Complex(0.0, 0.0); ++j)
            if (std::abs(f.a(i, j)) > 1e-14 * std::sqrt(s1)) pivot = f.a(i, j);
    if (pivot != Complex(0.0, 0.0)) {
        Complex phase = pivot / std::abs(pivot);
        f.a /= phase;
        f.b *= phase;
    }
    return f;
}

}  // namespace detail

// Splits P into A kron B; throws NotAProduct when the realigned matrix is
// not rank one within tol.
inline KronFactors kron_factor(const Matrix& p, const GroupShape& g, double tol = 1e-8) {
    KronFactors f = detail::kron_split(p, g);
    if (f.sigma_ratio > tol)
        throw NotAProduct("kron_factor: second singular value ratio " +
                          std::to_string(f.sigma_ratio) + " exceeds tolerance");
    return f;
}

// Best rank-one Kronecker approximation, never throws on nonzero input.
inline KronFactors nearest_kron(const Matrix& p, const GroupShape& g) {
    return detail::kron_split(p, g);
}

}  // namespace slocc
