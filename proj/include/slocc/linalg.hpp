// Shared dense complex linear algebra helpers: deterministic sampling,
// thresholded rank decisions, null spaces, Kronecker products and small
// polynomial utilities built on Eigen.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace slocc {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a thresholded rank decision has no usable singular-value gap,
// so any structure derived from it would be numerically meaningless.
struct RankDecisionUnstable : Error {
    explicit RankDecisionUnstable(const std::string& what) : Error(what) {}
};

struct ParseError : Error {
    explicit ParseError(const std::string& what) : Error(what) {}
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace detail

// Derives an independent stream seed from (seed, tag) pairs.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t x = seed ^ (0x9e3779b97f4a7c15ULL * (tag + 1));
    detail::splitmix64(x);
    return detail::splitmix64(x);
}

// Deterministic random source.  Gaussian values come from an explicit
// Box-Muller transform because std::normal_distribution is free to differ
// between standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform() {  // [0, 1)
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u = 1.0 - uniform();  // (0, 1], keeps log() finite
        double v = uniform();
        double r = std::sqrt(-2.0 * std::log(u));
        double a = 2.0 * M_PI * v;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    Complex cgaussian() {
        double re = gaussian();
        double im = gaussian();
        return Complex(re, im);
    }

    std::uint64_t bits() { return eng_(); }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

inline Matrix random_gaussian(int rows, int cols, Rng& rng) {
    Matrix m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) m(i, j) = rng.cgaussian();
    return m;
}

// Haar-like unitary from the QR factorization of a Gaussian matrix.
inline Matrix random_unitary(int dim, Rng& rng) {
    Matrix g = random_gaussian(dim, dim, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
    // Fix the phase ambiguity so the result is a deterministic function of
    // the input stream.
    Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < dim; ++j) {
        Complex d = r(j, j);
        double a = std::abs(d);
        if (a > 0) q.col(j) *= d / a;
    }
    return q;
}

// Invertible matrix U * diag(sigma) * V^H with each sigma drawn uniformly
// from [1, cond_bound], so the condition number never exceeds cond_bound.
inline Matrix random_invertible(int dim, std::uint64_t seed, double cond_bound = 100.0) {
    if (dim < 1) throw Error("random_invertible: dimension must be positive");
    if (cond_bound < 1.0) throw Error("random_invertible: cond_bound must be >= 1");
    Rng rng(mix_seed(seed, 0x1770c7));
    Matrix u = random_unitary(dim, rng);
    Matrix v = random_unitary(dim, rng);
    RealVector sigma(dim);
    for (int i = 0; i < dim; ++i) sigma[i] = 1.0 + (cond_bound - 1.0) * rng.uniform();
    return u * sigma.asDiagonal() * v.adjoint();
}

struct RankDecision {
    int rank = 0;
    RealVector singular_values;
    // Ratio between the smallest kept and largest dropped singular value;
    // infinity when nothing is dropped.
    double gap = std::numeric_limits<double>::infinity();
    bool clean = true;  // false when the gap is too small to trust
};

// The cutoff is relative to the largest singular value, or to scale_floor
// when that is larger.  The floor matters for submatrices of a normalized
// problem: a block whose entries are all roundoff-sized reads as exact zero
// at the outer scale, while its self-relative spectrum is pure noise.
inline RankDecision rank_decide(const Matrix& m, double tol, double scale_floor = 0.0) {
    RankDecision d;
    if (m.rows() == 0 || m.cols() == 0) return d;
    Eigen::JacobiSVD<Matrix> svd(m);
    d.singular_values = svd.singularValues();
    double smax = d.singular_values.size() ? d.singular_values[0] : 0.0;
    if (smax == 0.0 && scale_floor == 0.0) return d;
    double cut = tol * std::max(smax, scale_floor);
    int r = 0;
    while (r < d.singular_values.size() && d.singular_values[r] > cut) ++r;
    d.rank = r;
    if (r < d.singular_values.size() && d.singular_values[r] > 0.0) {
        // confidence in the cut: kept-to-dropped ratio, or headroom below
        // the floor when everything is dropped
        double kept = (r > 0) ? d.singular_values[r - 1] : cut;
        d.gap = kept / d.singular_values[r];
        d.clean = d.gap >= 10.0;
    }
    return d;
}

inline int rank_at(const Matrix& m, double tol) { return rank_decide(m, tol).rank; }

// Orthonormal basis of the kernel, columns of the returned matrix.
inline Matrix null_space(const Matrix& m, double tol, RankDecision* decision = nullptr) {
    if (m.rows() == 0) {
        if (decision) *decision = RankDecision{};
        return Matrix::Identity(m.cols(), m.cols());
    }
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
    RealVector sv = svd.singularValues();
    double smax = sv.size() ? sv[0] : 0.0;
    double cut = tol * smax;
    int r = 0;
    while (r < sv.size() && sv[r] > cut) ++r;
    if (decision) {
        decision->rank = r;
        decision->singular_values = sv;
        decision->gap = std::numeric_limits<double>::infinity();
        decision->clean = true;
        if (r < sv.size() && sv[r] > 0.0) {
            double kept = (r > 0) ? sv[r - 1] : smax;
            decision->gap = kept / sv[r];
            decision->clean = decision->gap >= 10.0;
        }
    }
    return svd.matrixV().rightCols(m.cols() - r);
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// Column-major vectorization, vec(A X B) = (B^T kron A) vec(X).
inline Vector vec_cm(const Matrix& m) {
    Vector v(m.size());
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) v[k++] = m(i, j);
    return v;
}

inline Matrix unvec_cm(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
    if (v.size() != rows * cols) throw Error("unvec_cm: size mismatch");
    Matrix m(rows, cols);
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = v[k++];
    return m;
}

inline double smallest_singular_value(const Matrix& m) {
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& sv = svd.singularValues();
    return sv.size() ? sv[sv.size() - 1] : 0.0;
}

// --- small polynomial helpers -------------------------------------------

inline Complex poly_eval(const std::vector<Complex>& c, Complex z) {
    Complex acc(0.0, 0.0);
    for (std::size_t k = c.size(); k-- > 0;) acc = acc * z + c[k];
    return acc;
}

inline std::vector<Complex> poly_derivative(const std::vector<Complex>& c) {
    if (c.size() <= 1) return {Complex(0.0, 0.0)};
    std::vector<Complex> d(c.size() - 1);
    for (std::size_t k = 1; k < c.size(); ++k) d[k - 1] = double(k) * c[k];
    return d;
}

// Roots via the companion matrix.  Leading coefficients below
// strip_tol * max|c| are treated as exact zeros; each stripped degree is
// reported through inf_count (a root escaped to infinity).
inline std::vector<Complex> poly_roots(std::vector<Complex> c, int* inf_count,
                                       double strip_tol = 1e-12) {
    int infs = 0;
    double cmax = 0.0;
    for (const Complex& x : c) cmax = std::max(cmax, std::abs(x));
    if (cmax == 0.0) {
        if (inf_count) *inf_count = 0;
        return {};
    }
    while (c.size() > 1 && std::abs(c.back()) <= strip_tol * cmax) {
        c.pop_back();
        ++infs;
    }
    if (inf_count) *inf_count = infs;
    int deg = static_cast<int>(c.size()) - 1;
    if (deg <= 0) return {};
    Matrix comp = Matrix::Zero(deg, deg);
    for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -c[i] / c[deg];
    Eigen::ComplexEigenSolver<Matrix> es(comp, false);
    std::vector<Complex> roots(deg);
    for (int i = 0; i < deg; ++i) roots[i] = es.eigenvalues()[i];
    return roots;
}

// --- Riemann sphere geometry ---------------------------------------------

// A point of the projective eigenvalue line, either finite or infinite.
struct EigPoint {
    Complex z{0.0, 0.0};
    bool infinite = false;

    static EigPoint inf() { return EigPoint{Complex(0.0, 0.0), true}; }
    static EigPoint finite(Complex z) { return EigPoint{z, false}; }
};

inline double chordal_distance(const EigPoint& a, const EigPoint& b) {
    if (a.infinite && b.infinite) return 0.0;
    if (a.infinite) return 1.0 / std::sqrt(1.0 + std::norm(b.z));
    if (b.infinite) return 1.0 / std::sqrt(1.0 + std::norm(a.z));
    return std::abs(a.z - b.z) /
           (std::sqrt(1.0 + std::norm(a.z)) * std::sqrt(1.0 + std::norm(b.z)));
}

}  // namespace slocc
