// Independent reference computations used by the tests.  Everything here is
// deliberately written against Eigen directly, without going through the
// library's pencil machinery, so that agreement between the two is evidence
// rather than tautology.
#pragma once

#include <slocc/tensor.hpp>

#include <string>
#include <vector>

namespace oracle {

using slocc::Complex;
using slocc::Matrix;
using slocc::StateTensor;

// Rank of a complex matrix with a relative singular-value cutoff.
inline int svd_rank(const Matrix& m, double rel_tol = 1e-10) {
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv[0] == 0.0) return 0;
    int r = 0;
    for (long i = 0; i < sv.size(); ++i)
        if (sv[i] > rel_tol * sv[0]) ++r;
    return r;
}

// Unfolding of a three-party state along one party: party-index rows,
// remaining indices columns.
inline Matrix unfold3(const StateTensor& s, int party) {
    const std::vector<int>& d = s.dims();
    Matrix m(d[party], s.size() / d[party]);
    long idx[3];
    for (idx[0] = 0; idx[0] < d[0]; ++idx[0])
        for (idx[1] = 0; idx[1] < d[1]; ++idx[1])
            for (idx[2] = 0; idx[2] < d[2]; ++idx[2]) {
                long flat = (idx[0] * d[1] + idx[1]) * d[2] + idx[2];
                long rem[2];
                int dd[2], k = 0;
                for (int p = 0; p < 3; ++p)
                    if (p != party) {
                        rem[k] = idx[p];
                        dd[k] = d[p];
                        ++k;
                    }
                m(idx[party], rem[0] * dd[1] + rem[1]) = s[flat];
            }
    return m;
}

// Brute-force SLOCC class of a 2x2x2 state: local ranks decide the product
// and biseparable cases, and for genuinely entangled states the discriminant
// of det(x M0 + y M1) separates GHZ (nondegenerate) from W (double root).
inline std::string three_qubit_class(const StateTensor& s) {
    double n2 = 0.0;
    for (long i = 0; i < s.size(); ++i) n2 += std::norm(s[i]);
    if (n2 == 0.0) return "zero";

    int r0 = svd_rank(unfold3(s, 0));
    int r1 = svd_rank(unfold3(s, 1));
    int r2 = svd_rank(unfold3(s, 2));
    int ones = (r0 == 1) + (r1 == 1) + (r2 == 1);
    if (ones == 3) return "product";
    if (ones == 1) {
        if (r0 == 1) return "bisep_A";
        if (r1 == 1) return "bisep_B";
        return "bisep_C";
    }
    // local ranks (2,2,2): GHZ or W
    Matrix m0(2, 2), m1(2, 2);
    for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) {
            m0(j, k) = s[(0 * 2 + j) * 2 + k];
            m1(j, k) = s[(1 * 2 + j) * 2 + k];
        }
    Complex a = m0.determinant();
    Complex c = m1.determinant();
    Complex b = (m0 + m1).determinant() - a - c;
    Complex disc = b * b - 4.0 * a * c;
    double scale = std::pow(m0.norm() + m1.norm(), 4);
    return std::abs(disc) > 1e-8 * scale ? "GHZ" : "W";
}

// Basis-ket builder for small test states: entries are (index list, amplitude).
inline StateTensor kets(const std::vector<int>& dims,
                        const std::vector<std::pair<std::vector<int>, Complex>>& terms) {
    std::vector<Complex> amps(StateTensor::total_dim(dims), Complex(0, 0));
    for (const auto& [idx, amp] : terms) {
        long flat = 0;
        for (std::size_t p = 0; p < dims.size(); ++p) flat = flat * dims[p] + idx[p];
        amps[flat] += amp;
    }
    return StateTensor(dims, std::move(amps));
}

}  // namespace oracle
