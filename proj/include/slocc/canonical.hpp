// Canonical standard forms for linear matrix pencils.
//
// A pencil is the pair (G1, G2) of coefficient matrices of a state.  Its
// orbit under (T, P, Q), where T mixes the pair, P acts on rows and Q on
// columns, is characterized by the Kronecker structure: column and row
// minimal indices, infinite elementary divisors and finite Jordan blocks.
// The eigenvalue convention is det(G2 - z G1) = 0; mixing with a 2x2
// matrix T moves eigenvalues by the Moebius map z' = (t22 z + t21) /
// (t12 z + t11).
//
// The structure is recovered from thresholded nullity sequences only,
// never from a literal staircase reduction: minimal indices come from
// block Toeplitz kernels (polynomial kernel vectors by degree), Jordan
// sizes at an eigenvalue from bidiagonal chain matrices.  The transforms
// onto a synthesized canonical pair are then obtained as an intertwiner
// null-space problem, which makes every result self-checking through its
// residual.
#pragma once

#include "slocc/linalg.hpp"
#include "slocc/tensor.hpp"

#include <json.hpp>

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

namespace slocc {

// --- structure description ---------------------------------------------

struct EigenCluster {
    EigPoint center;
    std::vector<int> sizes;  // block sizes, descending
    int multiplicity() const {
        int t = 0;
        for (int s : sizes) t += s;
        return t;
    }
};

struct PencilStructure {
    int rows = 0, cols = 0;
    int normal_rank = 0;
    std::vector<int> minimal_col;  // column (right) minimal indices, ascending
    std::vector<int> minimal_row;  // row (left) minimal indices, ascending
    std::vector<EigenCluster> clusters;  // includes the point at infinity
};

struct Transforms {
    Matrix t;  // 2x2 pair mixing matrix
    Matrix p;  // left transform
    Matrix q;  // right transform
    // Relative residual of P * (T-mix of the input pair) * Q against the
    // canonical pair.
    double residual = 0.0;
};

inline std::array<Matrix, 2> apply_pair_transforms(const Matrix& g1, const Matrix& g2,
                                                   const Transforms& tf) {
    Matrix m1 = tf.t(0, 0) * g1 + tf.t(0, 1) * g2;
    Matrix m2 = tf.t(1, 0) * g1 + tf.t(1, 1) * g2;
    return {tf.p * m1 * tf.q, tf.p * m2 * tf.q};
}

struct FiniteBlock {
    int size;
    Complex eigenvalue;  // canonical position: 0, 1 or a parameter value
};

struct StandardForm {
    int rows = 0, cols = 0;
    std::vector<int> minimal_col;        // ascending
    std::vector<int> minimal_row;        // ascending
    std::vector<int> inf_blocks;         // descending sizes
    std::vector<FiniteBlock> finite_blocks;
    std::vector<Complex> params;         // moduli of the family, if any
    Matrix e, j;                         // synthesized canonical pair
    std::array<int, 2> effective_shape{0, 0};

    // Family identity without parameter values.  Finite blocks are grouped
    // by which canonical position they sit at: the two fixed anchors or a
    // numbered parameter.
    std::string key() const {
        std::ostringstream os;
        os << "m" << rows << "x" << cols << "|eps[";
        for (std::size_t i = 0; i < minimal_col.size(); ++i)
            os << (i ? "," : "") << minimal_col[i];
        os << "]|eta[";
        for (std::size_t i = 0; i < minimal_row.size(); ++i)
            os << (i ? "," : "") << minimal_row[i];
        os << "]|inf[";
        for (std::size_t i = 0; i < inf_blocks.size(); ++i)
            os << (i ? "," : "") << inf_blocks[i];
        os << "]";
        // finite blocks grouped per canonical position, in position order
        std::vector<std::pair<std::string, std::vector<int>>> groups;
        auto group_of = [&](const std::string& tag) -> std::vector<int>& {
            for (auto& g : groups)
                if (g.first == tag) return g.second;
            groups.push_back({tag, {}});
            return groups.back().second;
        };
        for (const FiniteBlock& fb : finite_blocks) {
            std::string tag = position_tag(fb.eigenvalue);
            group_of(tag).push_back(fb.size);
        }
        for (auto& g : groups) {
            os << "|" << g.first << "[";
            for (std::size_t i = 0; i < g.second.size(); ++i)
                os << (i ? "," : "") << g.second[i];
            os << "]";
        }
        return os.str();
    }

    Json to_json() const {
        Json doc;
        doc["minimal_col"] = minimal_col;
        doc["minimal_row"] = minimal_row;
        doc["inf_blocks"] = inf_blocks;
        Json fb = Json::array();
        for (const FiniteBlock& b : finite_blocks)
            fb.push_back(Json::array({b.size, b.eigenvalue.real(), b.eigenvalue.imag()}));
        doc["finite_blocks"] = std::move(fb);
        Json pr = Json::array();
        for (const Complex& p : params)
            pr.push_back(Json::array({p.real(), p.imag()}));
        doc["params"] = std::move(pr);
        return doc;
    }

private:
    std::string position_tag(Complex v) const {
        if (v == Complex(0.0, 0.0)) return "at0";
        if (v == Complex(1.0, 0.0)) return "at1";
        for (std::size_t k = 0; k < params.size(); ++k)
            if (v == params[k]) return "p" + std::to_string(k);
        return "p?";
    }
};

struct CanonicalResult {
    StandardForm form;
    Transforms tf;
    PencilStructure structure;
};

// --- internal analysis machinery -----------------------------------------

namespace detail {

// Thrown inside the analysis ladder when a rank decision or a consistency
// check fails at the current threshold level; the driver then retries with
// a coarser clustering radius before giving up.
struct EscalateSignal {
    std::string why;
};

// scale is the magnitude of the pencil the chain matrix was built from;
// it floors the rank cutoff so that an all-roundoff block (for instance the
// chain matrix at a full-multiplicity eigenvalue, which is exactly zero in
// exact arithmetic) is read as zero instead of as full-rank noise.
inline int audited_nullity(const Matrix& m, double theta, double scale, const char* what) {
    if (m.rows() == 0) return static_cast<int>(m.cols());
    RankDecision d = rank_decide(m, theta, scale);
    if (!d.clean)
        throw EscalateSignal{std::string(what) + ": no usable singular value gap"};
    return static_cast<int>(m.cols()) - d.rank;
}

inline double pencil_scale(const Matrix& g1, const Matrix& g2) {
    return std::sqrt(g1.squaredNorm() + g2.squaredNorm());
}

// Block Toeplitz matrix whose kernel holds the coefficient vectors of the
// degree <= k polynomial kernel of G2 - z G1: rows match coefficients of
// (G2 - z G1) (x0 + x1 z + ... + xk z^k) = 0.
inline Matrix degree_chain_matrix(const Matrix& g1, const Matrix& g2, int k) {
    long m = g1.rows(), n = g1.cols();
    Matrix t = Matrix::Zero((k + 2) * m, (k + 1) * n);
    for (int i = 0; i <= k; ++i) {
        t.block(i * m, i * n, m, n) = g2;
        t.block((i + 1) * m, i * n, m, n) = -g1;
    }
    return t;
}

// Bidiagonal chain matrix for generalized eigenvector chains at one point:
// C x1 = 0, C x_{i+1} = D x_i.
inline Matrix point_chain_matrix(const Matrix& c, const Matrix& d, int k) {
    long m = c.rows(), n = c.cols();
    Matrix u = Matrix::Zero(k * m, k * n);
    for (int i = 0; i < k; ++i) {
        u.block(i * m, i * n, m, n) = c;
        if (i > 0) u.block(i * m, (i - 1) * n, m, n) = -d;
    }
    return u;
}

// Minimal indices from the nullity increments of degree_chain_matrix:
// the increment at degree k counts indices <= k.
inline std::vector<int> minimal_indices(const Matrix& g1, const Matrix& g2, int expected,
                                        double theta, const char* what) {
    std::vector<int> out;
    if (expected == 0) return out;
    long n = g1.cols();
    double scale = pencil_scale(g1, g2);
    int nu_prev = 0, delta_prev = 0;
    for (int k = 0; k <= n; ++k) {
        Matrix t = degree_chain_matrix(g1, g2, k);
        int nu = audited_nullity(t, theta, scale, what);
        int delta = nu - nu_prev;
        if (delta < delta_prev || delta > expected)
            throw EscalateSignal{std::string(what) + ": inconsistent nullity increments"};
        for (int c = 0; c < delta - delta_prev; ++c) out.push_back(k);
        if (delta == expected) return out;
        nu_prev = nu;
        delta_prev = delta;
    }
    throw EscalateSignal{std::string(what) + ": minimal indices did not saturate"};
}

struct AnalysisContext {
    double theta;   // rank decision threshold (relative)
    double rho;     // chordal clustering radius
    std::uint64_t seed;
};

// Characteristic data of the regular part: coefficients of
// det(W1 (G2 - z G1) W2) with fixed random compressions, obtained by
// interpolation on roots of unity.
inline std::vector<Complex> compressed_det_poly(const Matrix& g1, const Matrix& g2, int r,
                                                std::uint64_t seed) {
    long m = g1.rows(), n = g1.cols();
    for (int attempt = 0; attempt < 3; ++attempt) {
        Rng rng(mix_seed(seed, 0xdec0 + 16 * attempt));
        Matrix w1 = random_gaussian(r, m, rng) / std::sqrt(double(m));
        Matrix w2 = random_gaussian(n, r, rng) / std::sqrt(double(n));
        int npts = r + 1;
        std::vector<Complex> vals(npts);
        for (int j = 0; j < npts; ++j) {
            double ang = 2.0 * M_PI * j / npts;
            Complex z(std::cos(ang), std::sin(ang));
            Matrix mz = w1 * (g2 - z * g1) * w2;
            vals[j] = mz.determinant();
        }
        std::vector<Complex> coeff(npts);
        double cmax = 0.0;
        for (int k = 0; k < npts; ++k) {
            Complex acc(0.0, 0.0);
            for (int j = 0; j < npts; ++j) {
                double ang = -2.0 * M_PI * j * k / npts;
                acc += vals[j] * Complex(std::cos(ang), std::sin(ang));
            }
            coeff[k] = acc / double(npts);
            cmax = std::max(cmax, std::abs(coeff[k]));
        }
        if (cmax > 1e-10) return coeff;
    }
    throw EscalateSignal{"compressed determinant vanished for every compression"};
}

struct Candidate {
    EigPoint point;
    int mult;
};

inline std::vector<Candidate> eigenvalue_candidates(const std::vector<Complex>& poly) {
    int inf_count = 0;
    std::vector<Complex> roots = poly_roots(poly, &inf_count);
    std::vector<Candidate> cand;
    for (const Complex& z : roots) {
        if (std::abs(z) > 1e7)
            ++inf_count;
        else
            cand.push_back({EigPoint::finite(z), 1});
    }
    // The infinite point is always probed; a spurious candidate is dropped
    // later when its chain analysis finds no structure.
    cand.push_back({EigPoint::inf(), inf_count});
    return cand;
}

// Newton refinement of a cluster center on the (q-1)-th derivative of the
// determinant polynomial; a q-fold root of the polynomial is a simple root
// of that derivative.
inline Complex refine_center(const std::vector<Complex>& poly, Complex z0, int q, double rho) {
    std::vector<Complex> f = poly;
    for (int i = 1; i < q; ++i) f = poly_derivative(f);
    std::vector<Complex> fd = poly_derivative(f);
    Complex z = z0;
    double leash = std::max(8.0 * rho, 1e-2);
    for (int it = 0; it < 60; ++it) {
        Complex den = poly_eval(fd, z);
        if (std::abs(den) < 1e-300) return z0;
        Complex step = poly_eval(f, z) / den;
        z -= step;
        if (std::abs(z - z0) > leash) return z0;
        if (std::abs(step) <= 1e-14 * (1.0 + std::abs(z))) break;
    }
    return z;
}

// Jordan block sizes at one projective point from chain nullities.  Each
// column minimal index inflates every nullity by k, which is subtracted.
inline std::vector<int> sizes_at_point(const Matrix& g1, const Matrix& g2, const EigPoint& pt,
                                       int n_col_indices, double theta) {
    Matrix c, d;
    if (pt.infinite) {
        c = g1;
        d = g2;
    } else {
        c = g2 - pt.z * g1;
        d = g1;
    }
    int maxk = static_cast<int>(std::min(g1.rows(), g1.cols())) + 1;
    double scale = pencil_scale(g1, g2);
    std::vector<int> w{0};
    std::vector<int> counts;  // counts[k-1] = number of blocks with size >= k
    for (int k = 1; k <= maxk; ++k) {
        Matrix u = point_chain_matrix(c, d, k);
        int nullity = audited_nullity(u, theta, scale, "eigenvalue chain");
        int wk = nullity - k * n_col_indices;
        int dk = wk - w.back();
        if (wk < 0 || dk < 0)
            throw EscalateSignal{"eigenvalue chain: negative nullity increment"};
        if (!counts.empty() && dk > counts.back())
            throw EscalateSignal{"eigenvalue chain: increments not monotone"};
        if (dk == 0) break;
        counts.push_back(dk);
        w.push_back(wk);
        if (k == maxk && dk > 0)
            throw EscalateSignal{"eigenvalue chain: sizes did not terminate"};
    }
    std::vector<int> sizes;
    for (int k = static_cast<int>(counts.size()); k >= 1; --k) {
        int exact = counts[k - 1] - (k < static_cast<int>(counts.size()) ? counts[k] : 0);
        for (int c2 = 0; c2 < exact; ++c2) sizes.push_back(k);
    }
    std::sort(sizes.begin(), sizes.end(), std::greater<int>());
    return sizes;
}

inline PencilStructure analyze_structure(const Matrix& g1, const Matrix& g2,
                                         const AnalysisContext& ctx) {
    PencilStructure st;
    st.rows = static_cast<int>(g1.rows());
    st.cols = static_cast<int>(g1.cols());

    // Normal rank from a few fixed random members of the pencil.
    double scale = pencil_scale(g1, g2);
    int r = 0;
    RankDecision best;
    for (int t = 0; t < 5; ++t) {
        Rng rng(mix_seed(ctx.seed, 0x707a11 + t));
        Complex la = rng.cgaussian(), mu = rng.cgaussian();
        double s = std::sqrt(std::norm(la) + std::norm(mu));
        RankDecision d = rank_decide((la / s) * g1 + (mu / s) * g2, ctx.theta, scale);
        if (d.rank > r || (d.rank == r && d.gap > best.gap)) {
            r = d.rank;
            best = d;
        }
    }
    if (!best.clean) throw EscalateSignal{"normal rank: no usable singular value gap"};
    st.normal_rank = r;

    st.minimal_col = minimal_indices(g1, g2, st.cols - r, ctx.theta, "column minimal indices");
    st.minimal_row = minimal_indices(g1.transpose(), g2.transpose(), st.rows - r, ctx.theta,
                                     "row minimal indices");

    // Eigenvalue candidates from the compressed determinant, clustered in
    // the chordal metric, then verified pointwise by chain analysis.
    std::vector<Complex> poly;
    std::vector<Candidate> cand;
    if (r > 0) {
        poly = compressed_det_poly(g1, g2, r, ctx.seed);
        cand = eigenvalue_candidates(poly);
    }
    int nc = static_cast<int>(cand.size());
    std::vector<int> parent(nc);
    for (int i = 0; i < nc; ++i) parent[i] = i;
    std::function<int(int)> find = [&](int i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    for (int i = 0; i < nc; ++i)
        for (int j = i + 1; j < nc; ++j)
            if (chordal_distance(cand[i].point, cand[j].point) <= ctx.rho)
                parent[find(i)] = find(j);

    std::map<int, std::vector<int>> groups;
    for (int i = 0; i < nc; ++i) groups[find(i)].push_back(i);

    int p = static_cast<int>(st.minimal_col.size());
    for (const auto& [root, members] : groups) {
        bool has_inf = false;
        Complex sum(0.0, 0.0);
        int mult = 0;
        for (int i : members) {
            if (cand[i].point.infinite) has_inf = true;
            sum += double(cand[i].mult) * cand[i].point.z;
            mult += cand[i].mult;
        }
        EigPoint center;
        if (has_inf) {
            center = EigPoint::inf();
        } else {
            center = EigPoint::finite(sum / double(std::max(mult, 1)));
            if (mult >= 1) center.z = refine_center(poly, center.z, mult, ctx.rho);
        }
        std::vector<int> sizes = sizes_at_point(g1, g2, center, p, ctx.theta);
        if (sizes.empty()) continue;  // compression artifact, no structure here
        st.clusters.push_back({center, std::move(sizes)});
    }

    // Raw deterministic order: infinity first, then by position.
    std::sort(st.clusters.begin(), st.clusters.end(),
              [](const EigenCluster& a, const EigenCluster& b) {
                  if (a.center.infinite != b.center.infinite) return a.center.infinite;
                  if (a.center.z.real() != b.center.z.real())
                      return a.center.z.real() < b.center.z.real();
                  return a.center.z.imag() < b.center.z.imag();
              });

    // Block sizes must tile the pencil exactly.
    long rows_acc = 0, cols_acc = 0;
    for (int e : st.minimal_col) {
        rows_acc += e;
        cols_acc += e + 1;
    }
    for (int e : st.minimal_row) {
        rows_acc += e + 1;
        cols_acc += e;
    }
    for (const EigenCluster& cl : st.clusters) {
        rows_acc += cl.multiplicity();
        cols_acc += cl.multiplicity();
    }
    if (rows_acc != st.rows || cols_acc != st.cols)
        throw EscalateSignal{"structure does not tile the pencil"};
    return st;
}

// Canonical pair assembled block-diagonally in the given cluster order:
// column blocks ascending, row blocks ascending, then each cluster with
// sizes descending.  Entries are exact integers except for eigenvalues.
inline std::pair<Matrix, Matrix> synthesize_pair(const std::vector<int>& eps,
                                                 const std::vector<int>& eta,
                                                 const std::vector<EigenCluster>& clusters) {
    long rows = 0, cols = 0;
    for (int e : eps) {
        rows += e;
        cols += e + 1;
    }
    for (int e : eta) {
        rows += e + 1;
        cols += e;
    }
    for (const EigenCluster& cl : clusters) {
        int t = 0;
        for (int s : cl.sizes) t += s;
        rows += t;
        cols += t;
    }
    Matrix e = Matrix::Zero(rows, cols), j = Matrix::Zero(rows, cols);
    long r0 = 0, c0 = 0;
    for (int ep : eps) {  // ep x (ep+1): E = [I 0], J = [0 I]
        for (int i = 0; i < ep; ++i) {
            e(r0 + i, c0 + i) = 1.0;
            j(r0 + i, c0 + i + 1) = 1.0;
        }
        r0 += ep;
        c0 += ep + 1;
    }
    for (int et : eta) {  // (et+1) x et: E = [I; 0], J = [0; I]
        for (int i = 0; i < et; ++i) {
            e(r0 + i, c0 + i) = 1.0;
            j(r0 + 1 + i, c0 + i) = 1.0;
        }
        r0 += et + 1;
        c0 += et;
    }
    for (const EigenCluster& cl : clusters) {
        for (int s : cl.sizes) {
            if (cl.center.infinite) {  // (N_s, I_s)
                for (int i = 0; i < s; ++i) {
                    if (i + 1 < s) e(r0 + i, c0 + i + 1) = 1.0;
                    j(r0 + i, c0 + i) = 1.0;
                }
            } else {  // (I_s, J_s(z))
                for (int i = 0; i < s; ++i) {
                    e(r0 + i, c0 + i) = 1.0;
                    j(r0 + i, c0 + i) = cl.center.z;
                    if (i + 1 < s) j(r0 + i, c0 + i + 1) = 1.0;
                }
            }
            r0 += s;
            c0 += s;
        }
    }
    return {std::move(e), std::move(j)};
}

// --- intertwiner solves ----------------------------------------------------

// Null space of the homogeneous system P A = E R, P B = J R over (P, R).
inline Matrix intertwiner_space(const Matrix& a, const Matrix& b, const Matrix& e,
                                const Matrix& j, double theta, RankDecision* dec = nullptr) {
    long m = a.rows(), n = a.cols();
    Matrix k = Matrix::Zero(2 * m * n, m * m + n * n);
    k.block(0, 0, m * n, m * m) = kron(a.transpose(), Matrix::Identity(m, m));
    k.block(0, m * m, m * n, n * n) = -kron(Matrix::Identity(n, n), e);
    k.block(m * n, 0, m * n, m * m) = kron(b.transpose(), Matrix::Identity(m, m));
    k.block(m * n, m * m, m * n, n * n) = -kron(Matrix::Identity(n, n), j);
    return null_space(k, theta, dec);
}

struct IntertwinerResult {
    Matrix p, q;
    double residual;
    int hom_dim;
};

// Picks an invertible element of the intertwiner space by seeded sampling
// and converts it into the pair (P, Q = R^{-1}).
inline IntertwinerResult solve_intertwiner(const Matrix& a, const Matrix& b, const Matrix& e,
                                           const Matrix& j, double theta, std::uint64_t seed) {
    long m = a.rows(), n = a.cols();
    RankDecision dec;
    Matrix basis = intertwiner_space(a, b, e, j, theta, &dec);
    if (!dec.clean)
        throw EscalateSignal{"intertwiner space: no usable singular value gap"};
    int dim = static_cast<int>(basis.cols());

    Matrix endo = intertwiner_space(e, j, e, j, theta);
    if (dim != endo.cols())
        throw EscalateSignal{"intertwiner space dimension does not match the canonical pair"};
    if (dim == 0) throw EscalateSignal{"intertwiner space is empty"};

    double best_score = -1.0;
    Matrix best_p, best_r;
    for (int t = 0; t < 48; ++t) {
        Vector c(dim);
        if (t == 0) {
            c.setOnes();
        } else {
            Rng rng(mix_seed(seed, 0x9a3f00 + t));
            for (int i = 0; i < dim; ++i) c[i] = rng.cgaussian();
        }
        c /= c.norm();
        Vector v = basis * c;
        Matrix p = unvec_cm(v.head(m * m), m, m);
        Matrix r = unvec_cm(v.tail(n * n), n, n);
        double sp = smallest_singular_value(p) / std::max(p.norm(), 1e-300);
        double sr = smallest_singular_value(r) / std::max(r.norm(), 1e-300);
        double score = sp * sr;
        if (score > best_score) {
            best_score = score;
            best_p = p;
            best_r = r;
        }
    }
    if (best_score <= 1e-20)
        throw EscalateSignal{"no invertible intertwiner found"};

    IntertwinerResult res;
    res.hom_dim = dim;
    res.q = best_r.inverse();
    res.p = best_p;
    double scale = std::sqrt(e.squaredNorm() + j.squaredNorm());
    double r2 = (res.p * a * res.q - e).squaredNorm() + (res.p * b * res.q - j).squaredNorm();
    res.residual = std::sqrt(r2) / std::max(scale, 1e-300);
    return res;
}

// --- Moebius maps and the gauge ---------------------------------------------

struct Mobius {
    // z -> (a z + b) / (c z + d)
    Complex a{1.0, 0.0}, b{0.0, 0.0}, c{0.0, 0.0}, d{1.0, 0.0};

    EigPoint apply(const EigPoint& p) const {
        if (p.infinite) {
            if (std::abs(c) == 0.0) return EigPoint::inf();
            return EigPoint::finite(a / c);
        }
        Complex num = a * p.z + b, den = c * p.z + d;
        double scale = std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d)}) *
                       (1.0 + std::abs(p.z));
        if (std::abs(den) <= 1e-14 * scale) return EigPoint::inf();
        return EigPoint::finite(num / den);
    }

    // Pair mixing matrix realizing this eigenvalue map: with
    // (G1', G2') = (t11 G1 + t12 G2, t21 G1 + t22 G2) the eigenvalues move
    // by z' = (t22 z + t21) / (t12 z + t11), hence T = [[d, c], [b, a]].
    Matrix tmix() const {
        Matrix t(2, 2);
        t << d, c, b, a;
        return t;
    }

    Mobius inverse() const { return Mobius{d, -b, -c, a}; }

    Mobius compose(const Mobius& rhs) const {  // this after rhs
        return Mobius{a * rhs.a + b * rhs.c, a * rhs.b + b * rhs.d,
                      c * rhs.a + d * rhs.c, c * rhs.b + d * rhs.d};
    }

    void normalize() {
        double nrm = std::sqrt(std::norm(a) + std::norm(b) + std::norm(c) + std::norm(d));
        if (nrm == 0.0) return;
        Complex pivot(0.0, 0.0);
        double best = 0.0;
        for (const Complex& x : {a, b, c, d})
            if (std::abs(x) > best + 1e-12 * nrm) {
                best = std::abs(x);
                pivot = x;
            }
        Complex s = (pivot == Complex(0.0, 0.0)) ? Complex(nrm, 0.0) : pivot / std::abs(pivot) * nrm;
        a /= s; b /= s; c /= s; d /= s;
    }
};

// Map sending up to three anchor points to infinity, zero and one.
inline Mobius mobius_to_anchors(const std::vector<EigPoint>& anchors) {
    auto fin = [](const EigPoint& p) { return p.z; };
    if (anchors.empty()) return Mobius{};
    if (anchors.size() == 1) {
        const EigPoint& zi = anchors[0];
        if (zi.infinite) return Mobius{};
        return Mobius{Complex(0, 0), Complex(1, 0), Complex(1, 0), -zi.z};  // 1/(z - zi)
    }
    if (anchors.size() == 2) {
        const EigPoint& zi = anchors[0];
        const EigPoint& z0 = anchors[1];
        if (zi.infinite) return Mobius{Complex(1, 0), -z0.z, Complex(0, 0), Complex(1, 0)};
        if (z0.infinite) return Mobius{Complex(0, 0), Complex(1, 0), Complex(1, 0), -zi.z};
        return Mobius{Complex(1, 0), -z0.z, Complex(1, 0), -zi.z};  // (z-z0)/(z-zi)
    }
    const EigPoint& zi = anchors[0];
    const EigPoint& z0 = anchors[1];
    const EigPoint& z1 = anchors[2];
    if (zi.infinite)
        return Mobius{Complex(1, 0), -fin(z0), Complex(0, 0), fin(z1) - fin(z0)};
    if (z0.infinite)
        return Mobius{Complex(0, 0), fin(z1) - fin(zi), Complex(1, 0), -fin(zi)};
    if (z1.infinite)
        return Mobius{Complex(1, 0), -fin(z0), Complex(1, 0), -fin(zi)};
    return Mobius{fin(z1) - fin(zi), -fin(z0) * (fin(z1) - fin(zi)),
                  fin(z1) - fin(z0), -fin(zi) * (fin(z1) - fin(z0))};
}

// Canonical cluster precedence: larger block-size multiset first, then
// higher total multiplicity.  Equal keys form tie groups.
inline bool cluster_key_less(const std::vector<int>& a, const std::vector<int>& b) {
    // descending-sorted size vectors, compare lexicographically, longer wins
    // on equal prefix
    std::size_t k = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < k; ++i) {
        if (a[i] != b[i]) return a[i] > b[i];
    }
    return a.size() > b.size();
}

inline bool param_vector_less(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
        if (a[i].real() != b[i].real()) return a[i].real() < b[i].real();
        if (a[i].imag() != b[i].imag()) return a[i].imag() < b[i].imag();
    }
    return a.size() < b.size();
}

struct GaugeChoice {
    std::vector<int> order;      // cluster indices in canonical order
    Mobius map;                  // sends the anchors to infinity, 0, 1
    std::vector<Complex> params;
};

// Enumerates admissible cluster orderings (permutations within tie groups
// only) and picks the one whose parameter vector is lexicographically
// smallest.  This makes the gauge invariant under relabeling of clusters
// that carry identical block structure.
inline GaugeChoice choose_gauge(const std::vector<EigenCluster>& clusters) {
    int nc = static_cast<int>(clusters.size());
    std::vector<int> base(nc);
    for (int i = 0; i < nc; ++i) base[i] = i;
    std::sort(base.begin(), base.end(), [&](int x, int y) {
        if (clusters[x].sizes != clusters[y].sizes)
            return cluster_key_less(clusters[x].sizes, clusters[y].sizes);
        // deterministic base order inside tie groups: infinity first, then
        // by position
        const EigPoint& a = clusters[x].center;
        const EigPoint& b = clusters[y].center;
        if (a.infinite != b.infinite) return a.infinite;
        if (a.z.real() != b.z.real()) return a.z.real() < b.z.real();
        return a.z.imag() < b.z.imag();
    });

    // tie group boundaries
    std::vector<std::pair<int, int>> groups;
    for (int i = 0; i < nc;) {
        int j = i + 1;
        while (j < nc && clusters[base[i]].sizes == clusters[base[j]].sizes) ++j;
        groups.push_back({i, j});
        i = j;
    }

    std::optional<GaugeChoice> best;
    std::vector<int> order = base;
    // iterate over the product of in-group permutations
    std::vector<std::vector<int>> perms(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
        perms[g].resize(groups[g].second - groups[g].first);
        for (std::size_t i = 0; i < perms[g].size(); ++i) perms[g][i] = static_cast<int>(i);
    }
    long total = 1;
    for (const auto& p : perms) {
        long f = 1;
        for (std::size_t i = 2; i <= p.size(); ++i) f *= static_cast<long>(i);
        total *= f;
        if (total > 4096) break;
    }
    bool exhaustive = total <= 4096;

    std::function<void(std::size_t)> visit = [&](std::size_t g) {
        if (g == groups.size()) {
            int na = std::min(nc, 3);
            std::vector<EigPoint> anchors;
            for (int i = 0; i < na; ++i) anchors.push_back(clusters[order[i]].center);
            Mobius mob = mobius_to_anchors(anchors);
            std::vector<Complex> params;
            bool ok = true;
            for (int i = 3; i < nc; ++i) {
                EigPoint img = mob.apply(clusters[order[i]].center);
                if (img.infinite) {
                    ok = false;  // collides with the anchor at infinity
                    break;
                }
                params.push_back(img.z);
            }
            if (ok && (!best || param_vector_less(params, best->params))) {
                best = GaugeChoice{order, mob, params};
            }
            return;
        }
        auto [lo, hi] = groups[g];
        std::vector<int> span(order.begin() + lo, order.begin() + hi);
        std::sort(span.begin(), span.end());
        do {
            for (int i = lo; i < hi; ++i) order[i] = span[i - lo];
            visit(g + 1);
        } while (exhaustive && std::next_permutation(span.begin(), span.end()));
    };
    visit(0);
    if (!best) throw EscalateSignal{"gauge selection found no admissible anchor assignment"};
    return *best;
}

}  // namespace detail

// --- public entry points ------------------------------------------------

struct RankProfile {
    int rank_g1 = 0, rank_g2 = 0;
    int normal_rank = 0;
    int rank_col_span = 0;  // rank of [G1 | G2]
    int rank_row_span = 0;  // rank of [G1 ; G2]
    std::array<int, 2> effective_shape{0, 0};
};

inline RankProfile rank_profile(const MatrixPencil& pencil, double tol = 1e-9) {
    RankProfile rp;
    rp.rank_g1 = rank_at(pencil.g1, tol);
    rp.rank_g2 = rank_at(pencil.g2, tol);
    for (int t = 0; t < 5; ++t) {
        Rng rng(mix_seed(0x1a7e5, t));
        Complex la = rng.cgaussian(), mu = rng.cgaussian();
        rp.normal_rank =
            std::max(rp.normal_rank, rank_at(la * pencil.g1 + mu * pencil.g2, tol));
    }
    Matrix wide(pencil.g1.rows(), pencil.g1.cols() * 2);
    wide << pencil.g1, pencil.g2;
    Matrix tall(pencil.g1.rows() * 2, pencil.g1.cols());
    tall << pencil.g1, pencil.g2;
    rp.rank_col_span = rank_at(wide, tol);
    rp.rank_row_span = rank_at(tall, tol);
    rp.effective_shape = {rp.rank_col_span, rp.rank_row_span};
    return rp;
}

namespace detail {

inline CanonicalResult gauge_and_solve(const Matrix& a, const Matrix& b,
                                       const PencilStructure& st, double theta) {
    GaugeChoice choice = choose_gauge(st.clusters);
    Matrix t = choice.map.tmix();
    {
        // deterministic scale and phase for the mixing matrix
        Mobius n = choice.map;
        n.normalize();
        t = n.tmix();
    }
    Matrix am = t(0, 0) * a + t(0, 1) * b;
    Matrix bm = t(1, 0) * a + t(1, 1) * b;

    // canonical clusters at their gauge positions
    std::vector<EigenCluster> placed;
    int nc = static_cast<int>(st.clusters.size());
    for (int i = 0; i < nc; ++i) {
        EigenCluster cl = st.clusters[choice.order[i]];
        if (i == 0)
            cl.center = EigPoint::inf();
        else if (i == 1)
            cl.center = EigPoint::finite(Complex(0.0, 0.0));
        else if (i == 2)
            cl.center = EigPoint::finite(Complex(1.0, 0.0));
        else
            cl.center = EigPoint::finite(choice.params[i - 3]);
        placed.push_back(std::move(cl));
    }

    auto [e, j] = synthesize_pair(st.minimal_col, st.minimal_row, placed);
    IntertwinerResult sol = solve_intertwiner(am, bm, e, j, theta, 0x50a11e);

    CanonicalResult out;
    out.structure = st;
    out.tf.t = t;
    out.tf.p = sol.p;
    out.tf.q = sol.q;
    out.tf.residual = sol.residual;
    out.form.rows = st.rows;
    out.form.cols = st.cols;
    out.form.minimal_col = st.minimal_col;
    out.form.minimal_row = st.minimal_row;
    for (const EigenCluster& cl : placed) {
        if (cl.center.infinite) {
            out.form.inf_blocks = cl.sizes;
        } else {
            for (int s : cl.sizes) out.form.finite_blocks.push_back({s, cl.center.z});
        }
    }
    out.form.params = choice.params;
    out.form.e = e;
    out.form.j = j;
    int eta0 = 0, eps0 = 0;
    for (int v : st.minimal_row)
        if (v == 0) ++eta0;
    for (int v : st.minimal_col)
        if (v == 0) ++eps0;
    out.form.effective_shape = {st.rows - eta0, st.cols - eps0};
    return out;
}

// Frame whitening: conjugate the pencil so a well-conditioned member becomes
// an identity block.  Structure and eigenvalues are invariant under any
// invertible row/column frame, and this undoes the conditioning of the frame
// the input arrived in, which otherwise compresses the structural singular
// values of deep chain matrices by powers of that conditioning.  The
// complement of the member's rank space stays unitary, so the factors are
// always invertible and a badly estimated rank only costs conditioning,
// never correctness.  Overwrites (a, b) with the whitened, renormalized pair.
struct FrameWhitening {
    Matrix pw, qw;  // whitened pair = pw * a_in * qw, up to the joint rescale
};

inline FrameWhitening whiten_frame(Matrix& a, Matrix& b) {
    FrameWhitening fw;
    fw.pw = Matrix::Identity(a.rows(), a.rows());
    fw.qw = Matrix::Identity(a.cols(), a.cols());
    Matrix mbest;
    RankDecision best;
    int r = -1;
    for (int t = 0; t < 5; ++t) {
        Rng rng(mix_seed(0x5f0cc, 0x371e11 + t));
        Complex la = rng.cgaussian(), mu = rng.cgaussian();
        double s = std::sqrt(std::norm(la) + std::norm(mu));
        Matrix m = (la / s) * a + (mu / s) * b;
        RankDecision d = rank_decide(m, 1e-12);
        if (d.rank > r || (d.rank == r && d.gap > best.gap)) {
            r = d.rank;
            best = d;
            mbest = m;
        }
    }
    if (r > 0 && best.clean) {
        Eigen::JacobiSVD<Matrix> svd(mbest, Eigen::ComputeFullU | Eigen::ComputeFullV);
        Matrix du = Matrix::Identity(a.rows(), a.rows());
        Matrix dv = Matrix::Identity(a.cols(), a.cols());
        for (int i = 0; i < r; ++i) {
            double si = std::sqrt(svd.singularValues()[i]);
            du(i, i) = 1.0 / si;
            dv(i, i) = 1.0 / si;
        }
        fw.pw = du * svd.matrixU().adjoint();
        fw.qw = svd.matrixV() * dv;
        a = fw.pw * a * fw.qw;
        b = fw.pw * b * fw.qw;
        double wscale = std::sqrt(a.squaredNorm() + b.squaredNorm());
        a /= wscale;
        b /= wscale;
        fw.pw /= wscale;
    }
    return fw;
}

}  // namespace detail

// Full canonicalization with a built-in escalation ladder: the clustering
// radius and rank threshold are widened until the derived structure is
// globally consistent and the transforms reproduce the canonical pair to
// 1e-7.  The ladder exists because the roots of a degenerate eigenvalue
// scatter like eps^(1/s) in double precision, far beyond any fixed radius.
inline CanonicalResult canonical_form(const MatrixPencil& pencil, double tol = 1e-9) {
    double scale = std::sqrt(pencil.g1.squaredNorm() + pencil.g2.squaredNorm());
    if (scale == 0.0) throw Error("canonical_form: zero pencil");
    Matrix a = pencil.g1 / scale, b = pencil.g2 / scale;

    detail::FrameWhitening fw = detail::whiten_frame(a, b);

    const double rho_ladder[4] = {1e-6, 1e-5, 1e-4, 3e-3};
    double theta_ladder[5] = {std::max(tol, 1e-9), std::max(100.0 * tol, 1e-7), 1e-6, 1e-5,
                              3e-4};
    // The two coarsenesses are independent: a degenerate eigenvalue needs a
    // wide clustering radius while an ill-conditioned image still needs a
    // fine rank cut (structural chain singular values shrink with powers of
    // the conditioning while root scatter grows).  Sweep radius levels
    // outward, and for each radius try rank thresholds from fine to coarse;
    // the tiling and transform-residual gates reject any wrong read, so a
    // threshold pair can only fail toward escalation, not mislabeling.
    std::string last_reason = "unknown";
    for (int jr = 0; jr < 4; ++jr)
        for (int it = 0; it < 5; ++it) {
            detail::AnalysisContext ctx{theta_ladder[it], rho_ladder[jr], 0x5f0cc};
            try {
                PencilStructure st = detail::analyze_structure(a, b, ctx);
                CanonicalResult res = detail::gauge_and_solve(a, b, st, ctx.theta);
                // A structurally wrong read cannot conjugate the pencil onto
                // the canonical pair at all (residuals come out ~1e-3 or
                // worse), so the gate only needs to sit well below that
                // while tolerating the roundoff of badly conditioned input
                // frames.
                if (res.tf.residual <= 1e-7) {
                    // fold the whitening and the input normalization back in
                    res.tf.p = res.tf.p * fw.pw / scale;
                    res.tf.q = fw.qw * res.tf.q;
                    return res;
                }
                last_reason = "transform residual " + std::to_string(res.tf.residual);
            } catch (const detail::EscalateSignal& sig) {
                last_reason = sig.why;
            }
        }
    throw RankDecisionUnstable("canonical_form: structure undecidable in double precision (" +
                               last_reason + ")");
}

// Re-solves the transforms of a pencil onto an externally supplied
// canonical pair (used to put two same-family states into one exact frame).
inline std::optional<Transforms> retarget_transforms(const MatrixPencil& pencil,
                                                     const Matrix& tmix, const Matrix& e,
                                                     const Matrix& j, double theta = 1e-7) {
    double scale = std::sqrt(pencil.g1.squaredNorm() + pencil.g2.squaredNorm());
    Matrix a = pencil.g1 / scale, b = pencil.g2 / scale;
    Matrix am = tmix(0, 0) * a + tmix(0, 1) * b;
    Matrix bm = tmix(1, 0) * a + tmix(1, 1) * b;
    detail::FrameWhitening fw = detail::whiten_frame(am, bm);
    try {
        detail::IntertwinerResult sol = detail::solve_intertwiner(am, bm, e, j, theta, 0x6e7a6);
        Transforms tf;
        tf.t = tmix;
        tf.p = sol.p * fw.pw / scale;
        tf.q = fw.qw * sol.q;
        tf.residual = sol.residual;
        return tf;
    } catch (const detail::EscalateSignal&) {
        return std::nullopt;
    }
}

// --- commutant of a canonical pair -------------------------------------

// Pair space of a canonical pair under a 2x2 mixing matrix V:
//   { (X, Y) : X E = F Y, X J = G Y }  with (F, G) = V-mix(E, J).
// V = I gives the plain commutant; other V matching the structure's
// projective symmetries give the twisted components of the stabilizer.
inline std::pair<std::vector<Matrix>, std::vector<Matrix>> commutant_pairs(
    const Matrix& e, const Matrix& j, const Matrix& v, double theta = 1e-9) {
    Matrix f = v(0, 0) * e + v(0, 1) * j;
    Matrix g = v(1, 0) * e + v(1, 1) * j;
    long m = e.rows(), n = e.cols();
    Matrix k = Matrix::Zero(2 * m * n, m * m + n * n);
    k.block(0, 0, m * n, m * m) = kron(e.transpose(), Matrix::Identity(m, m));
    k.block(0, m * m, m * n, n * n) = -kron(Matrix::Identity(n, n), f);
    k.block(m * n, 0, m * n, m * m) = kron(j.transpose(), Matrix::Identity(m, m));
    k.block(m * n, m * m, m * n, n * n) = -kron(Matrix::Identity(n, n), g);
    Matrix basis = null_space(k, theta);
    std::vector<Matrix> xs, ys;
    for (int c = 0; c < basis.cols(); ++c) {
        xs.push_back(unvec_cm(basis.col(c).head(m * m), m, m));
        ys.push_back(unvec_cm(basis.col(c).tail(n * n), n, n));
    }
    return {std::move(xs), std::move(ys)};
}

struct CommutantDescriptor {
    std::vector<Matrix> basis;        // left factors X
    std::vector<Matrix> basis_right;  // right factors Y
    int dim = 0;
    bool identity_in_span = false;
    std::vector<std::string> notes;
};

inline CommutantDescriptor commutant_basis(const StandardForm& form, double theta = 1e-9) {
    CommutantDescriptor d;
    auto [xs, ys] = commutant_pairs(form.e, form.j, Matrix::Identity(2, 2), theta);
    d.basis = std::move(xs);
    d.basis_right = std::move(ys);
    d.dim = static_cast<int>(d.basis.size());

    if (d.dim > 0) {
        long m = form.e.rows(), n = form.e.cols();
        Matrix g(m * m + n * n, d.dim);
        for (int c = 0; c < d.dim; ++c) {
            g.col(c).head(m * m) = vec_cm(d.basis[c]);
            g.col(c).tail(n * n) = vec_cm(d.basis_right[c]);
        }
        Vector target(m * m + n * n);
        target.head(m * m) = vec_cm(Matrix::Identity(m, m));
        target.tail(n * n) = vec_cm(Matrix::Identity(n, n));
        Vector c = g.colPivHouseholderQr().solve(target);
        d.identity_in_span = (g * c - target).norm() <= 1e-8 * target.norm();
    }

    std::ostringstream os;
    os << "pair space dimension " << d.dim << " for structure " << form.key();
    d.notes.push_back(os.str());
    for (const FiniteBlock& b : form.finite_blocks) {
        std::ostringstream o2;
        o2 << "finite block size " << b.size << " at (" << b.eigenvalue.real() << ","
           << b.eigenvalue.imag() << ")";
        d.notes.push_back(o2.str());
    }
    if (!form.inf_blocks.empty()) {
        std::ostringstream o3;
        o3 << "infinite blocks:";
        for (int s : form.inf_blocks) o3 << " " << s;
        d.notes.push_back(o3.str());
    }
    return d;
}

}  // namespace slocc
