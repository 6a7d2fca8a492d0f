// Search for a Kronecker-factorizable representative among the connecting
// operators between two states with the same standard form.
//
// The connecting operators are unique only up to the stabilizer of the
// canonical pair (E, J).  Its components are indexed by a 2x2 mixing matrix
// V whose Moebius action maps the canonical eigenvalue configuration to
// itself: for each V the pair space
//     K(V) = { (X, Y) : X E = F Y, X J = G Y },  (F, G) = V-mix of (E, J)
// is linear, and the admissible V form a group: a finite permutation part
// computed from the eigenvalue positions, times a continuous part that is
// nontrivial exactly when fewer than three positions pin the gauge.  The
// continuous part is covered by a chart ("tau"), searched by compass steps
// with the pair space rebuilt at every trial point.
//
// Within one component the candidates stay linear in the coordinates c:
//     P(c) = P0'^{-1} X(c) P0,   Q(c) = Q0 Y(c)^{-1} Q0'^{-1},
// and Q(c) is a Kronecker product exactly when its inverse transpose
// (Q0' Y(c) Q0^{-1})^T is, which is linear again.  The rank-one conditions
// on the realigned candidates are attacked by alternating projection:
// project onto rank one, then least-squares back into the coordinates.
//
// The pair spaces of padded pencils carry large sub-spaces of singular
// solutions whose realignments are already rank one, so rank-one projection
// alone stalls on them.  The main engine therefore works the other way
// around: it parametrizes the factors directly,
//     P = A (x) B,  Q^T = C (x) D,  V free in GL(2),
// and drives the membership equations
//     X E Y^{-1} = v00 E + v01 J,   X J Y^{-1} = v10 E + v11 J,
//     X = P0' P P0^{-1},  Y^{-1} = Q0^{-1} Q Q0',
// to zero with a Levenberg-damped Gauss-Newton iteration.  Iterates are
// exact Kronecker products by construction, the free V absorbs every
// discrete or continuous stabilizer twist without chart bookkeeping, and
// the residual lives at the scale of the normalized canonical pair.  The
// alternating-projection path stays on as a fallback and as the engine for
// externally supplied descriptors.
#pragma once

#include "slocc/canonical.hpp"
#include "slocc/realign.hpp"

#include <functional>
#include <optional>

namespace slocc {

struct SearchBudget {
    int restarts = 50;
    int max_iterations = 500;   // descent iterations per restart
    double step_tolerance = 1e-13;
    std::uint64_t seed = 0;
    double accept_tol = 1e-8;
};

enum class SearchVerdict { Found, NotFoundWithinBudget };

struct SearchOutcome {
    SearchVerdict verdict = SearchVerdict::NotFoundWithinBudget;
    double residual = std::numeric_limits<double>::infinity();  // best objective seen
    std::string phase;  // "direct", "analytic", "gn" or "als"
    int restarts_used = 0;
    std::optional<Matrix> s;  // left stabilizer factor at the solution
    // connecting operators at the solution
    std::optional<Matrix> t_conn, p_conn, q_conn;
    // factored party operators: row groups then column groups
    std::optional<std::pair<KronFactors, KronFactors>> factored;
};

// S(c) = sum_k c_k B_k over the left basis of a pair-space descriptor.
inline Matrix stabilizer_orbit_element(const Vector& coords, const CommutantDescriptor& d,
                                       bool* invertible = nullptr, double tol = 1e-10) {
    if (d.dim == 0) throw Error("stabilizer_orbit_element: empty descriptor");
    if (coords.size() != d.dim) throw Error("stabilizer_orbit_element: coordinate count");
    Matrix s = Matrix::Zero(d.basis[0].rows(), d.basis[0].cols());
    for (int k = 0; k < d.dim; ++k) s += coords[k] * d.basis[k];
    if (invertible) {
        Eigen::JacobiSVD<Matrix> svd(s);
        const auto& sv = svd.singularValues();
        *invertible = sv.size() > 0 && sv[sv.size() - 1] > tol * sv[0];
    }
    return s;
}

namespace detail {

// One linear component of the candidate space at a fixed twist V.
struct SearchComponent {
    Matrix v;
    std::vector<Matrix> xs, ys;
    std::vector<Matrix> r1k, r2k;  // realigned basis images of the candidates
    Matrix gmat;                   // stacked [vec R1_k ; vec R2_k] columns
    Eigen::ColPivHouseholderQR<Matrix> gqr;
    int dim = 0;
};

inline double rank1_ratio(const Matrix& r, Matrix* proj) {
    Eigen::JacobiSVD<Matrix> svd(r, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RealVector& sv = svd.singularValues();
    if (sv.size() == 0 || sv[0] == 0.0) {
        if (proj) *proj = r;
        return 0.0;
    }
    if (proj) *proj = sv[0] * svd.matrixU().col(0) * svd.matrixV().col(0).adjoint();
    return sv.size() > 1 ? sv[1] / sv[0] : 0.0;
}

// Adjugate (transposed cofactor matrix): d det(M) / d M_ij = adjugate(M)_ji.
// Stable at singular M, unlike det(M) M^{-1}; the blocks here are tiny.
inline Matrix adjugate(const Matrix& m) {
    long n = m.rows();
    Matrix adj(n, n);
    if (n == 1) {
        adj(0, 0) = Complex(1, 0);
        return adj;
    }
    Matrix minor(n - 1, n - 1);
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < n; ++j) {
            for (long r = 0, rr = 0; r < n; ++r) {
                if (r == i) continue;
                for (long c = 0, cc = 0; c < n; ++c) {
                    if (c == j) continue;
                    minor(rr, cc) = m(r, c);
                    ++cc;
                }
                ++rr;
            }
            Complex cof = minor.determinant();
            if ((i + j) & 1) cof = -cof;
            adj(j, i) = cof;
        }
    return adj;
}

}  // namespace detail

// Search engine.  Frames are the canonicalizing transforms of the two
// states; the engine works at the pencil level and asks the caller, through
// the verifier, to confirm a candidate end to end before Found is returned.
class FactorSearch {
public:
    using Verifier = std::function<bool(const Matrix& t, const Matrix& p, const Matrix& q)>;

    FactorSearch(const Matrix& e, const Matrix& j, GroupShape gp, GroupShape gq)
        : e_(e), j_(j), gp_(gp), gq_(gq) {}

    // (E, J) = P (T-mix G) Q for the source state, likewise primed for the
    // target.
    void set_frames(const Matrix& t0, const Matrix& p0, const Matrix& q0, const Matrix& t0p,
                    const Matrix& p0p, const Matrix& q0p) {
        t0_ = t0;
        p0_ = p0;
        q0_ = q0;
        t0p_inv_ = t0p.inverse();
        p0p_ = p0p;
        p0p_inv_ = p0p.inverse();
        q0p_ = q0p;
        q0_inv_ = q0.inverse();
        p0_inv_ = p0.inverse();
        q0p_inv_ = q0p.inverse();
        gn_scale_ = std::sqrt(e_.squaredNorm() + j_.squaredNorm());
        gn_ready_ = p0_inv_.allFinite() && q0_inv_.allFinite() && p0p_.allFinite() &&
                    q0p_.allFinite() && gn_scale_ > 0;
    }

    // Distinct eigenvalue positions of the canonical form, each with its
    // block-size multiset, in canonical order.  Enables twisted components;
    // without them only V = I is searched.
    void set_positions(std::vector<std::pair<EigPoint, std::vector<int>>> pos) {
        positions_ = std::move(pos);
        have_positions_ = true;
    }

    void set_verifier(Verifier v) { verify_ = std::move(v); }

    SearchOutcome run(const SearchBudget& budget) {
        std::vector<Matrix> syms{Matrix::Identity(2, 2)};
        int tau_dim = 0;
        if (have_positions_) {
            for (const detail::Mobius& phi : symmetry_maps()) syms.push_back(phi.tmix());
            int np = static_cast<int>(positions_.size());
            tau_dim = np >= 3 ? 0 : np == 2 ? 1 : np == 1 ? 2 : 4;
        }
        return run_internal(budget, syms, tau_dim, nullptr);
    }

    // Single externally supplied component, no twists: the public
    // pair-space search over a descriptor.
    SearchOutcome run_with_descriptor(const CommutantDescriptor& d, const SearchBudget& budget) {
        if (d.dim == 0) return SearchOutcome{};
        detail::SearchComponent comp;
        comp.v = Matrix::Identity(2, 2);
        comp.xs = d.basis;
        comp.ys = d.basis_right;
        comp.dim = d.dim;
        finalize_component(comp);
        std::vector<Matrix> syms{Matrix::Identity(2, 2)};
        return run_internal(budget, syms, 0, &comp);
    }

private:
    Matrix e_, j_;
    GroupShape gp_, gq_;
    Matrix t0_{Matrix::Identity(2, 2)}, p0_, q0_, q0_inv_, p0_inv_;
    Matrix t0p_inv_{Matrix::Identity(2, 2)}, p0p_, p0p_inv_, q0p_, q0p_inv_;
    double gn_scale_ = 1.0;
    bool gn_ready_ = false;
    std::vector<std::pair<EigPoint, std::vector<int>>> positions_;
    bool have_positions_ = false;
    Verifier verify_;

    // ---- component construction ----

    void finalize_component(detail::SearchComponent& comp) const {
        long l1 = long(gp_.d1) * gp_.e1 * gp_.d2 * gp_.e2;
        long l2 = long(gq_.d1) * gq_.e1 * gq_.d2 * gq_.e2;
        comp.r1k.clear();
        comp.r2k.clear();
        comp.gmat = Matrix(l1 + l2, comp.dim);
        for (int k = 0; k < comp.dim; ++k) {
            comp.r1k.push_back(realign(p0p_inv_ * comp.xs[k] * p0_, gp_));
            comp.r2k.push_back(realign((q0p_ * comp.ys[k] * q0_inv_).transpose().eval(), gq_));
            comp.gmat.col(k).head(l1) = vec_cm(comp.r1k[k]);
            comp.gmat.col(k).tail(l2) = vec_cm(comp.r2k[k]);
        }
        comp.gqr.compute(comp.gmat);
    }

    std::optional<detail::SearchComponent> make_component(const Matrix& v) const {
        double det = std::abs(v(0, 0) * v(1, 1) - v(0, 1) * v(1, 0));
        if (det < 1e-12 * v.squaredNorm()) return std::nullopt;
        detail::SearchComponent comp;
        comp.v = v;
        auto [xs, ys] = commutant_pairs(e_, j_, v, 1e-9);
        comp.dim = static_cast<int>(xs.size());
        if (comp.dim == 0) return std::nullopt;
        comp.xs = std::move(xs);
        comp.ys = std::move(ys);
        finalize_component(comp);
        return comp;
    }

    // Chart over the continuous twist freedom, centered at the identity.
    Matrix chart_v(const Vector& tau) const {
        Matrix v = Matrix::Identity(2, 2);
        int np = static_cast<int>(positions_.size());
        if (tau.size() == 0) return v;
        if (np == 2) {
            v(1, 1) += tau[0];
        } else if (np == 1) {
            v(1, 1) += tau[0];
            v(1, 0) = tau[1];
        } else {
            v(0, 0) += tau[0];
            v(0, 1) = tau[1];
            v(1, 0) = tau[2];
            v(1, 1) += tau[3];
        }
        return v;
    }

    // Moebius maps permuting the canonical eigenvalue configuration with
    // matching block-size multisets.  Determined by the images of the first
    // three positions; for two positions only the swap is possible.
    std::vector<detail::Mobius> symmetry_maps() const {
        std::vector<detail::Mobius> out;
        int np = static_cast<int>(positions_.size());
        if (np < 2) return out;
        auto compatible = [&](int a, int b) { return positions_[a].second == positions_[b].second; };
        if (np == 2) {
            if (compatible(0, 1))
                out.push_back(detail::Mobius{Complex(0, 0), Complex(1, 0), Complex(1, 0), Complex(0, 0)});
            return out;
        }
        for (int q0 = 0; q0 < np; ++q0)
            for (int q1 = 0; q1 < np; ++q1)
                for (int q2 = 0; q2 < np; ++q2) {
                    if (q0 == q1 || q0 == q2 || q1 == q2) continue;
                    if (q0 == 0 && q1 == 1 && q2 == 2) continue;  // identity
                    if (!compatible(0, q0) || !compatible(1, q1) || !compatible(2, q2)) continue;
                    std::vector<EigPoint> tgt{positions_[q0].first, positions_[q1].first,
                                              positions_[q2].first};
                    detail::Mobius phi = detail::mobius_to_anchors(tgt).inverse();
                    bool ok = true;
                    for (int i = 3; i < np && ok; ++i) {
                        EigPoint moved = phi.apply(positions_[i].first);
                        bool hit = false;
                        for (int j = 0; j < np && !hit; ++j)
                            if (chordal_distance(moved, positions_[j].first) <= 1e-6 &&
                                positions_[i].second == positions_[j].second)
                                hit = true;
                        ok = hit;
                    }
                    if (!ok) continue;
                    phi.normalize();
                    out.push_back(phi);
                }
        std::sort(out.begin(), out.end(), [](const detail::Mobius& a, const detail::Mobius& b) {
            auto key = [](const detail::Mobius& m) {
                return std::array<double, 8>{m.a.real(), m.a.imag(), m.b.real(), m.b.imag(),
                                             m.c.real(), m.c.imag(), m.d.real(), m.d.imag()};
            };
            return key(a) < key(b);
        });
        out.erase(std::unique(out.begin(), out.end(),
                              [](const detail::Mobius& a, const detail::Mobius& b) {
                                  return std::abs(a.a - b.a) + std::abs(a.b - b.b) +
                                             std::abs(a.c - b.c) + std::abs(a.d - b.d) < 1e-9;
                              }),
                  out.end());
        return out;
    }

    // ---- evaluation ----

    Vector project_identity(const detail::SearchComponent& comp) const {
        return project_pair(comp, Matrix::Identity(comp.xs[0].rows(), comp.xs[0].cols()),
                            Matrix::Identity(comp.ys[0].rows(), comp.ys[0].cols()), true);
    }

    // Least-squares coordinates of the pair (x, y) in the component basis,
    // normalized; zero when `exact` is demanded and the fit fails.
    Vector project_pair(const detail::SearchComponent& comp, const Matrix& x, const Matrix& y,
                        bool exact = false) const {
        long m = x.rows(), n = y.rows();
        Vector target(m * m + n * n);
        target.head(m * m) = vec_cm(x);
        target.tail(n * n) = vec_cm(y);
        Matrix basis(m * m + n * n, comp.dim);
        for (int k = 0; k < comp.dim; ++k) {
            basis.col(k).head(m * m) = vec_cm(comp.xs[k]);
            basis.col(k).tail(n * n) = vec_cm(comp.ys[k]);
        }
        Vector c = basis.colPivHouseholderQr().solve(target);
        if (exact && (basis * c - target).norm() > 1e-6 * target.norm())
            return Vector::Zero(comp.dim);
        double nrm = c.norm();
        return nrm > 0 ? Vector(c / nrm) : c;
    }

    double objective(const detail::SearchComponent& comp, const Vector& c, Matrix* pr1,
                     Matrix* pr2) const {
        Matrix r1 = Matrix::Zero(comp.r1k[0].rows(), comp.r1k[0].cols());
        Matrix r2 = Matrix::Zero(comp.r2k[0].rows(), comp.r2k[0].cols());
        for (int k = 0; k < comp.dim; ++k) {
            r1 += c[k] * comp.r1k[k];
            r2 += c[k] * comp.r2k[k];
        }
        return detail::rank1_ratio(r1, pr1) + detail::rank1_ratio(r2, pr2);
    }

    std::pair<Matrix, Matrix> assemble_pair(const detail::SearchComponent& comp,
                                            const Vector& c) const {
        Matrix x = Matrix::Zero(comp.xs[0].rows(), comp.xs[0].cols());
        Matrix y = Matrix::Zero(comp.ys[0].rows(), comp.ys[0].cols());
        for (int k = 0; k < comp.dim; ++k) {
            x += c[k] * comp.xs[k];
            y += c[k] * comp.ys[k];
        }
        return {x, y};
    }

    bool try_accept(const detail::SearchComponent& comp, const Vector& c, double accept_tol,
                    SearchOutcome& out, const char* phase) {
        double f = objective(comp, c, nullptr, nullptr);
        out.residual = std::min(out.residual, f);
        if (!(f <= accept_tol)) return false;

        auto [x, y] = assemble_pair(comp, c);
        double sx = smallest_singular_value(x) / std::max(x.norm(), 1e-300);
        double sy = smallest_singular_value(y) / std::max(y.norm(), 1e-300);
        if (sx < 1e-10 || sy < 1e-10) return false;

        Matrix p_conn = p0p_inv_ * x * p0_;
        Matrix q_conn = q0_ * y.inverse() * q0p_.inverse();
        Matrix t_conn = t0p_inv_ * comp.v.inverse() * t0_;
        if (verify_ && !verify_(t_conn, p_conn, q_conn)) return false;

        out.verdict = SearchVerdict::Found;
        out.phase = phase;
        out.residual = f;
        out.s = x;
        out.t_conn = t_conn;
        out.p_conn = p_conn;
        out.q_conn = q_conn;
        try {
            double ftol = std::max(accept_tol * 100.0, 1e-7);
            out.factored = std::make_pair(kron_factor(p_conn, gp_, ftol),
                                          kron_factor(q_conn.transpose().eval(), gq_, ftol));
        } catch (const NotAProduct&) {
            out.factored.reset();
        }
        return true;
    }

    // ---- Gauss-Newton on the product parametrization ----

    struct GnPoint {
        Matrix a, b, c, d, v;  // P = a (x) b, Q^T = c (x) d, V = v
        Vector w;              // determinant reciprocals (localization), may be empty
    };

    long gn_block_vars() const {
        return long(gp_.d1) * gp_.e1 + long(gp_.d2) * gp_.e2 + long(gq_.d1) * gq_.e1 +
               long(gq_.d2) * gq_.e2;
    }

    long gn_var_count() const { return gn_block_vars() + 4 + 5; }

    GnPoint gn_unpack(const Vector& p) const {
        GnPoint s;
        long off = 0;
        auto take = [&](long rows, long cols) {
            Matrix m = Eigen::Map<const Matrix>(p.data() + off, rows, cols);
            off += rows * cols;
            return m;
        };
        s.a = take(gp_.d1, gp_.e1);
        s.b = take(gp_.d2, gp_.e2);
        s.c = take(gq_.d1, gq_.e1);
        s.d = take(gq_.d2, gq_.e2);
        s.v = take(2, 2);
        s.w = p.segment(off, 5);
        return s;
    }

    Vector gn_pack(const GnPoint& s) const {
        Vector p(gn_var_count());
        long off = 0;
        auto put = [&](const Matrix& m) {
            Eigen::Map<Matrix>(p.data() + off, m.rows(), m.cols()) = m;
            off += m.size();
        };
        put(s.a);
        put(s.b);
        put(s.c);
        put(s.d);
        put(s.v);
        if (s.w.size() == 5) {
            p.segment(off, 5) = s.w;
        } else {
            // seed the reciprocals consistently with the localization rows
            const Matrix* blocks[5] = {&s.a, &s.b, &s.c, &s.d, &s.v};
            for (int k = 0; k < 5; ++k) {
                Complex det = blocks[k]->rows() == blocks[k]->cols()
                                  ? blocks[k]->determinant()
                                  : Complex(1, 0);
                p[off + k] = std::abs(det) > 1e-150 ? Complex(1, 0) / det : Complex(1, 0);
            }
        }
        return p;
    }

    // The membership equations are equivariant under the scale gauge
    //     (A, B, C, D, V) -> (aA, bB, cC, dD, abcd V),
    // so the descent could slide everything toward the trivial zero
    // solution, where singular limits masquerade as converged candidates.
    // One affine row <gauge, vec V> = 1 pins the gauge; it is linear in V,
    // so the residual stays holomorphic.  The row is re-aimed per restart.
    //
    // Scale is not the only way to degenerate: padded pencils admit exact
    // membership solutions with V or a factor rank-deficient, and on badly
    // skewed frames those basins soak up every restart.  Five localization
    // rows  w_k det(M_k) = 1  (one reciprocal unknown per factor) remove the
    // singular locus from the solution set entirely while staying
    // holomorphic; non-square factors get the neutral row w_k = 1.
    Vector gn_gauge_{Vector::Zero(4)};

    Complex gn_loc_row(const GnPoint& s, int k) const {
        const Matrix* blocks[5] = {&s.a, &s.b, &s.c, &s.d, &s.v};
        const Matrix& m = *blocks[k];
        if (m.rows() != m.cols()) return gn_scale_ * (s.w[k] - Complex(1, 0));
        return gn_scale_ * (s.w[k] * m.determinant() - Complex(1, 0));
    }

    Vector gn_residual(const Vector& p) const {
        GnPoint s = gn_unpack(p);
        Matrix x = p0p_ * kron(s.a, s.b) * p0_inv_;
        Matrix w = q0_inv_ * kron(s.c, s.d).transpose() * q0p_;
        Matrix r1 = x * e_ * w - s.v(0, 0) * e_ - s.v(0, 1) * j_;
        Matrix r2 = x * j_ * w - s.v(1, 0) * e_ - s.v(1, 1) * j_;
        long l = e_.size();
        Vector r(2 * l + 6);
        r.head(l) = vec_cm(r1);
        r.segment(l, l) = vec_cm(r2);
        r[2 * l] = gn_scale_ * (gn_gauge_.dot(vec_cm(s.v)) - Complex(1, 0));
        for (int k = 0; k < 5; ++k) r[2 * l + 1 + k] = gn_loc_row(s, k);
        return r;
    }

    // Residual and exact Jacobian together.  The residual is holomorphic in
    // the packed unknowns, so plain complex derivatives suffice and the
    // normal equations see no conjugate coupling.
    void gn_linearize(const Vector& p, Vector& r, Matrix& jm) const {
        GnPoint s = gn_unpack(p);
        Matrix x = p0p_ * kron(s.a, s.b) * p0_inv_;
        Matrix w = q0_inv_ * kron(s.c, s.d).transpose() * q0p_;
        long l = e_.size();
        r.resize(2 * l + 6);
        r.head(l) = vec_cm((x * e_ * w - s.v(0, 0) * e_ - s.v(0, 1) * j_).eval());
        r.segment(l, l) = vec_cm((x * j_ * w - s.v(1, 0) * e_ - s.v(1, 1) * j_).eval());
        r[2 * l] = gn_scale_ * (gn_gauge_.dot(vec_cm(s.v)) - Complex(1, 0));
        for (int k = 0; k < 5; ++k) r[2 * l + 1 + k] = gn_loc_row(s, k);

        jm = Matrix::Zero(2 * l + 6, p.size());
        Matrix le = p0_inv_ * e_ * w, lj = p0_inv_ * j_ * w;  // right of d(a kron b)
        Matrix re = x * e_ * q0_inv_, rj = x * j_ * q0_inv_;  // left of d(c kron d)^T
        long col = 0;
        Matrix unit;
        auto left_cols = [&](long rows, long cols, bool first) {
            unit = Matrix::Zero(rows, cols);
            for (long cc = 0; cc < cols; ++cc)
                for (long rr = 0; rr < rows; ++rr) {
                    unit(rr, cc) = 1;
                    Matrix dk = first ? kron(unit, s.b) : kron(s.a, unit);
                    jm.col(col).head(l) = vec_cm((p0p_ * dk * le).eval());
                    jm.col(col).segment(l, l) = vec_cm((p0p_ * dk * lj).eval());
                    unit(rr, cc) = 0;
                    ++col;
                }
        };
        auto right_cols = [&](long rows, long cols, bool first) {
            unit = Matrix::Zero(rows, cols);
            for (long cc = 0; cc < cols; ++cc)
                for (long rr = 0; rr < rows; ++rr) {
                    unit(rr, cc) = 1;
                    Matrix dk = (first ? kron(unit, s.d) : kron(s.c, unit)).transpose() * q0p_;
                    jm.col(col).head(l) = vec_cm((re * dk).eval());
                    jm.col(col).segment(l, l) = vec_cm((rj * dk).eval());
                    unit(rr, cc) = 0;
                    ++col;
                }
        };
        left_cols(gp_.d1, gp_.e1, true);
        left_cols(gp_.d2, gp_.e2, false);
        right_cols(gq_.d1, gq_.e1, true);
        right_cols(gq_.d2, gq_.e2, false);
        // v columns in column-major order: v00, v10, v01, v11; Eigen's dot
        // conjugates its left argument, so the gauge row entries appear
        // conjugated here
        Vector ve = vec_cm(e_), vj = vec_cm(j_);
        jm.col(col).head(l) = -ve;
        jm(2 * l, col++) = gn_scale_ * std::conj(gn_gauge_[0]);
        jm.col(col).segment(l, l) = -ve;
        jm(2 * l, col++) = gn_scale_ * std::conj(gn_gauge_[1]);
        jm.col(col).head(l) = -vj;
        jm(2 * l, col++) = gn_scale_ * std::conj(gn_gauge_[2]);
        jm.col(col).segment(l, l) = -vj;
        jm(2 * l, col++) = gn_scale_ * std::conj(gn_gauge_[3]);

        // localization rows: d(w det M)/dM = w adjugate(M)^T, d/dw = det M
        const Matrix* blocks[5] = {&s.a, &s.b, &s.c, &s.d, &s.v};
        long boff = 0;
        for (int k = 0; k < 5; ++k) {
            const Matrix& m = *blocks[k];
            long row = 2 * l + 1 + k;
            if (m.rows() == m.cols()) {
                Matrix adj = detail::adjugate(m);
                for (long cc = 0; cc < m.cols(); ++cc)
                    for (long rr = 0; rr < m.rows(); ++rr)
                        jm(row, boff + cc * m.rows() + rr) = gn_scale_ * s.w[k] * adj(cc, rr);
                jm(row, gn_block_vars() + 4 + k) = gn_scale_ * m.determinant();
            } else {
                jm(row, gn_block_vars() + 4 + k) = gn_scale_;
            }
            boff += m.size();
        }
    }

    // One Levenberg-damped descent from the given start.  The damping floor
    // and growth factors are tuned so that stalls abort quickly instead of
    // polishing a singular solution.
    bool gn_descend(Vector p, const SearchBudget& budget, SearchOutcome& out,
                    bool adaptive_mu) {
        const double target = 1e-13 * gn_scale_;
        const int max_it = std::min(budget.max_iterations, 200);
        const long nv = p.size();
        Vector r;
        Matrix jm;
        gn_linearize(p, r, jm);
        double f = r.norm();
        Matrix stacked = Matrix::Zero(jm.rows() + 2 * nv, nv);
        Vector rhs = Vector::Zero(stacked.rows());
        // The exact zero set contains a collapse region: large-norm junk in
        // the unconstrained blocks of padded pencils, and near-singular
        // factors with huge det reciprocals.  Early iterations therefore
        // carry a proximal shrinkage block pulling the new point toward
        // small coordinates (in the Marquardt column metric, so it is scale
        // aware); the weight vanishes as the descent closes in, leaving the
        // zero set untouched while the trajectory approaches the manifold
        // from the minimum norm side, where the state-correct solutions
        // live.  The weight anneals in one of two flavors: a schedule that
        // decays per accepted step shepherds wild starts but can drag a good
        // start off a narrow valley, while a residual-adaptive weight
        // releases early and preserves good starts but shepherds less.
        // Neither dominates, so restarts alternate between them.
        auto biased = [&](double fpure, const Vector& at, const RealVector& d, double mu) {
            if (mu <= 0.0) return fpure;
            double b2 = 0.0;
            for (long k = 0; k < nv; ++k) b2 += mu * d[k] * d[k] * std::norm(at[k]);
            return std::sqrt(fpure * fpure + b2);
        };
        auto lm_run = [&](int iters, double mu0) {
            double lambda = 1e-3;
            double mu_sched = mu0;
            for (int it = 0; it < iters && f > target; ++it) {
                double mu = mu_sched;
                if (adaptive_mu) {
                    double rel = f / (0.1 * gn_scale_);
                    mu = mu0 * std::min(1.0, rel * rel);
                    if (mu < 1e-12) mu = 0.0;
                }
                // Marquardt-scaled damped step through a stacked least-squares
                // solve; the normal equations would square the conditioning away.
                RealVector dscale = jm.colwise().norm();
                double dmean = dscale.mean();
                for (long k = 0; k < nv; ++k) dscale[k] = std::max(dscale[k], 1e-8 * dmean);
                stacked.topRows(jm.rows()) = jm;
                stacked.middleRows(jm.rows(), nv).diagonal() =
                    (std::sqrt(lambda) * dscale).cast<Complex>();
                stacked.bottomRows(nv).diagonal() = (std::sqrt(mu) * dscale).cast<Complex>();
                rhs.head(jm.rows()) = r;
                rhs.tail(nv) = std::sqrt(mu) * dscale.cast<Complex>().asDiagonal() * p;
                Vector step = stacked.householderQr().solve(rhs);
                Vector pn = p - step;
                double fn = gn_residual(pn).norm();
                if (biased(fn, pn, dscale, mu) < biased(f, p, dscale, mu)) {
                    p = std::move(pn);
                    f = fn;
                    gn_linearize(p, r, jm);
                    lambda = std::max(lambda * 0.3, 1e-12);
                    mu_sched *= 0.65;
                    if (mu_sched < 1e-6) mu_sched = 0.0;
                } else {
                    lambda = std::min(lambda * 8.0, 1e8);
                    if (lambda > 1e7) break;
                }
            }
        };
        lm_run(max_it, 0.3);
        lm_run(max_it / 2, 0.0);
        out.residual = std::min(out.residual, f / gn_scale_);
        if (!(f <= budget.accept_tol * gn_scale_)) return false;

        GnPoint s = gn_unpack(p);
        for (const Matrix* m : {&s.a, &s.b, &s.c, &s.d, &s.v})
            if (smallest_singular_value(*m) / std::max(m->norm(), 1e-300) < 1e-7) return false;

        Matrix p_conn = kron(s.a, s.b);
        Matrix q_conn = kron(s.c, s.d).transpose();
        Matrix t_conn = t0p_inv_ * s.v.inverse() * t0_;
        if (verify_ && !verify_(t_conn, p_conn, q_conn)) return false;

        out.verdict = SearchVerdict::Found;
        out.phase = "gn";
        out.residual = f / gn_scale_;
        out.s = p0p_ * p_conn * p0_inv_;
        out.t_conn = t_conn;
        out.p_conn = p_conn;
        out.q_conn = q_conn;
        try {
            double ftol = std::max(budget.accept_tol * 100.0, 1e-7);
            out.factored = std::make_pair(kron_factor(p_conn, gp_, ftol),
                                          kron_factor(q_conn.transpose().eval(), gq_, ftol));
        } catch (const NotAProduct&) {
            out.factored.reset();
        }
        return true;
    }

    // Rescale a start so the product side sits at the canonical level: on
    // skewed frames the map (a, b, c, d) -> (X, W) shifts scale by many
    // decades, and a raw start begins so far off the valley floor that the
    // descent reaches the singular collapse basin before it sees any
    // structure.  V is re-seeded with its least squares fit in span{E, J},
    // which points the mixing block at whatever overlap the start already
    // has; the fit is blended with the incoming V so its norm stays bounded
    // below, because a near-zero V start pins the gauge row stiff and turns
    // the descent toward the collapse basin the localization rows forbid.
    void gn_consistent_start(GnPoint& s, bool fit_v = true) const {
        Matrix x = p0p_ * kron(s.a, s.b) * p0_inv_;
        Matrix w = q0_inv_ * kron(s.c, s.d).transpose() * q0p_;
        Matrix xew = x * e_ * w, xjw = x * j_ * w;
        double nx = std::sqrt(xew.squaredNorm() + xjw.squaredNorm());
        if (!(nx > 1e-300) || !std::isfinite(nx)) return;
        double sc = std::pow(gn_scale_ / nx, 0.25);
        s.a *= sc;
        s.b *= sc;
        s.c *= sc;
        s.d *= sc;
        if (!fit_v) return;
        Matrix basis(e_.size(), 2);
        basis.col(0) = vec_cm(e_);
        basis.col(1) = vec_cm(j_);
        Eigen::ColPivHouseholderQR<Matrix> qr(basis);
        Vector f0 = qr.solve(Vector(vec_cm(xew)));
        Vector f1 = qr.solve(Vector(vec_cm(xjw)));
        double s4 = sc * sc * sc * sc;
        Matrix v(2, 2);
        v << f0[0], f0[1], f1[0], f1[1];
        v *= s4;
        double vn = v.norm();
        double dn = s.v.norm();
        if (vn < 0.25 && dn > 1e-300) v += ((0.25 - vn) / dn) * s.v;
        vn = v.norm();
        if (!(vn > 1e-8)) return;
        // a collapsed start would begin inside the basin the localization
        // rows are there to forbid; nudge it invertible
        if (smallest_singular_value(v) < 1e-6 * vn) v += (1e-3 * vn) * Matrix::Identity(2, 2);
        s.v = v;
    }

    // Alternating projection in the frame-mapped coordinates: solve the full
    // connecting operator linearly on one side, project it back to Kronecker
    // structure through the frames, alternate sides, refit the mixing block.
    // Each solve is optimal over the unstructured relaxation, so a handful of
    // sweeps lands near the structured valley when one exists.
    void gn_als_start(GnPoint& s, int sweeps) const {
        Matrix x = p0p_ * kron(s.a, s.b) * p0_inv_;
        Matrix w = q0_inv_ * kron(s.c, s.d).transpose() * q0p_;
        Matrix basis(e_.size(), 2);
        basis.col(0) = vec_cm(e_);
        basis.col(1) = vec_cm(j_);
        Eigen::ColPivHouseholderQR<Matrix> bqr(basis);
        for (int it = 0; it < sweeps; ++it) {
            Vector f0 = bqr.solve(Vector(vec_cm((x * e_ * w).eval())));
            Vector f1 = bqr.solve(Vector(vec_cm((x * j_ * w).eval())));
            Matrix v(2, 2);
            v << f0[0], f0[1], f1[0], f1[1];
            double vn = v.norm();
            if (!(vn > 1e-12) || !v.allFinite()) break;
            if (smallest_singular_value(v) < 1e-4 * vn)
                v += (1e-2 * vn) * Matrix::Identity(2, 2);
            s.v = v;
            Matrix me(x.rows(), 2 * w.cols()), mn(x.rows(), 2 * w.cols());
            me.leftCols(w.cols()) = e_ * w;
            me.rightCols(w.cols()) = j_ * w;
            mn.leftCols(w.cols()) = v(0, 0) * e_ + v(0, 1) * j_;
            mn.rightCols(w.cols()) = v(1, 0) * e_ + v(1, 1) * j_;
            Eigen::CompleteOrthogonalDecomposition<Matrix> codx(me.transpose().eval());
            Matrix xfull = codx.solve(mn.transpose().eval()).transpose();
            KronFactors fp = nearest_kron((p0p_inv_ * xfull * p0_).eval(), gp_);
            s.a = fp.a;
            s.b = fp.b;
            x = p0p_ * kron(s.a, s.b) * p0_inv_;
            Matrix mw(2 * x.rows(), w.cols()), nw(2 * x.rows(), w.cols());
            mw.topRows(x.rows()) = x * e_;
            mw.bottomRows(x.rows()) = x * j_;
            nw.topRows(x.rows()) = v(0, 0) * e_ + v(0, 1) * j_;
            nw.bottomRows(x.rows()) = v(1, 0) * e_ + v(1, 1) * j_;
            Eigen::CompleteOrthogonalDecomposition<Matrix> codw(mw);
            Matrix wfull = codw.solve(nw);
            KronFactors fq = nearest_kron((q0_ * wfull * q0p_inv_).transpose().eval(), gq_);
            s.c = fq.a;
            s.d = fq.b;
            w = q0_inv_ * kron(s.c, s.d).transpose() * q0p_;
        }
        double nx = std::sqrt((x * e_ * w).squaredNorm() + (x * j_ * w).squaredNorm());
        if (nx > 1e-300 && std::isfinite(nx)) {
            double sc = std::pow(gn_scale_ / nx, 0.25);
            s.a *= sc;
            s.b *= sc;
            s.c *= sc;
            s.d *= sc;
            s.v *= sc * sc * sc * sc;
        }
    }

    bool gn_phase(int restarts, const SearchBudget& budget, const std::vector<Matrix>& syms,
                  SearchOutcome& out) {
        // Deterministic starts first.  Both sides of an equivalent pair share
        // one pencil standard form, so the true mixing block is a
        // configuration symmetry up to scale; each symmetry component
        // contributes its projected-identity candidate, raw and ALS-refined.
        // Every start then runs under both shrinkage flavors, and random
        // draws are recycled across flavors so a ticket is a (draw, seed,
        // flavor) combination rather than a fresh gamble.
        int nsym = static_cast<int>(syms.size());
        std::vector<GnPoint> dets;
        {
            GnPoint s{Matrix::Identity(gp_.d1, gp_.e1), Matrix::Identity(gp_.d2, gp_.e2),
                      Matrix::Identity(gq_.d1, gq_.e1), Matrix::Identity(gq_.d2, gq_.e2),
                      Matrix::Identity(2, 2)};
            gn_consistent_start(s);
            dets.push_back(std::move(s));
        }
        {
            // nearest-product splits of the frame-aligned direct candidates
            KronFactors fp = nearest_kron(p0p_inv_ * p0_, gp_);
            KronFactors fq = nearest_kron((q0_ * q0p_inv_).transpose().eval(), gq_);
            GnPoint s{fp.a, fp.b, fq.a, fq.b, Matrix::Identity(2, 2)};
            gn_consistent_start(s);
            dets.push_back(std::move(s));
        }
        for (int si = 0; si < std::min(nsym, 6); ++si) {
            std::optional<detail::SearchComponent> comp = make_component(syms[si]);
            if (!comp) continue;
            Vector c = project_identity(*comp);
            if (!(c.norm() > 0)) continue;
            auto [x, y] = assemble_pair(*comp, c);
            if (smallest_singular_value(y) < 1e-9 * y.norm()) continue;
            KronFactors fp = nearest_kron((p0p_inv_ * x * p0_).eval(), gp_);
            KronFactors fq = nearest_kron(
                (q0_ * y.inverse() * q0p_inv_).transpose().eval(), gq_);
            GnPoint s{fp.a, fp.b, fq.a, fq.b, syms[si]};
            GnPoint sa = s;
            gn_consistent_start(s, false);
            dets.push_back(std::move(s));
            gn_als_start(sa, 25);
            if (sa.v.allFinite() && sa.v.norm() > 1e-12) dets.push_back(std::move(sa));
        }
        int ndet = static_cast<int>(dets.size());
        for (int t = 0; t < restarts; ++t) {
            out.restarts_used += 1;
            bool adaptive = (t & 1) != 0;
            GnPoint s;
            if (t < 2 * ndet) {
                s = dets[t >> 1];
            } else {
                int rt = (t - 2 * ndet) >> 1;
                Rng rng(mix_seed(budget.seed, 0x69e + rt));
                auto draw = [&](long rows, long cols) {
                    Matrix m(rows, cols);
                    for (long cc = 0; cc < cols; ++cc)
                        for (long rr = 0; rr < rows; ++rr) m(rr, cc) = rng.cgaussian();
                    return m;
                };
                s.a = draw(gp_.d1, gp_.e1);
                s.b = draw(gp_.d2, gp_.e2);
                s.c = draw(gq_.d1, gq_.e1);
                s.d = draw(gq_.d2, gq_.e2);
                s.v = draw(2, 2);
                int idx = rt % (nsym + 1);
                if (idx < nsym) {
                    s.v = syms[idx];
                    gn_consistent_start(s, false);
                } else {
                    gn_consistent_start(s);
                }
                if (rt & 1) gn_als_start(s, 8);
            }
            Vector p = gn_pack(s);
            // aim the gauge row so the start is feasible
            Vector v0 = p.segment(gn_block_vars(), 4);
            gn_gauge_ = v0.squaredNorm() > 1e-24 ? Vector(v0 / v0.squaredNorm())
                                                 : Vector(Vector::Constant(4, Complex(0.5, 0)));
            if (gn_descend(std::move(p), budget, out, adaptive)) return true;
        }
        return false;
    }

    // Exact scan for one- and two-dimensional components: rank-one points
    // of a matrix pencil R(c1, c2) are cut out by quadratic 2x2 minors, so
    // roots of sampled minors plus the two axis points exhaust the
    // candidates up to sampling.
    bool analytic_phase(const detail::SearchComponent& comp, double accept_tol,
                        SearchOutcome& out) {
        std::vector<Vector> cands;
        if (comp.dim == 1) {
            Vector c(1);
            c << Complex(1, 0);
            cands.push_back(c);
        } else {
            auto add_minor_roots = [&](const Matrix& m0, const Matrix& m1) {
                long rows = m0.rows(), cols = m0.cols();
                for (long i = 0; i + 1 < rows && cands.size() < 24; i += 2)
                    for (long jj = 0; jj + 1 < cols && cands.size() < 24; jj += 2) {
                        auto minor = [&](Complex c1, Complex c2) {
                            Complex a = c1 * m0(i, jj) + c2 * m1(i, jj);
                            Complex b = c1 * m0(i, jj + 1) + c2 * m1(i, jj + 1);
                            Complex cc = c1 * m0(i + 1, jj) + c2 * m1(i + 1, jj);
                            Complex d = c1 * m0(i + 1, jj + 1) + c2 * m1(i + 1, jj + 1);
                            return a * d - b * cc;
                        };
                        Complex alpha = minor(Complex(1, 0), Complex(0, 0));
                        Complex gamma = minor(Complex(0, 0), Complex(1, 0));
                        Complex beta = minor(Complex(1, 0), Complex(1, 0)) - alpha - gamma;
                        if (std::abs(alpha) + std::abs(beta) + std::abs(gamma) < 1e-14) continue;
                        int infs = 0;
                        // roots in t = c1 / c2, then the point c2 = 0
                        std::vector<Complex> roots = poly_roots({gamma, beta, alpha}, &infs, 1e-12);
                        for (const Complex& t : roots) {
                            Vector c(2);
                            c << t, Complex(1, 0);
                            cands.push_back(c / c.norm());
                        }
                        if (infs > 0) {
                            Vector c(2);
                            c << Complex(1, 0), Complex(0, 0);
                            cands.push_back(c);
                        }
                    }
            };
            add_minor_roots(comp.r1k[0], comp.r1k[1]);
            add_minor_roots(comp.r2k[0], comp.r2k[1]);
            Vector e1(2), e2(2);
            e1 << Complex(1, 0), Complex(0, 0);
            e2 << Complex(0, 0), Complex(1, 0);
            cands.push_back(e1);
            cands.push_back(e2);
        }
        for (const Vector& c : cands)
            if (try_accept(comp, c, accept_tol, out, "analytic")) return true;
        return false;
    }

    // Alternating-projection burst.  Returns true on an accepted candidate;
    // `iters` is decremented by the iterations actually spent.
    bool als_burst(const detail::SearchComponent& comp, Vector& c, double& f, int burst,
                   int& iters, const SearchBudget& budget, SearchOutcome& out) {
        long l1 = comp.r1k[0].size(), l2 = comp.r2k[0].size();
        double prev = std::numeric_limits<double>::infinity();
        int stall = 0;
        for (int it = 0; it < burst && iters > 0; ++it, --iters) {
            Matrix pr1, pr2;
            f = objective(comp, c, &pr1, &pr2);
            out.residual = std::min(out.residual, f);
            if (f <= budget.accept_tol && try_accept(comp, c, budget.accept_tol, out, "als"))
                return true;
            if (prev - f < budget.step_tolerance * std::max(1.0, prev)) {
                if (++stall >= 6) break;
            } else {
                stall = 0;
            }
            prev = f;
            Vector rhs(l1 + l2);
            rhs.head(l1) = vec_cm(pr1);
            rhs.tail(l2) = vec_cm(pr2);
            Vector cnew = comp.gqr.solve(rhs);
            double nrm = cnew.norm();
            if (nrm < 1e-300) break;
            c = cnew / nrm;
        }
        f = objective(comp, c, nullptr, nullptr);
        out.residual = std::min(out.residual, f);
        return false;
    }

    // One restart: alternating projection in the coordinates, compass
    // descent in the chart.
    bool restart_search(const Matrix& vsym, Vector tau, Vector c0, const SearchBudget& budget,
                        SearchOutcome& out, bool identity_start) {
        auto build = [&](const Vector& t) { return make_component(chart_v(t) * vsym); };
        std::optional<detail::SearchComponent> comp = build(tau);
        if (!comp) return false;
        Vector c = identity_start ? project_identity(*comp) : c0;
        if (c.size() != comp->dim || c.norm() == 0) {
            if (c0.size() == comp->dim && c0.norm() > 0)
                c = c0;
            else
                return false;
        }
        c /= c.norm();

        int iters = budget.max_iterations;
        double f = std::numeric_limits<double>::infinity();
        double step = 0.5;
        int tdim = static_cast<int>(tau.size());
        while (iters > 0) {
            if (als_burst(*comp, c, f, tdim == 0 ? iters : 40, iters, budget, out)) return true;
            if (tdim == 0) break;  // nothing else to move
            bool improved = false;
            Vector best_tau = tau, best_c = c;
            double best_f = f;
            detail::SearchComponent best_comp = *comp;
            for (int dir = 0; dir < 4 * tdim && iters > 0; ++dir) {
                int coord = dir / 4;
                int part = (dir / 2) % 2;
                double sign = (dir % 2) ? -1.0 : 1.0;
                Vector t2 = tau;
                t2[coord] += Complex(part == 0 ? sign * step : 0.0, part == 1 ? sign * step : 0.0);
                std::optional<detail::SearchComponent> trial = build(t2);
                if (!trial) continue;
                auto [x, y] = assemble_pair(*comp, c);
                Vector c2 = project_pair(*trial, x, y);
                if (c2.size() != trial->dim || c2.norm() == 0) continue;
                double f2 = std::numeric_limits<double>::infinity();
                if (als_burst(*trial, c2, f2, 12, iters, budget, out)) return true;
                if (f2 < best_f) {
                    best_f = f2;
                    best_tau = t2;
                    best_c = c2;
                    best_comp = std::move(*trial);
                    improved = true;
                }
            }
            if (improved) {
                tau = best_tau;
                c = best_c;
                comp = std::move(best_comp);
                f = best_f;
                step = std::min(step * 1.5, 2.0);
            } else {
                step *= 0.4;
                if (step < 1e-5) break;
            }
        }
        return try_accept(*comp, c, budget.accept_tol, out, "als");
    }

    SearchOutcome run_internal(const SearchBudget& budget, const std::vector<Matrix>& syms,
                               int tau_dim, const detail::SearchComponent* fixed) {
        SearchOutcome out;

        // phase 0: the direct candidate at the identity twist
        std::optional<detail::SearchComponent> comp0 =
            fixed ? std::optional<detail::SearchComponent>(*fixed)
                  : make_component(Matrix::Identity(2, 2));
        if (!comp0) return out;
        {
            Vector c = project_identity(*comp0);
            if (c.norm() > 0 && try_accept(*comp0, c, budget.accept_tol, out, "direct"))
                return out;
        }

        // phase 1: analytic scan of small components at the chart center
        if (comp0->dim <= 2 && analytic_phase(*comp0, budget.accept_tol, out)) return out;
        if (!fixed)
            for (std::size_t si = 1; si < syms.size(); ++si) {
                std::optional<detail::SearchComponent> comp = make_component(syms[si]);
                if (comp && comp->dim <= 2 && analytic_phase(*comp, budget.accept_tol, out))
                    return out;
            }

        // phase 2: Gauss-Newton restarts on the product parametrization.
        // The alternating-projection loop below keeps a slice of the budget
        // as a fallback; external descriptors never reach the GN phase.
        int als_restarts = budget.restarts;
        if (!fixed && gn_ready_) {
            int gn_restarts = std::max(1, (budget.restarts * 4) / 5);
            als_restarts = budget.restarts - gn_restarts;
            if (gn_phase(gn_restarts, budget, syms, out)) return out;
        }

        // phase 3: seeded alternating-projection restarts, identity component
        // first
        int nsym = static_cast<int>(syms.size());
        const double tau_scales[3] = {0.35, 1.0, 2.5};
        for (int t = 0; t < als_restarts; ++t) {
            out.restarts_used += 1;
            Rng rng(mix_seed(budget.seed, 0xa15 + t));
            if (fixed) {
                if (fixed->dim == 0) break;
                Vector c(fixed->dim);
                for (int i = 0; i < fixed->dim; ++i) c[i] = rng.cgaussian();
                if (c.norm() == 0) continue;
                c /= c.norm();
                double f = std::numeric_limits<double>::infinity();
                int iters = budget.max_iterations;
                if (als_burst(*fixed, c, f, iters, iters, budget, out)) return out;
                if (try_accept(*fixed, c, budget.accept_tol, out, "als")) return out;
                continue;
            }
            const Matrix& vsym = syms[t % nsym];
            Vector tau = Vector::Zero(tau_dim);
            bool identity_start = (t == 0);
            if (!identity_start && tau_dim > 0 && t >= nsym) {
                double scale = tau_scales[(t / nsym) % 3];
                for (int i = 0; i < tau_dim; ++i) tau[i] = scale * rng.cgaussian();
            }
            Vector c0;
            if (!identity_start) {
                std::optional<detail::SearchComponent> probe = make_component(chart_v(tau) * vsym);
                if (!probe) continue;
                c0 = Vector(probe->dim);
                for (int i = 0; i < probe->dim; ++i) c0[i] = rng.cgaussian();
            }
            if (restart_search(vsym, tau, c0, budget, out, identity_start)) return out;
        }
        return out;
    }
};

// Convenience wrapper: candidate operators plus a pair-space descriptor,
// identity frames, no twisted components.  Tests whether some member of
//     { (X(c) P_cand, Q_cand Y(c)^{-1}) : c }
// is a pair of Kronecker products with the given group shapes.
inline SearchOutcome search_factorizable(const Matrix& p_cand, const Matrix& q_cand,
                                         const CommutantDescriptor& descriptor, GroupShape gp,
                                         GroupShape gq, const SearchBudget& budget) {
    if (descriptor.dim == 0) return SearchOutcome{};
    long m = p_cand.rows(), n = q_cand.rows();
    FactorSearch fs(Matrix::Identity(m, n), Matrix::Identity(m, n), gp, gq);
    fs.set_frames(Matrix::Identity(2, 2), p_cand, q_cand, Matrix::Identity(2, 2),
                  Matrix::Identity(m, m), Matrix::Identity(n, n));
    return fs.run_with_descriptor(descriptor, budget);
}

}  // namespace slocc
