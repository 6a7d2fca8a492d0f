// Family classification and equivalence decision.
//
// A state's family label is the structure key of its pencil standard form
// together with the gauge-fixed eigenvalue parameters.  Two states are
// equivalent under invertible local operators exactly when their labels
// agree, and in that case a concrete certificate tuple is hunted down by
// the factorizability search; failure to find one within the budget leaves
// the comparison undecided rather than contradicting the label match.
#pragma once

#include "slocc/canonical.hpp"
#include "slocc/realign.hpp"
#include "slocc/search.hpp"
#include "slocc/tensor.hpp"

#include <cstdio>
#include <optional>

namespace slocc {

// --- dimension regime -------------------------------------------------------

struct GenuineRegime {
    bool ok = false;
    std::string why;
};

// The classification covers genuinely multipartite states when the larger
// of the two flattening sides is at most twice the smaller one.
inline GenuineRegime genuine_check(const std::vector<int>& dims) {
    long a = 0, b = 0;
    if (dims.size() == 5) {
        a = long(dims[1]) * dims[2];
        b = long(dims[3]) * dims[4];
    } else if (dims.size() == 3) {
        a = dims[1];
        b = dims[2];
    } else {
        throw Error("genuine_check: expected 3 or 5 parties");
    }
    if (a < b) std::swap(a, b);
    GenuineRegime g;
    g.ok = a <= 2 * b;
    if (g.ok)
        g.why = "flattening sides " + std::to_string(a) + " and " + std::to_string(b) +
                ": larger is at most twice the smaller";
    else
        g.why = "flattening side " + std::to_string(a) + " exceeds twice " + std::to_string(b) +
                ": families here cannot exhaust genuinely entangled states";
    return g;
}

// Rank of each single-party flattening.
inline std::vector<int> local_flattening_ranks(const StateTensor& s, double tol = 1e-9) {
    const std::vector<int>& dims = s.dims();
    long total = s.size();
    std::vector<int> out;
    out.reserve(dims.size());
    for (std::size_t k = 0; k < dims.size(); ++k) {
        long d = dims[k];
        long post = 1;
        for (std::size_t j = k + 1; j < dims.size(); ++j) post *= dims[j];
        Matrix m(d, total / d);
        long col = 0;
        for (long pre = 0; pre < total / (post * d); ++pre)
            for (long po = 0; po < post; ++po, ++col)
                for (long i = 0; i < d; ++i) m(i, col) = s[pre * post * d + i * post + po];
        out.push_back(rank_at(m, tol));
    }
    return out;
}

// --- family labels ----------------------------------------------------------

struct FamilyLabel {
    std::vector<int> dims;
    bool transposed = false;
    std::string structure;
    std::vector<Complex> params;  // exact values; quantized only for display

    std::string params_text() const {
        std::string out;
        char buf[80];
        for (std::size_t i = 0; i < params.size(); ++i) {
            double re = std::round(params[i].real() * 1e6) / 1e6;
            double im = std::round(params[i].imag() * 1e6) / 1e6;
            if (re == 0.0) re = 0.0;  // normalize -0
            if (im == 0.0) im = 0.0;
            std::snprintf(buf, sizeof buf, "%.6f%+.6fi", re, im);
            if (i) out += ";";
            out += buf;
        }
        return out;
    }

    Json to_json() const {
        Json j;
        j["dims"] = dims;
        j["transposed"] = transposed;
        j["structure"] = structure;
        Json ps = Json::array();
        for (const Complex& p : params) ps.push_back(Json::array({p.real(), p.imag()}));
        j["params"] = ps;
        j["params_text"] = params_text();
        return j;
    }
};

inline bool same_family(const FamilyLabel& a, const FamilyLabel& b, double param_tol = 1e-6) {
    if (a.dims != b.dims || a.transposed != b.transposed || a.structure != b.structure)
        return false;
    if (a.params.size() != b.params.size()) return false;
    for (std::size_t i = 0; i < a.params.size(); ++i) {
        double scale = std::max({1.0, std::abs(a.params[i]), std::abs(b.params[i])});
        if (std::abs(a.params[i] - b.params[i]) > param_tol * scale) return false;
    }
    return true;
}

// --- classification ----------------------------------------------------------

struct Classification {
    FamilyLabel label;
    CanonicalResult canon;
    MatrixPencil pencil;
    RankProfile profile;
    std::vector<int> local_ranks;
    GenuineRegime regime;
    bool genuine = false;  // regime holds and no party factors out

    Json to_json() const {
        Json j;
        j["dims"] = label.dims;
        j["family"] = label.to_json();
        j["standard_form"] = canon.form.to_json();
        j["rank_profile"] = Json{{"rank_g1", profile.rank_g1},
                                 {"rank_g2", profile.rank_g2},
                                 {"normal_rank", profile.normal_rank},
                                 {"rank_col_span", profile.rank_col_span},
                                 {"rank_row_span", profile.rank_row_span},
                                 {"effective_shape", profile.effective_shape}};
        j["local_ranks"] = local_ranks;
        j["genuine"] = genuine;
        j["genuine_regime"] = Json{{"ok", regime.ok}, {"why", regime.why}};
        j["transform_residual"] = canon.tf.residual;
        return j;
    }
};

inline Classification classify(const StateTensor& state, double tol = 1e-9) {
    Classification c;
    c.pencil = to_matrix_pair(state);
    c.canon = canonical_form(c.pencil, tol);
    c.profile = rank_profile(c.pencil, tol);
    c.label.dims = state.dims();
    c.label.transposed = c.pencil.transposed;
    c.label.structure = c.canon.form.key();
    c.label.params = c.canon.form.params;
    c.local_ranks = local_flattening_ranks(state, tol);
    c.regime = genuine_check(state.dims());
    c.genuine = c.regime.ok;
    for (int r : c.local_ranks)
        if (r < 2) c.genuine = false;
    return c;
}

// --- equivalence certificates -------------------------------------------------

inline Json matrix_to_json(const Matrix& m) {
    Json re = Json::array(), im = Json::array();
    for (long i = 0; i < m.rows(); ++i) {
        Json rrow = Json::array(), irow = Json::array();
        for (long jj = 0; jj < m.cols(); ++jj) {
            rrow.push_back(m(i, jj).real());
            irow.push_back(m(i, jj).imag());
        }
        re.push_back(rrow);
        im.push_back(irow);
    }
    return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"re", re}, {"im", im}};
}

struct EquivalenceCertificate {
    std::vector<Matrix> ops;  // one operator per party, in party order
    double residual = 0.0;    // relative distance of (ops applied to a) from b
    std::string phase;
    int restarts_used = 0;

    Json to_json() const {
        Json j;
        Json parties = Json::array();
        for (const Matrix& m : ops) parties.push_back(matrix_to_json(m));
        j["operators"] = parties;
        j["residual"] = residual;
        j["search_phase"] = phase;
        j["restarts_used"] = restarts_used;
        return j;
    }
};

namespace detail {

// Split the connecting sandwich (t, p, q) into per-party operators and check
// them against the states end to end.  `src`/`dst` are the actual tensors;
// the pencil provides the grouping and orientation.
inline std::optional<EquivalenceCertificate> assemble_certificate(
    const StateTensor& src, const StateTensor& dst, const MatrixPencil& pencil, const Matrix& t,
    const Matrix& p, const Matrix& q, double cert_tol) {
    const std::vector<int>& dims = src.dims();
    LocalOperatorTuple tuple;
    tuple.ops.resize(dims.size());
    tuple.ops[0] = t;
    try {
        if (dims.size() == 3) {
            Matrix qt = q.transpose();
            tuple.ops[1] = pencil.transposed ? qt : p;
            tuple.ops[2] = pencil.transposed ? p : qt;
        } else {
            GroupShape grow{pencil.row_group[0], pencil.row_group[1], pencil.row_group[0],
                            pencil.row_group[1]};
            GroupShape gcol{pencil.col_group[0], pencil.col_group[1], pencil.col_group[0],
                            pencil.col_group[1]};
            KronFactors rowf = kron_factor(p, grow, 1e-6);
            KronFactors colf = kron_factor(q.transpose().eval(), gcol, 1e-6);
            if (!pencil.transposed) {
                tuple.ops[1] = rowf.a;
                tuple.ops[2] = rowf.b;
                tuple.ops[3] = colf.a;
                tuple.ops[4] = colf.b;
            } else {
                tuple.ops[1] = colf.a;
                tuple.ops[2] = colf.b;
                tuple.ops[3] = rowf.a;
                tuple.ops[4] = rowf.b;
            }
        }
    } catch (const NotAProduct&) {
        return std::nullopt;
    }
    double scale = 0.0;
    for (long i = 0; i < dst.size(); ++i) scale += std::norm(dst[i]);
    scale = std::sqrt(scale);
    double res = state_distance(apply_local_ops(src, tuple), dst) / scale;
    if (!(res <= cert_tol)) return std::nullopt;
    EquivalenceCertificate cert;
    cert.ops = std::move(tuple.ops);
    cert.residual = res;
    return cert;
}

// Eigenvalue positions of a standard form with their size multisets, in
// canonical order: infinity, then finite positions by first appearance.
inline std::vector<std::pair<EigPoint, std::vector<int>>> family_positions(
    const StandardForm& f) {
    std::vector<std::pair<EigPoint, std::vector<int>>> pos;
    if (!f.inf_blocks.empty()) pos.push_back({EigPoint::inf(), f.inf_blocks});
    for (const FiniteBlock& b : f.finite_blocks) {
        bool merged = false;
        for (auto& pr : pos)
            if (!pr.first.infinite && std::abs(pr.first.z - b.eigenvalue) < 1e-12) {
                pr.second.push_back(b.size);
                merged = true;
                break;
            }
        if (!merged) pos.push_back({EigPoint::finite(b.eigenvalue), {b.size}});
    }
    for (auto& pr : pos) std::sort(pr.second.begin(), pr.second.end(), std::greater<int>());
    return pos;
}

}  // namespace detail

// --- comparison ----------------------------------------------------------------

enum class CompareStatus { Equivalent, Inequivalent, Undecided, DimsMismatch };

inline const char* to_string(CompareStatus s) {
    switch (s) {
        case CompareStatus::Equivalent: return "equivalent";
        case CompareStatus::Inequivalent: return "inequivalent";
        case CompareStatus::Undecided: return "undecided";
        default: return "dims_mismatch";
    }
}

struct CompareOptions {
    double tol = 1e-9;       // canonicalization tolerance
    double cert_tol = 1e-8;  // certificate acceptance threshold
    SearchBudget budget;
};

struct CompareResult {
    CompareStatus status = CompareStatus::Undecided;
    std::string reason;
    std::optional<FamilyLabel> label_a, label_b;
    std::optional<EquivalenceCertificate> certificate;
    double best_residual = std::numeric_limits<double>::infinity();

    Json to_json() const {
        Json j;
        j["status"] = to_string(status);
        j["reason"] = reason;
        if (label_a) j["label_a"] = label_a->to_json();
        if (label_b) j["label_b"] = label_b->to_json();
        if (certificate) j["certificate"] = certificate->to_json();
        if (std::isfinite(best_residual)) j["best_search_residual"] = best_residual;
        return j;
    }
};

inline CompareResult compare(const StateTensor& a, const StateTensor& b,
                             const CompareOptions& opts = {}) {
    CompareResult res;
    if (a.dims() != b.dims()) {
        res.status = CompareStatus::DimsMismatch;
        res.reason = "states live on different party dimensions";
        return res;
    }

    Classification ca, cb;
    try {
        ca = classify(a, opts.tol);
        cb = classify(b, opts.tol);
    } catch (const RankDecisionUnstable& e) {
        res.status = CompareStatus::Undecided;
        res.reason = std::string("standard form could not be stabilized: ") + e.what();
        return res;
    }
    res.label_a = ca.label;
    res.label_b = cb.label;

    if (!same_family(ca.label, cb.label)) {
        res.status = CompareStatus::Inequivalent;
        if (ca.label.structure != cb.label.structure)
            res.reason = "standard form structures differ: " + ca.label.structure + " vs " +
                         cb.label.structure;
        else
            res.reason = "standard form parameters differ: [" + ca.label.params_text() +
                         "] vs [" + cb.label.params_text() + "]";
        return res;
    }

    GroupShape gp{ca.pencil.row_group[0], ca.pencil.row_group[1], ca.pencil.row_group[0],
                  ca.pencil.row_group[1]};
    GroupShape gq{ca.pencil.col_group[0], ca.pencil.col_group[1], ca.pencil.col_group[0],
                  ca.pencil.col_group[1]};

    // Hunt for a certificate in one direction.  The verifier performs the
    // complete end-to-end assembly, so Found implies a checked certificate.
    auto attempt = [&](const Classification& src_c, const Classification& dst_c,
                       const StateTensor& src, const StateTensor& dst,
                       bool reversed) -> std::optional<EquivalenceCertificate> {
        FactorSearch fs(src_c.canon.form.e, src_c.canon.form.j, gp, gq);
        fs.set_frames(src_c.canon.tf.t, src_c.canon.tf.p, src_c.canon.tf.q, dst_c.canon.tf.t,
                      dst_c.canon.tf.p, dst_c.canon.tf.q);
        fs.set_positions(detail::family_positions(src_c.canon.form));
        std::optional<EquivalenceCertificate> cert;
        fs.set_verifier([&](const Matrix& t, const Matrix& p, const Matrix& q) {
            std::optional<EquivalenceCertificate> c =
                detail::assemble_certificate(src, dst, src_c.pencil, t, p, q, opts.cert_tol);
            if (!c) return false;
            if (reversed) {
                // invert per party and re-check in the forward direction
                std::vector<Matrix> inv;
                inv.reserve(c->ops.size());
                for (const Matrix& m : c->ops) inv.push_back(m.inverse());
                LocalOperatorTuple tuple{inv};
                double scale = 0.0;
                for (long i = 0; i < src.size(); ++i) scale += std::norm(src[i]);
                scale = std::sqrt(scale);
                double r = state_distance(apply_local_ops(dst, tuple), src) / scale;
                if (!(r <= opts.cert_tol)) return false;
                c->ops = std::move(inv);
                c->residual = r;
            }
            cert = std::move(c);
            return true;
        });
        SearchOutcome out = fs.run(opts.budget);
        res.best_residual = std::min(res.best_residual, out.residual);
        if (out.verdict == SearchVerdict::Found && cert) {
            cert->phase = out.phase;
            cert->restarts_used = out.restarts_used;
            return cert;
        }
        return std::nullopt;
    };

    std::optional<EquivalenceCertificate> cert = attempt(ca, cb, a, b, false);
    if (!cert) cert = attempt(cb, ca, b, a, true);
    if (cert) {
        res.status = CompareStatus::Equivalent;
        res.reason = "factorizable connecting operator found (" + cert->phase + ")";
        res.certificate = std::move(cert);
        return res;
    }
    res.status = CompareStatus::Undecided;
    res.reason =
        "labels agree but no factorizable connecting operator was found within the budget";
    return res;
}

}  // namespace slocc
