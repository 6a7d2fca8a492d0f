// State tensors for systems of shape 2 x L x M x N x H (or tripartite
// 2 x M x N), their JSON serialization, local-operator actions and the
// flattening into a pair of coefficient matrices.
#pragma once

#include "slocc/linalg.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <numeric>
#include <sstream>
#include <utility>

namespace slocc {

using Json = nlohmann::ordered_json;

class StateTensor {
public:
    StateTensor(std::vector<int> dims, std::vector<Complex> data)
        : dims_(std::move(dims)), data_(std::move(data)) {
        validate_dims(dims_);
        if (data_.size() != static_cast<std::size_t>(total_dim(dims_)))
            throw Error("StateTensor: data length does not match dims");
        double n2 = 0.0;
        for (const Complex& c : data_) {
            if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
                throw Error("StateTensor: non-finite amplitude");
            n2 += std::norm(c);
        }
        if (n2 == 0.0) throw Error("StateTensor: zero state is not allowed");
    }

    static void validate_dims(const std::vector<int>& dims) {
        if (dims.size() != 3 && dims.size() != 5)
            throw Error("StateTensor: dims must list 3 or 5 parties");
        if (dims[0] != 2) throw Error("StateTensor: first party dimension must be 2");
        for (int d : dims)
            if (d < 1) throw Error("StateTensor: party dimensions must be positive");
    }

    static long total_dim(const std::vector<int>& dims) {
        long t = 1;
        for (int d : dims) t *= d;
        return t;
    }

    const std::vector<int>& dims() const { return dims_; }
    int parties() const { return static_cast<int>(dims_.size()); }
    const std::vector<Complex>& data() const { return data_; }
    long size() const { return static_cast<long>(data_.size()); }

    // Row-major flat offset, last index fastest; indices are 0-based here.
    long offset(const std::vector<int>& idx0) const {
        long off = 0;
        for (std::size_t k = 0; k < dims_.size(); ++k) off = off * dims_[k] + idx0[k];
        return off;
    }

    const Complex& operator[](long i) const { return data_[i]; }

    double norm() const {
        double n2 = 0.0;
        for (const Complex& c : data_) n2 += std::norm(c);
        return std::sqrt(n2);
    }

private:
    std::vector<int> dims_;
    std::vector<Complex> data_;
};

inline double state_distance(const StateTensor& a, const StateTensor& b) {
    if (a.dims() != b.dims()) throw Error("state_distance: dims mismatch");
    double n2 = 0.0;
    for (long i = 0; i < a.size(); ++i) n2 += std::norm(a[i] - b[i]);
    return std::sqrt(n2);
}

// --- JSON round trip -------------------------------------------------------

// Sparse form: {"dims": [...], "entries": [{"idx": [...], "re": x, "im": y}]}
// with 1-based indices; dense form: {"dims": [...], "dense": [re, im, ...]}
// row-major with the last index fastest.
inline StateTensor load_state(const Json& doc) {
    if (!doc.is_object()) throw ParseError("state: top level must be an object");
    if (!doc.contains("dims")) throw ParseError("state: missing dims");
    std::vector<int> dims;
    try {
        dims = doc.at("dims").get<std::vector<int>>();
    } catch (const nlohmann::json::exception&) {
        throw ParseError("state: dims must be an integer list");
    }
    try {
        StateTensor::validate_dims(dims);
    } catch (const Error& e) {
        throw ParseError(e.what());
    }
    long total = StateTensor::total_dim(dims);
    bool has_entries = doc.contains("entries");
    bool has_dense = doc.contains("dense");
    if (has_entries == has_dense)
        throw ParseError("state: need exactly one of entries/dense");

    std::vector<Complex> data(total, Complex(0.0, 0.0));
    if (has_dense) {
        const Json& arr = doc.at("dense");
        if (!arr.is_array() || static_cast<long>(arr.size()) != 2 * total)
            throw ParseError("state: dense array must hold 2*prod(dims) numbers");
        for (long i = 0; i < total; ++i) {
            if (!arr[2 * i].is_number() || !arr[2 * i + 1].is_number())
                throw ParseError("state: dense array must be numeric");
            data[i] = Complex(arr[2 * i].get<double>(), arr[2 * i + 1].get<double>());
        }
    } else {
        const Json& arr = doc.at("entries");
        if (!arr.is_array()) throw ParseError("state: entries must be a list");
        std::vector<bool> seen(total, false);
        for (const Json& e : arr) {
            if (!e.is_object() || !e.contains("idx") || !e.contains("re") || !e.contains("im"))
                throw ParseError("state: entry needs idx/re/im");
            std::vector<int> idx;
            try {
                idx = e.at("idx").get<std::vector<int>>();
            } catch (const nlohmann::json::exception&) {
                throw ParseError("state: entry idx must be an integer list");
            }
            if (idx.size() != dims.size())
                throw ParseError("state: entry idx length does not match dims");
            long off = 0;
            for (std::size_t k = 0; k < dims.size(); ++k) {
                if (idx[k] < 1 || idx[k] > dims[k])
                    throw ParseError("state: entry index out of range");
                off = off * dims[k] + (idx[k] - 1);
            }
            if (seen[off]) throw ParseError("state: duplicate entry index");
            seen[off] = true;
            if (!e.at("re").is_number() || !e.at("im").is_number())
                throw ParseError("state: entry re/im must be numbers");
            data[off] = Complex(e.at("re").get<double>(), e.at("im").get<double>());
        }
    }
    try {
        return StateTensor(dims, std::move(data));
    } catch (const Error& e) {
        throw ParseError(e.what());
    }
}

inline StateTensor load_state(const std::string& text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("state: invalid JSON: ") + e.what());
    }
    return load_state(doc);
}

// Writes the sparse form with entries sorted lexicographically by index,
// or the dense form when requested.  Both round-trip exactly.
inline Json save_state(const StateTensor& state, bool dense = false) {
    Json doc;
    doc["dims"] = state.dims();
    if (dense) {
        Json arr = Json::array();
        for (long i = 0; i < state.size(); ++i) {
            arr.push_back(state[i].real());
            arr.push_back(state[i].imag());
        }
        doc["dense"] = std::move(arr);
        return doc;
    }
    Json entries = Json::array();
    const std::vector<int>& dims = state.dims();
    std::vector<int> idx(dims.size(), 1);
    // Row-major flat order coincides with lexicographic index order.
    for (long off = 0; off < state.size(); ++off) {
        if (state[off] != Complex(0.0, 0.0)) {
            Json e;
            e["idx"] = idx;
            e["re"] = state[off].real();
            e["im"] = state[off].imag();
            entries.push_back(std::move(e));
        }
        for (int k = static_cast<int>(dims.size()) - 1; k >= 0; --k) {
            if (++idx[k] <= dims[k]) break;
            idx[k] = 1;
        }
    }
    doc["entries"] = std::move(entries);
    return doc;
}

// --- local operators --------------------------------------------------------

struct LocalOperatorTuple {
    std::vector<Matrix> ops;  // one square matrix per party

    void validate(const std::vector<int>& dims, double inv_tol = 1e-12) const {
        if (ops.size() != dims.size())
            throw Error("LocalOperatorTuple: operator count does not match dims");
        for (std::size_t k = 0; k < ops.size(); ++k) {
            if (ops[k].rows() != dims[k] || ops[k].cols() != dims[k])
                throw Error("LocalOperatorTuple: operator shape does not match party");
            Eigen::JacobiSVD<Matrix> svd(ops[k]);
            const auto& sv = svd.singularValues();
            if (sv[sv.size() - 1] <= inv_tol * sv[0])
                throw Error("LocalOperatorTuple: operator is not invertible");
        }
    }

    double max_cond() const {
        double worst = 1.0;
        for (const Matrix& a : ops) {
            Eigen::JacobiSVD<Matrix> svd(a);
            const auto& sv = svd.singularValues();
            if (sv[sv.size() - 1] == 0.0) return std::numeric_limits<double>::infinity();
            worst = std::max(worst, sv[0] / sv[sv.size() - 1]);
        }
        return worst;
    }

    LocalOperatorTuple inverse() const {
        LocalOperatorTuple inv;
        inv.ops.reserve(ops.size());
        for (const Matrix& a : ops) inv.ops.push_back(a.inverse());
        return inv;
    }
};

// psi' = (A1 kron A2 kron ...) psi, computed one mode at a time.
inline StateTensor apply_local_ops(const StateTensor& state, const LocalOperatorTuple& tuple) {
    const std::vector<int>& dims = state.dims();
    if (tuple.ops.size() != dims.size())
        throw Error("apply_local_ops: operator count does not match dims");
    std::vector<Complex> cur = state.data();
    long total = state.size();
    for (std::size_t k = 0; k < dims.size(); ++k) {
        const Matrix& a = tuple.ops[k];
        if (a.rows() != dims[k] || a.cols() != dims[k])
            throw Error("apply_local_ops: operator shape does not match party");
        int d = dims[k];
        long post = 1;
        for (std::size_t j = k + 1; j < dims.size(); ++j) post *= dims[j];
        long pre = total / (post * d);
        std::vector<Complex> next(total, Complex(0.0, 0.0));
        for (long p = 0; p < pre; ++p)
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    Complex aij = a(i, j);
                    if (aij == Complex(0.0, 0.0)) continue;
                    const Complex* src = cur.data() + (p * d + j) * post;
                    Complex* dst = next.data() + (p * d + i) * post;
                    for (long q = 0; q < post; ++q) dst[q] += aij * src[q];
                }
        cur.swap(next);
    }
    return StateTensor(dims, std::move(cur));
}

inline StateTensor random_state(const std::vector<int>& dims, std::uint64_t seed) {
    StateTensor::validate_dims(dims);
    Rng rng(mix_seed(seed, 0x57a7e));
    long total = StateTensor::total_dim(dims);
    std::vector<Complex> data(total);
    double n2 = 0.0;
    for (long i = 0; i < total; ++i) {
        data[i] = rng.cgaussian();
        n2 += std::norm(data[i]);
    }
    double n = std::sqrt(n2);
    for (Complex& c : data) c /= n;
    return StateTensor(dims, std::move(data));
}

inline LocalOperatorTuple random_local_tuple(const std::vector<int>& dims, std::uint64_t seed,
                                             double cond_bound = 100.0) {
    LocalOperatorTuple t;
    t.ops.reserve(dims.size());
    for (std::size_t k = 0; k < dims.size(); ++k)
        t.ops.push_back(random_invertible(dims[k], mix_seed(seed, 0xa110c + k), cond_bound));
    return t;
}

// --- matrix-pair flattening --------------------------------------------------

// The two coefficient matrices of a state, sliced along the first party.
// Rows flatten parties (2,3) and columns parties (4,5); tripartite states
// use the trivial groupings (1,M) and (N,1).  When the natural orientation
// has more rows than columns both matrices are stored transposed and the
// flag records it.
struct MatrixPencil {
    Matrix g1, g2;
    std::array<int, 2> row_group;  // dimensions multiplied along rows
    std::array<int, 2> col_group;
    bool transposed = false;

    int rows() const { return static_cast<int>(g1.rows()); }
    int cols() const { return static_cast<int>(g1.cols()); }
};

inline MatrixPencil to_matrix_pair(const StateTensor& state) {
    const std::vector<int>& dims = state.dims();
    int r1, r2, c1, c2;
    if (dims.size() == 5) {
        r1 = dims[1]; r2 = dims[2]; c1 = dims[3]; c2 = dims[4];
    } else {
        r1 = 1; r2 = dims[1]; c1 = dims[2]; c2 = 1;
    }
    int rows = r1 * r2, cols = c1 * c2;
    MatrixPencil p;
    p.g1 = Matrix::Zero(rows, cols);
    p.g2 = Matrix::Zero(rows, cols);
    for (long off = 0; off < state.size(); ++off) {
        long rem = off;
        int col = static_cast<int>(rem % cols); rem /= cols;
        int row = static_cast<int>(rem % rows); rem /= rows;
        int i = static_cast<int>(rem);
        (i == 0 ? p.g1 : p.g2)(row, col) = state[off];
    }
    p.row_group = {r1, r2};
    p.col_group = {c1, c2};
    if (rows > cols) {
        p.g1 = p.g1.transpose().eval();
        p.g2 = p.g2.transpose().eval();
        std::swap(p.row_group, p.col_group);
        p.transposed = true;
    }
    return p;
}

// Inverse of the flattening, for matrices given in the natural (untransposed)
// orientation: rows flatten parties (2,3), columns parties (4,5).
inline StateTensor state_from_pair(const Matrix& g1, const Matrix& g2,
                                   const std::vector<int>& dims) {
    StateTensor::validate_dims(dims);
    long rows, cols;
    if (dims.size() == 5) {
        rows = long(dims[1]) * dims[2];
        cols = long(dims[3]) * dims[4];
    } else {
        rows = dims[1];
        cols = dims[2];
    }
    if (g1.rows() != rows || g1.cols() != cols || g2.rows() != rows || g2.cols() != cols)
        throw Error("state_from_pair: matrix shape does not match dims");
    std::vector<Complex> data(2 * rows * cols);
    for (long r = 0; r < rows; ++r)
        for (long c = 0; c < cols; ++c) {
            data[r * cols + c] = g1(r, c);
            data[(rows + r) * cols + c] = g2(r, c);
        }
    return StateTensor(dims, std::move(data));
}

}  // namespace slocc
