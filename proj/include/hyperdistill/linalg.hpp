// linalg.hpp - small dense complex algebra: kets, operators, density matrices
//
// Everything here works on dimensions up to kMaxDim. States carry a
// human-readable label per basis vector; tensor products join labels with a
// single space so "H a1" (x) "H b1" becomes "H a1 H b1".

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

namespace hyperdistill {

using Complex = std::complex<double>;

inline constexpr double kEpsNorm = 1e-12;
inline constexpr double kEpsOracle = 1e-10;
inline constexpr double kEpsEigen = 1e-10;
inline constexpr std::size_t kMaxDim = 64;

namespace detail {

inline bool is_finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

inline std::vector<std::string> split_tokens(std::string_view label) {
    std::vector<std::string> out;
    std::istringstream in{std::string(label)};
    for (std::string tok; in >> tok;) out.push_back(tok);
    return out;
}

inline std::string join_tokens(const std::vector<std::string>& toks) {
    std::string out;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (i) out += ' ';
        out += toks[i];
    }
    return out;
}

inline std::size_t product(std::span<const std::size_t> dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>{});
}

}  // namespace detail

// ---------------------------------------------------------------------------
// StateVector
// ---------------------------------------------------------------------------

class StateVector {
public:
    StateVector(std::vector<Complex> amplitudes, std::vector<std::string> labels)
        : amps_(std::move(amplitudes)), labels_(std::move(labels)) {
        if (amps_.empty()) throw std::invalid_argument("StateVector: dimension must be positive");
        if (amps_.size() != labels_.size())
            throw std::invalid_argument("StateVector: amplitude/label count mismatch");
        if (amps_.size() > kMaxDim) throw std::length_error("StateVector: dimension exceeds kMaxDim");
        for (const auto& a : amps_)
            if (!detail::is_finite(a)) throw std::domain_error("StateVector: non-finite amplitude");
        std::unordered_set<std::string> seen(labels_.begin(), labels_.end());
        if (seen.size() != labels_.size()) throw std::invalid_argument("StateVector: duplicate basis label");
    }

    // |labels[index]>
    static StateVector basis(std::vector<std::string> labels, std::size_t index) {
        if (index >= labels.size()) throw std::out_of_range("StateVector::basis: index out of range");
        std::vector<Complex> amps(labels.size());
        amps[index] = 1.0;
        return {std::move(amps), std::move(labels)};
    }

    std::size_t dim() const { return amps_.size(); }
    std::span<const Complex> amplitudes() const { return amps_; }
    const std::vector<std::string>& labels() const { return labels_; }
    const Complex& operator[](std::size_t i) const { return amps_[i]; }

    std::size_t index_of(std::string_view label) const {
        auto it = std::find(labels_.begin(), labels_.end(), label);
        if (it == labels_.end()) throw std::out_of_range("StateVector: unknown basis label '" + std::string(label) + "'");
        return static_cast<std::size_t>(it - labels_.begin());
    }
    Complex amplitude(std::string_view label) const { return amps_[index_of(label)]; }

    double squared_norm() const {
        double s = 0.0;
        for (const auto& a : amps_) s += std::norm(a);
        return s;
    }
    bool is_normalized(double tol = kEpsNorm) const { return std::abs(squared_norm() - 1.0) <= tol; }

    StateVector normalized() const {
        const double n = std::sqrt(squared_norm());
        if (n <= kEpsNorm) throw std::domain_error("StateVector::normalized: zero vector");
        return scaled(1.0 / n);
    }

    // First amplitude above kEpsNorm rotated onto the positive real axis.
    StateVector canonical_phase() const {
        for (const auto& a : amps_) {
            if (std::abs(a) > kEpsNorm) return scaled(std::conj(a) / std::abs(a));
        }
        return *this;
    }

    StateVector scaled(Complex factor) const {
        auto amps = amps_;
        for (auto& a : amps) a *= factor;
        return {std::move(amps), labels_};
    }

    // <this|other>
    Complex inner(const StateVector& other) const {
        if (other.dim() != dim()) throw std::invalid_argument("StateVector::inner: dimension mismatch");
        Complex s = 0.0;
        for (std::size_t i = 0; i < dim(); ++i) s += std::conj(amps_[i]) * other.amps_[i];
        return s;
    }

private:
    std::vector<Complex> amps_;
    std::vector<std::string> labels_;
};

// ---------------------------------------------------------------------------
// Matrix (dense, row-major, rectangular allowed)
// ---------------------------------------------------------------------------

class Matrix {
public:
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {
        if (rows == 0 || cols == 0) throw std::invalid_argument("Matrix: dimensions must be positive");
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    // |a><b|
    static Matrix outer(const StateVector& a, const StateVector& b) {
        Matrix m(a.dim(), b.dim());
        for (std::size_t i = 0; i < a.dim(); ++i)
            for (std::size_t j = 0; j < b.dim(); ++j) m(i, j) = a[i] * std::conj(b[j]);
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    Complex& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const Complex& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    Matrix adjoint() const {
        Matrix m(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c) m(c, r) = std::conj((*this)(r, c));
        return m;
    }

    Complex trace() const {
        if (!square()) throw std::invalid_argument("Matrix::trace: not square");
        Complex t = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
        return t;
    }

    double max_abs_diff(const Matrix& o) const {
        if (o.rows_ != rows_ || o.cols_ != cols_) throw std::invalid_argument("Matrix::max_abs_diff: shape mismatch");
        double d = 0.0;
        for (std::size_t i = 0; i < data_.size(); ++i) d = std::max(d, std::abs(data_[i] - o.data_[i]));
        return d;
    }

    bool is_hermitian(double tol = kEpsNorm) const { return square() && max_abs_diff(adjoint()) <= tol; }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.cols_ != b.rows_) throw std::invalid_argument("Matrix product: shape mismatch");
        Matrix m(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const Complex aik = a(i, k);
                if (aik == Complex{}) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) m(i, j) += aik * b(k, j);
            }
        return m;
    }
    friend Matrix operator-(const Matrix& a, const Matrix& b) {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw std::invalid_argument("Matrix difference: shape mismatch");
        Matrix m = a;
        for (std::size_t i = 0; i < m.data_.size(); ++i) m.data_[i] -= b.data_[i];
        return m;
    }
    friend Matrix operator+(const Matrix& a, const Matrix& b) {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw std::invalid_argument("Matrix sum: shape mismatch");
        Matrix m = a;
        for (std::size_t i = 0; i < m.data_.size(); ++i) m.data_[i] += b.data_[i];
        return m;
    }
    friend Matrix operator*(Complex s, const Matrix& a) {
        Matrix m = a;
        for (auto& x : m.data_) x *= s;
        return m;
    }

    // Matrix-vector product. Labels follow the row space: kept when the
    // operator is square, generated as "0".."n-1" otherwise.
    StateVector apply(const StateVector& v) const {
        if (cols_ != v.dim()) throw std::invalid_argument("Matrix::apply: dimension mismatch");
        std::vector<Complex> out(rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) out[i] += (*this)(i, j) * v[j];
        if (square()) return {std::move(out), v.labels()};
        std::vector<std::string> labels(rows_);
        for (std::size_t i = 0; i < rows_; ++i) labels[i] = std::to_string(i);
        return {std::move(out), std::move(labels)};
    }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<Complex> data_;
};

inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix m(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            for (std::size_t k = 0; k < b.rows(); ++k)
                for (std::size_t l = 0; l < b.cols(); ++l)
                    m(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
    return m;
}

// Ascending eigenvalues of a Hermitian matrix.
inline std::vector<double> hermitian_eigenvalues(const Matrix& m) {
    if (!m.square()) throw std::invalid_argument("hermitian_eigenvalues: not square");
    const auto n = static_cast<Eigen::Index>(m.rows());
    Eigen::MatrixXcd e(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            e(i, j) = m(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(e, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw std::runtime_error("hermitian_eigenvalues: solver failed");
    const auto& ev = solver.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

// ---------------------------------------------------------------------------
// DensityMatrix
// ---------------------------------------------------------------------------

class DensityMatrix {
public:
    // Validates: square, dim <= kMaxDim, finite, Hermitian, unit trace, PSD.
    explicit DensityMatrix(Matrix m) : m_(std::move(m)) {
        if (!m_.square()) throw std::invalid_argument("DensityMatrix: not square");
        if (m_.rows() > kMaxDim) throw std::length_error("DensityMatrix: dimension exceeds kMaxDim");
        for (std::size_t i = 0; i < m_.rows(); ++i)
            for (std::size_t j = 0; j < m_.cols(); ++j)
                if (!detail::is_finite(m_(i, j))) throw std::domain_error("DensityMatrix: non-finite entry");
        if (!m_.is_hermitian()) throw std::domain_error("DensityMatrix: not Hermitian");
        if (std::abs(m_.trace() - 1.0) > kEpsNorm) throw std::domain_error("DensityMatrix: trace != 1");
        const auto ev = hermitian_eigenvalues(m_);
        if (ev.front() < -kEpsEigen) throw std::domain_error("DensityMatrix: negative eigenvalue");
    }

    static DensityMatrix pure(const StateVector& psi) {
        if (!psi.is_normalized()) throw std::invalid_argument("DensityMatrix::pure: state not normalized");
        return DensityMatrix(Matrix::outer(psi, psi));
    }

    // sum_k w_k |psi_k><psi_k|
    static DensityMatrix mixture(std::span<const double> weights, std::span<const StateVector> states) {
        if (weights.size() != states.size() || states.empty())
            throw std::invalid_argument("DensityMatrix::mixture: weight/state count mismatch");
        Matrix m(states[0].dim(), states[0].dim());
        for (std::size_t k = 0; k < states.size(); ++k) {
            if (states[k].dim() != m.rows()) throw std::invalid_argument("DensityMatrix::mixture: dimension mismatch");
            m = m + Complex(weights[k]) * Matrix::outer(states[k], states[k]);
        }
        return DensityMatrix(std::move(m));
    }

    // Positive operator rescaled to unit trace (e.g. after a projection).
    static DensityMatrix from_unnormalized(const Matrix& m) {
        const double tr = m.trace().real();
        if (tr <= kEpsNorm) throw std::domain_error("DensityMatrix::from_unnormalized: zero trace");
        return DensityMatrix(Complex(1.0 / tr) * m);
    }

    std::size_t dim() const { return m_.rows(); }
    const Matrix& matrix() const { return m_; }
    const Complex& operator()(std::size_t r, std::size_t c) const { return m_(r, c); }
    std::vector<double> eigenvalues() const { return hermitian_eigenvalues(m_); }

private:
    Matrix m_;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

inline StateVector tensor(const StateVector& a, const StateVector& b) {
    if (!a.is_normalized() || !b.is_normalized()) throw std::invalid_argument("tensor: inputs must be normalized");
    if (a.dim() * b.dim() > kMaxDim) throw std::length_error("tensor: product dimension exceeds kMaxDim");
    std::vector<Complex> amps;
    std::vector<std::string> labels;
    amps.reserve(a.dim() * b.dim());
    labels.reserve(a.dim() * b.dim());
    for (std::size_t i = 0; i < a.dim(); ++i)
        for (std::size_t j = 0; j < b.dim(); ++j) {
            amps.push_back(a[i] * b[j]);
            labels.push_back(a.labels()[i] + ' ' + b.labels()[j]);
        }
    return {std::move(amps), std::move(labels)};
}

// Reorders tensor factors: factor k of the result is factor perm[k] of the
// input. Each label must consist of exactly dims.size() tokens.
inline StateVector permute_subsystems(const StateVector& v, std::span<const std::size_t> dims,
                                      std::span<const std::size_t> perm) {
    const std::size_t n = dims.size();
    if (perm.size() != n || detail::product(dims) != v.dim())
        throw std::invalid_argument("permute_subsystems: inconsistent dims");
    std::vector<bool> used(n, false);
    for (auto p : perm) {
        if (p >= n || used[p]) throw std::invalid_argument("permute_subsystems: not a permutation");
        used[p] = true;
    }
    std::vector<std::size_t> new_dims(n);
    for (std::size_t k = 0; k < n; ++k) new_dims[k] = dims[perm[k]];

    std::vector<Complex> amps(v.dim());
    std::vector<std::string> labels(v.dim());
    std::vector<std::size_t> idx(n), new_idx(n);
    for (std::size_t flat = 0; flat < v.dim(); ++flat) {
        std::size_t rem = flat;
        for (std::size_t k = n; k-- > 0;) {
            idx[k] = rem % dims[k];
            rem /= dims[k];
        }
        for (std::size_t k = 0; k < n; ++k) new_idx[k] = idx[perm[k]];
        std::size_t out = 0;
        for (std::size_t k = 0; k < n; ++k) out = out * new_dims[k] + new_idx[k];

        const auto toks = detail::split_tokens(v.labels()[flat]);
        if (toks.size() != n) throw std::invalid_argument("permute_subsystems: label/factor count mismatch");
        std::vector<std::string> new_toks(n);
        for (std::size_t k = 0; k < n; ++k) new_toks[k] = toks[perm[k]];
        amps[out] = v[flat];
        labels[out] = detail::join_tokens(new_toks);
    }
    return {std::move(amps), std::move(labels)};
}

// <psi|rho|psi>
inline double fidelity(const DensityMatrix& rho, const StateVector& psi) {
    if (rho.dim() != psi.dim()) throw std::invalid_argument("fidelity: dimension mismatch");
    Complex s = 0.0;
    for (std::size_t i = 0; i < psi.dim(); ++i)
        for (std::size_t j = 0; j < psi.dim(); ++j) s += std::conj(psi[i]) * rho(i, j) * psi[j];
    return s.real();
}

// Trace over every factor not listed in `keep`. Kept factors appear in
// ascending index order. Works on any square operator; no trace check.
inline Matrix partial_trace(const Matrix& m, std::span<const std::size_t> keep, std::span<const std::size_t> dims) {
    const std::size_t n = dims.size();
    if (!m.square() || detail::product(dims) != m.rows())
        throw std::invalid_argument("partial_trace: dims do not match operator dimension");
    if (keep.empty()) throw std::invalid_argument("partial_trace: keep set is empty");
    std::vector<bool> kept(n, false);
    for (auto k : keep) {
        if (k >= n || kept[k]) throw std::invalid_argument("partial_trace: invalid keep index");
        kept[k] = true;
    }
    std::size_t out_dim = 1;
    for (std::size_t k = 0; k < n; ++k)
        if (kept[k]) out_dim *= dims[k];

    Matrix out(out_dim, out_dim);
    const std::size_t total = m.rows();
    std::vector<std::size_t> ri(n), ci(n);
    auto decompose = [&](std::size_t flat, std::vector<std::size_t>& idx) {
        for (std::size_t k = n; k-- > 0;) {
            idx[k] = flat % dims[k];
            flat /= dims[k];
        }
    };
    auto kept_index = [&](const std::vector<std::size_t>& idx) {
        std::size_t f = 0;
        for (std::size_t k = 0; k < n; ++k)
            if (kept[k]) f = f * dims[k] + idx[k];
        return f;
    };
    for (std::size_t r = 0; r < total; ++r) {
        decompose(r, ri);
        for (std::size_t c = 0; c < total; ++c) {
            decompose(c, ci);
            bool diagonal_on_traced = true;
            for (std::size_t k = 0; k < n && diagonal_on_traced; ++k)
                if (!kept[k] && ri[k] != ci[k]) diagonal_on_traced = false;
            if (diagonal_on_traced) out(kept_index(ri), kept_index(ci)) += m(r, c);
        }
    }
    return out;
}

inline DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const std::size_t> keep,
                                   std::span<const std::size_t> dims) {
    return DensityMatrix(partial_trace(rho.matrix(), keep, dims));
}

// (1/2) * sum |eig(rho - sigma)|
inline double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.dim() != sigma.dim()) throw std::invalid_argument("trace_distance: dimension mismatch");
    double s = 0.0;
    for (double ev : hermitian_eigenvalues(rho.matrix() - sigma.matrix())) s += std::abs(ev);
    return 0.5 * s;
}

}  // namespace hyperdistill
