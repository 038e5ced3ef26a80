#pragma once

#include <cmath>
#include <vector>

#include "sib/errors.hpp"

namespace sib {

// Dense row-major matrix of doubles. Plain value type; every tensor in the
// artifact (features, weights, adjacency, assignments) is one of these.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}
    Matrix(int r, int c, std::vector<double> d) : rows(r), cols(c), data(std::move(d)) {
        if (data.size() != static_cast<std::size_t>(r) * c)
            throw ShapeError("matrix data length " + std::to_string(data.size()) +
                             " does not match shape " + shape_str(r, c));
    }

    static Matrix zeros(int r, int c) { return Matrix(r, c); }
    static Matrix constant(int r, int c, double v) {
        Matrix m(r, c);
        for (double& x : m.data) x = v;
        return m;
    }
    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
        return m;
    }
    static Matrix row_vector(std::vector<double> d) {
        int c = static_cast<int>(d.size());
        return Matrix(1, c, std::move(d));
    }

    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

    std::size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }
    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }

    bool operator==(const Matrix& o) const {
        return rows == o.rows && cols == o.cols && data == o.data;
    }
};

// Plain (non-differentiated) helpers, used by graph construction, oracles and
// parameter updates. They run on the active kernel backend.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& m, double s);

double max_abs_diff(const Matrix& a, const Matrix& b);

inline void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (!a.same_shape(b))
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.rows, a.cols) +
                         " vs " + shape_str(b.rows, b.cols));
}

}  // namespace sib
