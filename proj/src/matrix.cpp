#include "sib/matrix.hpp"

#include <algorithm>

#include "sib/kernels.hpp"

namespace sib {

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows)
        throw ShapeError("matmul: inner dimensions differ, " + shape_str(a.rows, a.cols) +
                         " x " + shape_str(b.rows, b.cols));
    Matrix c(a.rows, b.cols);
    kern::kernels().matmul(a.data.data(), b.data.data(), c.data.data(), a.rows, a.cols, b.cols);
    return c;
}

Matrix transpose(const Matrix& m) {
    Matrix t(m.cols, m.rows);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) t.at(j, i) = m.at(i, j);
    return t;
}

Matrix add(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "add");
    Matrix y(a.rows, a.cols);
    kern::kernels().add(a.data.data(), b.data.data(), y.data.data(), a.size());
    return y;
}

Matrix sub(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "sub");
    Matrix y(a.rows, a.cols);
    kern::kernels().sub(a.data.data(), b.data.data(), y.data.data(), a.size());
    return y;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "hadamard");
    Matrix y(a.rows, a.cols);
    kern::kernels().mul(a.data.data(), b.data.data(), y.data.data(), a.size());
    return y;
}

Matrix scale(const Matrix& m, double s) {
    Matrix y(m.rows, m.cols);
    kern::kernels().scale(m.data.data(), s, y.data.data(), m.size());
    return y;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "max_abs_diff");
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        d = std::max(d, std::abs(a.data[i] - b.data[i]));
    return d;
}

}  // namespace sib
