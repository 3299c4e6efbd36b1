#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace eightloop {

/// Solves A x = b by Gaussian elimination with partial pivoting (largest |pivot| for floating
/// types, first nonzero pivot for exact types). Throws on a singular matrix.
template <class T>
std::vector<T> solve_linear(std::vector<std::vector<T>> A, std::vector<T> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col; r < n; ++r) {
            using std::abs;
            if (abs(A[r][col]) > abs(A[piv][col])) piv = r;
        }
        if (A[piv][col] == T(0)) throw std::runtime_error("solve_linear: singular system");
        std::swap(A[piv], A[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            T f = A[r][col] / A[col][col];
            if (f == T(0)) continue;
            for (std::size_t c = col; c < n; ++c) A[r][c] -= f * A[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<T> x(n);
    for (std::size_t i = n; i-- > 0;) {
        T acc = b[i];
        for (std::size_t c = i + 1; c < n; ++c) acc -= A[i][c] * x[c];
        x[i] = acc / A[i][i];
    }
    return x;
}

}  // namespace eightloop
