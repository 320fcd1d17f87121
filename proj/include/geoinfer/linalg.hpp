#pragma once

#include <vector>

namespace geoinfer::linalg {

// Small dense helpers for the baselines; row-major matrices sized for a few
// hundred regions and a few dozen feature dimensions.

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

Vec matvec(const Mat& a, const Vec& x);
Mat transpose(const Mat& a);
Mat matmul(const Mat& a, const Mat& b);

// Cyclic Jacobi eigendecomposition of a symmetric matrix: A = V diag(w) V^T
// with eigenvector j in column j of V.
void jacobi_eigen(Mat a, Vec& eigenvalues, Mat& eigenvectors, int max_sweeps = 100);

// Minimum-norm least-squares solution of X w = y through the Gram
// pseudoinverse on the smaller side; eigenvalues below rcond * max are
// treated as zero.
Vec min_norm_least_squares(const Mat& x, const Vec& y, double rcond = 1e-12);

}  // namespace geoinfer::linalg
