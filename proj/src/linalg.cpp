#include "geoinfer/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "geoinfer/errors.hpp"

namespace geoinfer::linalg {

Vec matvec(const Mat& a, const Vec& x) {
    Vec out(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < x.size(); ++j) out[i] += a[i][j] * x[j];
    }
    return out;
}

Mat transpose(const Mat& a) {
    if (a.empty()) return {};
    Mat out(a[0].size(), Vec(a.size(), 0.0));
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < a[i].size(); ++j) out[j][i] = a[i][j];
    }
    return out;
}

Mat matmul(const Mat& a, const Mat& b) {
    if (a.empty() || b.empty()) return {};
    Mat out(a.size(), Vec(b[0].size(), 0.0));
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t k = 0; k < b.size(); ++k) {
            const double aik = a[i][k];
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b[0].size(); ++j) out[i][j] += aik * b[k][j];
        }
    }
    return out;
}

void jacobi_eigen(Mat a, Vec& eigenvalues, Mat& eigenvectors, int max_sweeps) {
    const std::size_t n = a.size();
    eigenvectors.assign(n, Vec(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) eigenvectors[i][i] = 1.0;

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        }
        if (off < 1e-300) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (a[p][q] == 0.0) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = eigenvectors[k][p], vkq = eigenvectors[k][q];
                    eigenvectors[k][p] = c * vkp - s * vkq;
                    eigenvectors[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    eigenvalues.resize(n);
    for (std::size_t i = 0; i < n; ++i) eigenvalues[i] = a[i][i];
}

Vec min_norm_least_squares(const Mat& x, const Vec& y, double rcond) {
    if (x.empty() || x.size() != y.size()) {
        throw ValidationError("least squares: shape mismatch");
    }
    const std::size_t m = x.size();
    const std::size_t d = x[0].size();
    const Mat xt = transpose(x);

    // pseudoinverse of the smaller Gram matrix
    auto pinv_apply = [&](const Mat& gram, const Vec& rhs) {
        Vec w;
        Mat v;
        jacobi_eigen(gram, w, v, 100);
        double wmax = 0.0;
        for (double wi : w) wmax = std::max(wmax, std::fabs(wi));
        const double cutoff = wmax * rcond;
        // v diag(1/w) v^T rhs
        Vec tmp(w.size(), 0.0);
        for (std::size_t j = 0; j < w.size(); ++j) {
            if (std::fabs(w[j]) <= cutoff) continue;
            double dot = 0.0;
            for (std::size_t i = 0; i < w.size(); ++i) dot += v[i][j] * rhs[i];
            tmp[j] = dot / w[j];
        }
        Vec out(w.size(), 0.0);
        for (std::size_t i = 0; i < w.size(); ++i) {
            for (std::size_t j = 0; j < w.size(); ++j) out[i] += v[i][j] * tmp[j];
        }
        return out;
    };

    if (m >= d) {
        // w = (X^T X)^+ X^T y
        const Mat gram = matmul(xt, x);
        return pinv_apply(gram, matvec(xt, y));
    }
    // w = X^T (X X^T)^+ y
    const Mat gram = matmul(x, xt);
    return matvec(xt, pinv_apply(gram, y));
}

}  // namespace geoinfer::linalg
