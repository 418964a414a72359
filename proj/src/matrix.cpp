#include "weakvid/matrix.hpp"

#include <cmath>

namespace weakvid {

void jacobi_eigen_symmetric(Matrix A, std::vector<double>& eigenvalues, Matrix& eigenvectors) {
    const std::size_t n = A.rows;
    eigenvectors = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) eigenvectors.at(i, i) = 1.0;

    auto off_diagonal_norm = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += A.at(i, j) * A.at(i, j);
        return std::sqrt(s);
    };

    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(A.at(i, j)));
    const double tol = (scale > 0.0 ? scale : 1.0) * 1e-14 * static_cast<double>(n);

    for (int sweep = 0; sweep < 64 && off_diagonal_norm() > tol; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double apq = A.at(p, q);
                if (std::abs(apq) <= tol / static_cast<double>(n)) continue;
                double app = A.at(p, p), aqq = A.at(q, q);
                double theta = 0.5 * (aqq - app) / apq;
                double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;

                for (std::size_t k = 0; k < n; ++k) {
                    double akp = A.at(k, p), akq = A.at(k, q);
                    A.at(k, p) = c * akp - s * akq;
                    A.at(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double apk = A.at(p, k), aqk = A.at(q, k);
                    A.at(p, k) = c * apk - s * aqk;
                    A.at(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double vkp = eigenvectors.at(k, p), vkq = eigenvectors.at(k, q);
                    eigenvectors.at(k, p) = c * vkp - s * vkq;
                    eigenvectors.at(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    eigenvalues.resize(n);
    for (std::size_t i = 0; i < n; ++i) eigenvalues[i] = A.at(i, i);
}

} // namespace weakvid
