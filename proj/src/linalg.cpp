#include "gaussdyn/linalg.hpp"

#include <cmath>
#include <string>

#include "gaussdyn/errors.hpp"

namespace gaussdyn {

Mat2 Mat2::inverse() const {
    const double d = det();
    if (d == 0.0) {
        throw NumericalError("singular 2x2 matrix");
    }
    return adjugate() * (1.0 / d);
}

Mat4 Mat4::identity() {
    Mat4 r;
    for (std::size_t i = 0; i < 4; ++i) {
        r(i, i) = 1.0;
    }
    return r;
}

Mat4 Mat4::from_blocks(const Mat2& tl, const Mat2& tr, const Mat2& bl, const Mat2& br) {
    Mat4 r;
    const Mat2* blocks[2][2] = {{&tl, &tr}, {&bl, &br}};
    for (std::size_t bi = 0; bi < 2; ++bi) {
        for (std::size_t bj = 0; bj < 2; ++bj) {
            const Mat2& b = *blocks[bi][bj];
            r(2 * bi, 2 * bj) = b.a11;
            r(2 * bi, 2 * bj + 1) = b.a12;
            r(2 * bi + 1, 2 * bj) = b.a21;
            r(2 * bi + 1, 2 * bj + 1) = b.a22;
        }
    }
    return r;
}

Mat2 Mat4::block(std::size_t bi, std::size_t bj) const {
    const std::size_t i = 2 * bi;
    const std::size_t j = 2 * bj;
    return {(*this)(i, j), (*this)(i, j + 1), (*this)(i + 1, j), (*this)(i + 1, j + 1)};
}

Mat4 Mat4::transpose() const {
    Mat4 r;
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            r(i, j) = (*this)(j, i);
        }
    }
    return r;
}

double Mat4::det() const {
    // Laplace expansion over complementary 2x2 minors of rows {0,1} and {2,3}.
    const auto& a = *this;
    auto minor01 = [&](std::size_t c1, std::size_t c2) { return a(0, c1) * a(1, c2) - a(0, c2) * a(1, c1); };
    auto minor23 = [&](std::size_t c1, std::size_t c2) { return a(2, c1) * a(3, c2) - a(2, c2) * a(3, c1); };
    return minor01(0, 1) * minor23(2, 3) - minor01(0, 2) * minor23(1, 3) + minor01(0, 3) * minor23(1, 2) +
           minor01(1, 2) * minor23(0, 3) - minor01(1, 3) * minor23(0, 2) + minor01(2, 3) * minor23(0, 1);
}

double Mat4::trace() const { return m[0] + m[5] + m[10] + m[15]; }

Mat4 Mat4::operator+(const Mat4& o) const {
    Mat4 r;
    for (std::size_t k = 0; k < 16; ++k) r.m[k] = m[k] + o.m[k];
    return r;
}

Mat4 Mat4::operator-(const Mat4& o) const {
    Mat4 r;
    for (std::size_t k = 0; k < 16; ++k) r.m[k] = m[k] - o.m[k];
    return r;
}

Mat4 Mat4::operator*(const Mat4& o) const {
    Mat4 r;
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < 4; ++k) s += (*this)(i, k) * o(k, j);
            r(i, j) = s;
        }
    }
    return r;
}

Mat4 Mat4::operator*(double s) const {
    Mat4 r;
    for (std::size_t k = 0; k < 16; ++k) r.m[k] = m[k] * s;
    return r;
}

Mat2 omega2() { return {0.0, 1.0, -1.0, 0.0}; }

Mat4 omega4() {
    const Mat2 z{};
    return Mat4::from_blocks(omega2(), z, z, omega2());
}

double frobenius_norm(const Mat2& a) {
    return std::sqrt(a.a11 * a.a11 + a.a12 * a.a12 + a.a21 * a.a21 + a.a22 * a.a22);
}

double frobenius_norm(const Mat4& a) {
    double s = 0.0;
    for (double v : a.m) s += v * v;
    return std::sqrt(s);
}

SymEigen2 eig_herm2(double a, double b, double c, double d) {
    const double mean = 0.5 * (a + d);
    const double radius = std::hypot(0.5 * (a - d), std::hypot(b, c));
    const double big = mean >= 0.0 ? mean + radius : mean - radius;
    const double det = a * d - b * b - c * c;
    const double small = big != 0.0 ? det / big : 0.0;
    if (mean >= 0.0) {
        return {small, big};
    }
    return {big, small};
}

SymEigen2 eig_sym2(const Mat2& a) { return eig_herm2(a.a11, 0.5 * (a.a12 + a.a21), 0.0, a.a22); }

double purity_from_block(const Mat2& block) { return purity_from_det(block.det()); }

double purity_from_det(double d) {
    if (!(d >= 1.0 - 1e-6)) {
        throw NonPhysicalState("single-mode determinant " + std::to_string(d) + " below 1");
    }
    return d < 1.0 ? 1.0 : 1.0 / std::sqrt(d);
}

double impurity_from_block(const Mat2& block) {
    const double d = block.det();
    if (!(d >= 1.0 - 1e-6)) {
        throw NonPhysicalState("single-mode determinant " + std::to_string(d) + " below 1");
    }
    if (d <= 1.0) {
        return 0.0;
    }
    return -std::expm1(-0.5 * std::log(d));
}

GaussianDiagnostics check_gaussian_valid(const Mat4& sigma, double det_tol, double nu_tol) {
    GaussianDiagnostics g{};
    g.det_sigma = sigma.det();
    const double ds = sigma.block(0, 0).det();
    const double de = sigma.block(1, 1).det();
    g.nu_s = ds > 0.0 ? std::sqrt(ds) : -std::sqrt(-ds);
    g.nu_e = de > 0.0 ? std::sqrt(de) : -std::sqrt(-de);
    g.det_ok = std::abs(g.det_sigma - 1.0) <= det_tol;
    g.valid = g.nu_s >= 1.0 - nu_tol && g.nu_e >= 1.0 - nu_tol;
    return g;
}

bool is_symplectic(const Mat2& s, double tol) {
    return frobenius_norm(s.transpose() * omega2() * s - omega2()) <= tol;
}

}  // namespace gaussdyn
