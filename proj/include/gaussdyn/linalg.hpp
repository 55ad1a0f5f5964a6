#pragma once

#include <array>
#include <cstddef>

namespace gaussdyn {

// Row-major 2x2 matrix.
struct Mat2 {
    double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

    static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static constexpr Mat2 diag(double d1, double d2) { return {d1, 0.0, 0.0, d2}; }
    static constexpr Mat2 symmetric(double s11, double s12, double s22) { return {s11, s12, s12, s22}; }

    double det() const { return a11 * a22 - a12 * a21; }
    double trace() const { return a11 + a22; }
    Mat2 transpose() const { return {a11, a21, a12, a22}; }
    // Adjugate: adj(A) A = det(A) I.
    Mat2 adjugate() const { return {a22, -a12, -a21, a11}; }
    Mat2 inverse() const;

    Mat2 operator+(const Mat2& o) const { return {a11 + o.a11, a12 + o.a12, a21 + o.a21, a22 + o.a22}; }
    Mat2 operator-(const Mat2& o) const { return {a11 - o.a11, a12 - o.a12, a21 - o.a21, a22 - o.a22}; }
    Mat2 operator*(const Mat2& o) const {
        return {a11 * o.a11 + a12 * o.a21, a11 * o.a12 + a12 * o.a22,
                a21 * o.a11 + a22 * o.a21, a21 * o.a12 + a22 * o.a22};
    }
    Mat2 operator*(double s) const { return {a11 * s, a12 * s, a21 * s, a22 * s}; }
    Mat2& operator+=(const Mat2& o) { return *this = *this + o; }
};

inline Mat2 operator*(double s, const Mat2& m) { return m * s; }

// Row-major 4x4 matrix over the quadratures (xS, pS, xE, pE).
struct Mat4 {
    std::array<double, 16> m{};

    static Mat4 identity();
    static Mat4 from_blocks(const Mat2& tl, const Mat2& tr, const Mat2& bl, const Mat2& br);

    double& operator()(std::size_t i, std::size_t j) { return m[4 * i + j]; }
    double operator()(std::size_t i, std::size_t j) const { return m[4 * i + j]; }

    // Block (bi, bj) with bi, bj in {0, 1}; (0,0) is the system block.
    Mat2 block(std::size_t bi, std::size_t bj) const;
    Mat4 transpose() const;
    double det() const;
    double trace() const;

    Mat4 operator+(const Mat4& o) const;
    Mat4 operator-(const Mat4& o) const;
    Mat4 operator*(const Mat4& o) const;
    Mat4 operator*(double s) const;
};

// Symplectic forms, one 2x2 block [[0, 1], [-1, 0]] per mode.
Mat2 omega2();
Mat4 omega4();

double frobenius_norm(const Mat2& a);
double frobenius_norm(const Mat4& a);

// Closed-form eigenvalues of a symmetric 2x2 matrix, lambda_minus <= lambda_plus.
// The smaller-magnitude root is recovered through the determinant to keep the product accurate.
struct SymEigen2 {
    double lambda_minus;
    double lambda_plus;
};
SymEigen2 eig_sym2(const Mat2& a);

// Eigenvalues of the Hermitian matrix [[a, b - i c], [b + i c, d]].
SymEigen2 eig_herm2(double a, double b, double c, double d);

// Single-mode purity 1/sqrt(det). Determinants in [1 - 1e-6, 1) are treated as 1;
// anything smaller throws NonPhysicalState.
double purity_from_block(const Mat2& block);
double purity_from_det(double det);

// 1 - purity of a block, accurate when the determinant is close to 1.
double impurity_from_block(const Mat2& block);

struct GaussianDiagnostics {
    double det_sigma;
    double nu_s;
    double nu_e;
    // |det sigma - 1| <= det_tol (global purity).
    bool det_ok;
    // Both per-mode symplectic eigenvalues are >= 1 - nu_tol.
    bool valid;
};

GaussianDiagnostics check_gaussian_valid(const Mat4& sigma, double det_tol = 1e-8, double nu_tol = 1e-9);

// True when S^T Omega S = Omega within tol (Frobenius).
bool is_symplectic(const Mat2& s, double tol);

}  // namespace gaussdyn
