#pragma once

// Reduced dynamics of the system block:
//   d sigma_S/dt = Omega H_S sigma_S - sigma_S H_S Omega + B,
//   B = -xi [[0, c11], [c11, 2 c21]], c = sigma_SE,
// with det B = -xi^2 c11^2 <= 0. A Gaussian map sigma -> X sigma X^T + Y is
// completely positive iff Y - (i/2) Omega + (i/2) X Omega X^T >= 0.

#include <optional>
#include <string>
#include <vector>

#include "gaussdyn/linalg.hpp"
#include "gaussdyn/model.hpp"
#include "gaussdyn/transport.hpp"

namespace gaussdyn {

struct NoiseMatrix {
    Mat2 B;
    double lambda_minus = 0.0;
    double lambda_plus = 0.0;
};

NoiseMatrix noise_B(const CovarianceState& state, const ScenarioParams& p);

// H_S = diag(omega_s^2, 1).
Mat2 system_hamiltonian(const ScenarioParams& p);
Mat2 reduced_rhs(const Mat2& sigma_s, const Mat2& B, const Mat2& h_s);

// -(gamma/2) Tr(sigma_S^{-1} B).
double purity_rate(const Mat2& sigma_s, const Mat2& B);

struct MapPair {
    Mat2 X = Mat2::identity();
    Mat2 Y{};
    double t_a = 0.0;
    double t_b = 0.0;
};

// Co-integrates the full state (which supplies B), X and Y over [t_a, t_b].
MapPair map_pair_evolve(const ScenarioParams& p, double t_a, double t_b, const IntegratorConfig& cfg = {});
// As above, starting from a known full state at t_a = start.t.
MapPair map_pair_evolve(const ScenarioParams& p, const CovarianceState& start, double t_b,
                        const IntegratorConfig& cfg = {});

// Map over [earlier.t_a, later.t_b]: X = X2 X1, Y = X2 Y1 X2^T + Y2.
MapPair compose(const MapPair& earlier, const MapPair& later);

// Exact map of a step dt under constant noise B: X = exp(Omega H_S dt),
// Y = int_0^dt X(s) B X(s)^T ds. Positive B gives positive Y.
MapPair constant_noise_step(const Mat2& B, const ScenarioParams& p, double dt);

struct CpResult {
    bool completely_positive = false;
    // Smallest eigenvalue of the Hermitian CP matrix.
    double min_eigenvalue = 0.0;
};

// Eigenvalues above -tol max(1, |Y|_F) count as non-negative.
CpResult cp_check(const MapPair& pair, double tol = 1e-12);

// Blocks with determinant in [1 - 1e-9, 1) are treated as pure; lower ones throw
// NonPhysicalState.
double gaussian_fidelity(const Mat2& s1, const Mat2& s2);
double bures_distance(const Mat2& s1, const Mat2& s2);

enum class Surrogate { DropNegative, BestDecohering, Unitary };

std::string to_string(Surrogate s);
// Accepts drop-negative, best, unitary.
Surrogate parse_surrogate(const std::string& name);

// -(gamma_dot/gamma) sigma_S when gamma_dot <= 0; nullopt (infeasible) when the
// system recoheres.
std::optional<Mat2> best_markovian_B(const Mat2& sigma_s, const Mat2& B);

struct SurrogateNoise {
    Mat2 B_tilde{};
    // Surrogate actually applied: BestDecohering falls back to Unitary when infeasible.
    Surrogate applied = Surrogate::Unitary;
};

SurrogateNoise surrogate_noise(Surrogate s, const Mat2& sigma_s, const NoiseMatrix& noise);

inline constexpr double kPureGuard = 1e-9;

struct BuresVelocity {
    // det/(2 sqrt(det^2 - 1)) |Tr[sigma_S^{-1} (B - B_tilde)]|; NaN when flagged.
    double closed_form = 0.0;
    // Bures distance after evolving both reduced equations over dt, divided by dt.
    double finite_difference = 0.0;
    // gamma_S >= 1 - kPureGuard with a non-vanishing trace term.
    bool pure_state_singularity = false;
    Surrogate applied = Surrogate::Unitary;
};

// Finite-difference step 1e-6 (2 pi / omega2).
BuresVelocity bures_velocity(const CovarianceState& state, const ScenarioParams& p, Surrogate s);

struct MarkovSample {
    double t = 0.0;
    double purity = 1.0;
    double det_B = 0.0;
    double lambda_minus = 0.0;
    double lambda_plus = 0.0;
    double purity_rate = 0.0;
    BuresVelocity velocity;
    // Infinitesimal map with the exact B is completely positive.
    bool cp_exact = true;
};

std::vector<MarkovSample> markov_analysis(const Trajectory& tr, const ScenarioParams& p, Surrogate s,
                                          unsigned workers = 1);

}  // namespace gaussdyn
