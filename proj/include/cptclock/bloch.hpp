#pragma once

#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

#include "cptclock/laser.hpp"
#include "cptclock/species.hpp"

namespace cptclock {

using Matrix4c = Eigen::Matrix4cd;
using Matrix16c = Eigen::Matrix<std::complex<double>, 16, 16>;
using Vector16c = Eigen::Matrix<std::complex<double>, 16, 1>;

// Basis order of the N scheme.
enum Level : int { S = 0, P = 1, D = 2, Q = 3 };

// 4x4 density matrix over (|S>, |P>, |D>, |Q>).
struct DensityMatrix4 {
    Matrix4c rho = Matrix4c::Zero();

    static DensityMatrix4 pure(Level l);

    double population(Level l) const { return rho(l, l).real(); }
    double trace() const { return rho.trace().real(); }
    double hermiticity_defect() const { return (rho - rho.adjoint()).cwiseAbs().maxCoeff(); }
    double min_eigenvalue() const;

    // Hermitian to 1e-12, unit trace to 1e-10, eigenvalues >= -1e-10.
    void validate() const;
};

// Column-stacking convention: vec(rho)(r + 4c) = rho(r, c).
Vector16c stack(const Matrix4c& rho);
Matrix4c unstack(const Vector16c& v);

// Lindblad superoperator acting on the column-stacked density matrix.
struct Liouvillian {
    Matrix16c matrix = Matrix16c::Zero();
    bool radiative_decay = false;
    bool dephasing = false;
    bool metastable_decay = false;
    bool q_coupled = true;  // false when Omega_W == 0 (|Q> sector decoupled)
};

struct DegenerateKernelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct StiffnessError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Rotating-frame Hamiltonian: diagonal
// (Delta_B, 0, Delta_R, Delta_B - Delta_W), couplings Omega/2 on S-P,
// D-P, S-Q. Exactly Hermitian by construction. Units hbar * s^-1.
Matrix4c build_hamiltonian(const LaserParams& lasers);

// Jump operators |S><P| at gamma_P*beta_PS and |D><P| at gamma_P*beta_PD,
// pure dephasing of S, D, Q at the laser phase-diffusion rates
// (normalized so a coherence to a dephased level decays at that rate),
// and optionally slow |D>,|Q> -> |S> decay at metastable_rate.
Liouvillian build_liouvillian(const Matrix4c& hamiltonian, const IonSpecies& species,
                              const LaserParams& lasers, bool include_metastable_decay = false,
                              double metastable_rate = 1.0);

// Null vector of L with unit trace, by dense LU on the trace-augmented
// system. When |Q> is decoupled the solve is restricted to the {S,P,D}
// block. Throws DegenerateKernelError when the kernel is multidimensional
// (e.g. all lasers off).
DensityMatrix4 steady_state(const Liouvillian& liouvillian);

// Adaptive Dormand-Prince RK45 integration of drho/dt = L rho.
// Throws StiffnessError on step-size underflow.
DensityMatrix4 time_evolve(const DensityMatrix4& rho0, const Liouvillian& liouvillian, double t,
                           double dt_max);

// Photon rate on the S-P collection transition, per ion:
// gamma_P * beta_PS * rho_PP.
double fluorescence_rate(const DensityMatrix4& rho, const IonSpecies& species);

}  // namespace cptclock
