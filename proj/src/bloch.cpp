#include "cptclock/bloch.hpp"

#include <array>
#include <cmath>
#include <sstream>

namespace cptclock {

using cd = std::complex<double>;

DensityMatrix4 DensityMatrix4::pure(Level l) {
    DensityMatrix4 rho;
    rho.rho(l, l) = 1.0;
    return rho;
}

double DensityMatrix4::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Matrix4c> es((rho + rho.adjoint()) / 2.0);
    return es.eigenvalues().minCoeff();
}

void DensityMatrix4::validate() const {
    if (hermiticity_defect() > 1e-12)
        throw std::runtime_error("DensityMatrix4: Hermiticity defect above 1e-12");
    if (std::abs(trace() - 1.0) > 1e-10)
        throw std::runtime_error("DensityMatrix4: trace deviates from 1 beyond 1e-10");
    if (min_eigenvalue() < -1e-10)
        throw std::runtime_error("DensityMatrix4: negative eigenvalue beyond tolerance");
}

Vector16c stack(const Matrix4c& rho) {
    Vector16c v;
    for (int c = 0; c < 4; ++c)
        for (int r = 0; r < 4; ++r) v(r + 4 * c) = rho(r, c);
    return v;
}

Matrix4c unstack(const Vector16c& v) {
    Matrix4c rho;
    for (int c = 0; c < 4; ++c)
        for (int r = 0; r < 4; ++r) rho(r, c) = v(r + 4 * c);
    return rho;
}

Matrix4c build_hamiltonian(const LaserParams& lasers) {
    lasers.validate();
    Matrix4c h = Matrix4c::Zero();
    h(S, S) = lasers.delta_B;
    h(D, D) = lasers.delta_R;
    h(Q, Q) = lasers.delta_B - lasers.delta_W;
    h(S, P) = lasers.omega_B / 2.0;
    h(P, S) = lasers.omega_B / 2.0;
    h(D, P) = lasers.omega_R / 2.0;
    h(P, D) = lasers.omega_R / 2.0;
    h(S, Q) = lasers.omega_W / 2.0;
    h(Q, S) = lasers.omega_W / 2.0;
    return h;
}

namespace {

// vec(A rho B) = (B^T kron A) vec(rho) under column stacking.
Matrix16c kron4(const Matrix4c& a, const Matrix4c& b) {
    Matrix16c k;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) k.block<4, 4>(4 * i, 4 * j) = a(i, j) * b;
    return k;
}

void add_dissipator(Matrix16c& l, const Matrix4c& jump) {
    const Matrix4c jj = jump.adjoint() * jump;
    const Matrix4c id = Matrix4c::Identity();
    l += kron4(jump.conjugate(), jump);
    l -= 0.5 * kron4(id, jj);
    l -= 0.5 * kron4(jj.transpose(), id);
}

Matrix4c projector(Level l) {
    Matrix4c p = Matrix4c::Zero();
    p(l, l) = 1.0;
    return p;
}

Matrix4c lowering(Level to, Level from) {
    Matrix4c j = Matrix4c::Zero();
    j(to, from) = 1.0;
    return j;
}

}  // namespace

Liouvillian build_liouvillian(const Matrix4c& hamiltonian, const IonSpecies& species,
                              const LaserParams& lasers, bool include_metastable_decay,
                              double metastable_rate) {
    if ((hamiltonian - hamiltonian.adjoint()).cwiseAbs().maxCoeff() > 1e-9)
        throw std::invalid_argument("build_liouvillian: Hamiltonian is not Hermitian");
    species.validate();
    lasers.validate();

    Liouvillian liou;
    const Matrix4c id = Matrix4c::Identity();
    const cd i_unit(0.0, 1.0);

    liou.matrix = -i_unit * (kron4(id, hamiltonian) - kron4(hamiltonian.transpose(), id));

    add_dissipator(liou.matrix, std::sqrt(species.gamma_P * species.beta_PS) * lowering(S, P));
    add_dissipator(liou.matrix, std::sqrt(species.gamma_P * species.beta_PD) * lowering(D, P));
    liou.radiative_decay = true;

    // Pure dephasing sqrt(2 gamma) |k><k| makes coherences to |k> decay at gamma.
    const std::array<std::pair<Level, double>, 3> dephasers = {
        {{S, lasers.dephase_B}, {D, lasers.dephase_R}, {Q, lasers.dephase_W}}};
    for (auto [level, rate] : dephasers) {
        if (rate > 0.0) {
            add_dissipator(liou.matrix, std::sqrt(2.0 * rate) * projector(level));
            liou.dephasing = true;
        }
    }

    if (include_metastable_decay && metastable_rate > 0.0) {
        add_dissipator(liou.matrix, std::sqrt(metastable_rate) * lowering(S, D));
        add_dissipator(liou.matrix, std::sqrt(metastable_rate) * lowering(S, Q));
        liou.metastable_decay = true;
    }

    liou.q_coupled = lasers.omega_W > 0.0 || liou.metastable_decay;
    return liou;
}

namespace {

// Generic trace-constrained null-space solve on an n^2 x n^2 Liouvillian
// block. Row 0 (redundant by trace preservation) is replaced by the trace
// constraint.
Eigen::VectorXcd solve_null_with_trace(const Eigen::MatrixXcd& l, int n) {
    // A kernel of dimension > 1 means the steady state is not unique.
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(l);
    const auto& sv = svd.singularValues();
    const double tol = 1e-10 * std::max(sv(0), 1.0);
    int kernel_dim = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) < tol) ++kernel_dim;
    if (kernel_dim > 1) {
        std::ostringstream msg;
        msg << "degenerate kernel: Liouvillian null space has dimension " << kernel_dim;
        throw DegenerateKernelError(msg.str());
    }

    Eigen::MatrixXcd a = l;
    a.row(0).setZero();
    for (int k = 0; k < n; ++k) a(0, k + n * k) = 1.0;  // trace(rho) = 1
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n * n);
    rhs(0) = 1.0;

    const auto lu = a.fullPivLu();
    Eigen::VectorXcd x = lu.solve(rhs);
    // Iterative refinement: the rate scales span many decades, and dark
    // resonances push some populations below the plain-LU error floor.
    for (int pass = 0; pass < 3; ++pass) x += lu.solve(rhs - a * x);
    const double residual = (l * x).norm();
    if (residual > 1e-9 * std::max(1.0, l.norm()))
        throw std::runtime_error("steady_state: residual above tolerance");
    return x;
}

}  // namespace

DensityMatrix4 steady_state(const Liouvillian& liouvillian) {
    DensityMatrix4 out;
    if (liouvillian.q_coupled) {
        Eigen::VectorXcd x = solve_null_with_trace(liouvillian.matrix, 4);
        Vector16c v = x;
        out.rho = unstack(v);
    } else {
        // |Q> is dark and decoupled: the physical steady state lives in the
        // {S,P,D} block. Solving there keeps the kernel one-dimensional.
        std::array<int, 9> idx{};
        int k = 0;
        for (int c = 0; c < 3; ++c)
            for (int r = 0; r < 3; ++r) idx[k++] = r + 4 * c;
        Eigen::MatrixXcd l9(9, 9);
        for (int i = 0; i < 9; ++i)
            for (int j = 0; j < 9; ++j) l9(i, j) = liouvillian.matrix(idx[i], idx[j]);
        Eigen::VectorXcd x = solve_null_with_trace(l9, 3);
        for (int c = 0; c < 3; ++c)
            for (int r = 0; r < 3; ++r) out.rho(r, c) = x(r + 3 * c);
    }
    out.rho = ((out.rho + out.rho.adjoint()) / 2.0).eval();
    out.validate();
    return out;
}

DensityMatrix4 time_evolve(const DensityMatrix4& rho0, const Liouvillian& liouvillian, double t,
                           double dt_max) {
    if (t < 0) throw std::invalid_argument("time_evolve: t must be >= 0");
    if (dt_max <= 0) throw std::invalid_argument("time_evolve: dt_max must be > 0");
    if (t == 0.0) return rho0;

    const Matrix16c& l = liouvillian.matrix;
    const double lnorm = l.cwiseAbs().maxCoeff();
    if (lnorm == 0.0) return rho0;

    // Dormand-Prince 5(4).
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                     b6 = 11.0 / 84;
    constexpr double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695, e4 = b4 - 393.0 / 640,
                     e5 = b5 + 92097.0 / 339200, e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;

    constexpr double rtol = 1e-10, atol = 1e-13;

    Vector16c y = stack(rho0.rho);
    double time = 0.0;
    double dt = std::min(dt_max, 0.5 / lnorm);

    while (time < t) {
        dt = std::min({dt, dt_max, t - time});
        if (dt < 1e-15 * std::max(t, 1.0)) {
            std::ostringstream msg;
            msg << "time_evolve: step size underflow (stiff system), t=" << time << ", dt=" << dt
                << ", |L|_max=" << lnorm;
            throw StiffnessError(msg.str());
        }

        const Vector16c k1 = l * y;
        const Vector16c k2 = l * (y + dt * (a21 * k1));
        const Vector16c k3 = l * (y + dt * (a31 * k1 + a32 * k2));
        const Vector16c k4 = l * (y + dt * (a41 * k1 + a42 * k2 + a43 * k3));
        const Vector16c k5 = l * (y + dt * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Vector16c k6 = l * (y + dt * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const Vector16c y5 = y + dt * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const Vector16c k7 = l * y5;
        const Vector16c err_vec =
            dt * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        const double scale = atol + rtol * std::max(y.cwiseAbs().maxCoeff(), 1.0);
        const double err = err_vec.cwiseAbs().maxCoeff() / scale;

        if (err <= 1.0) {
            time += dt;
            Matrix4c rho = unstack(y5);
            rho = ((rho + rho.adjoint()) / 2.0).eval();  // keep Hermiticity exact
            if (std::abs(rho.trace().real() - rho0.trace()) > 1e-8)
                throw std::runtime_error("time_evolve: trace drift beyond tolerance");
            y = stack(rho);
        }
        const double factor = (err > 0) ? 0.9 * std::pow(err, -0.2) : 5.0;
        dt *= std::clamp(factor, 0.1, 5.0);
    }

    DensityMatrix4 out;
    out.rho = unstack(y);
    out.validate();
    return out;
}

double fluorescence_rate(const DensityMatrix4& rho, const IonSpecies& species) {
    return species.gamma_P * species.beta_PS * rho.population(P);
}

}  // namespace cptclock
