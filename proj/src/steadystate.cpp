#include "triphoton/steadystate.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <iostream>
#include <stdexcept>

namespace triphoton {

PTCoefficients pt_coefficients(const DeviceModel& model) {
    const double gT = gamma_total(model);
    if (gT <= 0.0) throw std::invalid_argument("pt_coefficients: zero total decay");
    const double g1 = model.gamma(0), g2 = model.gamma(1), g3 = model.gamma(2);

    PTCoefficients c;
    c.lambda = model.g / gT;
    c.first_order_amp = 2.0 * model.g / gT;
    c.beta = c.first_order_amp * c.first_order_amp;
    c.delta = -std::sqrt(2.0) * c.beta;
    c.epsilon = c.beta * g1 / (g2 + g3);
    c.theta = c.beta * g2 / (g1 + g3);
    c.psi = c.beta * g3 / (g1 + g2);
    c.kappa = c.beta * (g2 * g3 / g1) * (1.0 / (g1 + g2) + 1.0 / (g1 + g3));
    c.xi = c.beta * (g1 * g3 / g2) * (1.0 / (g1 + g2) + 1.0 / (g2 + g3));
    c.chi_c = c.beta * (g1 * g2 / g3) * (1.0 / (g1 + g3) + 1.0 / (g2 + g3));
    return c;
}

namespace {

void check_lambda(double lambda) {
    const double al = std::abs(lambda);
    if (al > 0.5)
        throw std::invalid_argument("perturbation theory invalid: |g/gamma_T| > 0.5");
    if (al > 0.1)
        std::cerr << "warning: g/gamma_T = " << lambda
                  << " above the weak-driving validity threshold 0.1\n";
}

}  // namespace

CavityCorrelators pt_cavity_correlators(const DeviceModel& model) {
    const double gT = gamma_total(model);
    check_lambda(model.g / gT);
    const PTCoefficients c = pt_coefficients(model);

    CavityCorrelators out;
    out.triple_abs = std::abs(c.first_order_amp);
    for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3, k = (i + 2) % 3;
        out.n[i] = c.beta * gT / model.gamma(i);
        out.nn[i] = c.beta * gT / (model.gamma(j) + model.gamma(k));
    }
    return out;
}

DensityMatrix pt_density_matrix(const DeviceModel& model, const SpacePtr& space,
                                bool renormalize) {
    if (space->num_modes() != 3)
        throw std::invalid_argument("pt_density_matrix: 3 modes required");
    for (int m = 0; m < 3; ++m)
        if (space->dim(m) < 3)
            throw std::invalid_argument("pt_density_matrix: dims >= 3 required (|222> needed)");

    const PTCoefficients c = pt_coefficients(model);
    DensityMatrix rho{space,
                      Eigen::MatrixXcd::Zero(space->total_dim(), space->total_dim())};
    const Complex i1(0.0, 1.0);

    add_dyad(rho, std::array{0, 0, 0}, std::array{0, 0, 0}, 1.0);
    // First order: i(2g/gT)(|000><111| - |111><000|).
    add_dyad(rho, std::array{0, 0, 0}, std::array{1, 1, 1}, i1 * c.first_order_amp);
    add_dyad(rho, std::array{1, 1, 1}, std::array{0, 0, 0}, -i1 * c.first_order_amp);
    // Second order.
    add_dyad(rho, std::array{1, 1, 1}, std::array{1, 1, 1}, c.beta);
    add_dyad(rho, std::array{2, 2, 2}, std::array{0, 0, 0}, c.delta);
    add_dyad(rho, std::array{0, 0, 0}, std::array{2, 2, 2}, c.delta);
    add_dyad(rho, std::array{0, 1, 1}, std::array{0, 1, 1}, c.epsilon);
    add_dyad(rho, std::array{1, 0, 1}, std::array{1, 0, 1}, c.theta);
    add_dyad(rho, std::array{1, 1, 0}, std::array{1, 1, 0}, c.psi);
    add_dyad(rho, std::array{1, 0, 0}, std::array{1, 0, 0}, c.kappa);
    add_dyad(rho, std::array{0, 1, 0}, std::array{0, 1, 0}, c.xi);
    add_dyad(rho, std::array{0, 0, 1}, std::array{0, 0, 1}, c.chi_c);

    if (renormalize) rho.data /= rho.data.trace().real();
    return rho;
}

SparseMat build_liouvillian(const DeviceModel& model, const SpacePtr& space) {
    const Eigen::Index n = space->total_dim();
    const SparseMat h = build_hamiltonian(model, space).mat;
    const auto collapse = collapse_operators(model, space);

    // Column-major vec: vec(A rho B) = (B^T kron A) vec(rho).
    auto kron = [n](const SparseMat& a, const SparseMat& b) {
        SparseMat out(n * n, n * n);
        std::vector<Eigen::Triplet<Complex>> trip;
        trip.reserve(static_cast<size_t>(a.nonZeros()) * b.nonZeros());
        for (int ka = 0; ka < a.outerSize(); ++ka)
            for (SparseMat::InnerIterator ia(a, ka); ia; ++ia)
                for (int kb = 0; kb < b.outerSize(); ++kb)
                    for (SparseMat::InnerIterator ib(b, kb); ib; ++ib)
                        trip.emplace_back(ia.row() * n + ib.row(), ia.col() * n + ib.col(),
                                          ia.value() * ib.value());
        out.setFromTriplets(trip.begin(), trip.end());
        return out;
    };

    SparseMat id(n, n);
    id.setIdentity();
    const Complex i1(0.0, 1.0);
    SparseMat L = kron(id, SparseMat(-i1 * h)) + kron(SparseMat(i1 * h.transpose()), id);
    for (const auto& c : collapse) {
        const SparseMat& cm = c.mat;
        const SparseMat cdagc = SparseMat(cm.adjoint() * cm);
        L += kron(SparseMat(cm.conjugate()), cm);
        L -= 0.5 * kron(id, cdagc);
        L -= 0.5 * kron(SparseMat(cdagc.transpose()), id);
    }
    return L;
}

DensityMatrix liouvillian_steady_state(const DeviceModel& model, const SpacePtr& space) {
    const Eigen::Index n = space->total_dim();
    if (n > 4096)
        throw std::invalid_argument("liouvillian_steady_state: total_dim > 4096 not feasible");

    SparseMat L = build_liouvillian(model, space);

    // Replace the equation for d(rho_00)/dt by the trace constraint tr(rho) = 1.
    // Trace conservation (1^T L = 0 over diagonal rows) makes that row redundant.
    std::vector<Eigen::Triplet<Complex>> trip;
    trip.reserve(L.nonZeros() + n);
    for (int k = 0; k < L.outerSize(); ++k)
        for (SparseMat::InnerIterator it(L, k); it; ++it)
            if (it.row() != 0) trip.emplace_back(it.row(), it.col(), it.value());
    for (Eigen::Index d = 0; d < n; ++d) trip.emplace_back(0, d * (n + 1), 1.0);
    SparseMat A(n * n, n * n);
    A.setFromTriplets(trip.begin(), trip.end());

    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n * n);
    rhs[0] = 1.0;

    Eigen::SparseLU<SparseMat> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("liouvillian_steady_state: singular/degenerate Liouvillian");
    Eigen::VectorXcd x = lu.solve(rhs);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("liouvillian_steady_state: solve failed");

    DensityMatrix rho{space, Eigen::Map<Eigen::MatrixXcd>(x.data(), n, n)};
    rho.data = 0.5 * (rho.data + rho.data.adjoint().eval());

    const double residual = (L * Eigen::Map<Eigen::VectorXcd>(rho.data.data(), n * n)).norm();
    const double scale = L.coeffs().abs().maxCoeff();
    if (residual > 1e-10 * std::max(scale, 1.0))
        throw std::runtime_error("liouvillian_steady_state: residual too large");
    return rho;
}

CavityCorrelators cavity_correlators(const DensityMatrix& rho) {
    const SpacePtr& space = rho.space;
    const Operator a1 = annihilation(space, 0), a2 = annihilation(space, 1),
                   a3 = annihilation(space, 2);
    CavityCorrelators out;
    out.triple_abs = std::abs(expectation(a1 * a2 * a3, rho));
    std::array<Operator, 3> num{number_operator(space, 0), number_operator(space, 1),
                                number_operator(space, 2)};
    for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3, k = (i + 2) % 3;
        out.n[i] = expectation(num[i], rho).real();
        out.nn[i] = expectation(num[j] * num[k], rho).real();
    }
    return out;
}

}  // namespace triphoton
