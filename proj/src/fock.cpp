#include "triphoton/fock.hpp"

#include <cmath>
#include <stdexcept>

namespace triphoton {

HilbertSpace::HilbertSpace(std::vector<int> mode_dims) : dims_(std::move(mode_dims)) {
    if (dims_.empty()) throw std::invalid_argument("HilbertSpace: no modes");
    for (int d : dims_) {
        if (d < 2) throw std::invalid_argument("HilbertSpace: every mode_dim must be >= 2");
    }
    strides_.assign(dims_.size(), 1);
    for (int m = static_cast<int>(dims_.size()) - 2; m >= 0; --m) {
        strides_[m] = strides_[m + 1] * dims_[m + 1];
    }
    total_ = strides_[0] * dims_[0];
}

Eigen::Index HilbertSpace::index_of(std::span<const int> occupation) const {
    if (static_cast<int>(occupation.size()) != num_modes())
        throw std::invalid_argument("index_of: occupation length mismatch");
    Eigen::Index idx = 0;
    for (int m = 0; m < num_modes(); ++m) {
        if (occupation[m] < 0 || occupation[m] >= dims_[m])
            throw std::out_of_range("index_of: occupation outside truncation");
        idx += occupation[m] * strides_[m];
    }
    return idx;
}

std::vector<int> HilbertSpace::occupation_of(Eigen::Index index) const {
    std::vector<int> occ(num_modes());
    for (int m = 0; m < num_modes(); ++m) {
        occ[m] = static_cast<int>(index / strides_[m]);
        index %= strides_[m];
    }
    return occ;
}

SpacePtr make_space(std::vector<int> mode_dims) {
    return std::make_shared<const HilbertSpace>(std::move(mode_dims));
}

namespace {

void require_same_space(const SpacePtr& a, const SpacePtr& b, const char* what) {
    if (!a || !b || !(*a == *b)) throw std::invalid_argument(std::string(what) + ": space mismatch");
}

}  // namespace

Operator Operator::adjoint() const { return {space, SparseMat(mat.adjoint())}; }

Operator Operator::operator+(const Operator& rhs) const {
    require_same_space(space, rhs.space, "Operator+");
    return {space, SparseMat(mat + rhs.mat)};
}

Operator Operator::operator-(const Operator& rhs) const {
    require_same_space(space, rhs.space, "Operator-");
    return {space, SparseMat(mat - rhs.mat)};
}

Operator Operator::operator*(const Operator& rhs) const {
    require_same_space(space, rhs.space, "Operator*");
    return {space, SparseMat(mat * rhs.mat)};
}

Operator operator*(Complex scale, const Operator& op) {
    return {op.space, SparseMat(scale * op.mat)};
}

Operator annihilation(const SpacePtr& space, int mode) {
    if (mode < 0 || mode >= space->num_modes())
        throw std::out_of_range("annihilation: mode index out of range");
    const Eigen::Index n = space->total_dim();
    const Eigen::Index stride = space->stride(mode);
    const int dim = space->dim(mode);
    std::vector<Eigen::Triplet<Complex>> trip;
    trip.reserve(n);
    for (Eigen::Index col = 0; col < n; ++col) {
        const int occ = static_cast<int>((col / stride) % dim);
        if (occ > 0) trip.emplace_back(col - stride, col, std::sqrt(double(occ)));
    }
    SparseMat mat(n, n);
    mat.setFromTriplets(trip.begin(), trip.end());
    return {space, std::move(mat)};
}

Operator creation(const SpacePtr& space, int mode) { return annihilation(space, mode).adjoint(); }

Operator number_operator(const SpacePtr& space, int mode) {
    if (mode < 0 || mode >= space->num_modes())
        throw std::out_of_range("number_operator: mode index out of range");
    const Eigen::Index n = space->total_dim();
    const Eigen::Index stride = space->stride(mode);
    const int dim = space->dim(mode);
    std::vector<Eigen::Triplet<Complex>> trip;
    for (Eigen::Index i = 0; i < n; ++i) {
        const int occ = static_cast<int>((i / stride) % dim);
        if (occ > 0) trip.emplace_back(i, i, double(occ));
    }
    SparseMat mat(n, n);
    mat.setFromTriplets(trip.begin(), trip.end());
    return {space, std::move(mat)};
}

Operator identity_operator(const SpacePtr& space) {
    SparseMat mat(space->total_dim(), space->total_dim());
    mat.setIdentity();
    return {space, std::move(mat)};
}

Operator tensor(const SpacePtr& space, const std::vector<Eigen::MatrixXcd>& per_mode) {
    if (static_cast<int>(per_mode.size()) != space->num_modes())
        throw std::invalid_argument("tensor: one factor per mode required");
    for (int m = 0; m < space->num_modes(); ++m) {
        if (per_mode[m].rows() != space->dim(m) || per_mode[m].cols() != space->dim(m))
            throw std::invalid_argument("tensor: factor dimension mismatch");
    }
    // Dense accumulation of the Kronecker product, sparsified at the end; the
    // factors are per-mode small so this stays cheap at desk truncations.
    Eigen::MatrixXcd acc = per_mode[0];
    for (int m = 1; m < space->num_modes(); ++m) {
        const Eigen::MatrixXcd& b = per_mode[m];
        Eigen::MatrixXcd next(acc.rows() * b.rows(), acc.cols() * b.cols());
        for (Eigen::Index i = 0; i < acc.rows(); ++i)
            for (Eigen::Index j = 0; j < acc.cols(); ++j)
                next.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = acc(i, j) * b;
        acc = std::move(next);
    }
    return {space, acc.sparseView(1.0, 1e-300)};
}

StateVector basis_state(const SpacePtr& space, std::span<const int> occupation) {
    StateVector psi{space, Eigen::VectorXcd::Zero(space->total_dim())};
    psi.amplitudes[space->index_of(occupation)] = 1.0;
    return psi;
}

Complex expectation(const Operator& op, const StateVector& state) {
    require_same_space(op.space, state.space, "expectation");
    return state.amplitudes.dot(op.mat * state.amplitudes);
}

Complex expectation(const Operator& op, const DensityMatrix& rho) {
    require_same_space(op.space, rho.space, "expectation");
    return (op.mat * rho.data).eval().trace();
}

void add_dyad(DensityMatrix& rho, std::span<const int> ket, std::span<const int> bra,
              Complex scale) {
    rho.data(rho.space->index_of(ket), rho.space->index_of(bra)) += scale;
}

}  // namespace triphoton
