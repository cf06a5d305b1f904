#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <complex>
#include <memory>
#include <span>
#include <vector>

namespace triphoton {

using Complex = std::complex<double>;
using SparseMat = Eigen::SparseMatrix<Complex>;

/// Truncated multi-mode bosonic Fock space. Mode 0 is the outermost Kronecker
/// factor; basis index = ((n0*d1 + n1)*d2 + n2)*...
class HilbertSpace {
public:
    explicit HilbertSpace(std::vector<int> mode_dims);

    int num_modes() const { return static_cast<int>(dims_.size()); }
    int dim(int mode) const { return dims_.at(mode); }
    const std::vector<int>& mode_dims() const { return dims_; }
    Eigen::Index total_dim() const { return total_; }

    /// Index stride of one excitation in `mode` (product of later mode dims).
    Eigen::Index stride(int mode) const { return strides_.at(mode); }

    Eigen::Index index_of(std::span<const int> occupation) const;
    std::vector<int> occupation_of(Eigen::Index index) const;

    bool operator==(const HilbertSpace& other) const { return dims_ == other.dims_; }

private:
    std::vector<int> dims_;
    std::vector<Eigen::Index> strides_;
    Eigen::Index total_ = 1;
};

using SpacePtr = std::shared_ptr<const HilbertSpace>;

SpacePtr make_space(std::vector<int> mode_dims);

/// Sparse operator on a HilbertSpace. Immutable by convention after construction.
struct Operator {
    SpacePtr space;
    SparseMat mat;

    Operator adjoint() const;
    Operator operator+(const Operator& rhs) const;
    Operator operator-(const Operator& rhs) const;
    Operator operator*(const Operator& rhs) const;
    friend Operator operator*(Complex scale, const Operator& op);
};

struct StateVector {
    SpacePtr space;
    Eigen::VectorXcd amplitudes;

    double norm() const { return amplitudes.norm(); }
    void normalize() { amplitudes /= amplitudes.norm(); }
};

struct DensityMatrix {
    SpacePtr space;
    Eigen::MatrixXcd data;

    Complex trace() const { return data.trace(); }
};

Operator annihilation(const SpacePtr& space, int mode);
Operator creation(const SpacePtr& space, int mode);
Operator number_operator(const SpacePtr& space, int mode);
Operator identity_operator(const SpacePtr& space);

/// Kronecker product of one small dense matrix per mode, mode 0 outermost.
Operator tensor(const SpacePtr& space, const std::vector<Eigen::MatrixXcd>& per_mode);

/// Basis ket |n0 n1 ...>.
StateVector basis_state(const SpacePtr& space, std::span<const int> occupation);

Complex expectation(const Operator& op, const StateVector& state);
Complex expectation(const Operator& op, const DensityMatrix& rho);

/// |ket><bra| contribution added in place, scaled.
void add_dyad(DensityMatrix& rho, std::span<const int> ket, std::span<const int> bra,
              Complex scale);

}  // namespace triphoton
