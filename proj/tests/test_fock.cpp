#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "triphoton/fock.hpp"

#include <random>

using namespace triphoton;

TEST_SUITE_BEGIN("fock");

TEST_CASE("ladder operator matrix elements") {
    auto s2 = make_space({2});
    Operator a = annihilation(s2, 0);
    CHECK(a.mat.coeff(0, 1) == Complex(1.0));
    CHECK(a.mat.nonZeros() == 1);

    auto s333 = make_space({3, 3, 3});
    Operator a1 = annihilation(s333, 1);
    StateVector bra = basis_state(s333, std::array{0, 0, 0});
    StateVector ket = basis_state(s333, std::array{0, 1, 0});
    CHECK(bra.amplitudes.dot(a1.mat * ket.amplitudes).real() == doctest::Approx(1.0));

    auto s4 = make_space({4});
    CHECK(annihilation(s4, 0).mat.coeff(2, 3).real() == doctest::Approx(std::sqrt(3.0)));

    CHECK_THROWS(annihilation(s4, 1));
}

TEST_CASE("commutator holds below the truncation level") {
    auto s = make_space({6});
    Operator a = annihilation(s, 0);
    SparseMat comm = SparseMat(a.mat * a.adjoint().mat) - SparseMat(a.adjoint().mat * a.mat);
    // [a, a†] = 1 except on the top Fock level.
    for (int n = 0; n < 5; ++n) CHECK(std::abs(comm.coeff(n, n) - Complex(1.0)) < 1e-12);
    CHECK(comm.coeff(5, 5).real() == doctest::Approx(-5.0));
}

TEST_CASE("adjoint is the exact conjugate transpose") {
    auto s = make_space({3, 2});
    Operator a = annihilation(s, 0);
    SparseMat diff = SparseMat(creation(s, 0).mat - a.adjoint().mat);
    CHECK(diff.norm() == 0.0);
}

TEST_CASE("expectation values") {
    auto s = make_space({3});
    Operator n = number_operator(s, 0);
    CHECK(expectation(n, basis_state(s, std::array{0})).real() == doctest::Approx(0.0));
    CHECK(expectation(n, basis_state(s, std::array{2})).real() == doctest::Approx(2.0));

    auto s3 = make_space({2, 2, 2});
    StateVector ghz = basis_state(s3, std::array{0, 0, 0});
    ghz.amplitudes += basis_state(s3, std::array{1, 1, 1}).amplitudes;
    ghz.amplitudes /= std::sqrt(2.0);
    Operator a123 = annihilation(s3, 0) * annihilation(s3, 1) * annihilation(s3, 2);
    CHECK(expectation(a123, ghz).real() == doctest::Approx(0.5));
}

TEST_CASE("hermitian expectation on a physical state is real") {
    auto s = make_space({4, 3});
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    StateVector psi{s, Eigen::VectorXcd(s->total_dim())};
    for (Eigen::Index i = 0; i < psi.amplitudes.size(); ++i)
        psi.amplitudes[i] = Complex(g(rng), g(rng));
    psi.normalize();
    Operator h = number_operator(s, 0) + number_operator(s, 1);
    CHECK(std::abs(expectation(h, psi).imag()) < 1e-10);
}

TEST_CASE("tensor products") {
    auto s = make_space({2, 2});
    std::vector<Eigen::MatrixXcd> ids{Eigen::MatrixXcd::Identity(2, 2),
                                      Eigen::MatrixXcd::Identity(2, 2)};
    CHECK(SparseMat(tensor(s, ids).mat - identity_operator(s).mat).norm() == 0.0);

    // a (x) 1 has entries at rows 0,1 / cols 2,3 with the mode-0-outermost layout.
    Eigen::MatrixXcd asm2 = Eigen::MatrixXcd::Zero(2, 2);
    asm2(0, 1) = 1.0;
    Operator a_outer = tensor(s, {asm2, Eigen::MatrixXcd::Identity(2, 2)});
    CHECK(a_outer.mat.coeff(0, 2) == Complex(1.0));
    CHECK(a_outer.mat.coeff(1, 3) == Complex(1.0));
    CHECK(SparseMat(a_outer.mat - annihilation(s, 0).mat).norm() == 0.0);

    Eigen::MatrixXcd nsm = Eigen::MatrixXcd::Zero(2, 2);
    nsm(1, 1) = 1.0;
    Operator nn = tensor(s, {nsm, nsm});
    CHECK(expectation(nn, basis_state(s, std::array{1, 1})).real() == doctest::Approx(1.0));
}

TEST_CASE("tensor factorization property") {
    auto s = make_space({3, 4});
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g;
    auto random_mat = [&](int d) {
        Eigen::MatrixXcd m(d, d);
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = Complex(g(rng), g(rng));
        return m;
    };
    const Eigen::MatrixXcd a = random_mat(3), b = random_mat(4);
    const Eigen::MatrixXcd i3 = Eigen::MatrixXcd::Identity(3, 3),
                           i4 = Eigen::MatrixXcd::Identity(4, 4);
    Operator lhs = tensor(s, {a, i4}) * tensor(s, {i3, b});
    Operator rhs = tensor(s, {a, b});
    CHECK(SparseMat(lhs.mat - rhs.mat).norm() < 1e-12);
}

TEST_CASE("space invariants") {
    CHECK_THROWS(make_space({1, 3}));
    auto s = make_space({4, 3, 2});
    CHECK(s->total_dim() == 24);
    CHECK(s->index_of(std::array{1, 2, 1}) == 1 * 6 + 2 * 2 + 1);
    const auto occ = s->occupation_of(17);
    CHECK(occ == std::vector<int>{2, 2, 1});
}

TEST_SUITE_END();
