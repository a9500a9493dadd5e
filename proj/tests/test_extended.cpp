#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "nmoc/krotov.hpp"
#include "nmoc/propagate.hpp"

using namespace nmoc;

namespace {

ExponentialSeries demo_series(int j_terms) {
    ExponentialSeries s;
    for (int j = 0; j < j_terms; ++j)
        s.terms.push_back({cplx(0.02 - 0.003 * j, 0.005 * j), cplx(-0.8 - 0.9 * j, 1.1 * j)});
    return s;
}

ControlPulse make_pulse(std::vector<double> values, double dt) {
    ControlPulse p;
    p.dt = dt;
    p.values = std::move(values);
    p.max_amplitude = 1e9;
    return p;
}

double maxabs(const MatX& m) { return m.cwiseAbs().maxCoeff(); }

// pseudo-random but deterministic pulse
std::vector<double> wobble(std::size_t n, double amp) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = amp * std::sin(0.37 * static_cast<double>(i) + 0.2) *
               std::cos(0.11 * static_cast<double>(i));
    return v;
}

}  // namespace

TEST_CASE("generator dimensions and block structure") {
    auto s = demo_series(3);
    CHECK(assemble_generator(0.7, 1.0, s).rows() == 28);

    ExtendedGenerator gen(1.0, s);
    CHECK(gen.dim() == 28);
    CHECK(gen.block_count() == 7);

    const MatX lam = gen.matrix(0.7);
    const Mat4 ls = system_liouvillian(0.7, 1.0);
    const Mat4 lx = commutator_superoperator(pauli_x());
    CHECK(maxabs(lam.block<4, 4>(0, 0) - ls) < 1e-15);
    for (int j = 0; j < 3; ++j) {
        const int k = 4 * (1 + j), kd = 4 * (4 + j);
        CHECK(maxabs(lam.block<4, 4>(0, k) - lx) == 0);
        CHECK(maxabs(lam.block<4, 4>(0, kd) - lx) == 0);
        CHECK(maxabs(lam.block<4, 4>(k, 0) -
                     cplx(0, -1) * s.terms[j].amplitude * left_mult_superoperator(pauli_x())) <
              1e-15);
        CHECK(maxabs(lam.block<4, 4>(kd, 0) - cplx(0, 1) * std::conj(s.terms[j].amplitude) *
                                                  right_mult_superoperator(pauli_x())) < 1e-15);
        CHECK(maxabs(lam.block<4, 4>(k, k) - (ls + s.terms[j].rate * Mat4::Identity())) < 1e-15);
        CHECK(maxabs(lam.block<4, 4>(kd, kd) -
                     (ls + std::conj(s.terms[j].rate) * Mat4::Identity())) < 1e-15);
        // off-diagonal auxiliary couplings vanish
        for (int l = 0; l < 3; ++l) {
            if (l == j) continue;
            CHECK(maxabs(lam.block<4, 4>(k, 4 * (1 + l))) == 0);
            CHECK(maxabs(lam.block<4, 4>(kd, 4 * (4 + l))) == 0);
        }
        CHECK(maxabs(lam.block<4, 4>(k, kd)) == 0);
    }
    CHECK_THROWS_AS(assemble_generator(0.0, 1.0, ExponentialSeries{}), std::invalid_argument);
}

TEST_CASE("zero amplitudes decouple the density block") {
    auto s = demo_series(2);
    for (auto& t : s.terms) t.amplitude = 0;
    ExtendedGenerator gen(1.0, s);
    ExtendedGenerator free_gen(1.0, ExponentialSeries{});

    auto pulse = make_pulse(wobble(300, 2.0), 1e-3);
    auto hist = propagate_forward(pulse, gen);
    auto free_hist = propagate_forward(pulse, free_gen);
    // rho block matches the closed system, auxiliary columns stay empty
    for (std::size_t i : {std::size_t(100), hist.size() - 1}) {
        CHECK(maxabs(hist[i].entries.block<4, 4>(0, 0) - free_hist[i].entries) < 1e-12);
        CHECK(maxabs(hist[i].entries.block(4, 0, gen.dim() - 4, 4)) < 1e-15);
    }
}

TEST_CASE("control derivative") {
    auto s = demo_series(2);
    ExtendedGenerator gen(1.0, s);
    const MatX d = generator_control_derivative(s);

    const double h = 0.37;
    CHECK(maxabs((gen.matrix(1.2 + h) - gen.matrix(1.2 - h)) / (2 * h) - d) < 1e-13);
    CHECK(std::abs(d.trace()) < 1e-14);
    // on vec(sigma_x) in the rho block: -i[-sigma_z/2, sigma_x] = -sigma_y
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(gen.dim());
    v.head<4>() = vectorize(pauli_x());
    Eigen::VectorXcd dv = d * v;
    CHECK(maxabs(devectorize(dv.head<4>()) - (-pauli_y())) < 1e-15);
}

TEST_CASE("hermiticity transport in the stacked vector") {
    auto s = demo_series(2);
    ExtendedGenerator gen(1.0, s);
    auto pulse = make_pulse(wobble(400, 3.0), 1e-3);
    auto hist = propagate_forward(pulse, gen);

    Mat2 rho0;
    rho0 << 0.7, cplx(0.2, 0.1), cplx(0.2, -0.1), 0.3;
    Eigen::VectorXcd v0 = Eigen::VectorXcd::Zero(gen.dim());
    v0.head<4>() = vectorize(rho0);

    for (std::size_t i : {std::size_t(0), std::size_t(200), hist.size() - 1}) {
        Eigen::VectorXcd v = hist[i].entries * v0;
        Mat2 rho = devectorize(v.head<4>());
        CHECK(std::abs(rho.trace() - cplx(1, 0)) < 1e-12);
        CHECK(maxabs(rho - rho.adjoint()) < 1e-12);
        for (int j = 0; j < 2; ++j) {
            Mat2 k = devectorize(v.segment<4>(4 * (1 + j)));
            Mat2 kd = devectorize(v.segment<4>(4 * (3 + j)));
            CHECK(maxabs(kd - k.adjoint()) < 1e-10);
        }
    }
}

TEST_CASE("free evolution reaches the expected conjugations") {
    ExtendedGenerator gen(1.0, ExponentialSeries{});

    auto empty = propagate_forward(make_pulse({}, 1e-3), gen);
    REQUIRE(empty.size() == 1);
    CHECK(maxabs(empty[0].entries - Mat4::Identity()) == 0);

    // t_f = 2 pi: U = -I, conjugation = identity
    auto full = propagate_forward(make_pulse(std::vector<double>(2000, 0.0), 2 * M_PI / 2000),
                                  gen);
    CHECK(maxabs(full.back().entries - Mat4::Identity()) < 1e-8);

    // t_f = pi: conjugation by sigma_x
    auto half = propagate_forward(make_pulse(std::vector<double>(2000, 0.0), M_PI / 2000), gen);
    CHECK(maxabs(half.back().entries - kron22(pauli_x().transpose(), pauli_x())) < 1e-8);
}

TEST_CASE("unitary limit matches the separately integrated qubit propagator") {
    ExtendedGenerator gen(1.0, ExponentialSeries{});
    auto pulse = make_pulse(wobble(1000, 4.0), 1e-3);
    auto hist = propagate_forward(pulse, gen);

    Mat2 u = Mat2::Identity();
    for (std::size_t i = 0; i < pulse.size(); ++i) {
        // exact step for H = -(eps/2) sz - (1/2) sx
        const double a = -pulse.values[i] / 2, b = -0.5;
        const double nu = std::hypot(a, b), th = nu * pulse.dt;
        Mat2 axis = (a * pauli_z() + b * pauli_x()) / nu;
        u = (std::cos(th) * Mat2::Identity() - cplx(0, 1) * std::sin(th) * axis) * u;
    }
    CHECK(maxabs(hist.back().entries - kron22(u.conjugate(), u)) < 1e-8);
}

TEST_CASE("backward propagation") {
    // Lambda == 0: B stays at the terminal
    ExtendedGenerator null_gen(0.0, ExponentialSeries{});
    MatX terminal = kron22(pauli_z().transpose(), pauli_z());
    auto hist = propagate_backward(make_pulse(std::vector<double>(50, 0.0), 1e-2), null_gen,
                                   terminal);
    for (const auto& b : hist) CHECK(maxabs(b.entries - terminal) == 0);

    // B(t) G(t) constant along t, and B(0) = terminal * G(t_f)
    auto s = demo_series(1);
    ExtendedGenerator gen(1.0, s);
    auto pulse = make_pulse(std::vector<double>(800, 2.3), 1e-3);
    MatX term = MatX::Zero(gen.dim(), gen.dim());
    term.block<4, 4>(0, 0) = z_gate_superoperator();
    auto fw = propagate_forward(pulse, gen);
    auto bw = propagate_backward(pulse, gen, term);
    const MatX ref = bw.back().entries * fw.back().entries;
    for (std::size_t i = 0; i < fw.size(); i += 100)
        CHECK(maxabs(bw[i].entries * fw[i].entries - ref) < 1e-8);
    CHECK(maxabs(bw.front().entries - term * fw.back().entries) < 1e-8);

    // identity terminal, time-independent Lambda
    MatX ident = MatX::Identity(gen.dim(), gen.dim());
    auto bw2 = propagate_backward(pulse, gen, ident);
    CHECK(maxabs(bw2.front().entries - fw.back().entries) < 1e-8);
}

TEST_CASE("RK4 convergence order") {
    auto s = demo_series(1);
    ExtendedGenerator gen(1.0, s);
    const double tf = 0.5, eps = 5.0;
    auto run = [&](int n) {
        return propagate_forward(make_pulse(std::vector<double>(n, eps), tf / n), gen)
            .back()
            .entries;
    };
    const MatX ref = run(400);  // dt/8
    const double e1 = maxabs(run(50) - ref);
    const double e2 = maxabs(run(100) - ref);
    const double ratio = e1 / e2;
    CHECK(ratio > 12.0);
    CHECK(ratio < 20.0);
}

TEST_CASE("trace and hermiticity preserved with a bath") {
    auto s = demo_series(2);
    ExtendedGenerator gen(1.0, s);
    auto pulse = make_pulse(wobble(2000, 8.0), 1e-3);
    auto hist = propagate_forward(pulse, gen);

    Mat2 rho0;
    rho0 << 0.25, cplx(-0.1, 0.35), cplx(-0.1, -0.35), 0.75;
    Eigen::VectorXcd v0 = Eigen::VectorXcd::Zero(gen.dim());
    v0.head<4>() = vectorize(rho0);
    for (std::size_t i = 0; i < hist.size(); i += 250) {
        Eigen::VectorXcd v = hist[i].entries * v0;
        Mat2 rho = devectorize(v.head<4>());
        CHECK(std::abs(rho.trace() - cplx(1, 0)) <= 1e-8);
        CHECK(maxabs(rho - rho.adjoint()) <= 1e-8);
    }
}
