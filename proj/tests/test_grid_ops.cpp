#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hydrostab/field_ops.hpp"
#include "hydrostab/rng.hpp"

using namespace hydrostab;

namespace {

const double kPi = 3.14159265358979323846;

ScalarField sample_nodes(const Grid& g, double (*fn)(double, double)) {
    ScalarField out(g, Placement::node);
    for (int i = 0; i <= g.nx; ++i)
        for (int j = 0; j <= g.ny; ++j)
            out.at(i, j) = fn(g.node_x(i), g.node_y(j));
    return out;
}

}  // namespace

TEST_CASE("grid invariants") {
    CHECK_THROWS_AS(Grid(1.0, 1.0, 2, 8), StructuralError);
    CHECK_THROWS_AS(Grid(-1.0, 1.0, 8, 8), StructuralError);
    CHECK_THROWS_AS(Grid(1.0, 1.0, 2048, 2048, 1'000'000), StructuralError);
    Grid g(2.0, 1.0, 8, 4);
    CHECK(g.hx == doctest::Approx(0.25));
    CHECK(g.hy == doctest::Approx(0.25));
    CHECK(g.rows(Placement::x_face) == 9);
    CHECK(g.cols(Placement::x_face) == 4);
    CHECK(g.rows(Placement::y_face) == 8);
    CHECK(g.cols(Placement::y_face) == 5);
}

TEST_CASE("divergence of constant and linear fields") {
    Grid g(1.0, 1.0, 8, 8);
    VectorField vf(g);
    vf.u.fill(1.0);
    vf.v.fill(1.0);
    CHECK(divergence(vf).max_abs() == doctest::Approx(0.0).epsilon(1e-14));

    // u = x on faces, v = 0 -> div = 1 exactly
    for (int i = 0; i <= g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) vf.u.at(i, j) = g.node_x(i);
    vf.v.fill(0.0);
    ScalarField d = divergence(vf);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) CHECK(d.at(i, j) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("curl of clamped streamfunction is divergence-free and no-slip") {
    Grid g(1.0, 1.5, 12, 10);
    ScalarField psi = sample_nodes(g, [](double x, double y) {
        const double sx = std::sin(kPi * x), sy = std::sin(kPi * y / 1.5);
        return sx * sx * sy * sy;
    });
    clamp_boundary(psi);
    VectorField v = curl_streamfunction(psi);
    CHECK(v.boundary_faces_zero());
    const double div_bound = 1e-12 * psi.max_abs() / std::min(g.hx, g.hy);
    CHECK(divergence(v).max_abs() <= div_bound);

    SUBCASE("zero psi gives zero velocity") {
        ScalarField z(g, Placement::node);
        VectorField vz = curl_streamfunction(z);
        CHECK(vz.max_abs() == 0.0);
    }

    SUBCASE("unclamped psi is rejected") {
        ScalarField bad(g, Placement::node, 1.0);
        CHECK_THROWS_AS(curl_streamfunction(bad), StructuralError);
    }
}

TEST_CASE("curl locality: interior bump changes velocity only nearby") {
    Grid g(1.0, 1.0, 16, 16);
    Rng rng(42);
    ScalarField psi1 = random_clamped_psi(g, rng, 0);
    ScalarField psi2 = psi1;
    psi2.at(8, 8) += 1.0;
    VectorField v1 = curl_streamfunction(psi1);
    VectorField v2 = curl_streamfunction(psi2);
    int changed = 0;
    for (int i = 0; i <= g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            if (v1.u.at(i, j) != v2.u.at(i, j)) {
                ++changed;
                CHECK(std::abs(i - 8) <= 1);
                CHECK(std::abs(j - 8) <= 1);
            }
    CHECK(changed == 2);  // the two u-faces touching node (8,8)
}

TEST_CASE("laplacian of linear and quadratic functions") {
    Grid g(1.0, 1.0, 10, 10);
    ScalarField lin(g, Placement::cell);
    ScalarField quad(g, Placement::cell);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            lin.at(i, j) = 2.0 * g.cell_x(i) - 3.0 * g.cell_y(j) + 1.0;
            quad.at(i, j) = g.cell_x(i) * g.cell_x(i) + g.cell_y(j) * g.cell_y(j);
        }
    ScalarField ll = laplacian(lin);
    ScalarField lq = laplacian(quad);
    for (int i = 1; i < g.nx - 1; ++i)
        for (int j = 1; j < g.ny - 1; ++j) {
            CHECK(ll.at(i, j) == doctest::Approx(0.0).epsilon(1e-11));
            CHECK(lq.at(i, j) == doctest::Approx(4.0).epsilon(1e-11));
        }
    ScalarField face(g, Placement::x_face);
    CHECK_THROWS_AS(laplacian(face), StructuralError);
}

TEST_CASE("gradient of g*y is (0, g) on interior faces") {
    Grid g(1.0, 1.0, 8, 8);
    const double grav = 2.5;
    ScalarField f(g, Placement::cell);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) f.at(i, j) = grav * g.cell_y(j);
    VectorField gf = gradient(f);
    for (int i = 1; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) CHECK(gf.u.at(i, j) == doctest::Approx(0.0));
    for (int i = 0; i < g.nx; ++i)
        for (int j = 1; j < g.ny; ++j)
            CHECK(gf.v.at(i, j) == doctest::Approx(grav).epsilon(1e-13));
}

TEST_CASE("inner product: constants, zero, positive definiteness") {
    Grid g(1.0, 1.0, 8, 8);
    SUBCASE("unit cell field integrates to the area") {
        ScalarField one(g, Placement::cell, 1.0);
        CHECK(inner_product(one, one) == doctest::Approx(1.0).epsilon(1e-13));
    }
    SUBCASE("unit face fields integrate to the area") {
        ScalarField fx(g, Placement::x_face, 1.0);
        CHECK(inner_product(fx, fx) == doctest::Approx(1.0).epsilon(1e-13));
        ScalarField fy(g, Placement::y_face, 1.0);
        CHECK(inner_product(fy, fy) == doctest::Approx(1.0).epsilon(1e-13));
        ScalarField nd(g, Placement::node, 1.0);
        CHECK(inner_product(nd, nd) == doctest::Approx(1.0).epsilon(1e-13));
    }
    SUBCASE("zero field has zero J") {
        VectorField z(g);
        ScalarField w(g, Placement::cell, 2.0);
        CHECK(inner_product(z, z, &w) == 0.0);
    }
    SUBCASE("positive definiteness and symmetry on random fields") {
        Rng rng(7);
        ScalarField a(g, Placement::cell), b(g, Placement::cell), w(g, Placement::cell);
        for (double& x : a.data()) x = rng.uniform(-1, 1);
        for (double& x : b.data()) x = rng.uniform(-1, 1);
        for (double& x : w.data()) x = rng.uniform(0.5, 2.0);
        CHECK(inner_product(a, a, &w) > 0.0);
        CHECK(inner_product(a, b, &w) == doctest::Approx(inner_product(b, a, &w)));
    }
    SUBCASE("placement mismatch is structural") {
        ScalarField a(g, Placement::cell), b(g, Placement::node);
        CHECK_THROWS_AS(inner_product(a, b), StructuralError);
    }
}

TEST_CASE("stencil operators are linear (random fields)") {
    Grid g(1.0, 1.0, 12, 12);
    Rng rng(99);
    ScalarField p1 = random_clamped_psi(g, rng, 0);
    ScalarField p2 = random_clamped_psi(g, rng, 0);
    const double al = 1.7, be = -0.6;
    ScalarField combo(g, Placement::node);
    for (int i = 0; i <= g.nx; ++i)
        for (int j = 0; j <= g.ny; ++j) combo.at(i, j) = al * p1.at(i, j) + be * p2.at(i, j);
    VectorField vc = curl_streamfunction(combo);
    VectorField v1 = curl_streamfunction(p1);
    VectorField v2 = curl_streamfunction(p2);
    double dev = 0.0;
    for (int i = 0; i <= g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            dev = std::max(dev,
                           std::abs(vc.u.at(i, j) - al * v1.u.at(i, j) - be * v2.u.at(i, j)));
    CHECK(dev <= 1e-12 * std::max(1.0, vc.u.max_abs()));

    // vector_laplacian linearity
    VectorField lc = vector_laplacian(vc);
    VectorField l1 = vector_laplacian(v1);
    VectorField l2 = vector_laplacian(v2);
    dev = 0.0;
    for (int i = 0; i <= g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            dev = std::max(dev,
                           std::abs(lc.u.at(i, j) - al * l1.u.at(i, j) - be * l2.u.at(i, j)));
    CHECK(dev <= 1e-9 * std::max(1.0, lc.u.max_abs()));
}

TEST_CASE("divergence of curl stays in the kernel for random psi") {
    Grid g(2.0, 1.0, 20, 14);
    Rng rng(123);
    for (int trial = 0; trial < 5; ++trial) {
        ScalarField psi = random_clamped_psi(g, rng, trial % 3);
        VectorField v = curl_streamfunction(psi);
        const double bound = 1e-12 * std::max(1.0, psi.max_abs()) / std::min(g.hx, g.hy);
        CHECK(divergence(v).max_abs() <= bound);
    }
}

TEST_CASE("grad_norm_sq is the summation-by-parts pair of vector_laplacian") {
    // <-Lap u, u> == |grad u|^2 for fields with zero boundary faces
    Grid g(1.0, 1.0, 10, 10);
    Rng rng(5);
    ScalarField psi = random_clamped_psi(g, rng, 1);
    VectorField v = curl_streamfunction(psi);
    VectorField lap = vector_laplacian(v);
    double pair = 0.0;
    for (int i = 0; i <= g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) pair -= lap.u.at(i, j) * v.u.at(i, j) * g.hx * g.hy;
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j <= g.ny; ++j) pair -= lap.v.at(i, j) * v.v.at(i, j) * g.hx * g.hy;
    CHECK(pair == doctest::Approx(grad_norm_sq(v)).epsilon(1e-11));
}
