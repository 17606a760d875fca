#include "doctest.h"

#include <cmath>
#include <random>

#include "argmaxlab/errors.hpp"
#include "argmaxlab/kernels.hpp"

using namespace argmaxlab;

namespace {

std::vector<double> linspace(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

// independent oracle for the additive-BM covariance: partition [0,1] into K
// bins, count bins shared by corresponding stage intervals. Exact when the
// partial sums land on bin boundaries.
double additive_cov_bin_oracle(std::size_t n, const std::vector<double>& u,
                               const std::vector<double>& v, std::size_t k_bins) {
    auto bin = [&](double x) { return static_cast<long>(std::llround(x * static_cast<double>(k_bins))); };
    double cov = 0.0;
    double su = 0.0, sv = 0.0;
    for (std::size_t stage = 0; stage <= n; ++stage) {
        const double su1 = stage < n ? su + u[stage] : 1.0;
        const double sv1 = stage < n ? sv + v[stage] : 1.0;
        const long lo = std::max(bin(su), bin(sv));
        const long hi = std::min(bin(su1), bin(sv1));
        if (hi > lo) cov += static_cast<double>(hi - lo) / static_cast<double>(k_bins);
        su = su1;
        sv = sv1;
    }
    return cov;
}

}  // namespace

TEST_CASE("closed forms at pinned points") {
    // fBm at H=1/2 collapses to min(u,v)
    const auto fbm = KernelSpec::fractional_bm(0.5);
    CHECK(kernel_eval(fbm, 0.3, 0.7) == doctest::Approx(0.3).epsilon(1e-15));

    // sheet with frontier: product of minima plus sum of axis minima
    const auto sheet = KernelSpec::brownian_sheet({1.0, 1.0});
    const std::vector<double> u{0.2, 0.5}, v{0.4, 0.3};
    CHECK(kernel_eval(sheet, u, v) == doctest::Approx(0.56).epsilon(1e-15));
    const auto bare = KernelSpec::brownian_sheet({1.0, 1.0}, false);
    CHECK(kernel_eval(bare, u, v) == doctest::Approx(0.06).epsilon(1e-15));

    // OU display evaluated by hand at s = t = 1, gamma = 1, sigma = sqrt(2):
    // (sigma^2 / 2 gamma) e^{-t} (e^s - e^{-s}) = 1 - e^{-2}
    const auto ou = KernelSpec::ornstein_uhlenbeck(1.0, std::sqrt(2.0), 1.0);
    CHECK(kernel_eval(ou, 1.0, 1.0) == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-14));

    // additive BM anchor identity R(u, e^j) = u_j
    const auto add = KernelSpec::additive_bm(2);
    const std::vector<double> e1{1.0, 0.0}, e2{0.0, 1.0};
    CHECK(kernel_eval(add, e1, e2) == 0.0);
    CHECK(kernel_eval(add, e1, e1) == 1.0);
    const std::vector<double> w{0.25, 0.5};
    CHECK(kernel_eval(add, w, e1) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(kernel_eval(add, w, e2) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("construction rejects out-of-range parameters") {
    CHECK_THROWS_AS(KernelSpec::ornstein_uhlenbeck(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(KernelSpec::ornstein_uhlenbeck(1.0, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(KernelSpec::fractional_bm(0.0), std::invalid_argument);
    CHECK_THROWS_AS(KernelSpec::fractional_bm(1.0), std::invalid_argument);
    CHECK_THROWS_AS(KernelSpec::brownian_sheet({}), std::invalid_argument);
    CHECK_THROWS_AS(KernelSpec::brownian_sheet({1.0, -1.0}), std::invalid_argument);
    CHECK_THROWS_AS(KernelSpec::additive_bm(0), std::invalid_argument);
    CHECK_THROWS_AS(KernelSpec::brownian_motion(0.0), std::invalid_argument);
}

TEST_CASE("out-of-domain points raise domain errors") {
    const auto bm = KernelSpec::brownian_motion(1.0);
    CHECK_THROWS_AS(kernel_eval(bm, -0.1, 0.5), std::domain_error);
    CHECK_THROWS_AS(kernel_eval(bm, 0.5, 1.5), std::domain_error);
    const auto add = KernelSpec::additive_bm(2);
    CHECK_THROWS_AS(kernel_eval(add, std::vector<double>{0.7, 0.7}, std::vector<double>{0, 0}),
                    std::domain_error);
}

TEST_CASE("kernel_matrix pinned examples") {
    const auto bm = KernelSpec::brownian_motion(1.0);
    const Eigen::MatrixXd m = kernel_matrix(bm, std::vector<double>{0.5, 1.0});
    CHECK(m(0, 0) == 0.5);
    CHECK(m(0, 1) == 0.5);
    CHECK(m(1, 0) == 0.5);
    CHECK(m(1, 1) == 1.0);

    const auto lin = KernelSpec::linear_cov({2.0});
    const Eigen::MatrixXd l = kernel_matrix(lin, std::vector<double>{1.0, 2.0});
    CHECK(l(0, 0) == 1.0);
    CHECK(l(0, 1) == 2.0);
    CHECK(l(1, 1) == 4.0);

    // H -> 1 limit: entries approach u*v (H = 1 itself is out of range)
    const auto fbm = KernelSpec::fractional_bm(1.0 - 1e-9, 1.0);
    const double a = 0.4, b = 0.9;
    const Eigen::MatrixXd f = kernel_matrix(fbm, std::vector<double>{a, b});
    CHECK(f(0, 0) == doctest::Approx(a * a).epsilon(1e-6));
    CHECK(f(0, 1) == doctest::Approx(a * b).epsilon(1e-6));
    CHECK(f(1, 1) == doctest::Approx(b * b).epsilon(1e-6));

    CHECK_THROWS_AS(kernel_matrix(bm, std::vector<double>{0.5, 0.5}), std::invalid_argument);
}

TEST_CASE("symmetry is exact for random pairs in every family") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const std::vector<KernelSpec> fams = {
        KernelSpec::brownian_motion(1.0),
        KernelSpec::ornstein_uhlenbeck(0.7, 1.3, 1.0),
        KernelSpec::fractional_bm(0.3, 1.0),
        KernelSpec::fractional_bm(0.7, 1.0),
        KernelSpec::brownian_sheet({1.0, 1.0}),
        KernelSpec::linear_cov({1.0, 1.0}),
        KernelSpec::additive_bm(2),
    };
    for (const auto& spec : fams) {
        const std::size_t d = spec.dim();
        for (int it = 0; it < 10000; ++it) {
            std::vector<double> u(d), v(d);
            double su = 0, sv = 0;
            for (std::size_t k = 0; k < d; ++k) {
                u[k] = u01(rng);
                v[k] = u01(rng);
                su += u[k];
                sv += v[k];
            }
            if (spec.get_if<AdditiveBmK>()) {
                for (std::size_t k = 0; k < d; ++k) {
                    u[k] /= std::max(1.0, su);
                    v[k] /= std::max(1.0, sv);
                }
            }
            REQUIRE(kernel_eval(spec, u, v) == kernel_eval(spec, v, u));
        }
    }
}

TEST_CASE("kernel_matrix is PSD on random grids for every family") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u01(1e-3, 1.0);
    const std::vector<KernelSpec> fams = {
        KernelSpec::brownian_motion(1.0),        KernelSpec::ornstein_uhlenbeck(2.0, 0.5, 1.0),
        KernelSpec::fractional_bm(0.05, 1.0),    KernelSpec::fractional_bm(0.95, 1.0),
        KernelSpec::fractional_bm(0.5, 1.0),
    };
    for (const auto& spec : fams) {
        for (std::size_t n : {8u, 64u, 256u}) {
            std::vector<double> pts;
            for (std::size_t i = 0; i < n; ++i) pts.push_back(u01(rng));
            std::sort(pts.begin(), pts.end());
            pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
            CHECK_NOTHROW(kernel_matrix(spec, pts));
        }
    }
    // 2-d families on small product point sets
    const auto sheet = KernelSpec::brownian_sheet({1.0, 1.0});
    const auto add = KernelSpec::additive_bm(2);
    std::vector<std::vector<double>> pts2;
    for (int i = 0; i < 40; ++i) {
        const double x = u01(rng), y = u01(rng);
        pts2.push_back({x, y * (1.0 - x)});
    }
    CHECK_NOTHROW(kernel_matrix(sheet, pts2));
    CHECK_NOTHROW(kernel_matrix(add, pts2));
}

TEST_CASE("fbm(H=1/2) matrix equals the BM matrix entrywise") {
    const auto grid = linspace(0.0, 1.0, 33);
    const Eigen::MatrixXd a = kernel_matrix(KernelSpec::fractional_bm(0.5), grid);
    const Eigen::MatrixXd b = kernel_matrix(KernelSpec::brownian_motion(), grid);
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("additive BM: anchor identity and bin-enumeration oracle") {
    std::mt19937_64 rng(23);
    const std::size_t n = 3;
    const auto spec = KernelSpec::additive_bm(n);
    std::uniform_int_distribution<int> lat(0, 1000);
    for (int it = 0; it < 1000; ++it) {
        // random lattice point in the simplex at resolution 1000
        std::vector<double> u(n, 0.0);
        int remaining = 1000;
        for (std::size_t k = 0; k < n; ++k) {
            const int step = lat(rng) % (remaining + 1);
            u[k] = step / 1000.0;
            remaining -= step;
        }
        for (std::size_t j = 0; j < n; ++j) {
            std::vector<double> ej(n, 0.0);
            ej[j] = 1.0;
            REQUIRE(std::abs(kernel_eval(spec, u, ej) - u[j]) <= 1e-15);
        }
        // full covariance against the independent interval-bin count
        std::vector<double> v(n, 0.0);
        remaining = 1000;
        for (std::size_t k = 0; k < n; ++k) {
            const int step = lat(rng) % (remaining + 1);
            v[k] = step / 1000.0;
            remaining -= step;
        }
        const double oracle = additive_cov_bin_oracle(n, u, v, 1000);
        REQUIRE(kernel_eval(spec, u, v) == doctest::Approx(oracle).epsilon(1e-12));
    }
}

TEST_CASE("monotone section check") {
    const auto bm = KernelSpec::brownian_motion(1.0);
    const auto grid = linspace(0.0, 1.0, 65);
    CHECK(check_monotone_in_first_arg(bm, 1.0, grid).increasing);

    // fBm sections: positive derivative verified numerically per H
    for (double hurst : {0.1, 0.3, 0.7, 0.9}) {
        const auto fbm = KernelSpec::fractional_bm(hurst, 1.0);
        const auto fine = linspace(0.0, 1.0, 4097);
        CHECK(check_monotone_in_first_arg(fbm, 1.0, fine).increasing);
    }

    const auto ou = KernelSpec::ornstein_uhlenbeck(1.0, std::sqrt(2.0), 1.0);
    CHECK(check_monotone_in_first_arg(ou, 1.0, grid).increasing);

    // injected test double: R(z, anchor) = cos(z) is not increasing on [0,3]
    const auto bad = check_monotone_in_first_arg([](double z) { return std::cos(z); },
                                                 linspace(0.0, 3.0, 31));
    CHECK_FALSE(bad.increasing);
    CHECK(bad.violation_index == 0);  // cos decreases immediately
    CHECK(bad.value_before > bad.value_after);
}

TEST_CASE("anchor conditions for the per-coordinate identity") {
    SUBCASE("sheet with frontier, corner anchors") {
        const auto sheet = KernelSpec::brownian_sheet({1.0, 1.0});
        const Grid grid = Grid::product({16, 16}, {1.0, 1.0});
        const auto rep = validate_anchor_conditions(sheet, {{1.0, 0.0}, {0.0, 1.0}}, grid);
        CHECK(rep.diagonal_invertible.pass);
        CHECK(rep.depends_only_on_zi.pass);
        CHECK(rep.strictly_increasing.pass);
        CHECK(rep.zero_at_origin.pass);
        CHECK(rep.anchor_cov(0, 1) == 0.0);
        CHECK(rep.anchor_cov(0, 0) == doctest::Approx(1.0));
    }
    SUBCASE("additive BM, unit anchors give the identity matrix") {
        const auto add = KernelSpec::additive_bm(2);
        const Grid grid = Grid::simplex(2, 24);
        const auto rep = validate_anchor_conditions(add, {{1.0, 0.0}, {0.0, 1.0}}, grid);
        CHECK(rep.all_pass());
        CHECK(rep.anchor_cov.isApprox(Eigen::MatrixXd::Identity(2, 2), 1e-14));
    }
    SUBCASE("1-d degenerate case") {
        const auto fbm = KernelSpec::fractional_bm(0.3, 1.0);
        const Grid grid = Grid::uniform1d(64, 1.0);
        const auto rep = validate_anchor_conditions(fbm, {{1.0}}, grid);
        CHECK(rep.all_pass());
    }
    SUBCASE("bare sheet fails invertibility at corner anchors") {
        // without the frontier, R(T_i e^i, T_i e^i) = 0: anchors are degenerate
        const auto bare = KernelSpec::brownian_sheet({1.0, 1.0}, false);
        const Grid grid = Grid::product({8, 8}, {1.0, 1.0});
        const auto rep = validate_anchor_conditions(bare, {{1.0, 0.0}, {0.0, 1.0}}, grid);
        CHECK_FALSE(rep.diagonal_invertible.pass);
    }
}

TEST_CASE("drift spec") {
    const auto lin = DriftSpec::linear(2.0);
    CHECK(lin.eval(0.25) == 0.5);
    const auto st = DriftSpec::step(0.5, 1.0);
    CHECK(st.eval(0.49) == 0.0);
    CHECK(st.eval(0.5) == 1.0);
    CHECK(st.continuity == DriftSpec::Continuity::Cadlag);
    CHECK_THROWS_AS(DriftSpec::tabulated({1.0, std::nan("")}), std::invalid_argument);
    const Grid g = Grid::uniform1d(4, 1.0);
    CHECK_THROWS_AS(DriftSpec::tabulated({1.0, 2.0}).validate_for_grid(g), std::invalid_argument);
}
