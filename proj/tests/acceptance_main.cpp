// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Every tolerance is pinned here; seeds are fixed so the whole
// suite is reproducible bit for bit.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "argmaxlab/bridge.hpp"
#include "argmaxlab/driver.hpp"
#include "argmaxlab/extremum.hpp"
#include "argmaxlab/levy.hpp"
#include "argmaxlab/perturb.hpp"
#include "argmaxlab/sampler.hpp"
#include "test_support.hpp"

using namespace argmaxlab;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& what, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s  --  %s\n", pass ? "PASS" : "FAIL", criterion,
                what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof(buf), f, args);
    va_end(args);
    return buf;
}

SamplerFactory gauss_factory(const KernelSpec& spec, GridPtr grid) {
    auto s = std::make_shared<const GaussianPathSampler>(spec, grid);
    return [s]() -> ReplicateSampler {
        return [s](const SeedSpec& seed, PathSample& p) { s->sample_into(seed, p); };
    };
}

double elapsed_s(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Identity1dNumbers {
    double mean_z, se_z, cov, se_cov;
};

Identity1dNumbers extract_numbers(const IdentityRunResult& run) {
    // observable layout: phi_z, sup, x_anchor, sup*x_anchor, width, unique, z_mid
    const auto& acc = run.acc;
    std::vector<double> grad(acc.size(), 0.0);
    grad[3] = 1.0;
    grad[1] = -acc.mean(2);
    grad[2] = -acc.mean(1);
    return {acc.mean(6), acc.se_mean(6), acc.covariance(1, 2),
            std::sqrt(std::max(0.0, acc.delta_var(grad)))};
}

// ---------------------------------------------------------------------------

Identity1dNumbers criterion_1_and_2() {
    const std::size_t n_grid = 1 << 14, n_reps = 100000;
    const auto grid = std::make_shared<const Grid>(Grid::uniform1d(n_grid, 1.0));
    const auto bm = KernelSpec::brownian_motion();
    const auto t0 = std::chrono::steady_clock::now();
    McRunOptions opt{n_reps, 0xA101, 0, 1e-12, 0.0};
    const IdentityRunResult run = covariance_identity_1d(
        gauss_factory(bm, grid), *grid, bm, 1.0, identity_form_for_family(bm, 1.0), opt, true);
    const double wall = elapsed_s(t0);

    const Identity1dNumbers nums = extract_numbers(run);
    const auto& rep = run.reports[0];
    const bool mean_ok = std::abs(nums.mean_z - 0.5) <= 3.0 * nums.se_z;
    const bool z_ok = std::abs(rep.z) < 4.0;
    const bool time_ok = wall < 120.0;
    report(1, mean_ok && z_ok && time_ok, "BM identity E Z = Cov(S, X(1)), n=2^14, N=1e5",
           fmt("E-hat Z=%.5f (se %.1e), Cov-hat=%.5f, paired z=%.2f, wall=%.0fs", nums.mean_z,
               nums.se_z, nums.cov, rep.z, wall));

    const double ks = testsupport::ks_distance(run.z_samples, testsupport::arcsine_cdf);
    const double crit = testsupport::ks_critical_1pc(n_reps);
    report(2, ks < crit, "arcsine law of the BM argmax (KS at 1%)",
           fmt("KS=%.5f < %.5f", ks, crit));
    return nums;
}

void criterion_3(const Identity1dNumbers& bm_nums) {
    const std::size_t n_grid = 1 << 14, n_reps = 100000;
    const auto grid = std::make_shared<const Grid>(Grid::uniform1d(n_grid, 1.0));
    const double hs[3] = {0.3, 0.5, 0.7};
    const std::uint64_t seeds[3] = {0xA301, 0xA305, 0xA307};
    bool all = true;
    std::string detail;
    for (int i = 0; i < 3; ++i) {
        const auto fbm = KernelSpec::fractional_bm(hs[i]);
        McRunOptions opt{n_reps, seeds[i], 0, 1e-12, 0.0};
        const IdentityRunResult run =
            covariance_identity_1d(gauss_factory(fbm, grid), *grid, fbm, 1.0,
                                   identity_form_for_family(fbm, 1.0), opt);
        const auto& rep = run.reports[0];
        all = all && std::abs(rep.z) < 4.0;
        detail += fmt("H=%.1f z=%.2f  ", hs[i], rep.z);
        if (hs[i] == 0.5) {
            const Identity1dNumbers f = extract_numbers(run);
            const double dz = std::abs(f.mean_z - bm_nums.mean_z);
            const double dc = std::abs(f.cov - bm_nums.cov);
            const double sz = std::hypot(f.se_z, bm_nums.se_z);
            const double sc = std::hypot(f.se_cov, bm_nums.se_cov);
            const bool agree = dz <= 3.0 * sz && dc <= 3.0 * sc;
            all = all && agree;
            detail += fmt("[H=.5 vs BM: dEZ=%.1e<=%.1e, dCov=%.1e<=%.1e] ", dz, 3.0 * sz, dc,
                          3.0 * sc);
        }
    }
    report(3, all, "fBm identity E(Z^2H - (1-Z)^2H) = 2Cov - 1, H in {.3,.5,.7}", detail);
}

void criterion_4() {
    const auto grid = std::make_shared<const Grid>(Grid::uniform1d(1 << 14, 1.0));
    const auto ou = KernelSpec::ornstein_uhlenbeck(1.0, std::sqrt(2.0), 1.0);
    McRunOptions opt{100000, 0xA401, 0, 1e-12, 0.0};
    const IdentityRunResult run = covariance_identity_1d(
        gauss_factory(ou, grid), *grid, ou, 1.0, identity_form_for_family(ou, 1.0), opt);
    const auto& rep = run.reports[0];
    report(4, std::abs(rep.z) < 4.0, "OU identity (gamma=1, sigma=sqrt(2), t=1), N=1e5",
           fmt("lhs=%.5f rhs=%.5f paired z=%.2f", rep.lhs, rep.rhs, rep.z));
}

void criterion_5() {
    const auto grid = std::make_shared<const Grid>(Grid::uniform1d(1 << 14, 1.0));
    const auto bm = KernelSpec::brownian_motion();
    McRunOptions opt{100000, 0xA501, 0, 1e-12, 0.0};
    const DerivativeRunResult res =
        derivative_criterion_check(gauss_factory(bm, grid), *grid, RhoFn::identity(), 0.05, opt);
    // observables: D(h), D(h/2), rho(Zmid), width, Q+, Q-
    const IdentityReport at_h = res.coords[0].main;
    const IdentityReport at_h2 = paired_mean_report(res.acc, "h/2 vs E rho(Z)", 1, 2);
    const IdentityReport steps = res.coords[0].richardson;
    const bool ok =
        std::abs(at_h.z) <= 3.0 && std::abs(at_h2.z) <= 3.0 && std::abs(steps.z) <= 3.0;
    report(5, ok, "derivative criterion: ds/da|0 vs E Z at h=0.05 and h=0.025",
           fmt("z(h)=%.2f z(h/2)=%.2f z(h vs h/2)=%.2f, ds/da=%.4f, E Z=%.4f", at_h.z, at_h2.z,
               steps.z, at_h.lhs, at_h.rhs));
}

void criterion_6() {
    const auto grid = std::make_shared<const Grid>(Grid::uniform1d(1 << 12, 1.0));
    const GaussianPathSampler bm(KernelSpec::brownian_motion(), grid);
    std::size_t violations = 0;
    double worst = 0.0;
    PathSample path;
    for (std::uint64_t rep = 0; rep < 10000; ++rep) {
        bm.sample_into(SeedSpec{0xA601, rep}, path);
        for (double a : {0.1, -0.1, 0.01, -0.01}) {
            const BracketReport br = check_maximality_bracketing(path, a, RhoFn::identity(), 1e-9);
            if (!br.ok) ++violations;
            worst = std::max(worst, br.max_violation);
        }
    }
    report(6, violations == 0, "maximality bracketing inequalities, 1e4 BM paths x 4 amplitudes",
           fmt("violations=%zu, worst slack breach=%.1e (tol 1e-9)", violations, worst));
}

void criterion_7() {
    const auto grid = std::make_shared<const Grid>(Grid::uniform1d(1 << 14, 1.0));
    const double delta_grid = 2.0 * grid->spacing();

    // (a) sigma > 0
    {
        LevyTriplet t;
        t.sigma = 1.0;
        t.jump_rate = 2.0;
        t.jump_law = ExponentialJumps{0.5};
        std::size_t unique = 0;
        const std::size_t n = 10000;
        for (std::uint64_t rep = 0; rep < n; ++rep) {
            const PathSample p = sample_levy_path(t, grid, SeedSpec{0xA701, rep});
            if (uniqueness_indicator(sup_and_argmax(p, 1e-12), delta_grid)) ++unique;
        }
        const double freq = static_cast<double>(unique) / static_cast<double>(n);
        report(7, freq >= 0.99, "Levy case (1): sigma=1, uniqueness at delta=2dx",
               fmt("frequency=%.4f >= 0.99", freq));
    }
    // (b) sigma = 0, c = 1
    {
        LevyTriplet t;
        t.drift = 1.0;
        t.jump_rate = 2.0;
        t.jump_law = ExponentialJumps{0.5};
        bool all_at_end = true;
        for (std::uint64_t rep = 0; rep < 10000; ++rep) {
            const ArgmaxSummary s =
                sup_and_argmax(sample_levy_path(t, grid, SeedSpec{0xA702, rep}), 1e-12);
            all_at_end = all_at_end && s.z_left[0] == 1.0 && s.z_right[0] == 1.0;
        }
        report(7, all_at_end, "Levy case (2): sigma=0, c=1, argmax = 1 in every replicate",
               all_at_end ? "10000/10000 at the endpoint" : "some replicate peaked early");
    }
    // (c) sigma = 0, c = 0, compound Poisson
    {
        LevyTriplet t;
        t.jump_rate = 2.0;
        t.jump_law = ExponentialJumps{0.5};
        std::size_t unique = 0, tau_zero = 0;
        for (std::uint64_t rep = 0; rep < 10000; ++rep) {
            const PathSample p = sample_levy_path(t, grid, SeedSpec{0xA703, rep});
            if (uniqueness_indicator(sup_and_argmax(p, 1e-12), 1e-6)) ++unique;
            if (exit_time_from_zero(p, 1e-12) == 0.0) ++tau_zero;
        }
        report(7, unique == 0 && tau_zero == 0,
               "Levy case (3): sigma=c=0, P(unique at 1e-6)=0 and P(tau=0)=0",
               fmt("unique=%zu/10000, tau_zero=%zu/10000", unique, tau_zero));
    }
}

void criterion_8() {
    const auto grid = std::make_shared<const Grid>(Grid::uniform1d(1 << 12, 1.0));
    LevyTriplet t;
    t.drift = -0.6;  // centers the process: c = -lambda * mean
    t.sigma = 0.5;
    t.jump_rate = 2.0;
    t.jump_law = ExponentialJumps{0.3};
    const std::size_t n = 50000;
    const std::size_t q[3] = {1 << 10, 1 << 11, 3 << 10};
    McAccumulator acc(12);
    for (std::uint64_t rep = 0; rep < n; ++rep) {
        const PathSample p = sample_levy_path(t, grid, SeedSpec{0xA801, rep});
        const PathSample r = reverse_path(p);
        std::array<double, 12> obs{};
        for (std::size_t k = 0; k < 3; ++k) {
            obs[k] = p.values[q[k]];
            obs[3 + k] = r.values[q[k]];
            obs[6 + k] = obs[k] * obs[k];
            obs[9 + k] = obs[3 + k] * obs[3 + k];
        }
        acc.add(obs);
    }
    bool ok = true;
    std::string detail;
    for (std::size_t k = 0; k < 3; ++k) {
        const double zm = paired_mean_report(acc, "m", k, 3 + k).z;
        const double zv = variance_diff_report(acc, "v", k, 6 + k, 3 + k, 9 + k).z;
        ok = ok && std::abs(zm) <= 5.0 && std::abs(zv) <= 5.0;
        detail += fmt("s=%.2f: z_mean=%.2f z_var=%.2f  ", 0.25 * static_cast<double>(k + 1), zm, zv);
    }
    report(8, ok, "reversed process: mean/var match at s in {.25,.5,.75}, N=5e4", detail);
}

void criterion_9() {
    bool ok = true;
    std::string detail;
    std::mt19937_64 rng(0xA901);

    // BM anchored at 1: algebraic identity min(u,v) = (min - uv) + uv
    {
        const Grid grid = Grid::uniform1d(63, 1.0);
        const double resid = reconstruction_identity_check(KernelSpec::brownian_motion(), {{1.0}}, grid);
        ok = ok && resid <= 1e-12;
        detail += fmt("bm@1=%.1e ", resid);
    }
    // 1-d families with a random grid anchor
    {
        const Grid grid = Grid::uniform1d(63, 1.0);
        std::uniform_int_distribution<std::size_t> pick(8, 63);
        for (const auto& spec :
             {KernelSpec::brownian_motion(), KernelSpec::ornstein_uhlenbeck(1.0, std::sqrt(2.0)),
              KernelSpec::fractional_bm(0.3), KernelSpec::fractional_bm(0.7)}) {
            const double anchor = grid.axis(0)[pick(rng)];
            const double resid = reconstruction_identity_check(spec, {{anchor}}, grid);
            double max_r = 0.0;
            for (double u : grid.axis(0))
                max_r = std::max(max_r, std::abs(kernel_eval(spec, u, u)));
            ok = ok && resid <= 1e-10 * std::max(1.0, max_r);
            detail += fmt("%s=%.1e ", spec.name().c_str(), resid);
        }
    }
    // 2-d families: random diagonal-admissible axis anchors; additive uses corners
    {
        const Grid grid = Grid::product({7, 7}, {1.0, 1.0});
        std::uniform_int_distribution<std::size_t> pick(2, 7);
        for (bool linear : {false, true}) {
            const KernelSpec spec =
                linear ? KernelSpec::linear_cov({1.0, 1.0}) : KernelSpec::brownian_sheet({1.0, 1.0});
            const double a = grid.axis(0)[pick(rng)], b = grid.axis(1)[pick(rng)];
            const double resid = reconstruction_identity_check(spec, {{a, 0.0}, {0.0, b}}, grid);
            ok = ok && resid <= 1e-10 * 3.0;
            detail += fmt("%s=%.1e ", spec.name().c_str(), resid);
        }
        const Grid sgrid = Grid::simplex(2, 10);
        const double resid =
            reconstruction_identity_check(KernelSpec::additive_bm(2), {{1.0, 0.0}, {0.0, 1.0}}, sgrid);
        ok = ok && resid <= 1e-10;
        detail += fmt("additive=%.1e", resid);
    }
    report(9, ok, "bridge reconstruction residual <= 1e-10 rel (1e-12 for BM@1), 64-pt grids", detail);
}

void criterion_10() {
    const auto grid = std::make_shared<const Grid>(Grid::uniform1d(16, 1.0));
    const auto bm = KernelSpec::brownian_motion();
    const BridgeSampler bridge(bm, {{1.0}}, grid);
    const std::size_t n = 50000;
    McAccumulator acc(grid->num_points());
    PathSample path;
    for (std::uint64_t rep = 0; rep < n; ++rep) {
        path = bridge.sample_conditioned(SeedSpec{0xAA01, rep});
        acc.add(path.values);
    }
    const ResidualKernel rk(bm, {{1.0}}, 1);
    Eigen::MatrixXd target(17, 17);
    for (std::size_t a = 0; a < 17; ++a)
        for (std::size_t b = 0; b < 17; ++b)
            target(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                rk.eval(grid->axis(0)[a], grid->axis(0)[b]);

    const std::size_t i25 = grid->index_of({0.25}), i75 = grid->index_of({0.75});
    const double got = acc.covariance(i25, i75);
    const double se = std::sqrt((0.1875 * 0.1875 + 0.0625 * 0.0625) / static_cast<double>(n));
    const double zmax = testsupport::max_cov_z(acc, target);
    const bool ok = std::abs(got - 0.0625) <= 5.0 * se && zmax < 5.0;
    report(10, ok, "BM bridge law: Cov(0.25,0.75)=0.0625 and full matrix within 5 SE",
           fmt("Cov-hat=%.5f (target .0625, 5SE=%.1e), max matrix |z|=%.2f", got, 5.0 * se, zmax));
}

void criterion_11() {
    const auto grid = std::make_shared<const Grid>(Grid::uniform1d(1 << 12, 1.0));
    const auto bm = KernelSpec::brownian_motion();
    {
        McRunOptions opt{50000, 0xAB01, 0, 1e-12, 0.0};
        const GradientIdentityResult res = gaussian_gradient_identity(
            gauss_factory(bm, grid), grid, bm, {{1.0}}, PathFunctional::Supremum, 0.05, opt);
        const auto& rep = res.per_coordinate[0];
        const bool ok = std::abs(rep.z) < 4.0 && std::abs(rep.lhs - 0.5) <= 5.0 * rep.lhs_se &&
                        std::abs(rep.rhs - 0.5) <= 5.0 * rep.rhs_se;
        report(11, ok, "gradient identity, Y = S, anchor t=1: both sides near 1/2",
               fmt("lhs=%.4f rhs=%.4f paired z=%.2f", rep.lhs, rep.rhs, rep.z));
    }
    {
        McRunOptions opt{10000, 0xAB02, 0, 1e-12, 0.0};
        const GradientIdentityResult res = gaussian_gradient_identity(
            gauss_factory(bm, grid), grid, bm, {{1.0}}, PathFunctional::Terminal, 0.05, opt);
        const double lhs = res.per_coordinate[0].lhs;
        report(11, std::abs(lhs - 1.0) <= 1e-9,
               "gradient identity, Y = X(t^1): exact 1 under common random numbers",
               fmt("lhs=%.12f (|lhs-1| = %.1e <= 1e-9)", lhs, std::abs(lhs - 1.0)));
    }
}

void criterion_12() {
    const std::size_t n = 50000;
    bool all = true;
    std::string detail;

    {  // sheet d=2, T=(1,1), default 257x257 grid
        const auto grid = std::make_shared<const Grid>(Grid::product({256, 256}, {1.0, 1.0}));
        const auto spec = KernelSpec::brownian_sheet({1.0, 1.0});
        McRunOptions opt{n, 0xAC01, 0, 1e-12, 0.0};
        const IdentityRunResult run = covariance_identity_nd(
            gauss_factory(spec, grid), *grid, spec, {{1.0, 0.0}, {0.0, 1.0}}, opt);
        for (const auto& rep : run.reports) {
            all = all && std::abs(rep.z) < 4.0;
            detail += fmt("sheet z=%.2f ", rep.z);
        }
    }
    {  // linear covariances d=2 (vertex argmax; resolution-free)
        const auto grid = std::make_shared<const Grid>(Grid::product({16, 16}, {1.0, 1.0}));
        const auto spec = KernelSpec::linear_cov({1.0, 1.0});
        McRunOptions opt{n, 0xAC02, 0, 1e-12, 0.0};
        const IdentityRunResult run = covariance_identity_nd(
            gauss_factory(spec, grid), *grid, spec, {{1.0, 0.0}, {0.0, 1.0}}, opt);
        for (const auto& rep : run.reports) {
            all = all && std::abs(rep.z) < 4.0;
            detail += fmt("linear z=%.2f ", rep.z);
        }
    }
    {  // additive BM n = 1: E Z must sit at 1/2 by swap symmetry
        const auto grid = std::make_shared<const Grid>(Grid::simplex(1, 512));
        const auto spec = KernelSpec::additive_bm(1);
        McRunOptions opt{n, 0xAC03, 0, 1e-12, 0.0};
        const IdentityRunResult run =
            covariance_identity_nd(gauss_factory(spec, grid), *grid, spec, {{1.0}}, opt);
        const auto& rep = run.reports[0];
        const bool mean_ok = std::abs(rep.lhs - 0.5) <= 3.0 * rep.lhs_se;
        all = all && std::abs(rep.z) < 4.0 && mean_ok;
        detail += fmt("additive1 z=%.2f EZ=%.4f(se %.0e) ", rep.z, rep.lhs, rep.lhs_se);
    }
    {  // additive BM n = 2 at the default simplex resolution; the argmax is
       // the last-passage geodesic, unique at grid scale in >= 99% of runs
        const auto grid = std::make_shared<const Grid>(Grid::simplex(2, 512));
        const auto spec = KernelSpec::additive_bm(2);
        McRunOptions opt{n, 0xAC04, 0, 1e-12, 0.0};
        const IdentityRunResult run = covariance_identity_nd(
            gauss_factory(spec, grid), *grid, spec, {{1.0, 0.0}, {0.0, 1.0}}, opt);
        for (const auto& rep : run.reports) {
            all = all && std::abs(rep.z) < 4.0;
            detail += fmt("additive2 z=%.2f ", rep.z);
        }
        all = all && run.uniqueness_frequency >= 0.99;
        detail += fmt("geodesic-unique=%.4f ", run.uniqueness_frequency);
    }
    report(12, all, "field-identity battery: sheet, linear, additive n in {1,2}, N=5e4", detail);
}

void criterion_13() {
    const auto bm = KernelSpec::brownian_motion();
    const std::size_t n_reps = 20000;
    double mean[2], se[2];
    const std::size_t grids[2] = {1 << 14, 1 << 16};
    const std::uint64_t seeds[2] = {0xAD01, 0xAD02};
    for (int i = 0; i < 2; ++i) {
        const auto grid = std::make_shared<const Grid>(Grid::uniform1d(grids[i], 1.0));
        McRunOptions opt{n_reps, seeds[i], 0, 1e-12, 0.0};
        const IdentityRunResult run = covariance_identity_1d(
            gauss_factory(bm, grid), *grid, bm, 1.0, identity_form_for_family(bm, 1.0), opt);
        mean[i] = run.acc.mean(6);
        se[i] = run.acc.se_mean(6);
    }
    const double diff = std::abs(mean[1] - mean[0]);
    const double pooled = std::hypot(se[0], se[1]);
    report(13, diff <= 3.0 * pooled, "grid refinement: E Z at n=2^16 vs 2^14 within 3 pooled SE",
           fmt("EZ(2^14)=%.5f EZ(2^16)=%.5f |diff|=%.1e <= %.1e", mean[0], mean[1], diff,
               3.0 * pooled));
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    const Identity1dNumbers bm_nums = criterion_1_and_2();
    criterion_3(bm_nums);
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    criterion_12();
    criterion_13();
    std::printf("acceptance: %s (%d failure%s, %.0fs total)\n",
                g_failures == 0 ? "ALL CRITERIA PASS" : "FAILURES PRESENT", g_failures,
                g_failures == 1 ? "" : "s", elapsed_s(t0));
    return g_failures == 0 ? 0 : 1;
}
