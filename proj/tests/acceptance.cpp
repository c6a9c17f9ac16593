// Acceptance gate. Run as `acceptance <n>` for n in 1..9; each criterion
// prints its measurements, one line per sub-check, then a single
// [PASS]/[FAIL] summary line, and exits 0/1. Tolerances are pinned next to
// each check. Criteria 5, 7 and 8 contain sub-checks that document known
// structural limits of the comparison methods; those print their measured
// values like every other check and fail honestly when the limit binds.

#include <array>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "vsrdoa/vsrdoa.hpp"

#include "oracle_helpers.hpp"

namespace {

using namespace vsrdoa;

struct Gate {
    bool all_ok = true;
    void check(bool ok, const std::string& line) {
        std::printf("  %-4s %s\n", ok ? "ok" : "FAIL", line.c_str());
        if (!ok) all_ok = false;
    }
    int finish(int n, const char* title) const {
        std::printf("[%s] criterion %d: %s\n", all_ok ? "PASS" : "FAIL", n, title);
        return all_ok ? 0 : 1;
    }
};

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

// ---------------------------------------------------------------- 1

// The reconstruction map must send the anisotropic vector-sensor noise
// covariance diag(1, 1/2, 1/2) to the exact identity, and the reconstructed
// manifold must equal G times the raw manifold entrywise.
int criterion_1() {
    Gate g;
    const ComplexMatrix& gm = reconstruction_matrix();
    ComplexMatrix d(3, 3);
    d(0, 0) = 1.0;
    d(1, 1) = 0.5;
    d(2, 2) = 0.5;
    const ComplexMatrix w = gm * d * gm.adjoint();
    double dev = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            dev = std::max(dev, std::abs(w(i, j) - (i == j ? cxd{1.0, 0.0} : cxd{})));
    g.check(dev <= 1e-15, fmt("G diag(1,1/2,1/2) G^H = I, max entry deviation %.3e (limit 1e-15)", dev));

    double mdev = 0.0;
    for (int a = -180; a < 180; ++a) {
        const auto raw = steering_raw(static_cast<double>(a));
        const auto rec = steering_reconstructed(static_cast<double>(a));
        for (std::size_t i = 0; i < 3; ++i) {
            cxd acc{};
            for (std::size_t j = 0; j < 3; ++j) acc += gm(i, j) * raw[j];
            mdev = std::max(mdev, std::abs(acc - rec[i]));
        }
    }
    g.check(mdev <= 1e-15,
            fmt("G a_raw(theta) = a_rec(theta) over 360 angles, max deviation %.3e (limit 1e-15)", mdev));
    return g.finish(1, "reconstruction whitens vector-sensor noise exactly");
}

// ---------------------------------------------------------------- 2

ComplexMatrix random_hermitian3(GaussianRng& rng) {
    ComplexMatrix m(3, 3);
    for (std::size_t i = 0; i < 3; ++i) {
        m(i, i) = rng.gaussian();
        for (std::size_t j = i + 1; j < 3; ++j) {
            m(i, j) = rng.complex_gaussian(1.0);
            m(j, i) = std::conj(m(i, j));
        }
    }
    return m;
}

// Nearest-point property of the Toeplitz projection, checked through its
// variational characterization: the residual M - T(P(M)) must be orthogonal
// to every direction inside the Hermitian Toeplitz subspace, and projecting
// a projected matrix must change nothing.
int criterion_2() {
    Gate g;
    std::vector<ComplexMatrix> basis;
    {
        HermitianToeplitz3 b;
        b.u0 = 1.0;
        basis.push_back(toeplitz_embed(b));
        b = {};
        b.u1 = 1.0;
        basis.push_back(toeplitz_embed(b));
        b = {};
        b.u1 = cxd{0.0, 1.0};
        basis.push_back(toeplitz_embed(b));
        b = {};
        b.u2 = 1.0;
        basis.push_back(toeplitz_embed(b));
        b = {};
        b.u2 = cxd{0.0, 1.0};
        basis.push_back(toeplitz_embed(b));
    }
    GaussianRng rng(20260218);
    double worst_rel = 0.0, worst_idem = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const ComplexMatrix m = random_hermitian3(rng);
        const ComplexMatrix p = toeplitz_embed(toeplitz_project(m));
        const ComplexMatrix resid = m - p;
        for (const auto& b : basis) {
            cxd ip{};
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t j = 0; j < 3; ++j) ip += std::conj(b(i, j)) * resid(i, j);
            worst_rel = std::max(worst_rel, std::abs(ip) / m.frobenius_norm());
        }
        worst_idem = std::max(worst_idem, (toeplitz_embed(toeplitz_project(p)) - p).frobenius_norm() /
                                              std::max(1.0, p.frobenius_norm()));
    }
    g.check(worst_rel <= 1e-12,
            fmt("residual orthogonal to Toeplitz subspace over 1000 draws, worst |<M-P,B>|/||M|| = %.3e "
                "(limit 1e-12)",
                worst_rel));
    g.check(worst_idem <= 1e-12, fmt("projection idempotent, worst relative drift %.3e (limit 1e-12)",
                                     worst_idem));
    return g.finish(2, "Toeplitz projection is the nearest structured matrix");
}

// ---------------------------------------------------------------- 3

AnmProblem random_anm(std::uint64_t seed, std::size_t l, double lambda) {
    GaussianRng rng(seed);
    AnmProblem p;
    p.y_sv = ComplexMatrix(3, l);
    const double mag = 0.3 + 3.0 * rng.uniform01();
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t j = 0; j < l; ++j) p.y_sv(r, j) = rng.complex_gaussian(mag * mag);
    p.lambda = lambda;
    return p;
}

// Both solvers must land on the same optimal objective as slow reference
// methods of a different family: projected gradient with Dykstra projection
// for the trace-penalized fit, coarse grid plus pattern search for the
// Toeplitz covariance fit. Agreement is relative: |f - f_ref| <= tol (1 + |f_ref|).
int criterion_3() {
    Gate g;
    double worst_anm = 0.0;
    int anm_unconverged = 0;
    for (int i = 0; i < 50; ++i) {
        const std::size_t l = 1 + static_cast<std::size_t>(i % 3);
        const double lambda = 0.05 * std::pow(40.0, i / 49.0);
        const AnmProblem p = random_anm(9000 + static_cast<std::uint64_t>(i), l, lambda);
        const AnmSolution s = solve_anm(p);
        if (!s.converged) ++anm_unconverged;
        const double ref = oracles::anm_pgd_oracle(p);
        worst_anm = std::max(worst_anm, std::fabs(s.objective - ref) / (1.0 + std::fabs(ref)));
    }
    g.check(anm_unconverged == 0, fmt("trace-penalized solver converged on 50/50 random instances "
                                      "(%d unconverged)",
                                      anm_unconverged));
    g.check(worst_anm <= 1e-4,
            fmt("objective vs projected-gradient reference, worst relative gap %.3e (limit 1e-4)",
                worst_anm));

    double worst_sce = 0.0;
    int sce_unconverged = 0;
    for (int i = 0; i < 50; ++i) {
        Scenario sc;
        sc.source_angles_deg = (i % 2 == 0) ? std::vector<double>{-30.0, 20.0}
                                            : std::vector<double>{-75.0 + 3.0 * i};
        sc.source_powers.assign(sc.source_angles_deg.size(), 1.0);
        if (sc.source_powers.size() == 2) sc.source_powers[1] = 0.7;
        sc.snapshots = 60;
        sc.snr_db = 0.0;
        sc.seed = 500 + static_cast<std::uint64_t>(i);
        SceProblem p;
        p.sigma = sample_covariance(reconstruct(generate(sc)));
        p.tau = 1e-4 * std::pow(2000.0, i / 49.0);
        const SceSolution s = solve_sce(p);
        if (!s.converged) ++sce_unconverged;
        const double ref = oracles::sce_grid_oracle(p);
        worst_sce = std::max(worst_sce, std::fabs(s.objective - ref) / (1.0 + std::fabs(ref)));
    }
    g.check(sce_unconverged == 0, fmt("covariance-fit solver converged on 50/50 sampled instances "
                                      "(%d unconverged)",
                                      sce_unconverged));
    g.check(worst_sce <= 1e-6,
            fmt("objective vs grid-search reference, worst relative gap %.3e (limit 1e-6)", worst_sce));
    return g.finish(3, "SDP solver objectives match independent references");
}

// ---------------------------------------------------------------- 4

// K=2 snapshots whose sample covariance equals the population covariance
// exactly: orthogonal constant-modulus source rows, no noise.
SnapshotMatrix orthogonal_dual_source(double a0, double a1, double p0, double p1) {
    const auto phi0 = steering_raw(a0);
    const auto phi1 = steering_raw(a1);
    SnapshotMatrix x(3, 4);
    for (std::size_t t = 0; t < 4; ++t) {
        const double s0 = std::sqrt(p0);
        const double s1 = (t % 2 == 0 ? 1.0 : -1.0) * std::sqrt(p1);
        for (std::size_t i = 0; i < 3; ++i) x(i, t) = s0 * phi0[i] + s1 * phi1[i];
    }
    return x;
}

int criterion_4() {
    Gate g;
    const std::vector<double> grid = default_grid(1.0);
    for (const char* method : {"vsr-anm-svd", "vsr-sce"}) {
        for (double a : {-30.0, 20.0, 47.0}) {
            SnapshotMatrix x(3, 4);
            const auto phi = steering_raw(a);
            for (std::size_t t = 0; t < 4; ++t)
                for (std::size_t i = 0; i < 3; ++i) x(i, t) = phi[i];
            const DoaEstimate est = run_method(method, x, 1, grid, {});
            const bool ok = est.angles_deg.size() == 1 && est.angles_deg[0] == a && !est.degenerate;
            g.check(ok, fmt("%s noise-free K=1 at %+.0f deg: got %s", method, a,
                            est.angles_deg.empty() ? "none" : fmt("%+.1f", est.angles_deg[0]).c_str()));
        }
        for (const auto& pair : std::vector<std::array<double, 2>>{{-30.0, 20.0}, {-60.0, 45.0}}) {
            const SnapshotMatrix x = orthogonal_dual_source(pair[0], pair[1], 1.0, 1.0);
            const DoaEstimate est = run_method(method, x, 2, grid, {});
            const bool ok = est.angles_deg.size() == 2 && est.angles_deg[0] == pair[0] &&
                            est.angles_deg[1] == pair[1] && !est.degenerate;
            std::string got = "none";
            if (est.angles_deg.size() == 2)
                got = fmt("%+.1f, %+.1f", est.angles_deg[0], est.angles_deg[1]);
            g.check(ok, fmt("%s noise-free K=2 at {%+.0f, %+.0f} deg: got {%s}", method, pair[0],
                            pair[1], got.c_str()));
        }
    }
    return g.finish(4, "gridless estimators are exact on noise-free data");
}

// ---------------------------------------------------------------- 5

struct SectorView {
    double argmax = 0.0;
    double width = 0.0;
};

// Slice a full-circle spectrum to [lo, hi]; argmax plus half-power width
// measured inside the slice.
SectorView sector_view(const SpatialSpectrum& s, double lo, double hi) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < s.grid_deg.size(); ++i)
        if (s.grid_deg[i] >= lo && s.grid_deg[i] <= hi) idx.push_back(i);
    std::size_t b = idx.front();
    for (std::size_t i : idx)
        if (s.power[i] > s.power[b]) b = i;
    const double half = 0.5 * s.power[b];
    std::size_t l = b, r = b;
    while (l > idx.front() && s.power[l - 1] >= half) --l;
    while (r < idx.back() && s.power[r + 1] >= half) ++r;
    return {s.grid_deg[b], s.grid_deg[r] - s.grid_deg[l]};
}

// Single source at -30 deg, 1000 snapshots, one seeded dataset per SNR.
// Every method's sector peak must sit within 1 deg of the source, and the
// Toeplitz covariance-fit estimator must have the narrowest half-power
// width. The plain uniform-weight covariance fit carries a structural peak
// offset of several degrees on this manifold; its check fails with the
// measured offset printed.
int criterion_5() {
    Gate g;
    const std::vector<double> grid = default_grid(1.0);
    const std::vector<std::string> methods = method_ids();
    for (double snr : {10.0, 0.0}) {
        Scenario sc;
        sc.source_angles_deg = {-30.0};
        sc.source_powers = {1.0};
        sc.snapshots = 1000;
        sc.snr_db = snr;
        sc.seed = 2;
        const SnapshotMatrix x = generate(sc);
        std::vector<SectorView> views;
        for (const auto& m : methods) {
            const DoaEstimate est = run_method(m, x, 1, grid, {});
            views.push_back(sector_view(est.spectrum, -90.0, 90.0));
            g.check(std::fabs(views.back().argmax + 30.0) <= 1.0,
                    fmt("SNR %+.0f dB, %s sector peak at %+.0f deg (source -30, limit +-1)", snr,
                        m.c_str(), views.back().argmax));
        }
        double sce_width = 0.0;
        for (std::size_t m = 0; m < methods.size(); ++m)
            if (methods[m] == "vsr-sce") sce_width = views[m].width;
        bool narrowest = true;
        std::string table;
        for (std::size_t m = 0; m < methods.size(); ++m) {
            if (methods[m] != "vsr-sce" && views[m].width < sce_width) narrowest = false;
            table += fmt(" %s %.0f", methods[m].c_str(), views[m].width);
        }
        g.check(narrowest, fmt("SNR %+.0f dB, vsr-sce half-power width is the narrowest (deg:%s)", snr,
                               table.c_str()));
    }
    return g.finish(5, "spectrum shape: peak placement and main-lobe width");
}

// ---------------------------------------------------------------- 6

// 100-trial Monte Carlo, single source, five SNR points. Every method must
// be accurate (< 2 deg RMSE) once SNR reaches 0 dB, except the plain
// uniform-weight covariance fit whose structural offset keeps its RMSE near
// its peak bias; its curve still has to fall with SNR. One adjacent
// inversion per curve is tolerated as Monte Carlo wiggle.
int criterion_6() {
    Gate g;
    SweepConfig cfg;
    cfg.scenario.source_angles_deg = {-30.0};
    cfg.scenario.source_powers = {1.0};
    cfg.scenario.snapshots = 1000;
    cfg.scenario.seed = 11;
    cfg.snr_grid_db = {-10.0, -5.0, 0.0, 5.0, 10.0};
    cfg.trials = 100;
    cfg.methods = method_ids();
    cfg.jobs = 1;
    const SweepReport rep = run_sweep(cfg);
    const std::size_t ns = cfg.snr_grid_db.size();
    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
        const std::string& id = cfg.methods[m];
        std::string row = id + " rmse:";
        std::vector<double> rmse(ns);
        for (std::size_t i = 0; i < ns; ++i) {
            rmse[i] = rep.cells[m * ns + i].rmse_deg;
            row += fmt(" %.3f", rmse[i]);
        }
        std::printf("  .    %s\n", row.c_str());
        if (id != "spice") {
            const double worst_high = std::max({rmse[2], rmse[3], rmse[4]});
            g.check(worst_high < 2.0,
                    fmt("%s RMSE < 2 deg at SNR >= 0 (worst %.3f)", id.c_str(), worst_high));
        } else {
            g.check(rmse[4] < 10.0, fmt("%s RMSE bounded by its structural offset (%.3f at 10 dB)",
                                        id.c_str(), rmse[4]));
        }
        int inversions = 0;
        for (std::size_t i = 0; i + 1 < ns; ++i)
            if (rmse[i + 1] > rmse[i]) ++inversions;
        g.check(inversions <= 1,
                fmt("%s RMSE falls with SNR (%d adjacent inversions, limit 1)", id.c_str(), inversions));
    }
    return g.finish(6, "single-source RMSE falls with SNR for every method");
}

// ---------------------------------------------------------------- 7

// Local maxima above frac * sector peak inside [lo, hi].
int peaks_above(const SpatialSpectrum& s, double lo, double hi, double frac) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < s.grid_deg.size(); ++i)
        if (s.grid_deg[i] >= lo && s.grid_deg[i] <= hi) idx.push_back(i);
    double peak = 0.0;
    for (std::size_t i : idx) peak = std::max(peak, s.power[i]);
    int n = 0;
    for (std::size_t k = 1; k + 1 < idx.size(); ++k) {
        const std::size_t i = idx[k];
        if (s.power[i] > s.power[i - 1] && s.power[i] > s.power[i + 1] && s.power[i] >= frac * peak)
            ++n;
    }
    return n;
}

// Two equal-power sources at -30 and +20 deg over 20 seeded datasets. At 10
// dB the low-resolution methods must merge them into one lobe while the
// high-resolution methods place both peaks; raw-manifold subspace search is
// held to the same 1 deg bar as the gridless estimators and fails it, since
// the anisotropic noise tilts its noise subspace by about 1.6 deg even in
// population. At 0 dB the gridless estimators must still separate the pair
// in a majority of datasets and beat the raw subspace search on error.
int criterion_7() {
    Gate g;
    const std::vector<double> grid = default_grid(1.0);
    const double frac = std::pow(10.0, -20.0 / 10.0);
    const std::vector<std::string> low = {"cbf", "mvdr", "iaa", "spice", "spice+"};
    std::array<int, 5> single{};
    int music_ok = 0, anm_ok = 0, sce_ok = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Scenario sc;
        sc.source_angles_deg = {-30.0, 20.0};
        sc.source_powers = {1.0, 1.0};
        sc.snapshots = 1000;
        sc.snr_db = 10.0;
        sc.seed = seed;
        const SnapshotMatrix x = generate(sc);
        for (std::size_t m = 0; m < low.size(); ++m) {
            const DoaEstimate est = run_method(low[m], x, 2, grid, {});
            if (peaks_above(est.spectrum, -90.0, 90.0, frac) == 1) ++single[m];
        }
        for (const char* m : {"music", "vsr-anm-svd", "vsr-sce"}) {
            const DoaEstimate est = run_method(m, x, 2, grid, {});
            bool ok = false;
            if (est.angles_deg.size() == 2)
                ok = std::max(std::fabs(est.angles_deg[0] + 30.0),
                              std::fabs(est.angles_deg[1] - 20.0)) <= 1.0;
            if (std::strcmp(m, "music") == 0) music_ok += ok;
            else if (std::strcmp(m, "vsr-anm-svd") == 0) anm_ok += ok;
            else sce_ok += ok;
        }
    }
    for (std::size_t m = 0; m < low.size(); ++m)
        g.check(single[m] > 10, fmt("10 dB: %s shows one merged lobe above -20 dB in %d/20 datasets "
                                    "(majority required)",
                                    low[m].c_str(), single[m]));
    g.check(music_ok > 10,
            fmt("10 dB: music places both peaks within 1 deg in %d/20 datasets (majority required)",
                music_ok));
    g.check(anm_ok > 10,
            fmt("10 dB: vsr-anm-svd places both peaks within 1 deg in %d/20 datasets (majority "
                "required)",
                anm_ok));
    g.check(sce_ok > 10,
            fmt("10 dB: vsr-sce places both peaks within 1 deg in %d/20 datasets (majority required)",
                sce_ok));

    int anm_res = 0, sce_res = 0;
    double music_err = 0.0, anm_err = 0.0, sce_err = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Scenario sc;
        sc.source_angles_deg = {-30.0, 20.0};
        sc.source_powers = {1.0, 1.0};
        sc.snapshots = 1000;
        sc.snr_db = 0.0;
        sc.seed = seed;
        const SnapshotMatrix x = generate(sc);
        for (const char* m : {"music", "vsr-anm-svd", "vsr-sce"}) {
            const DoaEstimate est = run_method(m, x, 2, grid, {});
            double worst = 90.0;
            if (est.angles_deg.size() == 2) {
                const auto errs = match_errors(est.angles_deg, {-30.0, 20.0});
                worst = std::max(std::fabs(errs[0]), std::fabs(errs[1]));
            }
            const bool res = est.angles_deg.size() == 2 && !est.degenerate && worst <= 5.0;
            if (std::strcmp(m, "music") == 0) music_err += worst;
            else if (std::strcmp(m, "vsr-anm-svd") == 0) { anm_res += res; anm_err += worst; }
            else { sce_res += res; sce_err += worst; }
        }
    }
    g.check(anm_res > 10,
            fmt("0 dB: vsr-anm-svd separates the pair within 5 deg in %d/20 datasets", anm_res));
    g.check(sce_res > 10,
            fmt("0 dB: vsr-sce separates the pair within 5 deg in %d/20 datasets", sce_res));
    g.check(music_err / 20.0 > anm_err / 20.0 && music_err / 20.0 > sce_err / 20.0,
            fmt("0 dB: mean worst error music %.2f deg exceeds vsr-anm-svd %.2f and vsr-sce %.2f",
                music_err / 20.0, anm_err / 20.0, sce_err / 20.0));
    return g.finish(7, "two-source separation across 20 seeded datasets");
}

// ---------------------------------------------------------------- 8

// Two equal-power sources swept over SNR, 100 trials per point. Wherever
// the raw subspace search resolves the pair at all (probability >= 0.5) the
// gridless estimators must order below it in RMSE, with the covariance fit
// at the bottom; resolution probabilities must carry the mirrored ordering.
// The final sub-check pins the strongest resolution claim (>= 0.95 above
// -4 dB) and reports the measured probabilities where it falls short.
int criterion_8() {
    Gate g;
    SweepConfig cfg;
    cfg.scenario.source_angles_deg = {-30.0, 20.0};
    cfg.scenario.source_powers = {1.0, 1.0};
    cfg.scenario.snapshots = 1000;
    cfg.scenario.seed = 7;
    cfg.snr_grid_db = {-10.0, -8.0, -6.0, -4.0, -2.0, 0.0, 2.0, 4.0, 6.0, 8.0, 10.0};
    cfg.trials = 100;
    cfg.methods = {"music", "vsr-anm-svd", "vsr-sce"};
    cfg.jobs = 1;
    const SweepReport rep = run_sweep(cfg);
    const std::size_t ns = cfg.snr_grid_db.size();
    const auto cell = [&](std::size_t m, std::size_t i) -> const SweepCell& {
        return rep.cells[m * ns + i];
    };
    std::printf("  .    snr | rmse music/anm/sce | resolution music/anm/sce\n");
    for (std::size_t i = 0; i < ns; ++i)
        std::printf("  .    %+3.0f | %6.2f %6.2f %6.2f | %.2f %.2f %.2f\n", cfg.snr_grid_db[i],
                    cell(0, i).rmse_deg, cell(1, i).rmse_deg, cell(2, i).rmse_deg,
                    cell(0, i).resolution_probability, cell(1, i).resolution_probability,
                    cell(2, i).resolution_probability);

    int rmse_viol = 0, considered = 0;
    for (std::size_t i = 0; i < ns; ++i) {
        if (cell(0, i).resolution_probability < 0.5) continue;
        ++considered;
        if (!(cell(2, i).rmse_deg <= cell(1, i).rmse_deg && cell(1, i).rmse_deg <= cell(0, i).rmse_deg))
            ++rmse_viol;
    }
    g.check(rmse_viol == 0, fmt("RMSE ordering sce <= anm <= music at all %d SNRs where music "
                                "resolves (%d violations)",
                                considered, rmse_viol));

    int res_viol = 0;
    for (std::size_t i = 0; i < ns; ++i)
        if (!(cell(2, i).resolution_probability >= cell(1, i).resolution_probability &&
              cell(1, i).resolution_probability >= cell(0, i).resolution_probability))
            ++res_viol;
    g.check(res_viol <= 1,
            fmt("resolution ordering sce >= anm >= music across 11 SNRs (%d violations, limit 1)",
                res_viol));

    bool strong = true;
    std::string shortfall;
    for (std::size_t i = 0; i < ns; ++i) {
        if (cfg.snr_grid_db[i] <= -4.0) continue;
        if (cell(2, i).resolution_probability < 0.95) {
            strong = false;
            shortfall += fmt(" %.2f@%+.0f", cell(2, i).resolution_probability, cfg.snr_grid_db[i]);
        }
    }
    g.check(strong, fmt("vsr-sce resolution >= 0.95 at every SNR above -4 dB%s",
                        strong ? "" : (" (short:" + shortfall + " )").c_str()));
    return g.finish(8, "two-source RMSE and resolution orderings across SNR");
}

// ---------------------------------------------------------------- 9

// The same sweep config must produce bit-identical statistics on repeated
// runs and under a different worker count; wall-clock fields are the only
// permitted difference.
int criterion_9() {
    Gate g;
    SweepConfig cfg;
    cfg.scenario.source_angles_deg = {-30.0, 20.0};
    cfg.scenario.source_powers = {1.0, 1.0};
    cfg.scenario.snapshots = 120;
    cfg.scenario.seed = 99;
    cfg.snr_grid_db = {0.0, 10.0};
    cfg.trials = 6;
    cfg.methods = {"music", "vsr-sce"};
    cfg.jobs = 1;
    const SweepReport a = run_sweep(cfg);
    const SweepReport b = run_sweep(cfg);
    cfg.jobs = 4;
    const SweepReport c = run_sweep(cfg);

    const auto same = [](const SweepReport& x, const SweepReport& y) {
        if (x.cells.size() != y.cells.size()) return false;
        for (std::size_t i = 0; i < x.cells.size(); ++i) {
            const SweepCell &u = x.cells[i], &v = y.cells[i];
            if (u.method != v.method || u.snr_db != v.snr_db) return false;
            if (std::memcmp(&u.rmse_deg, &v.rmse_deg, sizeof u.rmse_deg) != 0) return false;
            if (std::memcmp(&u.resolution_probability, &v.resolution_probability,
                            sizeof u.resolution_probability) != 0)
                return false;
            if (u.trials_total != v.trials_total || u.trials_converged != v.trials_converged ||
                u.trials_resolved != v.trials_resolved)
                return false;
        }
        return true;
    };
    g.check(same(a, b), "repeated single-threaded sweeps are bit-identical");
    g.check(same(a, c), "a 4-worker sweep matches the single-threaded result bit for bit");
    g.check(report_to_json(a, false).dump() == report_to_json(c, false).dump(),
            "serialized reports agree once runtime fields are dropped");
    return g.finish(9, "Monte Carlo sweeps are deterministic and thread-invariant");
}

} // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: acceptance <criterion 1..9>\n");
        return 2;
    }
    const int n = std::atoi(argv[1]);
    switch (n) {
        case 1: return criterion_1();
        case 2: return criterion_2();
        case 3: return criterion_3();
        case 4: return criterion_4();
        case 5: return criterion_5();
        case 6: return criterion_6();
        case 7: return criterion_7();
        case 8: return criterion_8();
        case 9: return criterion_9();
        default:
            std::fprintf(stderr, "usage: acceptance <criterion 1..9>\n");
            return 2;
    }
}
