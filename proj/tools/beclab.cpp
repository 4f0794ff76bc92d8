// bec-lab: configuration-driven front end for the scattering, GP, Euler and
// eikonal solvers plus the sweep diagnostics and the acceptance suite.
//
// Usage: bec-lab <subcommand> --config <path> [--out <dir>] [--jobs <k>]
// Exit codes: 0 ok, 2 invalid config, 3 solver failure, 4 acceptance failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "beclab/acceptance.hpp"
#include "beclab/beclab.hpp"
#include "beclab/config.hpp"

namespace fs = std::filesystem;
using namespace beclab;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";

struct RunContext {
    Config cfg;
    fs::path out;
    int jobs = 1;
    json derived = json::object();
    json timings = json::object();
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
};

void write_manifest(RunContext& ctx, const std::string& subcommand,
                    const std::string& status) {
    json m;
    m["version"] = kVersion;
    m["subcommand"] = subcommand;
    m["config_echo"] = ctx.cfg.source_text();
    m["derived_params"] = ctx.derived;
    ctx.timings["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.start).count();
    m["timings"] = ctx.timings;
    m["status"] = status;
    atomic_write(ctx.out / "manifest.json", m.dump(2) + "\n");
}

// Bounded worker pool for independent sweep points.
void parallel_for(int jobs, std::size_t count, const std::function<void(std::size_t)>& work) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) work(i);
        return;
    }
    std::vector<std::thread> pool;
    std::size_t next = 0;
    std::mutex mtx;
    for (int t = 0; t < std::min<int>(jobs, static_cast<int>(count)); ++t)
        pool.emplace_back([&]() {
            for (;;) {
                std::size_t i;
                {
                    std::lock_guard<std::mutex> lock(mtx);
                    if (next >= count) return;
                    i = next++;
                }
                work(i);
            }
        });
    for (auto& th : pool) th.join();
}

Grid grid_from_config(const Config& cfg) {
    Grid g;
    g.dim = static_cast<int>(cfg.number_or("grid.dim", 1));
    g.n = static_cast<int>(
        cfg.number_or("grid.n", g.dim == 1 ? 4096 : (g.dim == 2 ? 512 : 128)));
    g.box = cfg.number_or("grid.box", 2.0 * M_PI);
    if (g.dim < 1 || g.dim > 3) throw ConfigInvalid("grid.dim must be 1, 2, or 3");
    if (g.n < 4 || (g.n & (g.n - 1)) != 0) throw ConfigInvalid("grid.n must be a power of two");
    return g;
}

RegimeParams regime_from_config(const Config& cfg, const std::string& prefix = "regime") {
    return {cfg.number_or(prefix + ".N", 1000.0), cfg.number_or(prefix + ".eps", 0.5),
            cfg.number_or(prefix + ".beta", 1.0), cfg.number_or(prefix + ".kappa", 1.0),
            cfg.number_or(prefix + ".alpha", 0.0)};
}

void export_radial_csv(const fs::path& path, const std::vector<double>& r,
                       const std::vector<double>& m, const std::vector<double>& f,
                       const std::vector<double>& df) {
    CsvWriter csv({"r", "m", "f", "df"});
    for (std::size_t i = 0; i < r.size(); ++i) csv.row({r[i], m[i], f[i], df[i]});
    csv.save(path);
}

int cmd_scatter(RunContext& ctx) {
    const auto v = ctx.cfg.potential();
    const double mu = ctx.cfg.number_or("scatter.mu", 1.0);
    const double step = ctx.cfg.number_or("scatter.step", default_scattering_step(v, mu));
    const double rmax = ctx.cfg.number_or("scatter.rmax", 2.0 * v.R0);
    const auto sol = solve_dirichlet(v, mu, step, rmax);
    export_radial_csv(ctx.out / "scattering_solution.csv", sol.r_grid, sol.m_values,
                      sol.f_values, sol.df_values);
    ctx.derived["a0"] = sol.a0;
    ctx.derived["a0_by_integral"] = scattering_length_by_integral(sol, v);
    ctx.derived["b0"] = sol.b0;
    ctx.derived["c1"] = sol.c1;
    if (v.v_max > 0.0) {
        ctx.derived["capacity"] = capacity(v);
        ctx.derived["eta"] = capacity(v) - sol.a0;
    }
    return 0;
}

int cmd_neumann(RunContext& ctx) {
    const auto v = ctx.cfg.potential();
    const double mu = ctx.cfg.number_or("neumann.mu", 1.0);
    const double L = ctx.cfg.number_or("neumann.L", 10.0 * v.R0);
    const double step = ctx.cfg.number_or("neumann.step", default_scattering_step(v, mu));
    const double e_tol = ctx.cfg.number_or("neumann.e_tol", 1e-13);
    const auto gs = solve_neumann(v, mu, L, step, e_tol);
    export_radial_csv(ctx.out / "neumann_profile.csv", gs.r_grid, gs.m_values, gs.f_values,
                      gs.df_values);
    ctx.derived["E_gs"] = gs.E_gs;
    ctx.derived["moment_v_fL"] = potential_moment(gs, v, 1);
    ctx.derived["moment_v_fL2"] = potential_moment(gs, v, 2);
    return 0;
}

int cmd_rate(RunContext& ctx) {
    const double v0 = ctx.cfg.number_or("potential.v0", 1.0);
    const double R0 = ctx.cfg.number_or("potential.R0", 1.0);
    std::vector<double> n_list =
        ctx.cfg.has("rate.n_list") ? ctx.cfg.numbers("rate.n_list") : std::vector<double>{0.0};
    std::vector<double> mu_list;
    if (ctx.cfg.has("rate.mu_list")) {
        mu_list = ctx.cfg.numbers("rate.mu_list");
    } else {
        const double lo = ctx.cfg.number_or("rate.mu_min", 1e-6);
        const double hi = ctx.cfg.number_or("rate.mu_max", 1e-2);
        const int points = static_cast<int>(ctx.cfg.number_or("rate.points", 9));
        for (int i = 0; i < points; ++i)
            mu_list.push_back(hi * std::pow(lo / hi, static_cast<double>(i) / (points - 1)));
    }
    const auto family = [&](double n) {
        return n == 0.0 ? RadialPotential::constant(v0, R0)
                        : RadialPotential::vanishing(v0, R0, n);
    };
    CsvWriter csv({"n", "mu", "eta"});
    json fits = json::array();
    std::vector<EtaRateFit> results(n_list.size());
    parallel_for(ctx.jobs, n_list.size(),
                 [&](std::size_t i) { results[i] = eta_rate_fit(family, n_list[i], mu_list); });
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        const auto& fit = results[i];
        for (std::size_t j = 0; j < fit.mu_used.size(); ++j)
            csv.row({n_list[i], fit.mu_used[j], fit.eta_used[j]});
        fits.push_back({{"n", n_list[i]},
                        {"slope", fit.slope},
                        {"expected", 1.0 / (n_list[i] + 2.0)},
                        {"intercept", fit.intercept},
                        {"max_rel_residual", fit.max_rel_residual}});
    }
    csv.save(ctx.out / "eta_rates.csv");
    atomic_write(ctx.out / "eta_rates.gp",
                 "set logscale xy\nset xlabel 'mu'\nset ylabel 'eta'\n"
                 "plot 'eta_rates.csv' using 2:3 w p t 'eta(mu)'\n");
    ctx.derived["fits"] = fits;
    return 0;
}

EffectiveKernel kernel_from_config(const Config& cfg, const Grid& g, double eps) {
    const std::string mode = cfg.str_or("kernel.mode", "delta");
    if (mode == "none") return delta_kernel(0.0);
    if (mode == "delta") {
        if (cfg.has("kernel.g")) return delta_kernel(cfg.number("kernel.g"));
        const auto v = cfg.potential();
        RegimeParams params = regime_from_config(cfg);
        if (std::fabs(params.eps - eps) > 1e-12)
            throw ConfigInvalid("regime.eps must match gp.eps");
        const auto sol =
            solve_dirichlet(v, params.mu(), default_scattering_step(v, params.mu()));
        return delta_kernel(params, sol);
    }
    if (mode == "scaled") {
        const auto v = cfg.potential();
        RegimeParams params = regime_from_config(cfg);
        const double mu = params.mu();
        if (params.regime() == Regime::HD) {
            const auto sol = solve_dirichlet(v, mu, default_scattering_step(v, mu));
            return build_effective_kernel(params, v, sol, g);
        }
        const auto gs =
            solve_neumann(v, mu, params.L(), default_scattering_step(v, mu), 1e-13);
        return build_effective_kernel(params, v, gs, g);
    }
    throw ConfigInvalid("kernel.mode must be delta, scaled, or none");
}

WaveField initial_field(const Config& cfg, const Grid& g, double eps) {
    const std::string kind = cfg.str_or("initial.kind", "wkb");
    WaveField f;
    if (kind == "plane") {
        const int mode = static_cast<int>(cfg.number_or("initial.mode", 1));
        const double xi = 2.0 * M_PI * mode / g.box;
        f = WaveField::from_function(g, eps, [&](double x, double, double) {
            return cplx(std::cos(xi * x), std::sin(xi * x));
        });
    } else if (kind == "gaussian") {
        const double s = cfg.number_or("initial.width", 0.3);
        f = WaveField::from_function(g, eps, [&](double x, double y, double z) {
            double d2 = (x - 0.5 * g.box) * (x - 0.5 * g.box);
            if (g.dim > 1) d2 += (y - 0.5 * g.box) * (y - 0.5 * g.box);
            if (g.dim > 2) d2 += (z - 0.5 * g.box) * (z - 0.5 * g.box);
            return cplx(std::exp(-d2 / (2.0 * s * s)), 0.0);
        });
    } else if (kind == "wkb") {
        const double rho_amp = cfg.number_or("initial.rho_amp", 0.2);
        const double s_amp = cfg.number_or("initial.s_amp", 0.05);
        f = WaveField::from_function(g, eps, [&](double x, double, double) {
            const double rho = (1.0 + rho_amp * std::cos(x)) / (2.0 * M_PI);
            const double S = s_amp * std::sin(x);
            return std::sqrt(rho) * cplx(std::cos(S / eps), std::sin(S / eps));
        });
    } else if (kind == "random_phase") {
        const auto seed = static_cast<std::uint64_t>(cfg.number_or("initial.seed", 1.0));
        const int modes = static_cast<int>(cfg.number_or("initial.modes", 4));
        CounterRng rng{seed};
        std::vector<double> phases(modes), amps(modes);
        for (int k = 0; k < modes; ++k) {
            phases[k] = 2.0 * M_PI * rng.uniform(2 * k);
            amps[k] = 0.2 * rng.uniform(2 * k + 1) / (k + 1.0);
        }
        f = WaveField::from_function(g, eps, [&](double x, double, double) {
            double rho = 1.0;
            for (int k = 0; k < modes; ++k) rho += amps[k] * std::cos((k + 1) * x + phases[k]);
            return cplx(std::sqrt(std::max(rho, 0.1) / (2.0 * M_PI)), 0.0);
        });
    } else {
        throw ConfigInvalid("initial.kind must be plane, gaussian, wkb, or random_phase");
    }
    f.normalize();
    return f;
}

void export_observable(const fs::path& path, const Grid& g, const GpTrajectory& traj,
                       const std::function<double(const DensityObservables&, std::size_t)>& get,
                       const EffectiveKernel& kernel) {
    std::vector<std::string> header{"t", "x"};
    if (g.dim > 1) header.push_back("y");
    if (g.dim > 2) header.push_back("z");
    header.push_back("value");
    CsvWriter csv(header);
    for (std::size_t s = 0; s < traj.snapshots.size(); ++s) {
        const auto obs = observables(traj.snapshots[s], kernel);
        for_each_node(g, [&](std::size_t idx, const std::array<int, 3>& k) {
            std::vector<double> row{traj.times[s], g.coord(k[0])};
            if (g.dim > 1) row.push_back(g.coord(k[1]));
            if (g.dim > 2) row.push_back(g.coord(k[2]));
            row.push_back(get(obs, idx));
            csv.row(row);
        });
    }
    csv.save(path);
}

int cmd_gp_run(RunContext& ctx) {
    const Grid g = grid_from_config(ctx.cfg);
    const double eps = ctx.cfg.number_or("gp.eps", 0.5);
    const double T = ctx.cfg.number_or("gp.T", 1.0);
    auto field = initial_field(ctx.cfg, g, eps);
    const auto kernel = kernel_from_config(ctx.cfg, g, eps);
    double dt = ctx.cfg.number_or("gp.dt", 0.5 * gp_dt_budget(field, kernel));
    const auto steps = static_cast<int>(std::ceil(T / dt));
    dt = T / steps;
    const int spu = static_cast<int>(ctx.cfg.number_or("gp.snapshots_per_unit_time", 32));
    const auto traj = evolve(field, kernel, dt, T, spu);

    export_observable(
        ctx.out / "rho.csv", g, traj,
        [](const DensityObservables& o, std::size_t i) { return o.rho[i]; }, kernel);
    export_observable(
        ctx.out / "e_kin.csv", g, traj,
        [](const DensityObservables& o, std::size_t i) { return o.e_kin[i]; }, kernel);
    export_observable(
        ctx.out / "J1.csv", g, traj,
        [](const DensityObservables& o, std::size_t i) { return o.J[0][i]; }, kernel);

    double mass_drift = 0.0, energy_drift = 0.0;
    for (std::size_t s = 0; s < traj.mass.size(); ++s) {
        mass_drift = std::max(mass_drift, std::fabs(traj.mass[s] - traj.mass.front()));
        energy_drift = std::max(energy_drift,
                                std::fabs(traj.energy[s] - traj.energy.front()) /
                                    std::max(std::fabs(traj.energy.front()), 1e-300));
    }
    json sidecar;
    sidecar["params"] = {{"eps", eps}, {"T", T}, {"dt", dt}};
    sidecar["grid"] = {{"dim", g.dim}, {"n", g.n}, {"box", g.box}};
    sidecar["kernel_mode"] = kernel.mode == EffectiveKernel::Mode::Delta ? "delta" : "scaled";
    sidecar["conservation_report"] = {{"mass_drift", mass_drift},
                                      {"energy_drift", energy_drift}};
    atomic_write(ctx.out / "run.json", sidecar.dump(2) + "\n");
    ctx.derived["mass_drift"] = mass_drift;
    ctx.derived["energy_drift"] = energy_drift;
    ctx.derived["kernel_mass"] = kernel.mass();
    return 0;
}

int cmd_euler_run(RunContext& ctx) {
    const Grid g = grid_from_config(ctx.cfg);
    FluidState s;
    s.grid = g;
    s.c = ctx.cfg.number_or("euler.c", 1.0);
    const double rho_amp = ctx.cfg.number_or("euler.rho_amp", 0.2);
    const double u_amp = ctx.cfg.number_or("euler.u_amp", 0.05);
    s.rho.resize(g.size());
    for (int d = 0; d < g.dim; ++d) s.u[d].assign(g.size(), 0.0);
    for_each_node(g, [&](std::size_t idx, const std::array<int, 3>& k) {
        s.rho[idx] = (1.0 + rho_amp * std::cos(g.coord(k[0]))) / g.volume();
        s.u[0][idx] = u_amp * std::sin(g.coord(k[0]));
    });
    const double T = ctx.cfg.number_or("euler.T", 1.0);
    const double dt = ctx.cfg.number_or("euler.dt", 0.25 / euler_cfl_number(s, 1.0));
    const int spu = static_cast<int>(ctx.cfg.number_or("euler.snapshots_per_unit_time", 32));
    const auto traj = evolve_euler(s, dt, T, spu);

    std::vector<std::string> header{"t", "x"};
    if (g.dim > 1) header.push_back("y");
    if (g.dim > 2) header.push_back("z");
    header.push_back("rho");
    for (int d = 0; d < g.dim; ++d) header.push_back("u" + std::to_string(d + 1));
    CsvWriter csv(header);
    for (std::size_t snap = 0; snap < traj.snapshots.size(); ++snap) {
        const auto& st = traj.snapshots[snap];
        for_each_node(g, [&](std::size_t idx, const std::array<int, 3>& k) {
            std::vector<double> row{traj.times[snap], g.coord(k[0])};
            if (g.dim > 1) row.push_back(g.coord(k[1]));
            if (g.dim > 2) row.push_back(g.coord(k[2]));
            row.push_back(st.rho[idx]);
            for (int d = 0; d < g.dim; ++d) row.push_back(st.u[d][idx]);
            csv.row(row);
        });
    }
    csv.save(ctx.out / "trajectory.csv");

    json sidecar;
    sidecar["cfl_history"] = traj.cfl_history;
    sidecar["status"] = traj.status == EulerStatus::Completed ? "completed" : "blow_up_proxy";
    sidecar["time_reached"] = traj.time_reached;
    atomic_write(ctx.out / "run.json", sidecar.dump(2) + "\n");
    ctx.derived["status"] = sidecar["status"];
    return 0;
}

int cmd_eikonal_run(RunContext& ctx) {
    const Grid g = grid_from_config(ctx.cfg);
    const double A = ctx.cfg.number_or("eikonal.phase_amp", 0.5);
    const double c0 = ctx.cfg.number_or("eikonal.c0", 0.0);
    const double T = ctx.cfg.number_or("eikonal.T", 0.5);
    std::vector<double> phi(g.size());
    for (int i = 0; i < g.n; ++i) phi[i] = A * std::sin(g.coord(i));
    const auto phase = grid_phase(g, phi);
    const double ct = caustic_time(phase, g);
    if (T >= ct) throw PastCaustic("requested horizon beyond the caustic time");

    std::vector<cplx> a(g.size());
    const double rho_amp = ctx.cfg.number_or("eikonal.rho_amp", 0.2);
    for (int i = 0; i < g.n; ++i) a[i] = 1.0 + rho_amp * std::cos(g.coord(i));
    double norm = 0.0;
    for (const auto& z : a) norm += std::norm(z);
    norm = std::sqrt(norm * g.cell_volume());
    for (auto& z : a) z /= norm;
    const auto a_in = amplitude_from_grid(g, a);

    CsvWriter csv({"t", "x", "Re_a", "Im_a", "phi"});
    const int snaps = static_cast<int>(ctx.cfg.number_or("eikonal.snapshots", 8));
    for (int snap = 0; snap <= snaps; ++snap) {
        const double t = T * snap / snaps;
        if (snap == 0) {
            for (int i = 0; i < g.n; ++i)
                csv.row({t, g.coord(i), a[i].real(), a[i].imag(), phi[i]});
            continue;
        }
        const auto amp = solve_amplitude(a_in, phase, c0, t, g, ct);
        const auto ph = solve_phase(phase, g, t, ct);
        for (int i = 0; i < g.n; ++i)
            csv.row({t, g.coord(i), amp[i].real(), amp[i].imag(), ph.phi_eik[i]});
    }
    csv.save(ctx.out / "eikonal.csv");
    json sidecar;
    sidecar["caustic_time"] = std::isinf(ct) ? -1.0 : ct;
    atomic_write(ctx.out / "run.json", sidecar.dump(2) + "\n");
    ctx.derived["caustic_time"] = sidecar["caustic_time"];
    return 0;
}

int cmd_modenergy(RunContext& ctx) {
    const auto v = ctx.cfg.potential();
    const auto sol = solve_dirichlet(v, 1.0, default_scattering_step(v, 1.0));
    const double cc = 4.0 * M_PI * sol.a0;
    Grid g = grid_from_config(ctx.cfg);
    const double t_snap = ctx.cfg.number_or("modenergy.t_snap", 0.05);
    const int n_snaps = static_cast<int>(ctx.cfg.number_or("modenergy.n_snaps", 10));
    std::vector<double> epss = ctx.cfg.has("modenergy.eps_list")
                                   ? ctx.cfg.numbers("modenergy.eps_list")
                                   : std::vector<double>{0.2, 0.1, 0.05, 0.025};

    CsvWriter csv({"eps", "t", "M", "M_kin", "density_L2_err", "momentum_L1_err"});
    json reports = json::array();
    for (double eps : epss) {
        RegimeParams params(1e15, eps, 1.0, 1.0, 0.0);
        const auto kernel = delta_kernel(params, sol);
        auto field = acceptance::detail::wkb_field(g, eps, 0.2, 0.05, 0.3);
        FluidState fluid;
        fluid.grid = g;
        fluid.c = cc;
        fluid.rho.resize(g.size());
        fluid.u[0].resize(g.size());
        for (int i = 0; i < g.n; ++i) {
            fluid.rho[i] = (1.0 + 0.2 * std::cos(g.coord(i))) / (2.0 * M_PI);
            fluid.u[0][i] = 0.05 * std::cos(g.coord(i));
        }
        const auto gp = acceptance::detail::gp_snapshots(field, kernel, t_snap, n_snaps);
        const auto eu = acceptance::detail::euler_snapshots(fluid, t_snap, n_snaps);
        const auto rep = gronwall_check(gp, eu, kernel, cc, params.lambda() / params.L(), 0.0);
        for (std::size_t s = 0; s < rep.t_grid.size(); ++s)
            csv.row({eps, rep.t_grid[s], rep.M_values[s], rep.M_kin[s],
                     rep.density_L2_err[s], rep.momentum_L1_err[s]});
        reports.push_back({{"eps", eps},
                           {"C_fit", rep.C_fit},
                           {"kappa_fit", rep.kappa_fit},
                           {"M0", rep.M_values.front()}});
    }
    csv.save(ctx.out / "modulated_energy.csv");
    atomic_write(ctx.out / "modenergy_report.json", reports.dump(2) + "\n");
    ctx.derived["reports"] = reports;
    return 0;
}

int cmd_wkb_sweep(RunContext& ctx) {
    const auto v = ctx.cfg.potential();
    Grid g = grid_from_config(ctx.cfg);
    WkbSetup setup;
    setup.grid = g;
    std::vector<cplx> a(g.size());
    for (int i = 0; i < g.n; ++i)
        a[i] = 1.0 + ctx.cfg.number_or("wkb.rho_amp", 0.1) * std::cos(g.coord(i));
    double norm = 0.0;
    for (const auto& z : a) norm += std::norm(z);
    norm = std::sqrt(norm * g.cell_volume());
    for (auto& z : a) z /= norm;
    setup.a_in = amplitude_from_grid(g, a);
    std::vector<double> phi(g.size());
    for (int i = 0; i < g.n; ++i)
        phi[i] = ctx.cfg.number_or("wkb.phase_amp", 0.5) * std::sin(g.coord(i));
    setup.phase = grid_phase(g, phi);
    setup.T = ctx.cfg.number_or("wkb.T", 0.5);
    setup.s = ctx.cfg.number_or("wkb.s", 2.0);

    const std::string regime = ctx.cfg.str_or("wkb.regime", "sgp");
    std::vector<RegimeParams> ps;
    std::vector<double> sweep;
    double expected = 1.0;
    if (regime == "sgp" || regime == "bgp") {
        const double kappa = regime == "sgp" ? 0.0 : 0.5;
        setup.c0 = regime == "sgp" ? 0.0 : 4.0 * M_PI * capacity(v);
        expected = regime == "sgp" ? 1.0 : 0.5;
        sweep = ctx.cfg.has("wkb.eps_list") ? ctx.cfg.numbers("wkb.eps_list")
                                            : std::vector<double>{0.2, 0.1, 0.05, 0.025};
        for (double eps : sweep) ps.emplace_back(1e12, eps, 1.0, kappa, 0.0);
    } else if (regime == "hd") {
        const double beta = ctx.cfg.number_or("wkb.beta", 1.5);
        const double eps = ctx.cfg.number_or("wkb.eps", 0.05);
        setup.c0 = 0.0;
        expected = 1.0 - beta;
        sweep = ctx.cfg.has("wkb.N_list") ? ctx.cfg.numbers("wkb.N_list")
                                          : std::vector<double>{4.0, 16.0, 64.0, 256.0};
        for (double N : sweep) ps.emplace_back(N, eps, beta, 0.0, 0.0);
    } else {
        throw ConfigInvalid("wkb.regime must be sgp, bgp, or hd");
    }

    std::vector<double> errors(ps.size());
    parallel_for(ctx.jobs, ps.size(),
                 [&](std::size_t i) { errors[i] = wkb_amplitude_error(ps[i], v, setup); });
    const auto rep = fit_slope(regime == "hd" ? "N" : "eps", sweep, errors, expected);
    CsvWriter csv({"sweep_value", "error", "fit_residual"});
    for (std::size_t i = 0; i < sweep.size(); ++i) {
        const double pred = std::exp(rep.intercept + rep.fitted_slope * std::log(sweep[i]));
        csv.row({sweep[i], errors[i], errors[i] - pred});
    }
    csv.save(ctx.out / "wkb_sweep.csv");
    atomic_write(ctx.out / "wkb_sweep.gp",
                 "set logscale xy\nset xlabel 'sweep value'\nset ylabel 'H^s error'\n"
                 "plot 'wkb_sweep.csv' using 1:2 w lp t 'error'\n");
    ctx.derived["fitted_slope"] = rep.fitted_slope;
    ctx.derived["expected_slope"] = rep.expected_slope;
    ctx.derived["residual"] = rep.residual;
    return 0;
}

int cmd_pair_check(RunContext& ctx) {
    const auto v = ctx.cfg.potential();
    Grid g{3, static_cast<int>(ctx.cfg.number_or("grid.n", 8)),
           ctx.cfg.number_or("grid.box", 2.0 * M_PI)};
    auto phi = WaveField::from_function(g, 0.2, [](double x, double y, double z) {
        return cplx(1.0 + 0.2 * std::cos(x) + 0.1 * std::cos(y) + 0.1 * std::cos(z), 0.0);
    });
    phi.normalize();
    std::vector<double> epss = ctx.cfg.has("pair.eps_list") ? ctx.cfg.numbers("pair.eps_list")
                                                            : std::vector<double>{0.4, 0.2, 0.1};
    const double L0 = ctx.cfg.number_or("pair.L0", 4.0);
    CsvWriter csv({"eps", "hs", "bound_hs", "grad", "bound_grad", "slice", "bound_slice",
                   "kinetic_residual"});
    json diag_json = json::array();
    for (double eps : epss) {
        RegimeParams params(L0 / std::pow(eps, 6.0), eps, 1.0, 1.0, 0.0);
        const double mu = params.mu();
        const double step = default_scattering_step(v, mu);
        const auto gs = solve_neumann(v, mu, params.L(), step, 1e-13);
        const auto sol = solve_dirichlet(v, mu, step);
        const auto prof = correlation_profile(gs, params.scale());
        phi.eps = eps;
        const double c0ma0 = v.v_max > 0.0 ? capacity(v) - sol.a0 : 0.0;
        const auto d = pair_kernel_diagnostics(prof, phi, params, c0ma0);
        const double kin = kinetic_correction_check(prof, phi, params, sol);
        csv.row({eps, d.hs_norm, d.bound_hs, d.grad_hs_norm, d.bound_grad, d.sup_slice_norm,
                 d.bound_slice, kin});
        diag_json.push_back({{"eps", eps},
                             {"hs_norm", d.hs_norm},
                             {"grad_hs_norm", d.grad_hs_norm},
                             {"sup_slice_norm", d.sup_slice_norm},
                             {"bound_hs", d.bound_hs},
                             {"bound_grad", d.bound_grad},
                             {"bound_slice", d.bound_slice},
                             {"kinetic_residual", kin}});
    }
    csv.save(ctx.out / "pair_diagnostics.csv");
    atomic_write(ctx.out / "pair_diagnostics.json", diag_json.dump(2) + "\n");
    ctx.derived["diagnostics"] = diag_json;
    return 0;
}

int cmd_acceptance(RunContext& ctx) {
    const auto results = acceptance::run_all(ctx.out);
    CsvWriter csv({"criterion", "passed"});
    bool all = true;
    json table = json::array();
    for (const auto& r : results) {
        std::printf("[criterion %2d] %-38s %s (%.2fs) %s\n", r.id, r.name.c_str(),
                    r.passed ? "PASS" : "FAIL", r.seconds, r.passed ? "" : r.detail.c_str());
        csv.row({static_cast<double>(r.id), r.passed ? 1.0 : 0.0});
        table.push_back({{"id", r.id},
                         {"name", r.name},
                         {"passed", r.passed},
                         {"detail", r.detail},
                         {"seconds", r.seconds}});
        all = all && r.passed;
    }
    csv.save(ctx.out / "acceptance_table.csv");
    ctx.derived["criteria"] = table;
    return all ? 0 : 4;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"bec-lab: scattering, effective-PDE, and limit-diagnostic runs"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    int jobs = 0;
    if (const char* env = std::getenv("BECLAB_JOBS")) jobs = std::atoi(env);
    if (jobs <= 0) jobs = 1;

    const std::vector<std::pair<std::string, std::function<int(RunContext&)>>> commands = {
        {"scatter", cmd_scatter},       {"neumann", cmd_neumann},
        {"rate", cmd_rate},             {"gp-run", cmd_gp_run},
        {"euler-run", cmd_euler_run},   {"eikonal-run", cmd_eikonal_run},
        {"modenergy", cmd_modenergy},   {"wkb-sweep", cmd_wkb_sweep},
        {"pair-check", cmd_pair_check}, {"acceptance", cmd_acceptance},
    };
    std::map<std::string, CLI::App*> subs;
    for (const auto& [name, fn] : commands) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "config file (TOML-subset or JSON)");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--jobs", jobs, "worker pool size for sweeps");
        subs[name] = sub;
    }

    CLI11_PARSE(app, argc, argv);

    for (const auto& [name, fn] : commands) {
        if (!subs[name]->parsed()) continue;
        RunContext ctx;
        try {
            ctx.cfg =
                config_path.empty() ? Config::parse_toml("") : Config::parse_file(config_path);
        } catch (const ConfigInvalid& e) {
            std::cerr << e.what() << "\n";
            return 2;
        }
        ctx.out = out_dir.empty() ? fs::path("out-" + name) : fs::path(out_dir);
        ctx.jobs = jobs;
        std::error_code ec;
        fs::create_directories(ctx.out, ec);
        try {
            const int rc = fn(ctx);
            write_manifest(ctx, name, rc == 0 ? "ok" : "acceptance_failure");
            return rc;
        } catch (const ConfigInvalid& e) {
            std::cerr << e.what() << "\n";
            write_manifest(ctx, name, std::string("config_invalid: ") + e.what());
            return 2;
        } catch (const SolverError& e) {
            std::cerr << e.what() << "\n";
            write_manifest(ctx, name, std::string("solver_failure: ") + e.what());
            return 3;
        }
    }
    return 2;
}
