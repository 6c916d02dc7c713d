#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "flowlab/bench.hpp"

namespace
{

// Flags given on the command line, kept as a JSON layer over the config file.
struct Flags
{
    std::string method, mesh, out, init, profile, config;
    int order = 0, levels = 0, record_every = 0;
    double nu = 0, sigma = 0, delta = 0, dt = 0, tend = 0, psi = 0;
    bool dirichlet_fallback = false;
    std::vector<std::pair<const char *, CLI::Option *>> options;

    void attach(CLI::App &app)
    {
        auto add = [&](const char *key, const std::string &flag, auto &target, const std::string &help) {
            options.emplace_back(key, app.add_option(flag, target, help));
        };
        add("method", "--method", method, "th|gdth|sv|bdm, or a comma-separated list");
        add("order", "--order,-k", order, "velocity degree k");
        add("nu", "--nu", nu, "viscosity");
        add("sigma", "--sigma", sigma, "SIP penalty (default 4k^2)");
        add("delta", "--delta", delta, "grad-div parameter (default 0.1 for gdth)");
        add("dt", "--dt", dt, "time step");
        add("tend", "--tend", tend, "final time");
        add("mesh", "--mesh", mesh, "mesh file or id: coarse, fine, coarse-periodic, square:N, periodic-square:N");
        add("profile", "--profile", profile, "paperlite|paper");
        add("out", "--out", out, "output directory");
        add("init", "--init", init, "stokes-projection|interpolation");
        add("levels", "--levels", levels, "refinement levels (converge, project)");
        add("psi", "--psi", psi, "amplitude of a gradient field added to the forcing");
        add("record_every", "--record-every", record_every, "record norms every N steps");
        options.emplace_back("dirichlet_fallback",
                             app.add_flag("--dirichlet-fallback", dirichlet_fallback,
                                          "lattice flow on a non-periodic mesh with exact boundary data"));
        app.add_option("--config", config, "JSON config or run manifest; flags override it")->check(CLI::ExistingFile);
    }

    flowlab::Json layer() const
    {
        flowlab::Json j = flowlab::Json::object();
        for (const auto &[key, opt] : options)
        {
            if (opt->count() == 0)
                continue;
            const std::string k = key;
            if (k == "method") j[k] = method;
            else if (k == "order") j[k] = order;
            else if (k == "nu") j[k] = nu;
            else if (k == "sigma") j[k] = sigma;
            else if (k == "delta") j[k] = delta;
            else if (k == "dt") j[k] = dt;
            else if (k == "tend") j[k] = tend;
            else if (k == "mesh") j[k] = mesh;
            else if (k == "profile") j[k] = profile;
            else if (k == "out") j[k] = out;
            else if (k == "init") j[k] = init;
            else if (k == "levels") j[k] = levels;
            else if (k == "psi") j[k] = psi;
            else if (k == "record_every") j[k] = record_every;
            else if (k == "dirichlet_fallback") j[k] = dirichlet_fallback;
        }
        return j;
    }
};

void report(const flowlab::MethodRun &r)
{
    std::cout << r.label << ": " << r.series.steps << " steps";
    if (r.series.blowup_time)
        std::cout << ", blow-up at t = " << *r.series.blowup_time;
    if (!r.series.records.empty() && r.series.records.back().norms.err_l2)
        std::cout << ", final L2 error " << r.final_error();
    if (!r.csv_path.empty())
        std::cout << " -> " << r.csv_path.string();
    std::cout << "\n";
    for (const auto &a : r.series.advisories)
        std::cout << "  advisory: " << a << "\n";
}

void report(const flowlab::RateRun &r)
{
    std::cout << r.label << ":";
    for (size_t j = 0; j < r.table.norms.size(); ++j)
        std::cout << " " << r.table.norms[j] << " rate " << r.table.last_rate(static_cast<int>(j))
                  << (r.table.preasymptotic[j] ? " (preasymptotic)" : "");
    if (r.idempotence)
        std::cout << ", idempotence " << *r.idempotence;
    if (!r.csv_path.empty())
        std::cout << " -> " << r.csv_path.string();
    std::cout << "\n";
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"flowlab: pressure-robust Navier-Stokes benchmarks"};
    app.require_subcommand(1);
    const std::vector<std::pair<std::string, std::string>> benches = {
        {"lattice", "standing-vortex lattice flow (Gronwall probe)"},
        {"potential", "transient potential flow (pressure robustness)"},
        {"converge", "transient convergence rates"},
        {"project", "Stokes projection convergence rates"}};
    std::vector<Flags> flags(benches.size());
    std::vector<CLI::App *> subs;
    for (size_t i = 0; i < benches.size(); ++i)
    {
        subs.push_back(app.add_subcommand(benches[i].first, benches[i].second));
        flags[i].attach(*subs.back());
    }
    CLI11_PARSE(app, argc, argv);

    try
    {
        for (size_t i = 0; i < benches.size(); ++i)
        {
            if (!subs[i]->parsed())
                continue;
            flowlab::Json file;
            if (!flags[i].config.empty())
            {
                std::ifstream in(flags[i].config);
                try
                {
                    file = flowlab::Json::parse(in);
                }
                catch (const nlohmann::json::exception &e)
                {
                    throw flowlab::ConfigError(std::string("cannot parse config: ") + e.what());
                }
            }
            flowlab::Json head = {{"benchmark", benches[i].first}};
            const flowlab::BenchConfig config = flowlab::resolve_config({file, flags[i].layer(), head});
            if (config.benchmark == "lattice")
                for (const auto &r : flowlab::bench_lattice(config))
                    report(r);
            else if (config.benchmark == "potential")
                for (const auto &r : flowlab::bench_potential(config))
                    report(r);
            else if (config.benchmark == "converge")
                for (const auto &r : flowlab::bench_converge(config))
                    report(r);
            else
                for (const auto &r : flowlab::bench_project(config))
                    report(r);
        }
    }
    catch (const flowlab::ConfigError &e)
    {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    catch (const flowlab::Error &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
