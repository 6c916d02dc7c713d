#include "flowlab/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include <openssl/evp.h>

#include "flowlab/projection.hpp"

namespace flowlab
{

namespace
{

const std::vector<std::string> config_keys = {
    "benchmark", "profile", "method", "order", "nu",   "sigma",  "delta",  "dt", "tend",
    "mesh",      "out",     "init",   "levels", "psi", "dirichlet_fallback", "record_every"};

std::string number(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string optional_number(const std::optional<double> &v) { return v ? number(*v) : std::string(); }

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string mesh_text(const Mesh &mesh)
{
    std::ostringstream s;
    write_mesh(s, mesh);
    return s.str();
}

Json mesh_json(const std::string &id, const Mesh &mesh)
{
    const MeshStats st = mesh.stats();
    return Json{{"id", id},
                {"vertices", st.n_vertices},
                {"cells", st.n_cells},
                {"facets", st.n_facets},
                {"interior_facets", st.n_interior_facets},
                {"boundary_facets", st.n_boundary_facets},
                {"h_max", st.h_max},
                {"h_min", st.h_min},
                {"min_angle_deg", st.min_angle * 180.0 / std::numbers::pi},
                {"periodic", mesh.is_periodic()},
                {"alfeld", mesh.is_alfeld_split()}};
}

std::string label_of(const MethodConfig &m) { return to_string(m.method) + std::to_string(m.degree); }

// Inputs that determine a run: the config minus its output location, and the meshes.
std::string input_hash(const BenchConfig &config, const std::vector<const Mesh *> &meshes)
{
    Json c = to_json(config);
    c.erase("out");
    std::string content = c.dump() + "\n";
    for (const Mesh *m : meshes)
        content += mesh_text(*m);
    return git_blob_hash(content);
}

void write_file(const std::filesystem::path &path, const std::string &content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("cannot write '" + path.string() + "'");
    out << content;
}

std::filesystem::path output_dir(const BenchConfig &config)
{
    std::filesystem::path dir(config.out);
    std::filesystem::create_directories(dir);
    return dir;
}

// grad psi with psi = x^4 y - sin(pi x) cos(pi y); not in any pressure space used here.
Vec2 grad_psi(const Point &x)
{
    constexpr double pi = std::numbers::pi;
    return Vec2(4.0 * x[0] * x[0] * x[0] * x[1] - pi * std::cos(pi * x[0]) * std::cos(pi * x[1]),
                x[0] * x[0] * x[0] * x[0] + pi * std::sin(pi * x[0]) * std::sin(pi * x[1]));
}

FlowProblem shifted_problem(const ExactSolution &exact, double psi)
{
    FlowProblem p = problem_from_exact(exact);
    if (psi != 0.0)
    {
        const TimeVectorField f = exact.f;
        p.forcing = [f, psi](double t, const Point &x) -> Vec2 {
            const Vec2 base = f ? f(t, x) : Vec2(0.0, 0.0);
            return base + psi * grad_psi(x);
        };
    }
    return p;
}

TransientConfig transient_config(const BenchConfig &config, const MethodConfig &method)
{
    TransientConfig t;
    t.method = method;
    t.nu = config.nu;
    t.dt = config.dt;
    t.t_end = config.tend;
    t.initial = parse_initial(config.init);
    t.record_every = config.record_every;
    return t;
}

MethodRun run_method(const BenchConfig &config, const MethodConfig &method, const ExactSolution &exact)
{
    const auto start = Clock::now();
    const auto mesh = bench_mesh(config.mesh, 0, method);
    const FlowProblem problem = shifted_problem(exact, config.psi);

    MethodRun run;
    run.method = method;
    run.label = label_of(method);
    run.series = run_transient(mesh, transient_config(config, method), problem);

    Json m;
    m["config"] = to_json(config);
    m["method"] = run.label;
    m["mesh"] = mesh_json(config.mesh, *mesh);
    m["dofs"] = {{"velocity", run.series.n_velocity}, {"pressure", run.series.n_pressure}};
    m["steps"] = run.series.steps;
    m["wall_clock_seconds"] = seconds_since(start);
    m["input_hash"] = input_hash(config, {mesh.get()});
    m["blas"] = blas_backend();
    m["blowup_time"] = run.series.blowup_time ? Json(*run.series.blowup_time) : Json(nullptr);
    m["advisories"] = run.series.advisories;
    if (!run.series.records.empty() && run.series.records.back().norms.err_l2)
        m["final_error_l2"] = *run.series.records.back().norms.err_l2;
    run.manifest = std::move(m);

    if (!config.out.empty())
    {
        const auto dir = output_dir(config);
        const std::string stem = config.benchmark + "_" + run.label;
        run.csv_path = dir / (stem + ".csv");
        run.manifest_path = dir / (stem + ".manifest.json");
        run.manifest["csv"] = run.csv_path.filename().string();
        write_file(run.csv_path, timeseries_csv(run.series));
        write_file(run.manifest_path, run.manifest.dump(2) + "\n");
    }
    return run;
}

void finish_rate_run(const BenchConfig &config, RateRun &run, const std::string &extra_header,
                     const std::vector<Json> &meshes, double seconds, const std::string &hash)
{
    Json m;
    m["config"] = to_json(config);
    m["method"] = run.label;
    m["meshes"] = meshes;
    Json dofs = Json::array();
    for (const auto &r : run.table.rows)
        dofs.push_back(r.n_dofs);
    m["dofs"] = {{"velocity", dofs}};
    m["wall_clock_seconds"] = seconds;
    m["input_hash"] = hash;
    m["blowup_time"] = nullptr;
    if (run.dt > 0.0)
        m["dt_used"] = run.dt;
    Json pre = Json::object();
    for (size_t j = 0; j < run.table.norms.size(); ++j)
        pre[run.table.norms[j]] = static_cast<bool>(run.table.preasymptotic[j]);
    m["preasymptotic"] = pre;
    if (!extra_header.empty())
        m["extra_columns"] = extra_header;
    run.manifest = std::move(m);
    if (!config.out.empty())
    {
        const auto dir = output_dir(config);
        const std::string stem = config.benchmark + "_" + run.label;
        run.csv_path = dir / (stem + "_rates.csv");
        run.manifest_path = dir / (stem + "_rates.manifest.json");
        run.manifest["csv"] = run.csv_path.filename().string();
        write_file(run.csv_path, rates_csv(run));
        write_file(run.manifest_path, run.manifest.dump(2) + "\n");
    }
}

template <typename T> void read_field(const Json &j, const char *key, T &field)
{
    if (j.contains(key))
    {
        try
        {
            field = j.at(key).get<T>();
        }
        catch (const nlohmann::json::exception &)
        {
            throw ConfigError(std::string("config field '") + key + "' has the wrong type");
        }
    }
}

} // namespace

BenchConfig profile_defaults(const std::string &benchmark, const std::string &profile)
{
    if (profile != "paperlite" && profile != "paper")
        throw ConfigError("unknown profile '" + profile + "' (expected paperlite|paper)");
    BenchConfig c;
    c.benchmark = benchmark;
    c.profile = profile;
    if (benchmark == "lattice")
    {
        // desk-scale substitutes for k = 8, dt = 1e-4, T = 26
        c.method = "bdm";
        c.order = profile == "paper" ? 8 : 4;
        c.nu = 1e-5;
        c.dt = profile == "paper" ? 1e-4 : 1e-3;
        c.tend = profile == "paper" ? 26.0 : 10.0;
        c.mesh = "coarse-periodic";
        c.record_every = profile == "paper" ? 100 : 10;
    }
    else if (benchmark == "potential")
    {
        c.method = "gdth,bdm";
        c.order = 4;
        c.nu = 1.0;
        c.dt = 1e-3;
        c.tend = 1.0;
        c.mesh = "coarse";
    }
    else if (benchmark == "converge")
    {
        c.method = "bdm";
        c.order = 2;
        c.nu = 1e-2;
        c.dt = 2e-3;
        c.tend = 0.25;
        c.mesh = "coarse-periodic";
    }
    else if (benchmark == "project")
    {
        c.method = "bdm";
        c.order = 2;
        c.nu = 1.0;
        c.mesh = "coarse-periodic";
        c.levels = 4; // base mesh and three uniform refinements
    }
    else
        throw ConfigError("unknown benchmark '" + benchmark + "' (expected lattice|potential|converge|project)");
    return c;
}

Json to_json(const BenchConfig &c)
{
    return Json{{"benchmark", c.benchmark},
                {"profile", c.profile},
                {"method", c.method},
                {"order", c.order},
                {"nu", c.nu},
                {"sigma", c.sigma},
                {"delta", c.delta},
                {"dt", c.dt},
                {"tend", c.tend},
                {"mesh", c.mesh},
                {"out", c.out},
                {"init", c.init},
                {"levels", c.levels},
                {"psi", c.psi},
                {"dirichlet_fallback", c.dirichlet_fallback},
                {"record_every", c.record_every}};
}

BenchConfig resolve_config(const std::vector<Json> &layers)
{
    Json merged = Json::object();
    for (Json layer : layers)
    {
        if (layer.is_null())
            continue;
        if (!layer.is_object())
            throw ConfigError("config must be a JSON object");
        if (layer.contains("config") && layer.contains("input_hash"))
            layer = layer.at("config");
        for (const auto &[key, value] : layer.items())
        {
            if (std::find(config_keys.begin(), config_keys.end(), key) == config_keys.end())
                throw ConfigError("unknown config field '" + key + "'");
            merged[key] = value;
        }
    }
    std::string benchmark = "lattice", profile = "paperlite";
    read_field(merged, "benchmark", benchmark);
    read_field(merged, "profile", profile);
    BenchConfig c = profile_defaults(benchmark, profile);
    read_field(merged, "method", c.method);
    read_field(merged, "order", c.order);
    read_field(merged, "nu", c.nu);
    read_field(merged, "sigma", c.sigma);
    read_field(merged, "delta", c.delta);
    read_field(merged, "dt", c.dt);
    read_field(merged, "tend", c.tend);
    read_field(merged, "mesh", c.mesh);
    read_field(merged, "out", c.out);
    read_field(merged, "init", c.init);
    read_field(merged, "levels", c.levels);
    read_field(merged, "psi", c.psi);
    read_field(merged, "dirichlet_fallback", c.dirichlet_fallback);
    read_field(merged, "record_every", c.record_every);
    validate(c);
    return c;
}

InitialDatum parse_initial(const std::string &name)
{
    if (name == "stokes-projection")
        return InitialDatum::StokesProjection;
    if (name == "interpolation")
        return InitialDatum::Interpolation;
    throw ConfigError("unknown initial datum '" + name + "' (expected stokes-projection|interpolation)");
}

std::vector<MethodConfig> method_list(const BenchConfig &config)
{
    std::vector<MethodConfig> out;
    std::stringstream s(config.method);
    std::string name;
    while (std::getline(s, name, ','))
    {
        if (name.empty())
            continue;
        MethodConfig m;
        m.method = parse_method(name);
        m.degree = config.order;
        m.sigma = config.sigma;
        m.delta = config.delta;
        out.push_back(m);
    }
    if (out.empty())
        throw ConfigError("no method given");
    return out;
}

void validate(const BenchConfig &c)
{
    profile_defaults(c.benchmark, c.profile);
    parse_initial(c.init);
    if (!(c.nu > 0.0))
        throw ConfigError("nu must be positive");
    if (c.sigma <= 0.0 && c.sigma != -1.0)
        throw ConfigError("sigma must be positive (or -1 for the default 4k^2)");
    if (c.delta < 0.0 && c.delta != -1.0)
        throw ConfigError("delta must be non-negative (or -1 for the method default)");
    if (c.order < 1)
        throw ConfigError("order must be at least 1");
    if (c.record_every < 1)
        throw ConfigError("record_every must be at least 1");
    if (!std::isfinite(c.psi))
        throw ConfigError("psi must be finite");
    const bool transient = c.benchmark != "project";
    if (transient && (!(c.dt > 0.0) || !(c.tend > 0.0)))
        throw ConfigError("dt and tend must be positive");
    if (transient && std::llround(c.tend / c.dt) < 1)
        throw ConfigError("tend shorter than one time step");
    if ((c.benchmark == "converge" || c.benchmark == "project") && c.levels < 3)
        throw ConfigError("rate studies need at least 3 refinement levels");
    const auto methods = method_list(c);
    if (c.benchmark == "lattice" || c.benchmark == "converge" || c.benchmark == "project")
    {
        const Mesh mesh = mesh_from_id(c.mesh);
        if (!mesh.is_periodic() && !(c.benchmark == "lattice" && c.dirichlet_fallback))
            throw ConfigError("the lattice flow needs a periodic mesh (or dirichlet_fallback for lattice runs)");
    }
    if (c.benchmark == "potential" && mesh_from_id(c.mesh).is_periodic())
        throw ConfigError("the potential flow needs a mesh with Dirichlet boundary");
}

std::shared_ptr<const Mesh> bench_mesh(const std::string &id, int refinements, const MethodConfig &method)
{
    Mesh mesh = mesh_from_id(id);
    for (int i = 0; i < refinements; ++i)
        mesh = uniform_refine(mesh);
    if (method.method == Method::SV)
        mesh = alfeld_split(mesh);
    return std::make_shared<const Mesh>(std::move(mesh));
}

std::string git_blob_hash(const std::string &content)
{
    const std::string header = "blob " + std::to_string(content.size()) + std::string(1, '\0');
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX *ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, header.data(), header.size()) != 1 ||
        EVP_DigestUpdate(ctx, content.data(), content.size()) != 1 || EVP_DigestFinal_ex(ctx, digest, &len) != 1)
    {
        EVP_MD_CTX_free(ctx);
        throw Error("SHA-1 digest failed");
    }
    EVP_MD_CTX_free(ctx);
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i)
        hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    return hex.str();
}

std::string timeseries_csv(const TimeSeries &series)
{
    std::string out = std::string(timeseries_header) + "\n";
    for (const auto &r : series.records)
    {
        const NormReport &n = r.norms;
        out += number(r.t) + "," + optional_number(n.err_l2) + "," + optional_number(n.err_h1_broken) + "," +
               optional_number(n.err_energy) + "," + number(n.div_l2) + "," + number(n.div_linf) + "," +
               number(n.kinetic) + "," + number(n.dissipation) + "," + number(n.upwind) + "\n";
    }
    return out;
}

double MethodRun::final_error() const
{
    if (series.records.empty() || !series.records.back().norms.err_l2)
        throw PreconditionError("run has no error record");
    return *series.records.back().norms.err_l2;
}

double MethodRun::final_relative_error() const
{
    const TimeRecord &r = series.records.back();
    return final_error() / std::sqrt(2.0 * r.norms.kinetic);
}

std::vector<MethodRun> bench_lattice(const BenchConfig &config)
{
    validate(config);
    const ExactSolution exact = lattice_flow(config.nu);
    std::vector<MethodRun> runs;
    for (const auto &m : method_list(config))
        runs.push_back(run_method(config, m, exact));
    return runs;
}

std::vector<MethodRun> bench_potential(const BenchConfig &config)
{
    validate(config);
    const ExactSolution exact = potential_flow(config.nu);
    std::vector<MethodRun> runs;
    for (const auto &m : method_list(config))
        runs.push_back(run_method(config, m, exact));
    return runs;
}

std::vector<RateRun> bench_converge(const BenchConfig &config)
{
    validate(config);
    const ExactSolution exact = lattice_flow(config.nu);
    const FlowProblem problem = problem_from_exact(exact);
    std::vector<RateRun> out;
    for (const auto &method : method_list(config))
    {
        const auto start = Clock::now();
        std::vector<std::shared_ptr<const Mesh>> meshes;
        for (int l = 0; l < config.levels; ++l)
            meshes.push_back(bench_mesh(config.mesh, l, method));

        auto errors = [&](int level, double dt) {
            TransientConfig tc = transient_config(config, method);
            tc.dt = dt;
            tc.record_every = 1;
            const TimeSeries s = run_transient(meshes[level], tc, problem);
            if (s.blowup_time)
                throw SolverError("converge run blew up at level " + std::to_string(level));
            double linf_l2 = 0.0, energy_sq = 0.0;
            for (const auto &r : s.records)
            {
                linf_l2 = std::max(linf_l2, *r.norms.err_l2);
                if (r.step > 0)
                    energy_sq += dt * config.nu * *r.norms.err_energy * *r.norms.err_energy;
            }
            return std::make_pair(std::vector<double>{std::sqrt(energy_sq), linf_l2}, s.n_velocity);
        };

        // time-step floor: halve dt until the finest level's errors are
        // insensitive to a further halving
        const int finest = config.levels - 1;
        double dt = config.dt;
        std::pair<std::vector<double>, int> fine = errors(finest, dt);
        for (int attempt = 0;; ++attempt)
        {
            const auto half = errors(finest, 0.5 * dt);
            bool ok = true;
            for (size_t j = 0; j < half.first.size(); ++j)
                ok = ok && std::abs(fine.first[j] - half.first[j]) <= 0.1 * half.first[j];
            if (ok)
                break;
            if (attempt == 6)
                throw SolverError("time-step floor not reached after 6 halvings");
            dt *= 0.5;
            fine = half;
        }

        std::vector<RateRow> rows;
        std::vector<Json> mesh_info;
        std::vector<const Mesh *> mesh_ptrs;
        for (int l = 0; l < config.levels; ++l)
        {
            const auto e = l == finest ? fine : errors(l, dt);
            rows.push_back(RateRow{meshes[l]->stats().h_max, e.second, e.first});
            mesh_info.push_back(mesh_json(config.mesh + " refined " + std::to_string(l), *meshes[l]));
            mesh_ptrs.push_back(meshes[l].get());
        }
        RateRun run;
        run.method = method;
        run.label = label_of(method);
        run.dt = dt;
        // no expected order for L-infinity(L2): optimality there is open
        run.table = convergence_rates({"errEnergyIntegral", "errLinfL2"}, std::move(rows), {double(method.degree)});
        finish_rate_run(config, run, "", mesh_info, seconds_since(start), input_hash(config, mesh_ptrs));
        out.push_back(std::move(run));
    }
    return out;
}

std::vector<RateRun> bench_project(const BenchConfig &config)
{
    validate(config);
    const ExactSolution exact = lattice_flow(config.nu);
    const VectorField w = exact.velocity_at(0.0);
    const TensorField grad_w = exact.gradient_at(0.0);
    const double grad_w_linf = exact.grad_linf(0.0);
    std::vector<RateRun> out;
    for (const auto &method : method_list(config))
    {
        const auto start = Clock::now();
        RateRun run;
        run.method = method;
        run.label = label_of(method);
        std::vector<RateRow> rows;
        std::vector<Json> mesh_info;
        std::vector<std::shared_ptr<const Mesh>> meshes;
        std::vector<const Mesh *> mesh_ptrs;
        for (int l = 0; l < config.levels; ++l)
        {
            meshes.push_back(bench_mesh(config.mesh, l, method));
            const SpacePair spaces = build_spaces(meshes.back(), method);
            const double sigma = method.penalty();
            const Vector pi = stokes_projection(spaces, sigma, w, grad_w).u;
            const NormContext ctx(spaces.velocity, 1.0, sigma);
            const auto e = ctx.errors(pi, w, grad_w);
            rows.push_back(RateRow{meshes.back()->stats().h_max, spaces.velocity->n_dofs(), {e[0], e[1], e[2]}});
            run.assumption_e.push_back(ctx.grad_linf(pi) / grad_w_linf);
            if (l == config.levels - 1)
            {
                const Vector d = stokes_projection(spaces, sigma, pi).u - pi;
                run.idempotence = std::sqrt(std::max(0.0, d.dot(ctx.mass() * d)));
            }
            mesh_info.push_back(mesh_json(config.mesh + " refined " + std::to_string(l), *meshes.back()));
            mesh_ptrs.push_back(meshes.back().get());
        }
        const double k = method.degree;
        run.table = convergence_rates({"errL2", "errH1broken", "errEnergy"}, std::move(rows), {k + 1.0, k, k});
        finish_rate_run(config, run, "assumptionE", mesh_info, seconds_since(start), input_hash(config, mesh_ptrs));
        out.push_back(std::move(run));
    }
    return out;
}

std::string rates_csv(const RateRun &run)
{
    const RateTable &t = run.table;
    std::string out = "level,h,ndofs";
    for (const auto &n : t.norms)
        out += "," + n + ",rate_" + n;
    const bool with_e = !run.assumption_e.empty();
    if (with_e)
        out += ",assumptionE";
    out += "\n";
    for (size_t i = 0; i < t.rows.size(); ++i)
    {
        out += std::to_string(i) + "," + number(t.rows[i].h) + "," + std::to_string(t.rows[i].n_dofs);
        for (size_t j = 0; j < t.norms.size(); ++j)
            out += "," + number(t.rows[i].errors[j]) + "," + (i == 0 ? std::string() : number(t.rates[i - 1][j]));
        if (with_e)
            out += "," + number(run.assumption_e[i]);
        out += "\n";
    }
    if (run.idempotence)
    {
        // pi(pi w) - pi w on the finest level, L2 column only
        out += "idempotence," + number(t.rows.back().h) + "," + std::to_string(t.rows.back().n_dofs) + "," +
               number(*run.idempotence);
        for (size_t j = 0; j < 2 * t.norms.size() - 1; ++j)
            out += ",";
        if (with_e)
            out += ",";
        out += "\n";
    }
    return out;
}

int run_benchmark(const BenchConfig &config)
{
    if (config.benchmark == "lattice")
        return static_cast<int>(bench_lattice(config).size());
    if (config.benchmark == "potential")
        return static_cast<int>(bench_potential(config).size());
    if (config.benchmark == "converge")
        return static_cast<int>(bench_converge(config).size());
    if (config.benchmark == "project")
        return static_cast<int>(bench_project(config).size());
    throw ConfigError("unknown benchmark '" + config.benchmark + "'");
}

} // namespace flowlab
