#include "partopt/io.hpp"

#include "partopt/oracles.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace partopt {

namespace {

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

double parse_double(const std::string& s, const std::string& key) {
    std::size_t pos = 0;
    double v;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ConfigError("malformed value for key '" + key + "': " + s);
    }
    if (pos != s.size()) throw ConfigError("malformed value for key '" + key + "': " + s);
    return v;
}

long long parse_int(const std::string& s, const std::string& key) {
    std::size_t pos = 0;
    long long v;
    try {
        v = std::stoll(s, &pos);
    } catch (const std::exception&) {
        throw ConfigError("malformed value for key '" + key + "': " + s);
    }
    if (pos != s.size()) throw ConfigError("malformed value for key '" + key + "': " + s);
    return v;
}

std::vector<double> parse_list(const std::string& s, const std::string& key) {
    std::vector<double> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        // trim
        std::size_t b = item.find_first_not_of(" \t");
        std::size_t e = item.find_last_not_of(" \t");
        if (b == std::string::npos) throw ConfigError("empty list entry for key '" + key + "'");
        out.push_back(parse_double(item.substr(b, e - b + 1), key));
    }
    if (out.empty()) throw ConfigError("empty list for key '" + key + "'");
    return out;
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    static const std::set<std::string> known = {
        "domain", "k", "a", "resolution", "seed", "step", "beta_schedule",
        "eps_schedule", "mu_safety", "mu_override", "segregation", "max_outer",
        "max_inner", "tol_energy", "eps_support", "restarts"};

    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::size_t b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        auto trim = [](std::string s) {
            std::size_t x = s.find_first_not_of(" \t\r");
            std::size_t y = s.find_last_not_of(" \t\r");
            return x == std::string::npos ? std::string() : s.substr(x, y - x + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        if (!known.count(key))
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (kv.count(key))
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        kv[key] = val;
    }

    for (const char* req : {"domain", "k", "a"})
        if (!kv.count(req)) throw ConfigError(origin + ": missing required key '" + std::string(req) + "'");

    RunConfig rc;
    {
        auto tok = split_ws(kv["domain"]);
        if (tok.empty()) throw ConfigError("empty domain spec");
        if (tok[0] == "square" && tok.size() == 2) {
            double L = parse_double(tok[1], "domain");
            rc.shape.kind = ShapeSpec::Kind::Rectangle;
            rc.shape.lengths = {L, L};
        } else if (tok[0] == "rect" && (tok.size() == 3 || tok.size() == 4)) {
            rc.shape.kind = ShapeSpec::Kind::Rectangle;
            for (std::size_t i = 1; i < tok.size(); ++i)
                rc.shape.lengths.push_back(parse_double(tok[i], "domain"));
        } else if (tok[0] == "disk" && (tok.size() == 2 || tok.size() == 3)) {
            rc.shape.kind = ShapeSpec::Kind::Disk;
            rc.shape.radius = parse_double(tok[1], "domain");
            if (tok.size() == 3) rc.shape.box = parse_double(tok[2], "domain");
        } else if (tok[0] == "mask" && tok.size() == 2) {
            rc.shape.kind = ShapeSpec::Kind::MaskFile;
            rc.shape.path = tok[1];
        } else {
            throw ConfigError("malformed domain spec: " + kv["domain"]);
        }
    }
    SolverConfig& s = rc.solver;
    s.k = static_cast<int>(parse_int(kv["k"], "k"));
    s.a = parse_double(kv["a"], "a");
    if (kv.count("resolution")) s.resolution = static_cast<int>(parse_int(kv["resolution"], "resolution"));
    if (kv.count("seed")) s.seed = static_cast<std::uint64_t>(parse_int(kv["seed"], "seed"));
    if (kv.count("step")) s.step = parse_double(kv["step"], "step");
    if (kv.count("beta_schedule")) s.beta_schedule = parse_list(kv["beta_schedule"], "beta_schedule");
    if (kv.count("eps_schedule")) s.eps_measure_schedule = parse_list(kv["eps_schedule"], "eps_schedule");
    if (kv.count("mu_safety")) s.mu_safety = parse_double(kv["mu_safety"], "mu_safety");
    if (kv.count("mu_override")) s.mu_override = parse_double(kv["mu_override"], "mu_override");
    if (kv.count("segregation")) {
        if (kv["segregation"] == "hard")
            s.mode = SegregationMode::Hard;
        else if (kv["segregation"] == "soft")
            s.mode = SegregationMode::Soft;
        else
            throw ConfigError("segregation must be 'hard' or 'soft'");
    }
    if (kv.count("max_outer")) s.max_outer = static_cast<int>(parse_int(kv["max_outer"], "max_outer"));
    if (kv.count("max_inner")) s.max_inner = static_cast<int>(parse_int(kv["max_inner"], "max_inner"));
    if (kv.count("tol_energy")) s.tol_energy = parse_double(kv["tol_energy"], "tol_energy");
    if (kv.count("eps_support")) s.eps_support = parse_double(kv["eps_support"], "eps_support");
    if (kv.count("restarts")) rc.restarts = static_cast<int>(parse_int(kv["restarts"], "restarts"));
    if (rc.restarts < 1) throw ConfigError("restarts must be at least 1");

    // Validate the budget against the discretized domain.
    DomainGrid grid;
    try {
        grid = build_domain(rc.shape, s.resolution);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid domain: ") + e.what());
    }
    if (!(s.a > 0.0) || s.a >= grid.domain_measure())
        throw ConfigError("a must be < |Omega|");
    try {
        s.validate(grid.domain_measure());
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return rc;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

void write_field(const ScalarField& u, const std::string& path) {
    const DomainGrid& g = *u.grid;
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot write field file: " + path);
    std::fprintf(f, "%d", g.dim);
    for (int d = 0; d < g.dim; ++d) std::fprintf(f, " %d", g.n[d]);
    std::fprintf(f, " %.17g\n", g.h);
    for (int iz = 0; iz < g.n[2]; ++iz)
        for (int iy = 0; iy < g.n[1]; ++iy) {
            for (int ix = 0; ix < g.n[0]; ++ix)
                std::fprintf(f, ix ? " %.17g" : "%.17g", u[g.cell_index(ix, iy, iz)]);
            std::fprintf(f, "\n");
        }
    std::fclose(f);
}

ScalarField read_field(const DomainGrid& grid, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open field file: " + path);
    int dim;
    std::array<int, 3> n{1, 1, 1};
    double h;
    in >> dim;
    for (int d = 0; d < dim; ++d) in >> n[d];
    in >> h;
    if (!in || dim != grid.dim || n != grid.n || h != grid.h)
        throw std::runtime_error("field file header does not match grid: " + path);
    ScalarField u(grid);
    for (long long c = 0; c < grid.ncells(); ++c) {
        in >> u[c];
        if (!in) throw std::runtime_error("field file: too few values: " + path);
    }
    return u;
}

namespace {

std::string config_echo(const RunConfig& rc) {
    std::ostringstream o;
    o.precision(17);
    o << "domain = ";
    switch (rc.shape.kind) {
        case ShapeSpec::Kind::Rectangle:
            o << (rc.shape.lengths.size() == 2 && rc.shape.lengths[0] == rc.shape.lengths[1]
                      ? "square "
                      : "rect ");
            if (rc.shape.lengths.size() == 2 && rc.shape.lengths[0] == rc.shape.lengths[1])
                o << rc.shape.lengths[0];
            else
                for (std::size_t i = 0; i < rc.shape.lengths.size(); ++i)
                    o << (i ? " " : "") << rc.shape.lengths[i];
            break;
        case ShapeSpec::Kind::Disk:
            o << "disk " << rc.shape.radius;
            if (rc.shape.box > 0.0) o << ' ' << rc.shape.box;
            break;
        case ShapeSpec::Kind::MaskFile:
            o << "mask " << rc.shape.path;
            break;
    }
    const SolverConfig& s = rc.solver;
    o << "\nk = " << s.k << "\na = " << s.a << "\nresolution = " << s.resolution
      << "\nseed = " << s.seed << "\nstep = " << s.step << "\nbeta_schedule = ";
    for (std::size_t i = 0; i < s.beta_schedule.size(); ++i)
        o << (i ? "," : "") << s.beta_schedule[i];
    o << "\neps_schedule = ";
    for (std::size_t i = 0; i < s.eps_measure_schedule.size(); ++i)
        o << (i ? "," : "") << s.eps_measure_schedule[i];
    o << "\nmu_safety = " << s.mu_safety << "\nmu_override = " << s.mu_override
      << "\nsegregation = " << (s.mode == SegregationMode::Hard ? "hard" : "soft")
      << "\nmax_outer = " << s.max_outer << "\nmax_inner = " << s.max_inner
      << "\ntol_energy = " << s.tol_energy << "\neps_support = " << s.eps_support
      << "\nrestarts = " << rc.restarts << "\n";
    return o.str();
}

ScalarField reflect_axis0(const ScalarField& u) {
    const DomainGrid& g = *u.grid;
    ScalarField out(g);
    for (int iz = 0; iz < g.n[2]; ++iz)
        for (int iy = 0; iy < g.n[1]; ++iy)
            for (int ix = 0; ix < g.n[0]; ++ix)
                out[g.cell_index(ix, iy, iz)] = u[g.cell_index(g.n[0] - 1 - ix, iy, iz)];
    return out;
}

double symmetry_defect(const PhaseVector& U) {
    double s = 0.0;
    for (const auto& u : U.fields) {
        ScalarField r = reflect_axis0(u);
        for (long long c = 0; c < static_cast<long long>(r.v.size()); ++c) r[c] -= u[c];
        s += norm_l2(r);
    }
    return s;
}

bool oracle_applies(const DomainGrid& g, const BallPrediction& p, int k) {
    // Equal-ball regime: the k predicted balls fit inside the domain with
    // clearance twice their radius. Checked against the bounding box only.
    double edge_min = g.n[0] * g.h, edge_max = edge_min;
    for (int d = 1; d < g.dim; ++d) {
        edge_min = std::min(edge_min, g.n[d] * g.h);
        edge_max = std::max(edge_max, g.n[d] * g.h);
    }
    return edge_min >= 4.0 * p.radius && edge_max >= k * 4.0 * p.radius;
}

void fill_manifest(RunManifest& m, const DomainGrid& grid, const RunConfig& rc,
                   const SolverState& st, const PartitionResult& part) {
    m.config_echo = config_echo(rc);
    m.outer_rounds = st.outer_rounds;
    m.inner_steps = st.inner_steps;
    m.backtrack_halvings = st.backtrack_halvings;
    m.breakdown = st.breakdown;
    m.partition = part;
    m.audit = audit_partition(grid, part, st.U, rc.solver.a);
    m.symmetry_defect = symmetry_defect(st.U);
    BallPrediction p = equal_ball_prediction(grid.dim, rc.solver.k, rc.solver.a);
    if (oracle_applies(grid, p, rc.solver.k)) {
        m.has_oracle = true;
        m.oracle = p;
        m.oracle_gap = (part.objective - p.total_objective) / p.total_objective;
    }
}

}  // namespace

void write_manifest(const RunManifest& m, const std::string& path) {
    std::ofstream o(path);
    if (!o) throw std::runtime_error("cannot write manifest: " + path);
    o.precision(17);
    o << "[config]\n" << m.config_echo;
    o << "\n[timings]\nouter_rounds = " << m.outer_rounds << "\ninner_steps = " << m.inner_steps
      << "\nbacktrack_halvings = " << m.backtrack_halvings << "\n";
    o << "\n[energy]\n";
    for (std::size_t i = 0; i < m.breakdown.dirichlet.size(); ++i)
        o << "rayleigh_" << i << " = " << m.breakdown.dirichlet[i] << "\n";
    o << "measure_excess = " << m.breakdown.measure_excess << "\nmeasure_penalty = "
      << m.breakdown.measure_penalty << "\nsegregation_penalty = " << m.breakdown.segregation_penalty
      << "\ntotal = " << m.breakdown.total << "\n";
    o << "\n[partition]\n";
    for (std::size_t i = 0; i < m.partition.lambdas.size(); ++i)
        o << "phase_" << i << " lambda = " << m.partition.lambdas[i]
          << " measure = " << m.partition.measures[i]
          << " components = " << m.partition.components_per_phase[i] << "\n";
    o << "objective = " << m.partition.objective << "\nrayleigh_gap = " << m.partition.rayleigh_gap
      << "\nsaturation_gap = " << m.partition.saturation_gap << "\n";
    o << "\n[audit]\n";
    auto flag = [&](const char* name, bool ok, double evidence) {
        o << name << " = " << (ok ? "true" : "false") << " (" << evidence << ")\n";
    };
    flag("saturation_ok", m.audit.saturation_ok, m.audit.saturation_gap);
    flag("connected_ok", m.audit.connected_ok, m.audit.max_components);
    flag("disjoint_ok", m.audit.disjoint_ok, m.audit.overlap_measure);
    flag("faber_krahn_ok", m.audit.faber_krahn_ok, m.audit.faber_krahn_bound);
    flag("subsolution_ok", m.audit.subsolution_ok, m.audit.subsolution_margin);
    flag("eigen_residual_ok", m.audit.eigen_residual_ok, m.audit.eigen_residual_max);
    o << "symmetry_defect = " << m.symmetry_defect << "\n";
    if (!m.per_seed_objectives.empty()) {
        o << "\n[restarts]\n";
        for (std::size_t i = 0; i < m.per_seed_objectives.size(); ++i)
            o << "seed_" << (m.seed + i) << " objective = " << m.per_seed_objectives[i] << "\n";
        o << "best_seed = " << m.seed + static_cast<std::uint64_t>(
                 std::min_element(m.per_seed_objectives.begin(), m.per_seed_objectives.end()) -
                 m.per_seed_objectives.begin())
          << "\n";
    }
    if (m.has_oracle) {
        o << "\n[oracle]\nequal_ball_radius = " << m.oracle.radius
          << "\nequal_ball_lambda = " << m.oracle.per_ball_lambda
          << "\nequal_ball_total = " << m.oracle.total_objective
          << "\nrelative_gap = " << m.oracle_gap << "\n";
    }
}

void write_support_raster(const DomainGrid& g, const PartitionResult& part, const std::string& path) {
    if (g.dim != 2) return;  // rasters are 2D figures only
    static const int palette[8][3] = {{230, 57, 70},  {69, 123, 157}, {42, 157, 143},
                                      {233, 196, 106}, {144, 103, 198}, {244, 162, 97},
                                      {38, 70, 83},   {181, 101, 118}};
    std::ofstream o(path);
    if (!o) throw std::runtime_error("cannot write raster: " + path);
    o << "P3\n" << g.n[0] << ' ' << g.n[1] << "\n255\n";
    for (int iy = g.n[1] - 1; iy >= 0; --iy) {
        for (int ix = 0; ix < g.n[0]; ++ix) {
            long long c = g.cell_index(ix, iy);
            int phase = -1;
            for (std::size_t i = 0; i < part.supports.size(); ++i)
                if (part.supports[i][c]) { phase = static_cast<int>(i); break; }
            if (phase >= 0) {
                const int* col = palette[phase % 8];
                o << col[0] << ' ' << col[1] << ' ' << col[2] << ' ';
            } else if (g.mask[c]) {
                o << "0 0 0 ";
            } else {
                o << "40 40 40 ";
            }
        }
        o << '\n';
    }
}

void write_history(const std::vector<double>& history, const std::vector<std::array<double, 3>>& parts,
                   const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot write history: " + path);
    std::fprintf(f, "iteration,total,dirichlet,measure_penalty,segregation_penalty\n");
    for (std::size_t i = 0; i < history.size(); ++i)
        std::fprintf(f, "%zu,%.17g,%.17g,%.17g,%.17g\n", i, history[i], parts[i][0], parts[i][1],
                     parts[i][2]);
    std::fclose(f);
}

RunManifest run_experiment(const RunConfig& rc, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (!fs::is_directory(out_dir))
        throw std::runtime_error("cannot create output directory: " + out_dir);

    DomainGrid grid = build_domain(rc.shape, rc.solver.resolution);

    SolverState best;
    PartitionResult best_part;
    RunManifest m;
    m.seed = rc.solver.seed;
    bool have = false;
    for (int r = 0; r < rc.restarts; ++r) {
        SolverConfig cfg = rc.solver;
        cfg.seed = rc.solver.seed + static_cast<std::uint64_t>(r);
        SolverState st = solve(grid, cfg);
        PartitionResult part = extract_partition(grid, st.U, cfg.eps_support);
        m.per_seed_objectives.push_back(part.objective);
        if (!have || part.objective < best_part.objective) {
            best = std::move(st);
            best_part = std::move(part);
            have = true;
        }
    }
    if (rc.restarts == 1) m.per_seed_objectives.clear();

    fill_manifest(m, grid, rc, best, best_part);
    write_manifest(m, out_dir + "/manifest.txt");
    for (int i = 0; i < best.U.k; ++i)
        write_field(best.U.fields[i], out_dir + "/phase_" + std::to_string(i) + ".field");
    write_support_raster(grid, best_part, out_dir + "/support.ppm");
    write_history(best.energy_history, best.parts_history, out_dir + "/history.csv");
    return m;
}

RunManifest audit_only(const RunConfig& rc, const std::string& fields_dir, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    DomainGrid grid = build_domain(rc.shape, rc.solver.resolution);

    PhaseVector U;
    U.k = rc.solver.k;
    U.a = rc.solver.a;
    for (int i = 0; i < U.k; ++i)
        U.fields.push_back(read_field(grid, fields_dir + "/phase_" + std::to_string(i) + ".field"));
    PartitionResult part = extract_partition(grid, U, rc.solver.eps_support);

    RunManifest m;
    m.seed = rc.solver.seed;
    m.config_echo = config_echo(rc);
    m.partition = part;
    m.audit = audit_partition(grid, part, U, rc.solver.a);
    m.symmetry_defect = symmetry_defect(U);
    BallPrediction p = equal_ball_prediction(grid.dim, rc.solver.k, rc.solver.a);
    if (oracle_applies(grid, p, rc.solver.k)) {
        m.has_oracle = true;
        m.oracle = p;
        m.oracle_gap = (part.objective - p.total_objective) / p.total_objective;
    }
    std::ofstream o(out_dir + "/manifest.txt");
    o.precision(17);
    o << "[config]\n" << m.config_echo << "\n[audit]\n";
    auto flag = [&](const char* name, bool ok, double evidence) {
        o << name << " = " << (ok ? "true" : "false") << " (" << evidence << ")\n";
    };
    flag("saturation_ok", m.audit.saturation_ok, m.audit.saturation_gap);
    flag("connected_ok", m.audit.connected_ok, m.audit.max_components);
    flag("disjoint_ok", m.audit.disjoint_ok, m.audit.overlap_measure);
    flag("faber_krahn_ok", m.audit.faber_krahn_ok, m.audit.faber_krahn_bound);
    flag("subsolution_ok", m.audit.subsolution_ok, m.audit.subsolution_margin);
    flag("eigen_residual_ok", m.audit.eigen_residual_ok, m.audit.eigen_residual_max);
    o << "objective = " << part.objective << "\nsymmetry_defect = " << m.symmetry_defect << "\n";
    return m;
}

}  // namespace partopt
