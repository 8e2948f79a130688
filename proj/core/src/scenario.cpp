#include "gselab/scenario.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "gselab/version.hpp"

namespace gselab {

using nlohmann::json;

namespace {

const json& require_key(const json& j, const std::string& key, const std::string& context) {
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError("missing key '" + context + key + "'");
    return *it;
}

double require_number(const json& j, const std::string& key, const std::string& context) {
    const json& v = require_key(j, key, context);
    if (!v.is_number()) throw ConfigError("key '" + context + key + "' must be a number");
    return v.get<double>();
}

double optional_number(const json& j, const std::string& key, double fallback) {
    auto it = j.find(key);
    return (it == j.end()) ? fallback : it->get<double>();
}

std::vector<double> require_number_list(const json& j, const std::string& key,
                                        const std::string& context) {
    const json& v = require_key(j, key, context);
    if (!v.is_array()) throw ConfigError("key '" + context + key + "' must be an array");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) throw ConfigError("key '" + context + key + "' must hold numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

PhasePoint parse_phase_point(const json& j, const std::string& context) {
    auto q = require_number_list(j, "q", context);
    auto p = require_number_list(j, "p", context);
    if (q.size() != p.size())
        throw ConfigError("key '" + context + "q/p' lengths differ");
    return PhasePoint(std::move(q), std::move(p));
}

PolyObservable parse_poly(const json& j, const std::string& context) {
    const json& terms = require_key(j, "terms", context);
    if (!terms.is_array() || terms.empty())
        throw ConfigError("key '" + context + "terms' must be a nonempty array");
    std::optional<PolyObservable> f;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const std::string tctx = context + "terms[" + std::to_string(i) + "].";
        auto pq = require_number_list(terms[i], "powers_q", tctx);
        auto pp = require_number_list(terms[i], "powers_p", tctx);
        const double c = require_number(terms[i], "coeff", tctx);
        if (pq.size() != pp.size() || pq.empty())
            throw ConfigError("key '" + tctx + "powers_q/powers_p' must be equal nonempty lengths");
        std::vector<unsigned> uq, up;
        for (double v : pq) {
            if (v < 0 || v != std::floor(v)) throw ConfigError("key '" + tctx + "powers_q' must be nonnegative integers");
            uq.push_back(static_cast<unsigned>(v));
        }
        for (double v : pp) {
            if (v < 0 || v != std::floor(v)) throw ConfigError("key '" + tctx + "powers_p' must be nonnegative integers");
            up.push_back(static_cast<unsigned>(v));
        }
        PolyObservable term = PolyObservable::monomial(uq, up, c);
        if (!f.has_value())
            f = term;
        else {
            if (term.n_dof() != f->n_dof())
                throw ConfigError("key '" + tctx + "': inconsistent DOF count");
            *f += term;
        }
    }
    return *f;
}

DriveSpec parse_drive_spec(const json& j, const std::string& context) {
    const std::string kind = require_key(j, "kind", context).get<std::string>();
    if (kind == "constant") return DriveSpec::constant(require_number(j, "value", context));
    if (kind == "cosine")
        return DriveSpec::cosine(require_number(j, "amplitude", context),
                                 require_number(j, "angular_frequency", context),
                                 optional_number(j, "phase_offset", 0.0));
    if (kind == "periodic_kick")
        return DriveSpec::periodic_kick(require_number(j, "strength", context),
                                        require_number(j, "period", context),
                                        optional_number(j, "width", 0.0));
    throw ConfigError("key '" + context + "kind' must be constant|cosine|periodic_kick");
}

EnvelopeSpec parse_envelope(const json& j, const std::string& context) {
    EnvelopeSpec env;
    const std::string kind = require_key(j, "kind", context).get<std::string>();
    if (kind == "gaussian")
        env.kind = EnvelopeSpec::Kind::gaussian;
    else if (kind == "hermite")
        env.kind = EnvelopeSpec::Kind::hermite;
    else if (kind == "symmetric_double_gaussian")
        env.kind = EnvelopeSpec::Kind::symmetric_double_gaussian;
    else
        throw ConfigError("key '" + context +
                          "kind' must be gaussian|hermite|symmetric_double_gaussian");
    env.sigma = require_number(j, "sigma", context);
    if (env.kind == EnvelopeSpec::Kind::hermite)
        env.hermite_n = static_cast<unsigned>(require_number(j, "hermite_n", context));
    if (env.kind == EnvelopeSpec::Kind::symmetric_double_gaussian)
        env.separation = require_number(j, "separation", context);
    return env;
}

GeneratorMode parse_mode(const std::string& s, const std::string& context) {
    if (s == "raw") return GeneratorMode::raw;
    if (s == "interpolating") return GeneratorMode::interpolating;
    throw ConfigError("key '" + context + "mode' must be raw|interpolating");
}

}  // namespace

Scenario parse_scenario_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }

    Scenario s;
    s.name = require_key(j, "name", "").get<std::string>();

    const json& jc = require_key(j, "constants", "");
    s.constants.hbar = require_number(jc, "hbar", "constants.");
    s.constants.masses = require_number_list(jc, "masses", "constants.");
    try {
        s.constants.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("constants: ") + e.what());
    }

    const json& jh = require_key(j, "hamiltonian", "");
    PolyObservable static_part = parse_poly(jh, "hamiltonian.");
    std::vector<std::pair<DriveSpec, PolyObservable>> drives;
    if (jh.contains("drives")) {
        const json& jd = jh["drives"];
        for (std::size_t i = 0; i < jd.size(); ++i) {
            const std::string dctx = "hamiltonian.drives[" + std::to_string(i) + "].";
            DriveSpec spec = parse_drive_spec(jd[i], dctx);
            PolyObservable shape = parse_poly(require_key(jd[i], "shape", dctx), dctx + "shape.");
            drives.emplace_back(spec, std::move(shape));
        }
    }
    try {
        s.hamiltonian = DrivenHamiltonian(std::move(static_part), std::move(drives));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("hamiltonian: ") + e.what());
    }
    if (s.hamiltonian.n_dof() != s.constants.masses.size())
        throw ConfigError("key 'constants.masses' must have one entry per degree of freedom");

    const json& ji = require_key(j, "initial", "");
    s.envelope = parse_envelope(require_key(ji, "envelope", "initial."), "initial.envelope.");
    s.z0 = parse_phase_point(require_key(ji, "z0", "initial."), "initial.z0.");
    if (!s.z0.finite()) throw ConfigError("key 'initial.z0' must be finite");
    if (s.z0.n_dof() != s.hamiltonian.n_dof())
        throw ConfigError("key 'initial.z0' DOF count does not match the Hamiltonian");

    const json& jg = require_key(j, "grid", "");
    s.grid.n_points = static_cast<std::size_t>(require_number(jg, "n_points", "grid."));
    s.grid.q_min = require_number(jg, "q_min", "grid.");
    s.grid.q_max = require_number(jg, "q_max", "grid.");
    try {
        s.grid.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("grid: ") + e.what());
    }

    const json& jp = require_key(j, "propagation", "");
    s.propagation.lambda = require_number(jp, "lambda", "propagation.");
    if (!std::isfinite(s.propagation.lambda))
        throw ConfigError("key 'propagation.lambda' must be finite");
    s.propagation.mode =
        parse_mode(require_key(jp, "mode", "propagation.").get<std::string>(), "propagation.");
    s.propagation.dt = require_number(jp, "dt", "propagation.");
    if (!(s.propagation.dt > 0.0)) throw ConfigError("key 'propagation.dt' must be > 0");
    const std::string scheme = require_key(jp, "scheme", "propagation.").get<std::string>();
    if (scheme == "split_step")
        s.propagation.scheme = Scheme::split_step;
    else if (scheme == "rk4_matrix_free")
        s.propagation.scheme = Scheme::rk4_matrix_free;
    else
        throw ConfigError("key 'propagation.scheme' must be split_step|rk4_matrix_free");
    const std::string refresh = require_key(jp, "refresh", "propagation.").get<std::string>();
    if (refresh == "per_step_predictor_corrector")
        s.propagation.refresh = Refresh::per_step_predictor_corrector;
    else if (refresh == "per_step_frozen")
        s.propagation.refresh = Refresh::per_step_frozen;
    else
        throw ConfigError(
            "key 'propagation.refresh' must be per_step_predictor_corrector|per_step_frozen");
    s.propagation.snapshot_stride =
        static_cast<std::size_t>(optional_number(jp, "snapshot_stride", 100));
    s.t_final = require_number(jp, "t_final", "propagation.");

    if (j.contains("lambda_list")) {
        s.lambda_list = require_number_list(j, "lambda_list", "");
        for (double lam : s.lambda_list)
            if (!std::isfinite(lam)) throw ConfigError("key 'lambda_list' must hold finite values");
    }

    if (j.contains("chaos")) {
        const json& jx = j["chaos"];
        ChaosConfig cc;
        cc.T = require_number(jx, "T", "chaos.");
        cc.dt = require_number(jx, "dt", "chaos.");
        cc.renorm_every = static_cast<std::size_t>(optional_number(jx, "renorm_every", 20));
        cc.delta0 = optional_number(jx, "delta0", 1e-9);
        if (jx.contains("dz")) cc.dz = parse_phase_point(jx["dz"], "chaos.dz.");
        cc.divergence_t_final = optional_number(jx, "divergence_t_final", 0.0);
        cc.divergence_sample_dt = optional_number(jx, "divergence_sample_dt", 0.5);
        if (jx.contains("engine")) {
            const std::string eng = jx["engine"].get<std::string>();
            if (eng == "closed_form")
                cc.engine = DivergenceEngine::closed_form;
            else if (eng == "pde_lambda0")
                cc.engine = DivergenceEngine::pde_lambda0;
            else
                throw ConfigError("key 'chaos.engine' must be closed_form|pde_lambda0");
        }
        s.chaos = cc;
    }

    if (j.contains("phase")) {
        const json& jx = j["phase"];
        PhaseScanConfig pc;
        const json& ics = require_key(jx, "initial_conditions", "phase.");
        for (std::size_t i = 0; i < ics.size(); ++i)
            pc.initial_conditions.push_back(
                parse_phase_point(ics[i], "phase.initial_conditions[" + std::to_string(i) + "]."));
        if (pc.initial_conditions.empty())
            throw ConfigError("key 'phase.initial_conditions' must be nonempty");
        pc.t_span = require_number(jx, "t_span", "phase.");
        pc.n_samples = static_cast<std::size_t>(optional_number(jx, "n_samples", 65537));
        pc.closure_tol = optional_number(jx, "closure_tol", 1e-6);
        s.phase_scan = pc;
    }

    if (j.contains("seed")) s.seed = j["seed"].get<unsigned>();
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << is.rdbuf();
    return parse_scenario_json(buf.str());
}

namespace {

json poly_to_json(const PolyObservable& f) {
    json terms = json::array();
    for (const auto& [mono, c] : f.terms()) {
        json t;
        t["powers_q"] = json::array();
        t["powers_p"] = json::array();
        for (auto v : mono.q_pow) t["powers_q"].push_back(static_cast<unsigned>(v));
        for (auto v : mono.p_pow) t["powers_p"].push_back(static_cast<unsigned>(v));
        t["coeff"] = c;
        terms.push_back(std::move(t));
    }
    json out;
    out["terms"] = std::move(terms);
    return out;
}

json phase_point_to_json(const PhasePoint& z) {
    json out;
    out["q"] = z.q;
    out["p"] = z.p;
    return out;
}

}  // namespace

std::string scenario_to_json(const Scenario& s) {
    json j;
    j["name"] = s.name;
    j["constants"] = {{"hbar", s.constants.hbar}, {"masses", s.constants.masses}};

    json jh = poly_to_json(s.hamiltonian.static_part());
    if (!s.hamiltonian.drives().empty()) {
        json jd = json::array();
        for (const auto& [spec, shape] : s.hamiltonian.drives()) {
            json d;
            switch (spec.kind) {
                case DriveSpec::Kind::constant:
                    d["kind"] = "constant";
                    d["value"] = spec.amplitude;
                    break;
                case DriveSpec::Kind::cosine:
                    d["kind"] = "cosine";
                    d["amplitude"] = spec.amplitude;
                    d["angular_frequency"] = spec.angular_frequency;
                    d["phase_offset"] = spec.phase_offset;
                    break;
                case DriveSpec::Kind::periodic_kick:
                    d["kind"] = "periodic_kick";
                    d["strength"] = spec.strength;
                    d["period"] = spec.period;
                    d["width"] = spec.width;
                    break;
            }
            d["shape"] = poly_to_json(shape);
            jd.push_back(std::move(d));
        }
        jh["drives"] = std::move(jd);
    }
    j["hamiltonian"] = std::move(jh);

    json je;
    switch (s.envelope.kind) {
        case EnvelopeSpec::Kind::gaussian:
            je["kind"] = "gaussian";
            break;
        case EnvelopeSpec::Kind::hermite:
            je["kind"] = "hermite";
            je["hermite_n"] = s.envelope.hermite_n;
            break;
        case EnvelopeSpec::Kind::symmetric_double_gaussian:
            je["kind"] = "symmetric_double_gaussian";
            je["separation"] = s.envelope.separation;
            break;
    }
    je["sigma"] = s.envelope.sigma;
    j["initial"] = {{"envelope", std::move(je)}, {"z0", phase_point_to_json(s.z0)}};

    j["grid"] = {{"n_points", s.grid.n_points}, {"q_min", s.grid.q_min}, {"q_max", s.grid.q_max}};

    json jp;
    jp["lambda"] = s.propagation.lambda;
    jp["mode"] = (s.propagation.mode == GeneratorMode::raw) ? "raw" : "interpolating";
    jp["dt"] = s.propagation.dt;
    jp["scheme"] = (s.propagation.scheme == Scheme::split_step) ? "split_step" : "rk4_matrix_free";
    jp["refresh"] = (s.propagation.refresh == Refresh::per_step_predictor_corrector)
                        ? "per_step_predictor_corrector"
                        : "per_step_frozen";
    jp["snapshot_stride"] = s.propagation.snapshot_stride;
    jp["t_final"] = s.t_final;
    j["propagation"] = std::move(jp);

    if (!s.lambda_list.empty()) j["lambda_list"] = s.lambda_list;

    if (s.chaos.has_value()) {
        const ChaosConfig& cc = *s.chaos;
        json jx;
        jx["T"] = cc.T;
        jx["dt"] = cc.dt;
        jx["renorm_every"] = cc.renorm_every;
        jx["delta0"] = cc.delta0;
        jx["dz"] = phase_point_to_json(cc.dz);
        jx["divergence_t_final"] = cc.divergence_t_final;
        jx["divergence_sample_dt"] = cc.divergence_sample_dt;
        jx["engine"] =
            (cc.engine == DivergenceEngine::closed_form) ? "closed_form" : "pde_lambda0";
        j["chaos"] = std::move(jx);
    }

    if (s.phase_scan.has_value()) {
        const PhaseScanConfig& pc = *s.phase_scan;
        json jx;
        jx["initial_conditions"] = json::array();
        for (const auto& z : pc.initial_conditions)
            jx["initial_conditions"].push_back(phase_point_to_json(z));
        jx["t_span"] = pc.t_span;
        jx["n_samples"] = pc.n_samples;
        jx["closure_tol"] = pc.closure_tol;
        j["phase"] = std::move(jx);
    }

    j["seed"] = s.seed;
    return j.dump();
}

bool scenario_equivalent(const Scenario& a, const Scenario& b) {
    return scenario_to_json(a) == scenario_to_json(b);
}

Scenario read_config_header(std::istream& is) {
    std::string line;
    while (std::getline(is, line)) {
        if (line.rfind("# config ", 0) == 0) return parse_scenario_json(line.substr(9));
        if (!line.empty() && line[0] != '#') break;
    }
    throw ConfigError("no '# config' header line found");
}

void validate_scenario_box(const Scenario& s) {
    if (s.hamiltonian.n_dof() != 1) return;
    const double extent = (s.envelope.kind == EnvelopeSpec::Kind::symmetric_double_gaussian)
                              ? std::abs(s.envelope.separation) / 2.0
                              : 0.0;
    const double margin = 6.0 * s.envelope.sigma + extent;
    const std::size_t n = std::max<std::size_t>(256, static_cast<std::size_t>(s.t_final / 0.05));
    const auto t_grid = linspace(0.0, std::max(s.t_final, 1e-6), n);
    const auto traj =
        integrate_classical(s.hamiltonian, s.z0, t_grid, IntegrationMethod::rk45_adaptive, 1e-8);
    double qlo = s.z0.q[0], qhi = s.z0.q[0];
    for (const auto& z : traj.points) {
        qlo = std::min(qlo, z.q[0]);
        qhi = std::max(qhi, z.q[0]);
    }
    if (qlo - margin < s.grid.q_min || qhi + margin > s.grid.q_max)
        throw ConfigError("grid: box does not contain the classical sweep plus the 6 sigma margin (key 'grid.q_min'/'grid.q_max')");
}

namespace {

std::ofstream open_output(const std::string& output_dir, const std::string& file,
                          const Scenario& s) {
    namespace fs = std::filesystem;
    fs::create_directories(output_dir);
    const fs::path p = fs::path(output_dir) / file;
    std::ofstream os(p);
    if (!os) throw std::runtime_error("cannot open output file: " + p.string());
    os << "# gselab " << kVersion << "\n";
    os << "# config " << scenario_to_json(s) << "\n";
    return os;
}

std::string fmt(double v) { return detail::format_double(v); }

void write_trajectory_csv(std::ofstream& os, const TrajectoryRecord& rec) {
    os << "t,exp_q,exp_p,norm,E_classical,E_quantal,sigma_q,sigma_p\n";
    for (std::size_t i = 0; i < rec.size(); ++i) {
        os << fmt(rec.times[i]) << ',' << fmt(rec.exp_q[i]) << ',' << fmt(rec.exp_p[i]) << ','
           << fmt(rec.norm[i]) << ',' << fmt(rec.energy_classical[i]) << ','
           << fmt(rec.energy_quantal[i]) << ',' << fmt(rec.sigma_q[i]) << ','
           << fmt(rec.sigma_p[i]) << '\n';
    }
}

void write_snapshots(const std::string& output_dir, const Scenario& s, const std::string& prefix,
                     const std::vector<std::pair<double, GridState>>& snaps) {
    namespace fs = std::filesystem;
    auto manifest = open_output(output_dir, prefix + "_snapshots.csv", s);
    manifest << "index,t,path\n";
    for (std::size_t i = 0; i < snaps.size(); ++i) {
        char idx[16];
        std::snprintf(idx, sizeof(idx), "%06zu", i);
        const std::string file = prefix + "_snapshot_" + idx + ".gst";
        save_state((fs::path(output_dir) / file).string(), snaps[i].second);
        manifest << i << ',' << fmt(snaps[i].first) << ',' << file << '\n';
    }
}

GridState initial_state(const Scenario& s) {
    const GridState env = make_envelope(s.envelope, s.grid, s.constants);
    return closed_form_state(env, s.z0, 0.0, s.constants);
}

}  // namespace

void run_quantize(const Scenario& s, const std::string& output_dir, std::ostream& console) {
    const auto g = deformed_generator(s.hamiltonian, s.z0, 0.0, s.propagation.lambda,
                                      s.propagation.mode);
    const std::string text = g.to_string();
    console << text << "\n";
    auto os = open_output(output_dir, s.name + "_operator.txt", s);
    os << text << "\n";
}

void run_evolve(const Scenario& s, const std::string& output_dir, bool emit_plot_data) {
    validate_scenario_box(s);
    const GridState s0 = initial_state(s);
    const auto rec = propagate(s.hamiltonian, s0, s.t_final, s.propagation, s.constants);
    auto os = open_output(output_dir, s.name + "_trajectory.csv", s);
    write_trajectory_csv(os, rec);
    write_snapshots(output_dir, s, s.name, rec.snapshots);
    if (rec.boundary_warning)
        std::fputs("warning: probability density reached the box edge above 1e-10\n", stderr);
    if (emit_plot_data) {
        auto osp = open_output(output_dir, s.name + "_plot_phase_space.csv", s);
        osp << "exp_q,exp_p\n";
        for (std::size_t i = 0; i < rec.size(); ++i)
            osp << fmt(rec.exp_q[i]) << ',' << fmt(rec.exp_p[i]) << '\n';
        auto ose = open_output(output_dir, s.name + "_plot_energy.csv", s);
        ose << "t,E_classical,E_quantal\n";
        for (std::size_t i = 0; i < rec.size(); ++i)
            ose << fmt(rec.times[i]) << ',' << fmt(rec.energy_classical[i]) << ','
                << fmt(rec.energy_quantal[i]) << '\n';
    }
}

void run_closed_form(const Scenario& s, const std::string& output_dir) {
    validate_scenario_box(s);
    const GridState env = make_envelope(s.envelope, s.grid, s.constants);
    const auto n_steps = static_cast<std::size_t>(std::llround(s.t_final / s.propagation.dt));
    const auto t_grid = linspace(0.0, s.t_final, n_steps + 1);
    const auto result = propagate_closed_form(s.hamiltonian, env, s.z0, t_grid, s.constants);

    auto os = open_output(output_dir, s.name + "_cf_trajectory.csv", s);
    os << "t,q,p,energy\n";
    for (std::size_t i = 0; i < result.trajectory.size(); ++i) {
        os << fmt(result.trajectory.times[i]) << ',' << fmt(result.trajectory.points[i].q[0])
           << ',' << fmt(result.trajectory.points[i].p[0]) << ','
           << fmt(result.trajectory.energies[i]) << '\n';
    }
    auto osp = open_output(output_dir, s.name + "_phases.csv", s);
    osp << "t,total,dynamical,geometric\n";
    for (std::size_t i = 0; i < result.phases.size(); ++i)
        osp << fmt(result.phases.times[i]) << ',' << fmt(result.phases.total[i]) << ','
            << fmt(result.phases.dynamical[i]) << ',' << fmt(result.phases.geometric[i]) << '\n';

    std::vector<std::pair<double, GridState>> snaps;
    const std::size_t stride = std::max<std::size_t>(1, s.propagation.snapshot_stride);
    for (std::size_t i = stride; i < result.states.size(); i += stride)
        snaps.emplace_back(t_grid[i], result.states[i]);
    write_snapshots(output_dir, s, s.name + "_cf", snaps);
}

void run_compare(const Scenario& s, const std::string& output_dir) {
    validate_scenario_box(s);
    const GridState env = make_envelope(s.envelope, s.grid, s.constants);
    const GridState s0 = closed_form_state(env, s.z0, 0.0, s.constants);
    const auto rec = propagate(s.hamiltonian, s0, s.t_final, s.propagation, s.constants);

    std::vector<double> t_grid{0.0};
    for (const auto& [t, st] : rec.snapshots) t_grid.push_back(t);
    const auto oracle = propagate_closed_form(s.hamiltonian, env, s.z0, t_grid, s.constants);

    auto os = open_output(output_dir, s.name + "_compare.csv", s);
    os << "t,l2_error\n";
    double max_err = 0.0;
    for (std::size_t i = 0; i < rec.snapshots.size(); ++i) {
        const auto& a = rec.snapshots[i].second.amplitudes();
        const auto& b = oracle.states[i + 1].amplitudes();
        double acc = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) acc += std::norm(a[k] - b[k]);
        const double err = std::sqrt(acc * s.grid.dq());
        max_err = std::max(max_err, err);
        os << fmt(rec.snapshots[i].first) << ',' << fmt(err) << '\n';
    }
    os << "# max_l2_error " << fmt(max_err) << "\n";
}

void run_phase(const Scenario& s, const std::string& output_dir) {
    if (!s.phase_scan.has_value())
        throw ConfigError("missing key 'phase' (required by the phase subcommand)");
    const PhaseScanConfig& pc = *s.phase_scan;
    auto os = open_output(output_dir, s.name + "_orbits.csv", s);
    os << "E,gamma,n,residual,period,action\n";
    for (std::size_t i = 0; i < pc.initial_conditions.size(); ++i) {
        const PhasePoint& z0 = pc.initial_conditions[i];
        const auto t_grid = linspace(0.0, pc.t_span, pc.n_samples);
        const auto traj =
            integrate_classical(s.hamiltonian, z0, t_grid, IntegrationMethod::rk4_fixed, 0.0);
        const auto phases = phase_integral(traj, s.hamiltonian, s.constants);

        auto osp = open_output(output_dir, s.name + "_phase_" + std::to_string(i) + ".csv", s);
        osp << "t,total,dynamical,geometric\n";
        for (std::size_t k = 0; k < phases.size(); ++k)
            osp << fmt(phases.times[k]) << ',' << fmt(phases.total[k]) << ','
                << fmt(phases.dynamical[k]) << ',' << fmt(phases.geometric[k]) << '\n';

        const auto loop = detect_closure(traj, pc.closure_tol);
        if (!loop.has_value()) {
            os << fmt(traj.energies[0]) << ",nan,0,nan,nan,nan\n";
            continue;
        }
        const double action = loop_action(traj, *loop);
        const double gamma = action / s.constants.hbar;
        const auto bs = bohr_sommerfeld_residual(gamma);
        os << fmt(traj.energies[0]) << ',' << fmt(gamma) << ',' << bs.n << ','
           << fmt(bs.residual) << ',' << fmt(loop->period) << ',' << fmt(action) << '\n';
    }
}

void run_chaos(const Scenario& s, const std::string& output_dir) {
    if (!s.chaos.has_value())
        throw ConfigError("missing key 'chaos' (required by the chaos subcommand)");
    const ChaosConfig& cc = *s.chaos;
    const double ftle = ftle_benettin(s.hamiltonian, s.z0, cc.T, cc.dt, cc.renorm_every,
                                      cc.delta0, s.constants);
    auto os = open_output(output_dir, s.name + "_ftle.csv", s);
    os << "scenario,FTLE\n";
    os << s.name << ',' << fmt(ftle) << '\n';

    if (cc.divergence_t_final > 0.0) {
        const auto n = static_cast<std::size_t>(
            std::llround(cc.divergence_t_final / cc.divergence_sample_dt));
        const auto t_grid = linspace(0.0, cc.divergence_t_final, n + 1);
        DivergenceParams dp;
        dp.envelope = s.envelope;
        dp.engine = cc.engine;
        dp.grid = s.grid;
        dp.pde_dt = s.propagation.dt;
        const auto d = wavefunction_divergence(s.hamiltonian, s.z0, cc.dz, t_grid, s.constants, dp);
        auto osd = open_output(output_dir, s.name + "_divergence.csv", s);
        osd << "t,d\n";
        for (std::size_t i = 0; i < d.size(); ++i)
            osd << fmt(t_grid[i]) << ',' << fmt(d[i]) << '\n';
    }
}

void run_sweep_lambda(const Scenario& s, const std::string& output_dir) {
    if (s.lambda_list.empty())
        throw ConfigError("missing key 'lambda_list' (required by the sweep-lambda subcommand)");
    validate_scenario_box(s);
    const GridState s0 = initial_state(s);

    struct Row {
        double lambda;
        double e_quantal0, e_classical0;
        double exp_q_final, exp_p_final;
        double max_norm_drift, max_e_quantal_drift;
    };
    std::vector<Row> rows(s.lambda_list.size());
    std::atomic<std::size_t> next{0};
    std::mutex io_mutex;

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= s.lambda_list.size()) return;
            Scenario si = s;
            si.propagation.lambda = s.lambda_list[i];
            si.name = s.name + "_lambda_" + std::to_string(i);

            const auto g0 = deformed_generator(si.hamiltonian, si.z0, 0.0, si.propagation.lambda,
                                               si.propagation.mode);
            Row row{};
            row.lambda = si.propagation.lambda;
            row.e_quantal0 = expectation_operator(g0, s0, si.constants).real();
            row.e_classical0 = si.hamiltonian.evaluate(si.z0, 0.0);

            const auto rec = propagate(si.hamiltonian, s0, si.t_final, si.propagation,
                                       si.constants);
            row.exp_q_final = rec.exp_q.back();
            row.exp_p_final = rec.exp_p.back();
            for (std::size_t k = 0; k < rec.size(); ++k) {
                row.max_norm_drift = std::max(row.max_norm_drift, std::abs(rec.norm[k] - 1.0));
                row.max_e_quantal_drift = std::max(
                    row.max_e_quantal_drift, std::abs(rec.energy_quantal[k] - rec.energy_quantal[0]));
            }
            rows[i] = row;
            {
                std::lock_guard<std::mutex> lk(io_mutex);
                auto os = open_output(output_dir, si.name + "_trajectory.csv", si);
                write_trajectory_csv(os, rec);
            }
        }
    };

    const unsigned n_workers =
        std::min<unsigned>(max_parallel(), static_cast<unsigned>(s.lambda_list.size()));
    std::vector<std::thread> pool;
    for (unsigned w = 0; w + 1 < n_workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    auto os = open_output(output_dir, s.name + "_sweep.csv", s);
    os << "lambda,E_quantal_initial,E_classical_initial,exp_q_final,exp_p_final,"
          "max_norm_drift,max_E_quantal_drift\n";
    for (const Row& r : rows)
        os << fmt(r.lambda) << ',' << fmt(r.e_quantal0) << ',' << fmt(r.e_classical0) << ','
           << fmt(r.exp_q_final) << ',' << fmt(r.exp_p_final) << ',' << fmt(r.max_norm_drift)
           << ',' << fmt(r.max_e_quantal_drift) << '\n';
}

unsigned max_parallel() {
    if (const char* env = std::getenv("GSELAB_MAX_PARALLEL")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

}  // namespace gselab
