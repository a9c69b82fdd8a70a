#include "siwf/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace siwf {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

[[noreturn]] void fail(const std::string& key, const std::string& what) {
    throw ConfigError("config key '" + key + "': " + what);
}

const json& require_object(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path.empty() ? "<root>" : path, "must be an object");
    return j;
}

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    require_object(j, path);
    for (const auto& [k, v] : j.items()) {
        if (allowed.count(k) == 0) {
            std::string list;
            for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
            fail(join(path, k), "unknown key (allowed: " + list + ")");
        }
    }
}

double get_number(const json& j, const std::string& path, const std::string& key, double fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number()) fail(join(path, key), "must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(join(path, key), "must be finite");
    return x;
}

long long get_integer(const json& j, const std::string& path, const std::string& key, long long fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number_integer()) fail(join(path, key), "must be an integer");
    return v.get<long long>();
}

bool get_bool(const json& j, const std::string& path, const std::string& key, bool fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_boolean()) fail(join(path, key), "must be true or false");
    return v.get<bool>();
}

std::string get_string(const json& j, const std::string& path, const std::string& key,
                       const std::string& fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_string()) fail(join(path, key), "must be a string");
    return v.get<std::string>();
}

const json& get_required(const json& j, const std::string& path, const std::string& key) {
    if (!j.contains(key)) fail(join(path, key), "is required");
    return j.at(key);
}

cplx parse_entry(const json& e, const std::string& key) {
    if (e.is_number()) return {e.get<double>(), 0.0};
    if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
        return {e[0].get<double>(), e[1].get<double>()};
    fail(key, "entries must be numbers or [re, im] pairs");
}

// --------------------------------------------------------------- models --

json resolve_qubit(const json& params, const std::string& path) {
    check_keys(params, path, {"omega_x", "omega_z", "kappa", "gamma"});
    QubitParams d;
    return {{"omega_x", get_number(params, path, "omega_x", d.omega_x)},
            {"omega_z", get_number(params, path, "omega_z", d.omega_z)},
            {"kappa", get_number(params, path, "kappa", d.kappa)},
            {"gamma", get_number(params, path, "gamma", d.gamma)}};
}

json resolve_rabi(const json& params, const std::string& path) {
    check_keys(params, path, {"omega1", "omega2", "g", "alpha", "psi", "n_fock"});
    RabiParams d;
    return {{"omega1", get_number(params, path, "omega1", d.omega1)},
            {"omega2", get_number(params, path, "omega2", d.omega2)},
            {"g", get_number(params, path, "g", d.g)},
            {"alpha", get_number(params, path, "alpha", d.alpha)},
            {"psi", get_number(params, path, "psi", d.psi)},
            {"n_fock", get_integer(params, path, "n_fock", d.n_fock)}};
}

json resolve_potential(const json& j, const std::string& path) {
    if (j.is_null()) return {{"type", "zero"}};
    require_object(j, path);
    const std::string type = get_string(j, path, "type", "zero");
    if (type == "zero") {
        check_keys(j, path, {"type"});
        return {{"type", "zero"}};
    }
    if (type == "harmonic") {
        check_keys(j, path, {"type", "k"});
        return {{"type", "harmonic"}, {"k", get_number(j, path, "k", 1.0)}};
    }
    if (type == "tabulated") {
        check_keys(j, path, {"type", "values"});
        const json& v = get_required(j, path, "values");
        if (!v.is_array()) fail(join(path, "values"), "must be an array of numbers");
        for (const auto& x : v)
            if (!x.is_number()) fail(join(path, "values"), "must be an array of numbers");
        return {{"type", "tabulated"}, {"values", v}};
    }
    fail(join(path, "type"), "must be one of zero, harmonic, tabulated");
}

json resolve_box(const json& params, const std::string& path) {
    check_keys(params, path, {"alpha_kin", "gamma", "x_min", "x_max", "n_grid", "potential"});
    BoxParams d;
    return {{"alpha_kin", get_number(params, path, "alpha_kin", d.alpha_kin)},
            {"gamma", get_number(params, path, "gamma", d.gamma)},
            {"x_min", get_number(params, path, "x_min", d.x_min)},
            {"x_max", get_number(params, path, "x_max", d.x_max)},
            {"n_grid", get_integer(params, path, "n_grid", d.n_grid)},
            {"potential", resolve_potential(params.value("potential", json()), join(path, "potential"))}};
}

json resolve_custom(const json& params, const std::string& path) {
    check_keys(params, path, {"hamiltonian", "lindblads", "observables"});
    json out;
    out["hamiltonian"] = matrix_to_json(parse_matrix(get_required(params, path, "hamiltonian"),
                                                     join(path, "hamiltonian")));
    out["lindblads"] = json::array();
    if (params.contains("lindblads")) {
        const json& ls = params.at("lindblads");
        if (!ls.is_array()) fail(join(path, "lindblads"), "must be an array of matrices");
        for (std::size_t i = 0; i < ls.size(); ++i)
            out["lindblads"].push_back(
                matrix_to_json(parse_matrix(ls[i], join(path, "lindblads[" + std::to_string(i) + "]"))));
    }
    out["observables"] = json::object();
    if (params.contains("observables")) {
        const json& obs = require_object(params.at("observables"), join(path, "observables"));
        for (const auto& [name, m] : obs.items())
            out["observables"][name] = matrix_to_json(parse_matrix(m, join(path, "observables." + name)));
    }
    return out;
}

json resolve_model_block(const json& j) {
    const std::string path = "model";
    check_keys(j, path, {"preset", "params"});
    const std::string preset = get_string(j, path, "preset", "");
    const json params = j.value("params", json::object());
    const std::string ppath = join(path, "params");
    require_object(params, ppath);
    json resolved;
    if (preset == "qubit") resolved = resolve_qubit(params, ppath);
    else if (preset == "rabi") resolved = resolve_rabi(params, ppath);
    else if (preset == "box") resolved = resolve_box(params, ppath);
    else if (preset == "custom") resolved = resolve_custom(params, ppath);
    else fail(join(path, "preset"), "must be one of qubit, rabi, box, custom");
    return {{"preset", preset}, {"params", resolved}};
}

// -------------------------------------------------------- initial state --

json resolve_state_block(const json& j) {
    const std::string path = "initial_state";
    if (j.is_null()) return {{"type", "basis"}, {"index", 0}};
    require_object(j, path);
    const std::string type = get_string(j, path, "type", "basis");
    if (type == "basis") {
        check_keys(j, path, {"type", "index"});
        const long long idx = get_integer(j, path, "index", 0);
        if (idx < 0) fail(join(path, "index"), "must be >= 0");
        return {{"type", "basis"}, {"index", idx}};
    }
    if (type == "maximally_mixed") {
        check_keys(j, path, {"type"});
        return {{"type", "maximally_mixed"}};
    }
    if (type == "vector") {
        check_keys(j, path, {"type", "amplitudes"});
        const StateVector v = parse_vector(get_required(j, path, "amplitudes"), join(path, "amplitudes"));
        json amps = json::array();
        for (Eigen::Index i = 0; i < v.size(); ++i) amps.push_back({v(i).real(), v(i).imag()});
        return {{"type", "vector"}, {"amplitudes", amps}};
    }
    if (type == "density") {
        check_keys(j, path, {"type", "matrix", "diagonal"});
        if (j.contains("matrix") == j.contains("diagonal"))
            fail(path, "a density state needs exactly one of 'matrix' or 'diagonal'");
        if (j.contains("matrix"))
            return {{"type", "density"},
                    {"matrix", matrix_to_json(parse_matrix(j.at("matrix"), join(path, "matrix")))}};
        const json& d = j.at("diagonal");
        if (!d.is_array() || d.empty()) fail(join(path, "diagonal"), "must be a nonempty array of numbers");
        for (const auto& x : d)
            if (!x.is_number()) fail(join(path, "diagonal"), "must be a nonempty array of numbers");
        return {{"type", "density"}, {"diagonal", d}};
    }
    if (type == "ensemble") {
        check_keys(j, path, {"type", "weights", "vectors"});
        const json& w = get_required(j, path, "weights");
        const json& vs = get_required(j, path, "vectors");
        if (!w.is_array() || w.empty()) fail(join(path, "weights"), "must be a nonempty array of numbers");
        for (const auto& x : w)
            if (!x.is_number()) fail(join(path, "weights"), "must be a nonempty array of numbers");
        if (!vs.is_array() || vs.size() != w.size())
            fail(join(path, "vectors"), "must be an array with one vector per weight");
        json out_vs = json::array();
        for (std::size_t n = 0; n < vs.size(); ++n) {
            const StateVector v = parse_vector(vs[n], join(path, "vectors[" + std::to_string(n) + "]"));
            json amps = json::array();
            for (Eigen::Index i = 0; i < v.size(); ++i) amps.push_back({v(i).real(), v(i).imag()});
            out_vs.push_back(amps);
        }
        return {{"type", "ensemble"}, {"weights", w}, {"vectors", out_vs}};
    }
    fail(join(path, "type"), "must be one of basis, maximally_mixed, vector, density, ensemble");
}

Tolerances parse_tolerances(const json& j) {
    Tolerances t;
    if (j.is_null()) return t;
    const std::string path = "tolerances";
    check_keys(j, path, {"hermiticity", "trace", "psd", "ortho", "reconstruction", "norm"});
    t.hermiticity = get_number(j, path, "hermiticity", t.hermiticity);
    t.trace = get_number(j, path, "trace", t.trace);
    t.psd = get_number(j, path, "psd", t.psd);
    t.ortho = get_number(j, path, "ortho", t.ortho);
    t.reconstruction = get_number(j, path, "reconstruction", t.reconstruction);
    t.norm = get_number(j, path, "norm", t.norm);
    for (double v : {t.hermiticity, t.trace, t.psd, t.ortho, t.reconstruction, t.norm})
        if (!(v > 0.0)) fail(path, "all tolerances must be positive");
    return t;
}

json tolerances_to_json(const Tolerances& t) {
    return {{"hermiticity", t.hermiticity}, {"trace", t.trace},
            {"psd", t.psd},                 {"ortho", t.ortho},
            {"reconstruction", t.reconstruction}, {"norm", t.norm}};
}

json resolve_observables(const json& j) {
    if (j.is_null()) return json::array();
    if (!j.is_array()) fail("observables", "must be an array of names or {name, matrix} objects");
    json out = json::array();
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string path = "observables[" + std::to_string(i) + "]";
        const json& o = j[i];
        if (o.is_string()) {
            out.push_back(o);
            continue;
        }
        check_keys(o, path, {"name", "matrix"});
        const std::string name = get_string(o, path, "name", "");
        if (name.empty()) fail(join(path, "name"), "is required");
        out.push_back({{"name", name},
                       {"matrix", matrix_to_json(parse_matrix(get_required(o, path, "matrix"),
                                                              join(path, "matrix")))}});
    }
    return out;
}

bool is_manifest(const json& doc) {
    return doc.is_object() && doc.contains("config") && doc.contains("code_version");
}

}  // namespace

// ----------------------------------------------------------- matrices --

Operator parse_matrix(const json& j, const std::string& key) {
    if (!j.is_array() || j.empty()) fail(key, "must be a nonempty array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    if (!j[0].is_array() || j[0].empty()) fail(key, "rows must be nonempty arrays");
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Operator m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) fail(key, "rows must have equal length");
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = parse_entry(row[static_cast<std::size_t>(c)], key);
    }
    if (rows != cols) fail(key, "matrix must be square");
    return m;
}

StateVector parse_vector(const json& j, const std::string& key) {
    if (!j.is_array() || j.empty()) fail(key, "must be a nonempty array of amplitudes");
    StateVector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = parse_entry(j[i], key);
    return v;
}

json matrix_to_json(const Operator& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
        rows.push_back(row);
    }
    return rows;
}

// ------------------------------------------------------------- builders --

ModelSpec build_model(const json& block, const Tolerances& tol) {
    const std::string preset = block.at("preset").get<std::string>();
    const json& p = block.at("params");
    try {
        if (preset == "qubit") {
            return qubit_model({p.at("omega_x").get<double>(), p.at("omega_z").get<double>(),
                                p.at("kappa").get<double>(), p.at("gamma").get<double>()});
        }
        if (preset == "rabi") {
            RabiParams r;
            r.omega1 = p.at("omega1").get<double>();
            r.omega2 = p.at("omega2").get<double>();
            r.g = p.at("g").get<double>();
            r.alpha = p.at("alpha").get<double>();
            r.psi = p.at("psi").get<double>();
            r.n_fock = p.at("n_fock").get<int>();
            return rabi_model(r);
        }
        if (preset == "box") {
            BoxParams b;
            b.alpha_kin = p.at("alpha_kin").get<double>();
            b.gamma = p.at("gamma").get<double>();
            b.x_min = p.at("x_min").get<double>();
            b.x_max = p.at("x_max").get<double>();
            b.n_grid = p.at("n_grid").get<int>();
            const json& pot = p.at("potential");
            const std::string type = pot.at("type").get<std::string>();
            if (type == "harmonic") {
                const double k = pot.at("k").get<double>();
                b.potential = [k](double x) { return 0.5 * k * x * x; };
            } else if (type == "tabulated") {
                const auto values = pot.at("values").get<std::vector<double>>();
                if (static_cast<int>(values.size()) != b.n_grid)
                    fail("model.params.potential.values", "needs exactly n_grid values");
                const double x0 = b.x_min, h = b.spacing();
                b.potential = [values, x0, h](double x) {
                    const auto i = static_cast<std::size_t>(std::lround((x - x0) / h) - 1);
                    return values.at(i);
                };
            }
            return box_model(b);
        }
        if (preset == "custom") {
            std::vector<Operator> ls;
            for (const auto& l : p.at("lindblads")) ls.push_back(parse_matrix(l, "model.params.lindblads"));
            ModelSpec m(parse_matrix(p.at("hamiltonian"), "model.params.hamiltonian"), std::move(ls), tol);
            for (const auto& [name, a] : p.at("observables").items())
                m.add_observable(name, parse_matrix(a, "model.params.observables." + name));
            return m;
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        fail("model", e.what());
    }
    fail("model.preset", "must be one of qubit, rabi, box, custom");
}

InitialDecomposition build_initial_state(const json& block, const ModelSpec& model, const Tolerances& tol) {
    const std::string path = "initial_state";
    const Eigen::Index d = model.d();
    const std::string type = block.at("type").get<std::string>();
    auto check_dim = [&](Eigen::Index n, const std::string& key) {
        if (n != d)
            fail(join(path, key), "dimension " + std::to_string(n) + " does not match the model dimension " +
                                      std::to_string(d));
    };
    try {
        if (type == "basis") {
            const auto idx = block.at("index").get<Eigen::Index>();
            if (idx >= d) fail(join(path, "index"), "must be < model dimension " + std::to_string(d));
            StateVector v = StateVector::Zero(d);
            v(idx) = 1.0;
            return {{1.0}, {v}};
        }
        if (type == "maximally_mixed") {
            return decompose_density(DensityMatrix::checked(identity(d) / static_cast<double>(d), tol), tol);
        }
        if (type == "vector") {
            const StateVector v = parse_vector(block.at("amplitudes"), join(path, "amplitudes"));
            check_dim(v.size(), "amplitudes");
            if (std::abs(v.norm() - 1.0) > tol.norm) fail(join(path, "amplitudes"), "vector must have unit norm");
            return {{1.0}, {v}};
        }
        if (type == "density") {
            Operator rho;
            if (block.contains("matrix")) {
                rho = parse_matrix(block.at("matrix"), join(path, "matrix"));
                check_dim(rho.rows(), "matrix");
            } else {
                const auto diag = block.at("diagonal").get<std::vector<double>>();
                check_dim(static_cast<Eigen::Index>(diag.size()), "diagonal");
                rho = Operator::Zero(d, d);
                for (Eigen::Index i = 0; i < d; ++i) rho(i, i) = diag[static_cast<std::size_t>(i)];
            }
            return decompose_density(DensityMatrix::checked(rho, tol), tol);
        }
        if (type == "ensemble") {
            InitialDecomposition dec;
            dec.weights = block.at("weights").get<std::vector<double>>();
            for (std::size_t n = 0; n < block.at("vectors").size(); ++n) {
                const std::string key = "vectors[" + std::to_string(n) + "]";
                dec.vectors.push_back(parse_vector(block.at("vectors")[n], join(path, key)));
                check_dim(dec.vectors.back().size(), key);
            }
            dec.validate();
            return dec;
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        fail(path, e.what());
    }
    fail(join(path, "type"), "must be one of basis, maximally_mixed, vector, density, ensemble");
}

std::vector<Observable> build_observables(const json& list, const ModelSpec& model) {
    std::vector<Observable> out;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < list.size(); ++i) {
        const json& o = list[i];
        const std::string key = "observables[" + std::to_string(i) + "]";
        Observable obs;
        if (o.is_string()) {
            try {
                obs = resolve_observable(model, o.get<std::string>());
            } catch (const Error& e) {
                fail(key, e.what());
            }
        } else {
            obs.name = o.at("name").get<std::string>();
            obs.op = parse_matrix(o.at("matrix"), join(key, "matrix"));
            if (obs.op.rows() != model.d()) fail(join(key, "matrix"), "dimension does not match the model");
        }
        if (!seen.insert(obs.name).second) fail(key, "duplicate observable '" + obs.name + "'");
        out.push_back(std::move(obs));
    }
    return out;
}

// --------------------------------------------------------------- config --

json SimConfig::to_json() const {
    return {{"model", model},
            {"initial_state", initial_state},
            {"dt", dt},
            {"t_final", t_final},
            {"n_trajectories", n_trajectories},
            {"seed", seed},
            {"scheme", siwf::to_string(scheme)},
            {"equation", siwf::to_string(equation)},
            {"save_stride", save_stride},
            {"observables", observables},
            {"output_dir", output_dir},
            {"renormalize", renormalize},
            {"write_densities", write_densities},
            {"write_trajectories", write_trajectories},
            {"tolerances", tolerances_to_json(tol)}};
}

SimConfig config_from_json(const json& input) {
    const json& doc = is_manifest(input) ? input.at("config") : input;
    check_keys(doc, "", {"model", "initial_state", "dt", "t_final", "n_trajectories", "seed", "scheme", "equation",
                         "save_stride", "observables", "output_dir", "renormalize", "write_densities",
                         "write_trajectories", "tolerances"});
    SimConfig cfg;
    cfg.model = resolve_model_block(get_required(doc, "", "model"));
    cfg.initial_state = resolve_state_block(doc.value("initial_state", json()));
    cfg.dt = get_number(doc, "", "dt", cfg.dt);
    cfg.t_final = get_number(doc, "", "t_final", cfg.t_final);
    const long long n = get_integer(doc, "", "n_trajectories", 1);
    if (doc.contains("seed")) {
        const json& s = doc.at("seed");
        if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() && s.get<long long>() < 0))
            fail("seed", "must be a non-negative 64-bit integer");
        cfg.seed = s.get<std::uint64_t>();
    }
    try {
        cfg.scheme = scheme_from_string(get_string(doc, "", "scheme", "euler_maruyama"));
    } catch (const Error& e) {
        fail("scheme", e.what());
    }
    try {
        cfg.equation = equation_from_string(get_string(doc, "", "equation", "siwf"));
    } catch (const Error& e) {
        fail("equation", e.what());
    }
    const long long stride = get_integer(doc, "", "save_stride", 1);
    cfg.observables = resolve_observables(doc.value("observables", json()));
    cfg.output_dir = get_string(doc, "", "output_dir", cfg.output_dir);
    cfg.renormalize = get_bool(doc, "", "renormalize", cfg.renormalize);
    cfg.write_densities = get_bool(doc, "", "write_densities", cfg.write_densities);
    cfg.write_trajectories = get_bool(doc, "", "write_trajectories", cfg.write_trajectories);
    cfg.tol = parse_tolerances(doc.value("tolerances", json()));

    if (!(cfg.dt > 0.0)) fail("dt", "dt must be positive");
    if (!(cfg.t_final > 0.0)) fail("t_final", "t_final must be positive");
    if (cfg.dt > cfg.t_final) fail("dt", "dt must not exceed t_final");
    if (n < 1) fail("n_trajectories", "must be >= 1");
    if (stride < 1) fail("save_stride", "must be >= 1");
    if (cfg.output_dir.empty()) fail("output_dir", "must not be empty");
    cfg.n_trajectories = static_cast<std::size_t>(n);
    cfg.save_stride = static_cast<long>(stride);

    // Cross-checks that need the model.
    const ModelSpec model = build_model(cfg.model, cfg.tol);
    const auto dec = build_initial_state(cfg.initial_state, model, cfg.tol);
    build_observables(cfg.observables, model);
    if (cfg.equation == Equation::nonlinear && dec.weights.size() != 1)
        fail("equation", "the nonlinear equation needs a pure initial state");
    return cfg;
}

SimConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return config_from_json(doc);
}

SimConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

SimConfig with_override(const SimConfig& cfg, const std::string& key, const json& value) {
    json doc = cfg.to_json();
    doc[key] = value;
    return config_from_json(doc);
}

ResolvedRun resolve(const SimConfig& cfg) {
    auto model = std::make_shared<const ModelSpec>(build_model(cfg.model, cfg.tol));
    auto dec = build_initial_state(cfg.initial_state, *model, cfg.tol);
    auto observables = build_observables(cfg.observables, *model);
    TrajectorySpec spec{StepContext(model, cfg.scheme, cfg.dt, cfg.renormalize, cfg.tol),
                        cfg.equation,
                        dec,
                        cfg.t_final,
                        cfg.seed,
                        RecordOptions{}};
    spec.opts.save_stride = cfg.save_stride;
    spec.opts.observables = observables;
    return {std::move(model), std::move(dec), std::move(observables), std::move(spec)};
}

}  // namespace siwf
