#include "omfbm/cli.hpp"

#include "omfbm/fbm.hpp"
#include "omfbm/parallel.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdio>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

#ifndef OMFBM_VERSION
#define OMFBM_VERSION "dev"
#endif

namespace omfbm {

const std::vector<std::string> kSubcommands = {"sample", "cm-norm",   "om-eval",  "mpp",         "smallball",
                                               "scaling", "cond-exp", "om-ratio", "trace-check", "halpha-probe"};

namespace {

std::string short_num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

[[noreturn]] void bad(const std::string& field, const std::string& msg) {
    throw std::invalid_argument(field + ": " + msg);
}

template <class T>
void get(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        bad(key, "wrong type in config");
    }
}

bool is_mc(const std::string& s) {
    return s == "smallball" || s == "scaling" || s == "cond-exp" || s == "om-ratio" || s == "halpha-probe";
}

}  // namespace

json RunConfig::to_json() const {
    return {{"subcommand", subcommand}, {"H", H},
            {"n", n},                   {"d", d},
            {"seed", seed},             {"norm", norm},
            {"drift", drift},           {"drift_params", drift_params},
            {"N", N},                   {"epsilons", epsilons},
            {"output_dir", output_dir}, {"threads", threads},
            {"method", method},         {"index", index},
            {"h", h},                   {"h_file", h_file},
            {"G", G},                   {"G_params", G_params},
            {"functional", functional}, {"c", c},
            {"s", s},                   {"m", m},
            {"alpha", alpha},           {"endpoint", endpoint},
            {"basis_size", basis_size}, {"max_iter", max_iter},
            {"tol", tol},               {"cm_method", cm_method},
            {"r_schedule", r_schedule}};
}

RunConfig RunConfig::from_json(const json& in) {
    if (!in.is_object()) throw std::invalid_argument("config: expected a JSON object");
    const json& j = in.contains("config") && in.at("config").is_object() ? in.at("config") : in;
    RunConfig c;
    const json known = c.to_json();
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.contains(it.key())) bad(it.key(), "unknown config key");
    get(j, "subcommand", c.subcommand);
    get(j, "H", c.H);
    get(j, "n", c.n);
    get(j, "d", c.d);
    get(j, "seed", c.seed);
    get(j, "norm", c.norm);
    get(j, "drift", c.drift);
    get(j, "drift_params", c.drift_params);
    get(j, "N", c.N);
    get(j, "epsilons", c.epsilons);
    get(j, "output_dir", c.output_dir);
    get(j, "threads", c.threads);
    get(j, "method", c.method);
    get(j, "index", c.index);
    get(j, "h", c.h);
    get(j, "h_file", c.h_file);
    get(j, "G", c.G);
    get(j, "G_params", c.G_params);
    get(j, "functional", c.functional);
    get(j, "c", c.c);
    get(j, "s", c.s);
    get(j, "m", c.m);
    get(j, "alpha", c.alpha);
    get(j, "endpoint", c.endpoint);
    get(j, "basis_size", c.basis_size);
    get(j, "max_iter", c.max_iter);
    get(j, "tol", c.tol);
    get(j, "cm_method", c.cm_method);
    get(j, "r_schedule", c.r_schedule);
    return c;
}

ScalarFn RunConfig::scalar_fn() const {
    if (G == "constant" && G_params.empty()) return make_scalar_fn(G, {1.0});
    return make_scalar_fn(G, G_params);
}

void RunConfig::validate() const {
    if (std::find(kSubcommands.begin(), kSubcommands.end(), subcommand) == kSubcommands.end())
        bad("subcommand", "unknown subcommand '" + subcommand + "'");
    if (H == 0.5) bad("H", "H = 1/2 is the Brownian case, which has no fractional kernel; use H in (0, 1/2)");
    if (!(H > 0.0 && H < 0.5)) bad("H", "must be in (0, 1/2), got " + short_num(H));
    if (n < 2) bad("n", "must be >= 2");
    if (n > 8192) bad("n", "must be <= 8192");
    if (d < 1 || d > 16) bad("d", "must be in [1, 16]");
    if (threads < 0) bad("threads", "must be >= 0");
    try {
        parse_norm(norm);
    } catch (const std::invalid_argument& e) {
        bad("norm", e.what());
    }
    if (is_mc(subcommand)) {
        if (N < 1000) bad("N", "must be >= 1000");
        for (double e : epsilons)
            if (!(e > 0.0) || !std::isfinite(e)) bad("epsilons", "values must be finite and > 0");
        if (epsilons.empty() && parse_norm(norm).kind != NormKind::Kind::Sup)
            bad("epsilons", "required for norm '" + norm + "'");
        if ((subcommand == "smallball" || subcommand == "scaling" || subcommand == "om-ratio") && n > 2048)
            bad("n", "cholesky sampling needs n <= 2048");
        if (subcommand == "scaling")
            for (size_t i = 1; i < epsilons.size(); ++i)
                if (!(epsilons[i] < epsilons[i - 1])) bad("epsilons", "must be strictly decreasing for scaling");
    }
    if (subcommand == "sample") {
        try {
            parse_fbm_method(method);
        } catch (const std::invalid_argument& e) {
            bad("method", e.what());
        }
        if (method == "cholesky" && n > 2048) bad("n", "cholesky sampling needs n <= 2048");
    }
    if (h != "zero" && h != "identity" && h != "sin") bad("h", "must be zero, identity or sin");
    if (subcommand == "om-eval" || subcommand == "mpp" || subcommand == "om-ratio") {
        try {
            make_drift(drift, drift_params, d);
        } catch (const std::invalid_argument& e) {
            bad("drift", e.what());
        }
    }
    if (subcommand == "trace-check" || subcommand == "halpha-probe" ||
        (subcommand == "cond-exp" && functional != "exp_linear")) {
        try {
            scalar_fn();
        } catch (const std::invalid_argument& e) {
            bad("G", e.what());
        }
    }
    if (subcommand == "cond-exp") {
        if (functional != "exp_linear" && functional != "exp_skorokhod_G" && functional != "exp_skorokhod_power" &&
            functional != "exp_skorokhod_deterministic")
            bad("functional", "must be exp_linear, exp_skorokhod_G, exp_skorokhod_power or exp_skorokhod_deterministic");
        if (!(s >= 0.0 && s <= 1.0)) bad("s", "must be in [0,1]");
        if (!std::isfinite(c)) bad("c", "must be finite");
    }
    if (subcommand == "halpha-probe" || (subcommand == "cond-exp" && functional == "exp_skorokhod_power")) {
        if (m < 1) bad("m", "must be >= 1");
    }
    if (subcommand == "halpha-probe") {
        if (!(alpha >= 0.0 && alpha < H)) bad("alpha", "must satisfy 0 <= alpha < H");
        const int mmax = static_cast<int>(std::floor(1.0 / (2.0 * H - 2.0 * alpha) + 1e-12));
        if (m > mmax) bad("m", "must be <= floor(1/(2H - 2 alpha)) = " + std::to_string(mmax));
    }
    if (subcommand == "mpp") {
        if (!endpoint.empty() && static_cast<int>(endpoint.size()) != d)
            bad("endpoint", "needs d = " + std::to_string(d) + " values");
        if (basis_size < 1 || basis_size > 64) bad("basis_size", "must be in [1, 64]");
        if (max_iter < 1) bad("max_iter", "must be >= 1");
        if (!(tol > 0.0)) bad("tol", "must be > 0");
    }
    if (cm_method != "derivative" && cm_method != "four_factor") bad("cm_method", "must be derivative or four_factor");
    if (subcommand == "trace-check") {
        if (!r_schedule.empty() && r_schedule.size() < 2) bad("r_schedule", "needs at least two radii");
        for (double r : r_schedule)
            if (!(r >= 2.0 / n * (1.0 - 1e-12))) bad("r_schedule", "radii must be >= 2 dt");
    }
}

namespace {

CmElement load_h(const RunConfig& c, const Grid& g) {
    if (!c.h_file.empty()) {
        Path p = read_path_csv_file(c.h_file);
        if (p.grid() != g) bad("h_file", "grid has n = " + std::to_string(p.grid().n()) + ", run uses n = " + std::to_string(g.n()));
        if (p.dim() != c.d) bad("h_file", "has " + std::to_string(p.dim()) + " components, run uses d = " + std::to_string(c.d));
        if (!p.is_pinned()) bad("h_file", "path must start at 0");
        return CmElement(std::move(p));
    }
    Eigen::MatrixXd s(c.d, g.size());
    for (int j = 0; j < g.size(); ++j) {
        const double t = g.node(j);
        const double v = c.h == "identity" ? t : c.h == "sin" ? std::sin(M_PI * t) : 0.0;
        s.col(j).setConstant(v);
    }
    return CmElement(Path(g, std::move(s)));
}

std::vector<double> eps_or_default(const RunConfig& c) {
    if (!c.epsilons.empty()) return c.epsilons;
    return {1.0, 0.8, 0.7, 0.6};
}

CmMethod cm_method_of(const RunConfig& c) {
    return c.cm_method == "four_factor" ? CmMethod::FourFactor : CmMethod::Derivative;
}

struct Outputs {
    json report = json::object();
    std::vector<std::pair<std::string, CsvTable>> tables;
    std::vector<std::pair<std::string, Path>> paths;
};

Outputs dispatch(const RunConfig& c) {
    const HurstConfig cfg = hurst_config(c.H);
    const Grid g(c.n);
    const NormKind norm = parse_norm(c.norm);
    Outputs out;
    json& r = out.report;
    r["subcommand"] = c.subcommand;
    const std::string& sc = c.subcommand;

    if (sc == "sample") {
        const FbmMethod m = parse_fbm_method(c.method);
        FbmSample s = m == FbmMethod::Cholesky ? sample_cholesky(g, cfg, c.d, c.seed, c.index)
                                              : sample_volterra(g, cfg, c.d, c.seed, c.index);
        r["method"] = to_string(m);
        r["seed"] = c.seed;
        r["index"] = c.index;
        r["sup_norm"] = num(sup_norm(s.path));
        r["norm"] = c.norm;
        r["path_norm"] = num(path_norm(s.path, norm));
        out.paths.emplace_back("path.csv", s.path);
        if (s.dW) {
            CsvTable t;
            t.header = {"t"};
            for (int k = 0; k < c.d; ++k) t.header.push_back("dW" + std::to_string(k + 1));
            for (int j = 0; j < g.n(); ++j) {
                std::vector<std::string> row{fmt_double(g.node(j))};
                for (int k = 0; k < c.d; ++k) row.push_back(fmt_double((*s.dW)(k, j)));
                t.add(std::move(row));
            }
            out.tables.emplace_back("dW.csv", std::move(t));
        }
    } else if (sc == "cm-norm") {
        const CmElement h = load_h(c, g);
        const CmMethod m = cm_method_of(c);
        r["cm_norm"] = num(cm_norm(h, cfg, m));
        r["cm_method"] = c.cm_method;
        out.paths.emplace_back("preimage.csv", Path(g, cm_preimage(h, cfg, m)));
    } else if (sc == "om-eval") {
        const DriftField b = make_drift(c.drift, c.drift_params, c.d);
        r["om"] = to_json(om_functional(b, load_h(c, g), cfg));
    } else if (sc == "mpp") {
        const DriftField b = make_drift(c.drift, c.drift_params, c.d);
        std::optional<Eigen::VectorXd> end;
        if (!c.endpoint.empty()) end = Eigen::Map<const Eigen::VectorXd>(c.endpoint.data(), c.d);
        OptimizerParams op;
        op.basis_size = c.basis_size;
        op.max_iter = c.max_iter;
        op.tol = c.tol;
        const MppResult res = most_probable_path(b, end, cfg, g, op);
        r["om"] = to_json(res.report);
        r["status"] = to_string(res.status);
        r["iterations"] = res.iterations;
        r["evaluations"] = res.evaluations;
        r["grad_norm"] = num(res.grad_norm);
        out.paths.emplace_back("mpp_path.csv", res.h.h);
        CsvTable t;
        t.header = {"iteration", "neg_j"};
        for (size_t i = 0; i < res.history.size(); ++i) t.add({std::to_string(i), fmt_double(res.history[i])});
        out.tables.emplace_back("history.csv", std::move(t));
    } else if (sc == "smallball") {
        const ScalingReport s = smallball_scaling(norm, eps_or_default(c), cfg, g, c.N, c.seed, c.d);
        std::vector<McEstimate> es;
        for (size_t i = 0; i < s.epsilons.size(); ++i) {
            McEstimate e;
            e.epsilon = s.epsilons[i];
            e.mean = s.probs[i];
            e.std_err = std::sqrt(e.mean * (1.0 - e.mean) / c.N);
            e.n_total = c.N;
            e.n_accepted = s.hits[i];
            e.seed = c.seed;
            e.norm = norm;
            es.push_back(e);
        }
        json a = json::array();
        for (const auto& e : es) a.push_back(to_json(e));
        r["estimates"] = a;
        out.tables.emplace_back("smallball.csv", mc_table(es));
    } else if (sc == "scaling") {
        const ScalingReport s = smallball_scaling(norm, eps_or_default(c), cfg, g, c.N, c.seed, c.d);
        r["scaling"] = to_json(s);
        CsvTable t;
        t.header = {"epsilon", "estimate", "stderr", "n_accepted", "log_prob", "rescaled"};
        for (size_t i = 0; i < s.epsilons.size(); ++i)
            t.add({fmt_double(s.epsilons[i]), fmt_double(s.probs[i]),
                   fmt_double(std::sqrt(s.probs[i] * (1.0 - s.probs[i]) / c.N)), std::to_string(s.hits[i]),
                   fmt_double(s.log_probs[i]), fmt_double(s.rescaled[i])});
        out.tables.emplace_back("scaling.csv", std::move(t));
    } else if (sc == "cond-exp") {
        Functional F;
        if (c.functional == "exp_linear")
            F = exp_linear(c.c, c.s);
        else if (c.functional == "exp_skorokhod_G")
            F = exp_skorokhod_G(c.scalar_fn(), load_h(c, g));
        else if (c.functional == "exp_skorokhod_power")
            F = exp_skorokhod_power(c.scalar_fn(), load_h(c, g), c.m);
        else
            F = exp_skorokhod_deterministic(load_h(c, g));
        const auto es = conditional_exp_schedule(F, eps_or_default(c), norm, cfg, g, c.N, c.seed, c.d);
        json a = json::array();
        for (const auto& e : es) a.push_back(to_json(e));
        r["functional"] = c.functional;
        r["estimates"] = a;
        out.tables.emplace_back("cond_exp.csv", mc_table(es));
    } else if (sc == "om-ratio") {
        const DriftField b = make_drift(c.drift, c.drift_params, c.d);
        const OmRatioReport rep = om_ratio_experiment(b, load_h(c, g), eps_or_default(c), norm, cfg, g, c.N, c.seed);
        r["ratio"] = to_json(rep);
        CsvTable t;
        t.header = {"epsilon", "estimate", "stderr", "n_accepted"};
        for (const auto& x : rep.rows)
            t.add({fmt_double(x.epsilon), fmt_double(x.log_ratio), fmt_double(x.log_stderr), std::to_string(x.n_b)});
        out.tables.emplace_back("om_ratio.csv", std::move(t));
    } else if (sc == "trace-check") {
        const TraceReport t = trace_identity_check(c.scalar_fn(), load_h(c, g), cfg, c.r_schedule);
        r["trace"] = to_json(t);
        CsvTable tab;
        tab.header = {"r", "box_average"};
        for (size_t i = 0; i < t.r_schedule.size(); ++i) tab.add({fmt_double(t.r_schedule[i]), fmt_double(t.per_r[i])});
        out.tables.emplace_back("trace.csv", std::move(tab));
    } else if (sc == "halpha-probe") {
        const ProbeReport p = h_alpha_probe(load_h(c, g), c.scalar_fn(), c.m, c.alpha,
                                            eps_or_default(c), cfg, g, c.N, c.seed);
        r["probe"] = to_json(p);
        out.tables.emplace_back("halpha.csv", mc_table(p.estimates));
    }
    return out;
}

}  // namespace

int run(const RunConfig& c) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
        c.validate();
        if (c.threads > 0) set_default_threads(c.threads);
        Outputs out = dispatch(c);
        namespace fs = std::filesystem;
        fs::create_directories(c.output_dir);
        const fs::path dir(c.output_dir);
        write_json_file((dir / "report.json").string(), out.report);
        for (const auto& [name, t] : out.tables) write_csv_file((dir / name).string(), t);
        for (const auto& [name, p] : out.paths) write_path_file((dir / name).string(), p);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_json_file((dir / "manifest.json").string(),
                        {{"config", c.to_json()}, {"seed", c.seed}, {"version", OMFBM_VERSION}, {"wall_time", wall}});
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}

int cli_main(int argc, char** argv) {
    CLI::App app{"Onsager-Machlup and small-ball toolkit for fractional Brownian motion"};
    app.set_version_flag("--version", std::string(OMFBM_VERSION));
    RunConfig f;
    std::string config_file;
    app.add_option("subcommand", f.subcommand, "one of: sample cm-norm om-eval mpp smallball scaling cond-exp "
                                               "om-ratio trace-check halpha-probe")
        ->required();
    app.add_option("--config", config_file, "JSON config or run manifest");
    std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> ov;
    auto opt = [&]<class T>(const char* name, T RunConfig::*field, const char* help) {
        CLI::Option* o = app.add_option(name, f.*field, help);
        ov.emplace_back(o, [&f, field](RunConfig& dst) { dst.*field = f.*field; });
        return o;
    };
    opt("--H", &RunConfig::H, "Hurst parameter in (0, 1/2)");
    opt("--n", &RunConfig::n, "grid cells");
    opt("--d", &RunConfig::d, "dimension");
    opt("--seed", &RunConfig::seed, "RNG seed");
    opt("--norm", &RunConfig::norm, "sup | holder:a | sobolev:a");
    opt("--drift", &RunConfig::drift, "zero | constant | linear | tanh | polynomial");
    opt("--drift-params", &RunConfig::drift_params, "comma separated")->delimiter(',');
    opt("--N", &RunConfig::N, "Monte Carlo samples");
    opt("--epsilons", &RunConfig::epsilons, "comma separated")->delimiter(',');
    opt("--output-dir", &RunConfig::output_dir, "output directory");
    opt("--threads", &RunConfig::threads, "worker threads (0 = all cores)");
    opt("--method", &RunConfig::method, "cholesky | volterra");
    opt("--index", &RunConfig::index, "sample index");
    opt("--h-shape", &RunConfig::h, "zero | identity | sin");
    opt("--h-file", &RunConfig::h_file, "path CSV (t,x1..xd)");
    opt("--G", &RunConfig::G, "constant | cos | tanh | affine_clamped");
    opt("--G-params", &RunConfig::G_params, "comma separated")->delimiter(',');
    opt("--functional", &RunConfig::functional, "exp_linear | exp_skorokhod_G | exp_skorokhod_power | exp_skorokhod_deterministic");
    opt("--c", &RunConfig::c, "exp_linear coefficient");
    opt("--s", &RunConfig::s, "exp_linear time");
    opt("--m", &RunConfig::m, "power of B");
    opt("--alpha", &RunConfig::alpha, "Hoelder exponent for halpha-probe");
    opt("--endpoint", &RunConfig::endpoint, "mpp endpoint, comma separated")->delimiter(',');
    opt("--basis-size", &RunConfig::basis_size, "mpp basis size");
    opt("--max-iter", &RunConfig::max_iter, "mpp iterations");
    opt("--tol", &RunConfig::tol, "mpp gradient tolerance");
    opt("--cm-method", &RunConfig::cm_method, "derivative | four_factor");
    opt("--r-schedule", &RunConfig::r_schedule, "trace box radii, comma separated")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    RunConfig c;
    try {
        if (!config_file.empty()) {
            std::ifstream is(config_file);
            if (!is) bad("config", "cannot read '" + config_file + "'");
            json j;
            try {
                j = json::parse(is);
            } catch (const json::exception& e) {
                bad("config", std::string("invalid JSON: ") + e.what());
            }
            c = RunConfig::from_json(j);
        }
        if (const char* env = std::getenv("OMFBM_OUTPUT_DIR"); env && *env) c.output_dir = env;
        c.subcommand = f.subcommand;
        for (auto& [o, apply] : ov)
            if (o->count() > 0) apply(c);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return run(c);
}

}  // namespace omfbm
