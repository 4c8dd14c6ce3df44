#include "tucker/cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <future>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"

#include "tucker/errors.hpp"
#include "tucker/generate.hpp"
#include "tucker/io.hpp"
#include "tucker/verify.hpp"

namespace tucker::cli {

namespace {

namespace fs = std::filesystem;

template <class T>
void take(std::optional<T>& dst, const std::optional<T>& src) {
    if (src) dst = src;
}

template <class T>
void put(json& j, const char* key, const std::optional<T>& v) {
    if (v) j[key] = *v;
}

template <class T>
void get(const json& j, const char* key, std::optional<T>& v) {
    if (j.contains(key)) v = j.at(key).get<T>();
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

int exit_code(RunStatus s) {
    switch (s) {
        case RunStatus::Converged: return kOk;
        case RunStatus::Budget: return kBudget;
        case RunStatus::NoDirection: return kNoDirection;
    }
    return kFailure;
}

}  // namespace

void RunConfig::overlay(const RunConfig& o) {
    take(mode, o.mode);
    take(r, o.r);
    take(d, o.d);
    take(lambda, o.lambda);
    take(epsilon, o.epsilon);
    take(seed, o.seed);
    take(budget, o.budget);
    take(samples_per_block, o.samples_per_block);
    take(delta_points, o.delta_points);
    take(delta_decades, o.delta_decades);
    take(init, o.init);
    take(tau1, o.tau1);
    take(tau2, o.tau2);
    take(min_improvement, o.min_improvement);
    take(sigma, o.sigma);
    take(restarts, o.restarts);
    take(out, o.out);
}

RunConfig RunConfig::resolve() const {
    RunConfig c = *this;
    if (!c.mode) c.mode = "practical";
    require(*c.mode == "practical" || *c.mode == "theory", "mode must be 'practical' or 'theory'");
    require(c.r.has_value() && *c.r >= 1, "rank r must be given and positive");
    require(c.d.has_value() && *c.d >= *c.r, "dimension d must be given and at least r");
    if (!c.lambda) c.lambda = default_lambda(*c.r);
    require(*c.lambda >= 0.0 && std::isfinite(*c.lambda), "lambda must be non-negative");
    if (!c.epsilon) c.epsilon = 1e-3;
    require(*c.epsilon > 0.0, "epsilon must be positive");
    if (*c.mode == "theory") require(*c.epsilon < 1.0, "theory mode needs epsilon < 1");
    if (!c.seed) c.seed = 0;
    if (!c.budget) c.budget = 50000;
    require(*c.budget > 0, "budget must be positive");
    if (!c.samples_per_block) {
        SearchConfig sc;
        sc.epsilon = *c.epsilon;
        c.samples_per_block = sc.resolved_samples_per_block();
    }
    require(*c.samples_per_block > 0, "samples_per_block must be positive");
    if (!c.delta_points) c.delta_points = 13;
    require(*c.delta_points >= 1, "delta_points must be at least 1");
    if (!c.delta_decades) c.delta_decades = 2.0;
    require(*c.delta_decades >= 0.0, "delta_decades must be non-negative");
    if (!c.init) c.init = "zero";
    parse_init(*c.init);
    if (!c.restarts) c.restarts = 1;
    require(*c.restarts >= 1, "restarts must be at least 1");
    if (!c.out) c.out = ".";
    if (*c.mode == "theory") {
        require(!c.tau1 && !c.tau2 && !c.min_improvement && !c.sigma,
                "tau1, tau2, min_improvement and sigma are derived in theory mode; drop them or use practical mode");
    } else {
        if (!c.tau1) c.tau1 = 1e-6;
        if (!c.tau2) c.tau2 = 1e-4;
        if (!c.min_improvement) c.min_improvement = 1e-10;
        if (!c.sigma) c.sigma = 1e-2;
        require(*c.tau1 > 0.0 && *c.tau2 > 0.0, "tau1 and tau2 must be positive");
        require(*c.min_improvement >= 0.0, "min_improvement must be non-negative");
        require(*c.sigma > 0.0, "sigma must be positive");
    }
    return c;
}

SearchConfig RunConfig::to_search_config() const {
    require(mode && epsilon && seed && budget && samples_per_block && delta_points && delta_decades,
            "to_search_config needs a resolved config");
    SearchConfig s;
    s.mode = *mode == "theory" ? SearchMode::Theory : SearchMode::Practical;
    s.epsilon = *epsilon;
    s.lambda = lambda;
    s.seed = *seed;
    s.budget = *budget;
    s.samples_per_block = *samples_per_block;
    s.delta_points = *delta_points;
    s.delta_decades = *delta_decades;
    if (tau1) s.tau1 = *tau1;
    if (tau2) s.tau2 = *tau2;
    if (min_improvement) s.min_improvement = *min_improvement;
    if (sigma) s.sigma = *sigma;
    return s;
}

json to_json(const RunConfig& c) {
    json j = json::object();
    put(j, "mode", c.mode);
    put(j, "r", c.r);
    put(j, "d", c.d);
    put(j, "lambda", c.lambda);
    put(j, "epsilon", c.epsilon);
    put(j, "seed", c.seed);
    put(j, "budget", c.budget);
    put(j, "samples_per_block", c.samples_per_block);
    put(j, "delta_points", c.delta_points);
    put(j, "delta_decades", c.delta_decades);
    put(j, "init", c.init);
    put(j, "tau1", c.tau1);
    put(j, "tau2", c.tau2);
    put(j, "min_improvement", c.min_improvement);
    put(j, "sigma", c.sigma);
    put(j, "restarts", c.restarts);
    put(j, "out", c.out);
    return j;
}

RunConfig run_config_from_json(const json& j) {
    require(j.is_object(), "config must be a JSON object");
    static const std::vector<std::string> known{"mode",     "r",       "d",          "lambda",
                                                "epsilon",  "seed",    "budget",     "samples_per_block",
                                                "delta_points", "delta_decades", "init", "tau1",
                                                "tau2",     "min_improvement", "sigma", "restarts",
                                                "out"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        require(std::find(known.begin(), known.end(), it.key()) != known.end(),
                "unknown config key '" + it.key() + "'");
    }
    RunConfig c;
    get(j, "mode", c.mode);
    get(j, "r", c.r);
    get(j, "d", c.d);
    get(j, "lambda", c.lambda);
    get(j, "epsilon", c.epsilon);
    get(j, "seed", c.seed);
    get(j, "budget", c.budget);
    get(j, "samples_per_block", c.samples_per_block);
    get(j, "delta_points", c.delta_points);
    get(j, "delta_decades", c.delta_decades);
    get(j, "init", c.init);
    get(j, "tau1", c.tau1);
    get(j, "tau2", c.tau2);
    get(j, "min_improvement", c.min_improvement);
    get(j, "sigma", c.sigma);
    get(j, "restarts", c.restarts);
    get(j, "out", c.out);
    return c;
}

InitSpec parse_init(const std::string& s) {
    if (s == "zero") return {};
    if (s == "hosvd") return {InitSpec::Kind::Hosvd, 0.0};
    const std::string prefix = "random:";
    if (s.rfind(prefix, 0) == 0) {
        std::size_t used = 0;
        double scale = 0.0;
        try {
            scale = std::stod(s.substr(prefix.size()), &used);
        } catch (const std::exception&) {
            used = 0;
        }
        require(used > 0 && used == s.size() - prefix.size() && scale > 0.0 && std::isfinite(scale),
                "init 'random:<scale>' needs a positive scale");
        return {InitSpec::Kind::Random, scale};
    }
    throw std::invalid_argument("init must be zero, hosvd or random:<scale>, got '" + s + "'");
}

FactorPoint make_initial_point(const InitSpec& init, const Tensor3& t, std::size_t r, std::uint64_t seed) {
    const std::size_t d = t.dim(1);
    switch (init.kind) {
        case InitSpec::Kind::Zero: return FactorPoint::zeros(r, d);
        case InitSpec::Kind::Hosvd: return hosvd(t, r);
        case InitSpec::Kind::Random: {
            Rng rng(seed ^ 0x6a09e667f3bcc909ULL);
            return FactorPoint::random_normal(r, d, init.scale, rng);
        }
    }
    return FactorPoint::zeros(r, d);
}

int cmd_generate(const GenerateOptions& opts, std::ostream& log) {
    const GeneratedTensor g = generate_exact(opts.r, opts.d, opts.seed, opts.noise);
    const json meta = {{"r", opts.r}, {"d", opts.d}, {"seed", opts.seed}, {"noise", opts.noise}, {"exact", g.exact}};
    if (opts.out.has_parent_path()) fs::create_directories(opts.out.parent_path());
    if (opts.out.extension() == ".tkr") {
        io::save_tensor(opts.out, g.T);
        io::write_text(fs::path(opts.out.string() + ".meta.json"), io::dump(meta, 2) + "\n");
    } else {
        io::save_tensor(opts.out, g.T, {{"metadata", meta}});
    }
    log << "wrote " << opts.out.string() << " (r=" << opts.r << ", d=" << opts.d << ", seed=" << opts.seed
        << ", noise=" << opts.noise << ")\n";
    return kOk;
}

DecomposeOutputs output_paths(const fs::path& dir, int restart, int restarts) {
    const std::string suffix = restarts > 1 ? "_" + std::to_string(restart) : "";
    return {dir / ("factors" + suffix + ".json"), dir / ("trace" + suffix + ".jsonl"),
            dir / ("summary" + suffix + ".json")};
}

int cmd_decompose(const fs::path& tensor_path, const RunConfig& config, std::ostream& log) {
    Tensor3 t;
    RunConfig cfg;
    try {
        t = io::load_tensor(tensor_path);
        const Dims& dims = t.dims();
        require(dims[0] == dims[1] && dims[1] == dims[2], "tensor must be d x d x d");
        cfg = config;
        if (!cfg.d) cfg.d = dims[0];
        require(*cfg.d == dims[0], "config d=" + std::to_string(*cfg.d) + " but tensor has d=" +
                                       std::to_string(dims[0]));
        cfg = cfg.resolve();
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return kInputError;
    }

    const InitSpec init = parse_init(*cfg.init);
    const int restarts = *cfg.restarts;
    struct Outcome {
        RunResult result;
        double seconds = 0.0;
        std::string error;
        bool schedule_error = false;
    };
    auto one = [&](int i) {
        Outcome o;
        const auto start = std::chrono::steady_clock::now();
        try {
            SearchConfig sc = cfg.to_search_config();
            sc.seed = *cfg.seed + static_cast<std::uint64_t>(i);
            o.result = run(t, make_initial_point(init, t, *cfg.r, sc.seed), sc);
        } catch (const ScheduleError& e) {
            o.error = e.what();
            o.schedule_error = true;
        } catch (const std::exception& e) {
            o.error = e.what();
        }
        o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return o;
    };
    std::vector<std::future<Outcome>> jobs;
    for (int i = 0; i < restarts; ++i) jobs.push_back(std::async(std::launch::async, one, i));

    const fs::path dir(*cfg.out);
    try {
        fs::create_directories(dir);
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return kInputError;
    }
    int best = -1;
    double best_f = std::numeric_limits<double>::infinity();
    int best_code = kFailure;
    for (int i = 0; i < restarts; ++i) {
        Outcome o = jobs[static_cast<std::size_t>(i)].get();
        if (!o.error.empty()) {
            log << "error (restart " << i << "): " << o.error << "\n";
            if (best < 0) best_code = o.schedule_error ? kInputError : kFailure;
            continue;
        }
        const RunResult& res = o.result;
        const DecomposeOutputs paths = output_paths(dir, i, restarts);
        io::save_factor_point(paths.factors, res.point);
        {
            std::ofstream tr(paths.trace, std::ios::binary);
            io::write_trace_jsonl(tr, res.trace);
        }
        RunConfig used = cfg;
        used.seed = *cfg.seed + static_cast<std::uint64_t>(i);
        used.restarts = 1;
        json summary = {{"status", to_string(res.status)},
                        {"exit_code", exit_code(res.status)},
                        {"f", res.report.f},
                        {"L", res.report.L},
                        {"R", res.report.R},
                        {"lambda", res.report.lambda},
                        {"iterations", res.trace.records.size()},
                        {"escapes", res.escapes},
                        {"grad_evals", res.grad_evals},
                        {"f_evals", res.f_evals},
                        {"K", res.K},
                        {"seed", *used.seed},
                        {"restart", i},
                        {"tensor", tensor_path.string()},
                        {"config", to_json(used)}};
        if (res.thresholds) summary["thresholds"] = io::thresholds_to_json(*res.thresholds);
        summary["metadata"] = {{"wall_time_s", o.seconds}, {"finished_at", utc_timestamp()}};
        io::write_text(paths.summary, io::dump(summary, 2) + "\n");
        log << "restart " << i << ": " << to_string(res.status) << " f=" << res.report.f << " L=" << res.report.L
            << " R=" << res.report.R << " grad_evals=" << res.grad_evals << " -> " << paths.factors.string() << "\n";
        if (best < 0 || res.report.f < best_f) {
            best = i;
            best_f = res.report.f;
            best_code = exit_code(res.status);
        }
    }
    return best_code;
}

int cmd_verify(const VerifyOptions& opts, std::ostream& out, std::ostream& log) {
    verify::SuiteOptions so;
    so.seed = opts.seed;
    if (opts.corrupt_gradient) {
        so.gradient_hook = [](GradientParts& g) { g.grad_L += g.grad_R(); };
    }
    verify::SuiteReport rep;
    try {
        rep = verify::run_suite(opts.suites, so);
    } catch (const std::invalid_argument& e) {
        log << "error: " << e.what() << "\n";
        return kInputError;
    }
    for (const verify::LemmaReport& r : rep.reports) {
        log << (r.pass ? "PASS " : "FAIL ") << r.id << " (" << r.trials << " trials, " << r.failures
            << " failures)\n";
    }
    json j = verify::to_json(rep);
    j["seed"] = opts.seed;
    const std::string text = io::dump(j, 2) + "\n";
    if (opts.report) {
        if (opts.report->has_parent_path()) fs::create_directories(opts.report->parent_path());
        io::write_text(*opts.report, text);
    } else {
        out << text;
    }
    return rep.pass ? kOk : kFailure;
}

int main_entry(int argc, char** argv) {
    CLI::App app{"Tucker decomposition by regularized local search"};
    app.require_subcommand(1);

    GenerateOptions gen;
    std::string gen_out = "tensor.json";
    auto* g = app.add_subcommand("generate", "write a random exact-rank tensor with ||T||_F = 1");
    g->add_option("--rank", gen.r, "multilinear rank r")->required();
    g->add_option("--dim", gen.d, "dimension d")->required();
    g->add_option("--seed", gen.seed, "random seed");
    g->add_option("--noise", gen.noise, "Frobenius norm of added Gaussian noise");
    g->add_option("--out", gen_out, "output file (.json, or .tkr for binary)");

    std::string tensor, config_file, mode, init, out;
    std::size_t rank = 0;
    double lambda = 0, epsilon = 0, tau1 = 0, tau2 = 0, min_improvement = 0, sigma = 0, decades = 0;
    std::uint64_t seed = 0;
    long budget = 0;
    int samples = 0, points = 0, restarts = 0;
    auto* dc = app.add_subcommand("decompose", "run the local search on a tensor file");
    dc->add_option("tensor", tensor, "tensor file (JSON or .tkr)")->required();
    auto* o_config = dc->add_option("--config", config_file, "JSON run config; command-line flags take precedence");
    auto* o_mode = dc->add_option("--mode", mode, "practical | theory");
    auto* o_rank = dc->add_option("--rank", rank, "rank r");
    auto* o_init = dc->add_option("--init", init, "zero | hosvd | random:<scale>");
    auto* o_eps = dc->add_option("--epsilon", epsilon, "target objective value");
    auto* o_budget = dc->add_option("--budget", budget, "gradient evaluation budget");
    auto* o_seed = dc->add_option("--seed", seed, "random seed");
    auto* o_lambda = dc->add_option("--lambda", lambda, "regularizer weight (default 1/(16 r^4))");
    auto* o_samples = dc->add_option("--samples-per-block", samples, "sampler calls per block and iteration");
    auto* o_points = dc->add_option("--delta-points", points, "points in the step grid");
    auto* o_decades = dc->add_option("--delta-decades", decades, "half-width of the step grid in decades");
    auto* o_tau1 = dc->add_option("--tau1", tau1, "gradient threshold (practical mode)");
    auto* o_tau2 = dc->add_option("--tau2", tau2, "curvature threshold (practical mode)");
    auto* o_minimp = dc->add_option("--min-improvement", min_improvement, "acceptance threshold (practical mode)");
    auto* o_sigma = dc->add_option("--sigma", sigma, "singular value split threshold (practical mode)");
    auto* o_restarts = dc->add_option("--restarts", restarts, "independent restarts, seeds seed+i");
    auto* o_out = dc->add_option("--out", out, "output directory");

    VerifyOptions ver;
    std::vector<std::string> suites;
    std::string report;
    auto* v = app.add_subcommand("verify", "run the numerical verification suite");
    v->add_option("--suite", suites, "checks to run (repeat or comma separate; default all)")->delimiter(',');
    v->add_option("--seed", ver.seed, "random seed");
    auto* o_report = v->add_option("--report", report, "write the JSON report here instead of stdout");
    v->add_flag("--corrupt-gradient", ver.corrupt_gradient, "tamper with the loss gradient (negative control)")
        ->group("");
    v->add_flag_callback("--list", [] {
        for (const std::string& n : verify::suite_names()) std::cout << n << "\n";
        throw CLI::Success();
    }, "list check names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInputError;
    }

    try {
        if (*g) {
            gen.out = gen_out;
            return cmd_generate(gen, std::cerr);
        }
        if (*dc) {
            RunConfig cfg;
            if (o_config->count()) cfg = run_config_from_json(json::parse(io::read_text(config_file)));
            RunConfig flags;
            if (o_mode->count()) flags.mode = mode;
            if (o_rank->count()) flags.r = rank;
            if (o_init->count()) flags.init = init;
            if (o_eps->count()) flags.epsilon = epsilon;
            if (o_budget->count()) flags.budget = budget;
            if (o_seed->count()) flags.seed = seed;
            if (o_lambda->count()) flags.lambda = lambda;
            if (o_samples->count()) flags.samples_per_block = samples;
            if (o_points->count()) flags.delta_points = points;
            if (o_decades->count()) flags.delta_decades = decades;
            if (o_tau1->count()) flags.tau1 = tau1;
            if (o_tau2->count()) flags.tau2 = tau2;
            if (o_minimp->count()) flags.min_improvement = min_improvement;
            if (o_sigma->count()) flags.sigma = sigma;
            if (o_restarts->count()) flags.restarts = restarts;
            if (o_out->count()) flags.out = out;
            cfg.overlay(flags);
            return cmd_decompose(tensor, cfg, std::cerr);
        }
        ver.suites = suites;
        if (o_report->count()) ver.report = report;
        return cmd_verify(ver, std::cout, std::cerr);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
}

}  // namespace tucker::cli
