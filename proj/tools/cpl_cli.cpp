// Command-line driver: dataset generation, parameter estimation, NMAE
// report tables, and the gradient self-check.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cpl/estimator.hpp"
#include "cpl/gradient.hpp"
#include "cpl/manifest.hpp"
#include "cpl/result_io.hpp"
#include "cpl/rng.hpp"
#include "cpl/scene.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kInitStream = 0x1A17ULL;

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double elapsed_ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    }
};

json argv_json(int argc, char** argv) {
    json j = json::array();
    for (int i = 1; i < argc; ++i) j.push_back(std::string(argv[i]));
    return j;
}

void write_manifest(const fs::path& path, const std::string& command, const json& argv,
                    const json& config, std::uint64_t seed,
                    const std::vector<fs::path>& outputs, double wall_ms) {
    json outs = json::array();
    for (const fs::path& p : outputs)
        outs.push_back({{"path", p.string()}, {"fnv1a64", cpl::fnv1a64_hex(cpl::fnv1a64_file(p))}});
    json j{
        {"format", "cpl-run-manifest"},
        {"schema_version", 1},
        {"command", command},
        {"argv", argv},
        {"config", config},
        {"seed", seed},
        {"dataset_schema_version", cpl::kDatasetSchemaVersion},
        {"result_schema_version", cpl::kResultSchemaVersion},
        {"outputs", outs},
        {"wall_clock_ms", wall_ms},
    };
    std::ofstream out(path);
    if (!out) throw cpl::IoError("cannot write manifest: " + path.string());
    out << j.dump(2) << '\n';
}

// ---------------------------------------------------------------- gen ----

struct GenOptions {
    int town = 0; // 0 = both
    int config_index = -1;
    bool all = false;
    std::size_t points = 200;
    int width = 1280;
    int height = 960;
    double baseline = 0.5;
    std::uint64_t seed = 42;
    std::string out;
};

int run_gen(const GenOptions& opt, const json& argv) {
    Timer timer;
    std::vector<cpl::SceneConfig> grid = cpl::build_config_grid();
    std::vector<std::size_t> selected;
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (opt.town == 0 || grid[i].town_id == opt.town) selected.push_back(i);

    if (!opt.all) {
        if (opt.config_index < 0 || static_cast<std::size_t>(opt.config_index) >= selected.size())
            throw cpl::InvalidArgument("config index out of range (0.." +
                                       std::to_string(selected.size() - 1) + ")");
        selected = {selected[static_cast<std::size_t>(opt.config_index)]};
    }

    std::vector<fs::path> outputs;
    fs::path manifest_path;
    if (opt.all) {
        const fs::path dir(opt.out);
        fs::create_directories(dir);
        outputs.resize(selected.size());
        // Each config writes its own file; the fan-out is safe to parallelize.
        // Exceptions may not leave the parallel region, so they are carried out.
        const std::int64_t n = static_cast<std::int64_t>(selected.size());
        std::string failure;
#pragma omp parallel for schedule(dynamic)
        for (std::int64_t k = 0; k < n; ++k) {
            try {
                const std::size_t gi = selected[static_cast<std::size_t>(k)];
                char name[64];
                std::snprintf(name, sizeof(name), "cfg%02zu_town%d.cpld", gi, grid[gi].town_id);
                const fs::path file = dir / name;
                const cpl::Dataset ds = cpl::generate(grid[gi], opt.points, opt.width, opt.height,
                                                      opt.baseline, opt.seed + gi);
                cpl::save(ds, file);
                outputs[static_cast<std::size_t>(k)] = file;
            } catch (const std::exception& e) {
#pragma omp critical
                failure = e.what();
            }
        }
        if (!failure.empty()) throw cpl::IoError(failure);
        manifest_path = dir / "manifest.json";
    } else {
        const std::size_t gi = selected[0];
        const cpl::Dataset ds =
            cpl::generate(grid[gi], opt.points, opt.width, opt.height, opt.baseline, opt.seed + gi);
        const fs::path file(opt.out);
        if (file.has_parent_path()) fs::create_directories(file.parent_path());
        cpl::save(ds, file);
        outputs.push_back(file);
        manifest_path = fs::path(opt.out + ".manifest.json");
    }

    const json config{{"town", opt.town},        {"config_index", opt.config_index},
                      {"all", opt.all},          {"points", opt.points},
                      {"width", opt.width},      {"height", opt.height},
                      {"baseline", opt.baseline}};
    write_manifest(manifest_path, "gen", argv, config, opt.seed, outputs, timer.elapsed_ms());
    std::cout << "wrote " << outputs.size() << " dataset file(s), manifest "
              << manifest_path.string() << "\n";
    return 0;
}

// ----------------------------------------------------------- estimate ----

struct EstimateOptions {
    std::string data;
    std::string init_mode = "perturbed"; // gt | perturbed | file
    std::string init_file;
    double perturb_frac = 0.2;
    std::string weighting = "uniform";
    double lr = 1e-3;
    std::size_t max_iters = 5000;
    std::size_t batch = 16;
    std::size_t patience = 50;
    std::uint64_t seed = 0;
    std::string fix = "b";
    std::string out;
    std::string label;
};

std::vector<std::string> parse_fixed_names(const std::string& fix) {
    std::vector<std::string> names;
    if (fix.empty() || fix == "none") return names;
    std::string cur;
    for (char ch : fix + ",") {
        if (ch == ',') {
            if (!cur.empty()) names.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    return names;
}

std::array<bool, cpl::kParamCount> fixed_mask_from_names(const std::vector<std::string>& names) {
    std::array<bool, cpl::kParamCount> mask{};
    for (const std::string& n : names) {
        bool found = false;
        for (std::size_t i = 0; i < cpl::kParamCount; ++i)
            if (n == cpl::kParamNames[i]) {
                mask[i] = true;
                found = true;
            }
        if (!found) throw cpl::InvalidArgument("unknown parameter name in --fix: " + n);
    }
    return mask;
}

cpl::ParamVector13 read_init_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw cpl::IoError("cannot open init file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception&) {
        throw cpl::SchemaError("malformed init file: " + path.string());
    }
    cpl::ParamVector13 w;
    try {
        for (std::size_t i = 0; i < cpl::kParamCount; ++i)
            w[i] = j.at(std::string(cpl::kParamNames[i])).get<double>();
    } catch (const json::exception&) {
        throw cpl::SchemaError("init file must name all 13 parameters: " + path.string());
    }
    return w;
}

// Multiplicative (1 +- frac) perturbation per free parameter; the pitch
// angle gets an additive +-frac/2 radian offset instead.
cpl::ParamVector13 perturb_init(const cpl::ParamVector13& truth,
                                const std::array<bool, cpl::kParamCount>& fixed, double frac,
                                std::uint64_t seed) {
    cpl::Rng rng(cpl::Rng::derive(seed, kInitStream));
    cpl::ParamVector13 init = truth;
    for (std::size_t i = 0; i < cpl::kParamCount; ++i) {
        if (fixed[i] || i >= cpl::kX) continue;
        if (i == cpl::kThetaP)
            init[i] = truth[i] + rng.uniform(-frac / 2.0, frac / 2.0);
        else
            init[i] = truth[i] * rng.uniform(1.0 - frac, 1.0 + frac);
    }
    return init;
}

int run_estimate(const EstimateOptions& opt, const json& argv) {
    Timer timer;
    const cpl::Dataset ds = cpl::load(opt.data);

    const std::vector<std::string> fixed_names = parse_fixed_names(opt.fix);
    cpl::EstimatorConfig cfg;
    cfg.adam.learning_rate = opt.lr;
    cfg.max_iterations = opt.max_iters;
    cfg.batch_size = opt.batch;
    cfg.early_stop_patience = opt.patience;
    cfg.weighting =
        opt.weighting == "adaptive" ? cpl::WeightingMode::kAdaptive : cpl::WeightingMode::kUniform;
    cfg.fixed = fixed_mask_from_names(fixed_names);
    cfg.seed = opt.seed;

    cpl::ParamVector13 init;
    if (opt.init_mode == "gt") {
        init = ds.ground_truth;
    } else if (opt.init_mode == "perturbed") {
        init = perturb_init(ds.ground_truth, cfg.fixed, opt.perturb_frac, opt.seed);
    } else {
        if (opt.init_file.empty())
            throw cpl::InvalidArgument("--init file requires --init-file");
        init = read_init_file(opt.init_file);
    }

    const cpl::EstimateResult res = cpl::estimate(ds, init, cfg);

    cpl::ResultFile rf;
    rf.label = opt.label.empty() ? fs::path(opt.out).stem().string() : opt.label;
    rf.data_file = opt.data;
    rf.init_mode = opt.init_mode;
    rf.weighting = opt.weighting;
    rf.seed = opt.seed;
    rf.learning_rate = opt.lr;
    rf.max_iterations = opt.max_iters;
    rf.batch_size = opt.batch;
    rf.perturb_frac = opt.init_mode == "perturbed" ? opt.perturb_frac : 0.0;
    rf.fixed_params = fixed_names;
    rf.ground_truth = ds.ground_truth;
    rf.init = init;
    rf.estimate = res.omega_hat;
    rf.nmae = res.nmae;
    rf.converged = res.converged;
    rf.iterations = res.iterations;
    rf.best_loss = res.best_loss;
    rf.kink_iterations = res.kink_iterations;
    rf.loss_trace = res.loss_trace;

    const fs::path out(opt.out);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    cpl::write_result(out, rf);

    const json config{{"data", opt.data},
                      {"init", opt.init_mode},
                      {"init_file", opt.init_file},
                      {"perturb_frac", opt.perturb_frac},
                      {"weighting", opt.weighting},
                      {"lr", opt.lr},
                      {"max_iters", opt.max_iters},
                      {"batch", opt.batch},
                      {"patience", opt.patience},
                      {"fix", opt.fix},
                      {"label", rf.label}};
    write_manifest(fs::path(opt.out + ".manifest.json"), "estimate", argv, config, opt.seed, {out},
                   timer.elapsed_ms());

    std::cout << "estimate " << (res.converged ? "converged" : "stopped") << " after "
              << res.iterations << " iterations, best loss " << res.best_loss << "\n";
    return 0;
}

// ----------------------------------------------------------------- eval ----

// Report columns in the usual table order (pitch last).
constexpr std::array<std::size_t, 10> kReportColumns = {
    cpl::kFx, cpl::kFy, cpl::kU0, cpl::kV0, cpl::kB,
    cpl::kD,  cpl::kTx, cpl::kTy, cpl::kTz, cpl::kThetaP};

struct EvalOptions {
    std::vector<std::string> results;
    std::string format = "csv";
    std::string out;
};

int run_eval(const EvalOptions& opt, const json& argv) {
    Timer timer;
    std::vector<fs::path> files;
    for (const std::string& r : opt.results) {
        const fs::path p(r);
        if (fs::is_directory(p)) {
            for (const auto& entry : fs::directory_iterator(p)) {
                const std::string name = entry.path().filename().string();
                if (entry.path().extension() == ".json" && name.find("manifest") == std::string::npos)
                    files.push_back(entry.path());
            }
        } else {
            files.push_back(p);
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw cpl::InvalidArgument("no result files given");

    std::string table;
    const auto add_row = [&](const std::string& label, const std::array<double, 10>& vals,
                             bool header) {
        if (opt.format == "markdown") {
            table += "| " + label + " |";
            for (double v : vals) {
                char buf[32];
                std::snprintf(buf, sizeof(buf), " %.3f |", v);
                table += buf;
            }
            table += "\n";
            if (header) {
                table += "|---|";
                for (std::size_t i = 0; i < 10; ++i) table += "---|";
                table += "\n";
            }
        } else {
            table += label;
            for (double v : vals) {
                char buf[32];
                std::snprintf(buf, sizeof(buf), ",%.3f", v);
                table += buf;
            }
            table += "\n";
        }
    };

    if (opt.format == "markdown") {
        table += "| run |";
        for (std::size_t c : kReportColumns) table += " " + std::string(cpl::kParamNames[c]) + " |";
        table += "\n|---|";
        for (std::size_t i = 0; i < 10; ++i) table += "---|";
        table += "\n";
    } else {
        table += "run";
        for (std::size_t c : kReportColumns) table += "," + std::string(cpl::kParamNames[c]);
        table += "\n";
    }
    for (const fs::path& f : files) {
        const cpl::ResultFile r = cpl::read_result(f);
        std::array<double, 10> vals{};
        for (std::size_t i = 0; i < 10; ++i) vals[i] = r.nmae[kReportColumns[i]];
        add_row(r.label.empty() ? f.stem().string() : r.label, vals, false);
    }

    if (opt.out.empty()) {
        std::cout << table;
    } else {
        std::ofstream outf(opt.out);
        if (!outf) throw cpl::IoError("cannot write table: " + opt.out);
        outf << table;
        const json config{{"results", opt.results}, {"format", opt.format}};
        write_manifest(fs::path(opt.out + ".manifest.json"), "eval", argv, config, 0,
                       {fs::path(opt.out)}, timer.elapsed_ms());
    }
    return 0;
}

// ----------------------------------------------------------- check-grad ----

struct CheckGradOptions {
    std::uint64_t seed = 7;
    std::size_t trials = 100;
    double tolerance = 1e-5;
    std::size_t points = 8;
};

cpl::ParamVector13 random_omega(cpl::Rng& rng) {
    cpl::ParamVector13 w;
    w[cpl::kFx] = rng.uniform(400.0, 1500.0);
    w[cpl::kFy] = rng.uniform(400.0, 1500.0);
    w[cpl::kU0] = rng.uniform(300.0, 900.0);
    w[cpl::kV0] = rng.uniform(200.0, 700.0);
    w[cpl::kB] = rng.uniform(0.2, 1.5);
    w[cpl::kD] = rng.uniform(5.0, 80.0);
    w[cpl::kThetaP] = rng.uniform(-0.4, 0.4);
    w[cpl::kTx] = rng.uniform(-5.0, 5.0);
    w[cpl::kTy] = rng.uniform(-5.0, 5.0);
    w[cpl::kTz] = rng.uniform(-5.0, 5.0);
    w[cpl::kX] = rng.uniform(-10.0, 10.0);
    w[cpl::kY] = rng.uniform(-10.0, 10.0);
    w[cpl::kZ] = rng.uniform(-10.0, 10.0);
    return w;
}

cpl::ParamVector13 perturb_omega(const cpl::ParamVector13& w, cpl::Rng& rng) {
    cpl::ParamVector13 p = w;
    for (std::size_t i = 0; i < cpl::kParamCount; ++i) {
        p[i] = w[i] * rng.uniform(0.85, 1.15);
        if (i == cpl::kThetaP || i >= cpl::kX) p[i] = w[i] + rng.uniform(0.05, 0.2);
    }
    return p;
}

int run_check_grad(const CheckGradOptions& opt) {
    cpl::Rng rng(opt.seed);
    double max_rel = 0.0;
    std::size_t skipped = 0;
    for (std::size_t trial = 0; trial < opt.trials; ++trial) {
        cpl::LossOptions options;
        options.variant = static_cast<cpl::LossVariant>(trial % 3);
        options.mode = cpl::BreakdownMode::kThirteenTerm;
        if (options.variant == cpl::LossVariant::kWeighted) {
            double total = 0.0;
            for (double& a : options.weights.alpha) {
                a = rng.uniform(0.5, 2.0);
                total += a;
            }
            for (double& a : options.weights.alpha) a *= 13.0 / total;
        }

        // Resample until the configuration is safely away from MAE kinks;
        // finite differences are meaningless across a kink.
        cpl::ParamVector13 wt, wp;
        std::vector<cpl::ImageObservation> obs(opt.points);
        bool usable = false;
        for (int attempt = 0; attempt <= 100 && !usable; ++attempt) {
            wt = random_omega(rng);
            wp = perturb_omega(wt, rng);
            for (auto& o : obs) o = {rng.uniform(0.0, 1280.0), rng.uniform(0.0, 960.0), 1.0};
            usable = cpl::probe_smoothness(wt, wp, obs, options).smooth(1e-3);
        }
        if (!usable) {
            ++skipped;
            continue;
        }

        const cpl::Gradient13 ad = cpl::grad_cpl(wt, wp, std::span<const cpl::ImageObservation>(obs), options);
        const cpl::Gradient13 fd = cpl::finite_difference_grad(
            wt, wp, std::span<const cpl::ImageObservation>(obs), 1e-6, options);
        // error relative to the gradient's largest entry
        double scale = 1e-12;
        for (std::size_t i = 0; i < cpl::kParamCount; ++i)
            scale = std::max({scale, std::abs(ad.d[i]), std::abs(fd.d[i])});
        for (std::size_t i = 0; i < cpl::kParamCount; ++i)
            max_rel = std::max(max_rel, std::abs(ad.d[i] - fd.d[i]) / scale);
    }
    std::printf("max relative error %.3e over %zu trials (tolerance %.3e, %zu skipped)\n", max_rel,
                opt.trials, opt.tolerance, skipped);
    return max_rel < opt.tolerance ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"camera projection loss toolkit"};
    app.require_subcommand(1);

    GenOptions gen;
    CLI::App* cmd_gen = app.add_subcommand("gen", "generate synthetic stereo datasets");
    cmd_gen->add_option("--town", gen.town, "restrict to one town (1 or 2)")
        ->check(CLI::Range(1, 2));
    auto* idx_opt = cmd_gen->add_option("--config-index", gen.config_index,
                                        "index into the (filtered) configuration grid");
    auto* all_flag = cmd_gen->add_flag("--all", gen.all, "generate every configuration");
    idx_opt->excludes(all_flag);
    cmd_gen->add_option("--points", gen.points, "points per dataset")
        ->check(CLI::PositiveNumber);
    cmd_gen->add_option("--width", gen.width, "image width, pixels")->check(CLI::PositiveNumber);
    cmd_gen->add_option("--height", gen.height, "image height, pixels")
        ->check(CLI::PositiveNumber);
    cmd_gen->add_option("--baseline", gen.baseline, "stereo baseline, meters")
        ->check(CLI::PositiveNumber);
    cmd_gen->add_option("--seed", gen.seed, "generation seed");
    cmd_gen->add_option("--out", gen.out, "output file (or directory with --all)")->required();

    EstimateOptions est;
    CLI::App* cmd_est = app.add_subcommand("estimate", "recover camera parameters from a dataset");
    cmd_est->add_option("--data", est.data, "dataset file")->required();
    cmd_est->add_option("--init", est.init_mode, "initialization mode")
        ->check(CLI::IsMember({"gt", "perturbed", "file"}));
    cmd_est->add_option("--init-file", est.init_file, "JSON file with 13 named parameters");
    cmd_est->add_option("--perturb-frac", est.perturb_frac, "perturbation fraction")
        ->check(CLI::NonNegativeNumber);
    cmd_est->add_option("--weighting", est.weighting, "loss weighting mode")
        ->check(CLI::IsMember({"uniform", "adaptive"}));
    cmd_est->add_option("--lr", est.lr, "Adam learning rate")->check(CLI::PositiveNumber);
    cmd_est->add_option("--max-iters", est.max_iters, "optimizer step budget")
        ->check(CLI::PositiveNumber);
    cmd_est->add_option("--batch", est.batch, "mini-batch size")->check(CLI::PositiveNumber);
    cmd_est->add_option("--patience", est.patience, "early-stop patience, iterations")
        ->check(CLI::PositiveNumber);
    cmd_est->add_option("--seed", est.seed, "run seed (init perturbation and batching)");
    cmd_est->add_option("--fix", est.fix, "comma-separated parameters held at truth (or 'none')");
    cmd_est->add_option("--out", est.out, "result JSON path")->required();
    cmd_est->add_option("--label", est.label, "row label for eval tables");

    EvalOptions ev;
    CLI::App* cmd_eval = app.add_subcommand("eval", "tabulate per-parameter NMAE from results");
    cmd_eval->add_option("--results", ev.results, "result files or directories")->required();
    cmd_eval->add_option("--format", ev.format, "table format")
        ->check(CLI::IsMember({"csv", "markdown"}));
    cmd_eval->add_option("--out", ev.out, "write the table here instead of stdout");

    CheckGradOptions cg;
    CLI::App* cmd_cg = app.add_subcommand("check-grad",
                                          "compare forward-mode gradients with finite differences");
    cmd_cg->add_option("--seed", cg.seed, "sampling seed");
    cmd_cg->add_option("--trials", cg.trials, "number of random configurations")
        ->check(CLI::PositiveNumber);
    cmd_cg->add_option("--tolerance", cg.tolerance, "maximum relative error accepted")
        ->check(CLI::NonNegativeNumber);
    cmd_cg->add_option("--points", cg.points, "pixels per configuration")
        ->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    const json argv_echo = argv_json(argc, argv);
    try {
        if (cmd_gen->parsed()) {
            if (!gen.all && gen.config_index < 0)
                throw cpl::InvalidArgument("need --config-index or --all");
            return run_gen(gen, argv_echo);
        }
        if (cmd_est->parsed()) return run_estimate(est, argv_echo);
        if (cmd_eval->parsed()) return run_eval(ev, argv_echo);
        if (cmd_cg->parsed()) return run_check_grad(cg);
    } catch (const cpl::DivergenceDetected& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const cpl::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const cpl::SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const cpl::ConsistencyError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const cpl::InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const cpl::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
