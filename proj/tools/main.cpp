// Command-line driver: make-dataset, train, recon, eval.
// Exit codes: 0 success, 2 configuration error, 3 numerical abort.

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include "sbmri/config.hpp"
#include "sbmri/errors.hpp"
#include "sbmri/io.hpp"
#include "sbmri/recon.hpp"
#include "sbmri/train.hpp"

namespace fs = std::filesystem;
using namespace sbmri;

namespace {

struct CliOverrides {
    std::string config_path;
    std::string out_dir;
    std::optional<std::int64_t> seed;
    std::optional<std::string> method;
    std::optional<double> r;
    std::optional<bool> deterministic;
    std::optional<std::int64_t> ni;
    std::optional<std::int64_t> workers;
};

std::string fmt_r(double r) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", r);
    return buf;
}

std::string fmt_hash(std::uint64_t h) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return buf;
}

std::vector<double> parse_r_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            out.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw ConfigError("bad acceleration value: " + tok);
        }
    }
    if (out.empty()) throw ConfigError("empty acceleration list");
    return out;
}

// One config file may drive several commands, so the whole file is checked
// against the full schema up front; each command then reads its sections.
void validate_schema(const ConfigFile& cfg) {
    static const std::map<std::string, std::set<std::string>> schema = {
        {"run", {"seed", "workers"}},
        {"data",
         {"height", "width", "n_pairs", "coils", "discrepancy", "sigma_eps", "r", "pattern",
          "center"}},
        {"schedule", {"beta_min", "beta_max", "steps"}},
        {"model", {"channels", "blocks", "time_dim", "groups"}},
        {"train", {"dataset", "steps", "lr", "lr_final", "batch", "log_interval", "resume"}},
        {"recon",
         {"dataset", "checkpoint", "method", "r", "ni", "deterministic", "lambda", "cg_iters",
          "cg_tol", "first_case", "n_cases", "save_png"}},
        {"eval", {"inputs"}},
    };
    std::set<std::string> section_names;
    for (const auto& [name, keys] : schema) section_names.insert(name);
    cfg.validate_sections(section_names);
    for (const auto& [name, kv] : cfg.sections()) cfg.validate_keys(name, schema.at(name));
}

ConfigFile load_config(const CliOverrides& cli) {
    if (cli.config_path.empty()) throw ConfigError("--config is required");
    ConfigFile cfg = ConfigFile::parse_file(cli.config_path);
    validate_schema(cfg);
    if (cli.seed) cfg.set("run", "seed", std::to_string(*cli.seed));
    if (cli.workers) cfg.set("run", "workers", std::to_string(*cli.workers));
    if (cli.method) cfg.set("recon", "method", *cli.method);
    if (cli.r) cfg.set("recon", "r", fmt_r(*cli.r));
    if (cli.deterministic) cfg.set("recon", "deterministic", *cli.deterministic ? "true" : "false");
    if (cli.ni) cfg.set("recon", "ni", std::to_string(*cli.ni));
    return cfg;
}

void write_effective_config(const ConfigFile& cfg, const fs::path& out_dir) {
    fs::create_directories(out_dir);
    std::ofstream f(out_dir / "config_used.cfg");
    f << cfg.canonical();
    std::ofstream h(out_dir / "config_used.hash");
    h << fmt_hash(config_hash(cfg)) << "\n";
}

NoiseSchedule schedule_from(const ConfigFile& cfg) {
    return make_schedule(cfg.get_double("schedule", "beta_min", 1e-5),
                         cfg.get_double("schedule", "beta_max", 0.3),
                         static_cast<std::size_t>(cfg.get_int("schedule", "steps", 50)));
}

DenoiserArch arch_from(const ConfigFile& cfg, std::size_t h, std::size_t w) {
    DenoiserArch a;
    a.height = h;
    a.width = w;
    a.channels = static_cast<std::size_t>(cfg.get_int("model", "channels", 16));
    a.blocks = static_cast<std::size_t>(cfg.get_int("model", "blocks", 3));
    a.time_dim = static_cast<std::size_t>(cfg.get_int("model", "time_dim", 64));
    a.groups = static_cast<std::size_t>(cfg.get_int("model", "groups", 4));
    return a;
}

// Runs fn(i) for i in [0, n) on up to `workers` threads. Each case is
// independent and writes only to its own output slot, so the schedule
// does not affect results.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
    workers = std::max<std::size_t>(1, std::min(workers, n == 0 ? 1 : n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::mutex err_mu;
    for (std::size_t t = 0; t < workers; ++t)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(err_mu);
                    if (!err) err = std::current_exception();
                    return;
                }
            }
        });
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

// ---- make-dataset ----------------------------------------------------------

int cmd_make_dataset(const CliOverrides& cli) {
    ConfigFile cfg = load_config(cli);

    const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("run", "seed", 0));
    const auto h = static_cast<std::size_t>(cfg.get_int("data", "height", 64));
    const auto w = static_cast<std::size_t>(cfg.get_int("data", "width", 64));
    const auto n_pairs = static_cast<std::size_t>(cfg.get_int("data", "n_pairs", 200));
    const auto coils = static_cast<std::size_t>(cfg.get_int("data", "coils", 4));
    const double discrepancy = cfg.get_double("data", "discrepancy", 0.0);
    const double sigma_eps = cfg.get_double("data", "sigma_eps", 0.0);
    const auto center = static_cast<std::size_t>(cfg.get_int("data", "center",
                                                             static_cast<std::int64_t>(h / 8)));
    const std::string pattern_s = cfg.get_or("data", "pattern", "lattice");
    MaskPattern pattern;
    if (pattern_s == "lattice")
        pattern = MaskPattern::Lattice;
    else if (pattern_s == "random")
        pattern = MaskPattern::VariableDensity;
    else
        throw ConfigError("data.pattern must be lattice or random, got " + pattern_s);
    const std::vector<double> r_list = parse_r_list(cfg.get_or("data", "r", "6"));

    const fs::path out(cli.out_dir);
    write_effective_config(cfg, out);
    const std::uint64_t hash = config_hash(cfg);

    for (const double r : r_list) {
        std::vector<DatasetRecord> records(n_pairs);
        double mean_r = 0;
        for (std::size_t i = 0; i < n_pairs; ++i) {
            DatasetRecord& rec = records[i];
            const std::uint64_t case_seed = mix_seed(seed, 0x64617461u + i);
            rec.pair = make_phantom_pair(case_seed, h, w, discrepancy);
            rec.csm = make_coil_maps(coils, h, w, case_seed);
            rec.mask = r <= 1.0
                           ? SamplingMask{h, w, h, w, std::vector<std::uint8_t>(h * w, 1)}
                           : make_mask(h, w, r, center, center, pattern, case_seed);
            rec.y = simulate_acquisition(rec.pair.target, rec.csm, rec.mask, sigma_eps,
                                         case_seed);
            rec.sigma_eps = sigma_eps;
            rec.seed = case_seed;
            mean_r += rec.mask.acceleration();
        }
        mean_r /= static_cast<double>(n_pairs);
        const fs::path path = out / ("dataset_r" + fmt_r(r) + ".bin");
        save_dataset(path.string(), records, hash);
        std::cout << "r_target=" << fmt_r(r) << " r_achieved=" << mean_r << " pairs="
                  << n_pairs << " file=" << path.string() << "\n";
    }
    return 0;
}

// ---- train -----------------------------------------------------------------

int cmd_train(const CliOverrides& cli) {
    ConfigFile cfg = load_config(cli);

    const std::string ds_path = cfg.get("train", "dataset");
    const auto records = load_dataset(ds_path);
    if (records.empty()) throw ConfigError("empty training dataset: " + ds_path);
    std::vector<PhantomPair> pairs;
    pairs.reserve(records.size());
    for (const auto& r : records) pairs.push_back(r.pair);
    const std::size_t h = pairs[0].target.height(), w = pairs[0].target.width();

    const NoiseSchedule sched = schedule_from(cfg);
    const DenoiserArch arch = arch_from(cfg, h, w);
    const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("run", "seed", 0));

    OptConfig opt;
    opt.lr = cfg.get_double("train", "lr", 2e-4);
    opt.lr_final = cfg.get_double("train", "lr_final", -1.0);
    opt.batch = static_cast<std::size_t>(cfg.get_int("train", "batch", 4));
    opt.steps = static_cast<std::size_t>(cfg.get_int("train", "steps", 2000));
    opt.log_interval = static_cast<std::size_t>(cfg.get_int("train", "log_interval", 10));
    opt.seed = seed;

    ConvDenoiser denoiser(arch, sched, mix_seed(seed, 0x696e6974u));
    AdamState adam(denoiser.params().size());
    const std::string resume = cfg.get_or("train", "resume", "");
    if (!resume.empty()) {
        const Checkpoint ckpt = load_checkpoint(resume);
        if (!(ckpt.arch == arch))
            throw ConfigError("resume checkpoint architecture differs from config");
        denoiser.params() = ckpt.params;
        adam = ckpt.adam;
        std::cout << "resumed from step " << adam.step << "\n";
    }

    const fs::path out(cli.out_dir);
    write_effective_config(cfg, out);
    const std::uint64_t hash = config_hash(cfg);

    std::ofstream loss_csv(out / "loss.csv");
    loss_csv << "step,loss\n";
    const TrainResult result =
        train(denoiser, adam, pairs, opt, [&](std::size_t step, double loss) {
            loss_csv << step << "," << std::setprecision(17) << loss << "\n";
            if (step % (opt.log_interval * 50) == 0)
                std::cout << "step " << step << " loss " << loss << std::endl;
        });
    loss_csv.close();

    save_checkpoint((out / "model.ckpt").string(), make_checkpoint(denoiser, adam, hash));
    std::cout << "trained to step " << result.final_step << ", checkpoint "
              << (out / "model.ckpt").string() << "\n";
    return 0;
}

// ---- recon -----------------------------------------------------------------

int cmd_recon(const CliOverrides& cli) {
    ConfigFile cfg = load_config(cli);

    const std::string method = cfg.get_or("recon", "method", "guided");
    if (method != "guided" && method != "inversion" && method != "zero_filled")
        throw ConfigError("recon.method must be guided, inversion, or zero_filled, got " +
                          method);
    const double r_label = cfg.get_double("recon", "r", 6.0);

    // dataset may be given directly or derived from a directory plus r
    std::string ds_path = cfg.get_or("recon", "dataset", "");
    if (ds_path.empty()) throw ConfigError("recon.dataset is required");
    if (fs::is_directory(ds_path))
        ds_path = (fs::path(ds_path) / ("dataset_r" + fmt_r(r_label) + ".bin")).string();
    const auto records = load_dataset(ds_path);
    const auto first_case = static_cast<std::size_t>(cfg.get_int("recon", "first_case", 0));
    auto n_cases = static_cast<std::size_t>(
        cfg.get_int("recon", "n_cases", static_cast<std::int64_t>(records.size())));
    if (first_case >= records.size()) throw ConfigError("recon.first_case past end of dataset");
    n_cases = std::min(n_cases, records.size() - first_case);
    if (n_cases == 0) throw ConfigError("recon case range is empty");

    const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("run", "seed", 0));
    const auto workers = static_cast<std::size_t>(cfg.get_int("run", "workers", 1));
    const bool save_pngs = cfg.get_bool("recon", "save_png", true);

    const std::size_t h = records[0].pair.target.height();
    const std::size_t w = records[0].pair.target.width();
    const NoiseSchedule sched = schedule_from(cfg);

    std::unique_ptr<ConvDenoiser> denoiser;
    if (method != "zero_filled") {
        const std::string ckpt_path = cfg.get("recon", "checkpoint");
        const Checkpoint ckpt = load_checkpoint(ckpt_path);
        if (ckpt.arch.height != h || ckpt.arch.width != w)
            throw ConfigError("checkpoint image size does not match dataset");
        denoiser = std::make_unique<ConvDenoiser>(
            ckpt.arch, make_schedule(ckpt.beta_min, ckpt.beta_max, ckpt.schedule_steps), 0);
        denoiser->params() = ckpt.params;
    }

    ReconConfig rcfg;
    rcfg.dc.lambda = cfg.get_double("recon", "lambda", 1.0);
    rcfg.dc.max_iters = static_cast<std::size_t>(cfg.get_int("recon", "cg_iters", 10));
    rcfg.dc.tol = cfg.get_double("recon", "cg_tol", 1e-6);
    rcfg.deterministic_sampling = cfg.get_bool("recon", "deterministic", false);
    rcfg.n_inversion_steps = static_cast<std::size_t>(cfg.get_int("recon", "ni", 0));

    const fs::path out(cli.out_dir);
    write_effective_config(cfg, out);
    fs::create_directories(out / "images");
    const std::uint64_t hash = config_hash(cfg);
    const std::string run_id = fmt_hash(hash ^ seed);

    std::vector<ReconRecord> results(n_cases);
    parallel_for(n_cases, workers, [&](std::size_t i) {
        const DatasetRecord& rec = records[first_case + i];
        AcquisitionModel model{rec.csm, rec.mask, rec.sigma_eps};
        ReconConfig case_cfg = rcfg;
        case_cfg.seed = mix_seed(seed, 0x63617365u + first_case + i);
        ReconRecord rr;
        if (method == "zero_filled") {
            rr.image = zero_filled(rec.y, rec.csm);
        } else if (method == "guided") {
            rr = guided_reconstruct(rec.y, rec.pair.guide, *denoiser, sched, model, case_cfg);
        } else {
            rr = inversion_reconstruct(rec.y, rec.pair.guide, *denoiser, sched, model,
                                       case_cfg);
        }
        char name[32];
        std::snprintf(name, sizeof(name), "case_%04zu", first_case + i);
        rr.metrics = evaluate(rr.image, rec.pair.target, name);
        rr.has_metrics = true;
        results[i] = std::move(rr);
    });

    std::ofstream metrics_csv(out / "metrics.csv");
    metrics_csv << "run_id,method,r,seed,nmse,psnr_db,ssim\n";
    std::ofstream residual_csv(out / "residuals.csv");
    residual_csv << "case,step,residual\n";
    for (std::size_t i = 0; i < n_cases; ++i) {
        const ReconRecord& rr = results[i];
        const std::string img_path = (out / "images" / (rr.metrics.image_id + ".bin")).string();
        save_image(img_path, rr.image, hash);
        if (save_pngs) save_png((out / "images" / (rr.metrics.image_id + ".png")).string(),
                                rr.image);
        metrics_csv << run_id << "," << method << "," << fmt_r(r_label) << "," << seed << ","
                    << std::setprecision(17) << rr.metrics.nmse << "," << rr.metrics.psnr_db
                    << "," << rr.metrics.ssim << "\n";
        for (std::size_t s = 0; s < rr.step_residuals.size(); ++s)
            residual_csv << rr.metrics.image_id << "," << s << "," << std::setprecision(17)
                         << rr.step_residuals[s] << "\n";
    }

    double mean_nmse = 0, mean_psnr = 0, mean_ssim = 0;
    for (const auto& rr : results) {
        mean_nmse += rr.metrics.nmse;
        mean_psnr += rr.metrics.psnr_db;
        mean_ssim += rr.metrics.ssim;
    }
    const double dn = static_cast<double>(n_cases);
    std::cout << "method=" << method << " r=" << fmt_r(r_label) << " cases=" << n_cases
              << " nmse=" << mean_nmse / dn << " psnr_db=" << mean_psnr / dn
              << " ssim=" << mean_ssim / dn << "\n";
    return 0;
}

// ---- eval ------------------------------------------------------------------

struct Cell {
    std::vector<double> nmse, psnr, ssim;
};

void accumulate_csv(const fs::path& path, std::map<std::pair<std::string, double>, Cell>& cells) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open metrics file: " + path.string());
    std::string line;
    if (!std::getline(f, line) || line != "run_id,method,r,seed,nmse,psnr_db,ssim")
        throw FileFormatError("unexpected metrics header in " + path.string());
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string run_id, method, r_s, seed_s, nmse_s, psnr_s, ssim_s;
        if (!std::getline(ss, run_id, ',') || !std::getline(ss, method, ',') ||
            !std::getline(ss, r_s, ',') || !std::getline(ss, seed_s, ',') ||
            !std::getline(ss, nmse_s, ',') || !std::getline(ss, psnr_s, ',') ||
            !std::getline(ss, ssim_s, ','))
            throw FileFormatError("bad metrics row in " + path.string() + ": " + line);
        Cell& c = cells[{method, std::stod(r_s)}];
        c.nmse.push_back(std::stod(nmse_s));
        c.psnr.push_back(std::stod(psnr_s));
        c.ssim.push_back(std::stod(ssim_s));
    }
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    s = v.size() > 1 ? std::sqrt(s / static_cast<double>(v.size() - 1)) : 0.0;
    return {m, s};
}

int cmd_eval(const CliOverrides& cli) {
    ConfigFile cfg = load_config(cli);

    // inputs: comma-separated metrics.csv paths or directories to scan
    const std::string inputs = cfg.get("eval", "inputs");
    std::vector<fs::path> files;
    std::stringstream ss(inputs);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        const fs::path p(tok);
        if (fs::is_directory(p)) {
            std::vector<fs::path> found;
            for (const auto& e : fs::recursive_directory_iterator(p))
                if (e.is_regular_file() && e.path().filename() == "metrics.csv")
                    found.push_back(e.path());
            std::sort(found.begin(), found.end());
            files.insert(files.end(), found.begin(), found.end());
        } else {
            files.push_back(p);
        }
    }
    if (files.empty()) throw ConfigError("eval.inputs matched no metrics files");

    std::map<std::pair<std::string, double>, Cell> cells;
    for (const auto& f : files) accumulate_csv(f, cells);

    const fs::path out(cli.out_dir);
    write_effective_config(cfg, out);

    std::ofstream summary(out / "summary.csv");
    summary << "method,r,n,nmse_mean,nmse_std,psnr_db_mean,psnr_db_std,ssim_mean,ssim_std\n";
    std::ofstream lineplot(out / "lineplot.csv");
    lineplot << "metric,method,r,value\n";
    std::cout << std::left << std::setw(14) << "method" << std::setw(8) << "r" << std::setw(6)
              << "n" << std::setw(26) << "nmse" << std::setw(26) << "psnr_db" << std::setw(26)
              << "ssim" << "\n";
    for (const auto& [key, cell] : cells) {
        const auto& [method, r] = key;
        const auto [nm, ns] = mean_std(cell.nmse);
        const auto [pm, ps] = mean_std(cell.psnr);
        const auto [sm, sstd] = mean_std(cell.ssim);
        summary << method << "," << fmt_r(r) << "," << cell.nmse.size() << ","
                << std::setprecision(17) << nm << "," << ns << "," << pm << "," << ps << ","
                << sm << "," << sstd << "\n";
        lineplot << "nmse," << method << "," << fmt_r(r) << "," << std::setprecision(17) << nm
                 << "\n";
        lineplot << "psnr_db," << method << "," << fmt_r(r) << "," << pm << "\n";
        lineplot << "ssim," << method << "," << fmt_r(r) << "," << sm << "\n";
        std::ostringstream c1, c2, c3;
        c1 << std::setprecision(4) << nm << " \xC2\xB1 " << ns;
        c2 << std::setprecision(4) << pm << " \xC2\xB1 " << ps;
        c3 << std::setprecision(4) << sm << " \xC2\xB1 " << sstd;
        std::cout << std::left << std::setw(14) << method << std::setw(8) << fmt_r(r)
                  << std::setw(6) << cell.nmse.size() << std::setw(26) << c1.str()
                  << std::setw(26) << c2.str() << std::setw(26) << c3.str() << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"paired-contrast MRI reconstruction pipeline"};
    app.require_subcommand(1);

    CliOverrides cli;
    std::string chosen;
    for (const char* name : {"make-dataset", "train", "recon", "eval"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", cli.config_path, "run configuration file")->required();
        sub->add_option("--out", cli.out_dir, "output directory")->required();
        sub->add_option("--seed", [&cli](const std::vector<std::string>& v) {
            cli.seed = std::stoll(v[0]);
            return true;
        }, "override [run] seed");
        sub->add_option("--workers", [&cli](const std::vector<std::string>& v) {
            cli.workers = std::stoll(v[0]);
            return true;
        }, "override [run] workers");
        if (std::string(name) == "recon") {
            sub->add_option("--method", [&cli](const std::vector<std::string>& v) {
                cli.method = v[0];
                return true;
            }, "guided | inversion | zero_filled");
            sub->add_option("--r", [&cli](const std::vector<std::string>& v) {
                cli.r = std::stod(v[0]);
                return true;
            }, "acceleration factor");
            sub->add_option("--deterministic", [&cli](const std::vector<std::string>& v) {
                cli.deterministic = (v[0] == "true" || v[0] == "1");
                return true;
            }, "probability-flow sampling");
            sub->add_option("--ni", [&cli](const std::vector<std::string>& v) {
                cli.ni = std::stoll(v[0]);
                return true;
            }, "inversion steps");
        }
        sub->callback([&chosen, name] { chosen = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (chosen == "make-dataset") return cmd_make_dataset(cli);
        if (chosen == "train") return cmd_train(cli);
        if (chosen == "recon") return cmd_recon(cli);
        return cmd_eval(cli);
    } catch (const NumericalError& e) {
        std::cerr << "numerical abort: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const FileFormatError& e) {
        std::cerr << "file error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
