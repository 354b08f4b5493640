#include "ssoct/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "ssoct/checkpoint.hpp"
#include "ssoct/dataset.hpp"
#include "ssoct/error.hpp"
#include "ssoct/io/config.hpp"
#include "ssoct/io/frg1.hpp"
#include "ssoct/io/manifest.hpp"
#include "ssoct/io/pgm.hpp"
#include "ssoct/metrics.hpp"
#include "ssoct/training.hpp"

namespace ssoct::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
    std::string config;
    std::string out;
    std::string in;
    std::string checkpoint;
    std::string mode = "lambda";
    std::optional<std::uint64_t> seed;
    bool quiet = false;
};

class Log {
public:
    Log(const fs::path& dir, bool quiet, std::ostream& err) : quiet_(quiet), err_(err) {
        fs::create_directories(dir);
        file_.open(dir / "ssoct.log", std::ios::app);
        if (!file_) throw IoError("cannot open " + (dir / "ssoct.log").string());
    }

    void operator()(const std::string& message) {
        const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm{};
        gmtime_r(&now, &tm);
        file_ << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ") << " " << message << "\n";
        file_.flush();
        if (!quiet_) err_ << message << "\n";
    }

private:
    bool quiet_;
    std::ostream& err_;
    std::ofstream file_;
};

std::string pad(std::size_t v, int width) {
    std::ostringstream s;
    s << std::setw(width) << std::setfill('0') << v;
    return s.str();
}

io::RunConfig load_config(const Options& o) {
    if (o.config.empty()) throw UsageError("--config is required");
    auto cfg = io::load_run_config(o.config);
    if (o.seed) cfg.set_seed(*o.seed);
    return cfg;
}

fs::path require_dir(const std::string& path, const char* flag) {
    if (path.empty()) throw UsageError(std::string(flag) + " is required");
    if (!fs::is_directory(path)) throw IoError(std::string(flag) + " directory not found: " + path);
    return path;
}

fs::path require_file(const std::string& path, const char* flag) {
    if (path.empty()) throw UsageError(std::string(flag) + " is required");
    if (!fs::is_regular_file(path)) throw IoError(std::string(flag) + " file not found: " + path);
    return path;
}

SweepContext sweep_context(const io::RunConfig& cfg) {
    return SweepContext::create(cfg.dataset.sweep, cfg.dataset.family.reference_reflectivity);
}

FrameGeometry frame_geometry(const io::RunConfig& cfg, const SweepContext& ctx) {
    return FrameGeometry::create(cfg.dataset.sweep.n_samples / 2, ctx.k_lo(), ctx.k_hi());
}

WaveUnet<float> model_from_checkpoint(const fs::path& path, const io::RunConfig& cfg) {
    const auto ckpt = load_checkpoint(path);
    if (ckpt.config.patch_height != cfg.model.patch_height || ckpt.config.patch_width != cfg.model.patch_width) {
        throw ConfigError("checkpoint patches " + std::to_string(ckpt.config.patch_height) + "x" +
                          std::to_string(ckpt.config.patch_width) + " do not match the configured frame geometry " +
                          std::to_string(cfg.model.patch_height) + "x" + std::to_string(cfg.model.patch_width));
    }
    WaveUnet<float> model(ckpt.config, 0);
    restore_checkpoint(ckpt, model);
    return model;
}

// Raw frames below `dir`: every *.frg1 except background.frg1, sorted by path.
std::vector<fs::path> frame_files(const fs::path& dir) {
    std::vector<fs::path> files;
    for (const auto& item : fs::recursive_directory_iterator(dir)) {
        if (item.is_regular_file() && item.path().extension() == ".frg1" && item.path().filename() != "background.frg1") {
            files.push_back(item.path());
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw UsageError("no input frames in " + dir.string());
    return files;
}

std::vector<double> load_background(const fs::path& dir, std::size_t rows) {
    const auto block = io::read_frg1(dir / "background.frg1");
    if (block.values.cols() != 1 || block.values.rows() != rows) {
        throw FormatError((dir / "background.frg1").string() + ": expected a " + std::to_string(rows) + "x1 column");
    }
    return block.values.col(0);
}

// Writes dB images as FRG1 plus PGM previews; the display window of every
// image in a volume directory is anchored at that volume's maximum.
void export_images(const fs::path& out, const std::vector<std::pair<fs::path, Matrix<double>>>& images,
                   double range_db) {
    std::map<fs::path, double> volume_max;
    for (const auto& [rel, img] : images) {
        const double m = *std::max_element(img.values().begin(), img.values().end());
        auto [it, inserted] = volume_max.emplace(rel.parent_path(), m);
        if (!inserted) it->second = std::max(it->second, m);
    }
    for (const auto& [rel, img] : images) {
        const double ref = volume_max.at(rel.parent_path());
        io::write_frg1(out / fs::path(rel).concat(".frg1"), img, GridTag::k_linear);
        io::write_pgm(out / fs::path(rel).concat(".pgm"), display_map(img, ref - range_db, ref));
    }
}

int cmd_simulate(const Options& o, std::ostream&, std::ostream& err) {
    const auto cfg = load_config(o);
    if (o.out.empty()) throw UsageError("--out is required");
    const fs::path out = o.out;
    Log log(out, o.quiet, err);
    const auto& ds = cfg.dataset;
    const auto ctx = sweep_context(cfg);
    log("simulate: " + std::to_string(ds.n_volumes) + " volume(s) x " + std::to_string(ds.frames_per_volume) +
        " frame(s), " + std::to_string(ds.sweep.n_samples) + " samples x " + std::to_string(ds.n_alines) + " A-lines");
    io::write_frg1(out / "background.frg1", Matrix<double>(ctx.background.size(), 1, ctx.background),
                   GridTag::lambda_linear);
    for (std::size_t v = 0; v < ds.n_volumes; ++v) {
        for (std::size_t f = 0; f < ds.frames_per_volume; ++f) {
            const auto frames = frame_realizations(ds, ctx, v, f, 1);
            io::write_fringe(out / pad(v, 3) / (pad(f, 4) + ".frg1"), frames.front());
        }
    }
    const auto entries = io::write_manifest(out);
    log("simulate: wrote " + std::to_string(entries.size()) + " files");
    return kOk;
}

int cmd_reconstruct(const Options& o, std::ostream&, std::ostream& err) {
    const auto cfg = load_config(o);
    const auto in = require_dir(o.in, "--in");
    if (o.out.empty()) throw UsageError("--out is required");
    if (o.mode != "lambda" && o.mode != "classic") throw UsageError("--mode must be lambda or classic");
    const fs::path out = o.out;
    Log log(out, o.quiet, err);
    const auto files = frame_files(in);
    const auto ctx = sweep_context(cfg);
    const auto background = load_background(in, cfg.dataset.sweep.n_samples);
    // Frames tagged k-linear are taken as already uniform in k, in sweep order.
    auto uniform_k = uniform_k_grid(ctx.k_lo(), ctx.k_hi(), ctx.kgrid.values.size());
    std::reverse(uniform_k.values.begin(), uniform_k.values.end());
    std::vector<std::pair<fs::path, Matrix<double>>> images;
    for (const auto& file : files) {
        const auto frame = io::read_fringe(file);
        if (frame.samples.rows() != ctx.kgrid.values.size()) {
            throw FormatError(file.string() + ": " + std::to_string(frame.samples.rows()) +
                              " spectral rows, the sweep has " + std::to_string(ctx.kgrid.values.size()));
        }
        const auto& source = frame.grid_tag == GridTag::k_linear ? uniform_k : ctx.kgrid;
        auto scan = o.mode == "lambda" ? lambda_space_image(frame, background)
                                       : classic_reconstruct(frame, background, source, cfg.dataset.interp);
        auto rel = fs::relative(file, in).replace_extension("");
        rel += "." + o.mode;
        images.emplace_back(rel, std::move(scan.intensity_db));
    }
    export_images(out, images, cfg.metrics.range_db);
    io::write_manifest(out);
    log("reconstruct: " + std::to_string(images.size()) + " frame(s) in " + o.mode + " mode");
    return kOk;
}

int cmd_train(const Options& o, std::ostream&, std::ostream& err) {
    const auto cfg = load_config(o);
    if (o.out.empty()) throw UsageError("--out is required");
    const fs::path out = o.out;
    Log log(out, o.quiet, err);
    fs::path data_root;
    if (o.in.empty()) {
        data_root = out / "dataset";
        log("train: generating " + std::to_string(cfg.dataset.frame_count()) + " frame pairs in " + data_root.string());
        generate_dataset(cfg.dataset, data_root);
    } else {
        data_root = require_dir(o.in, "--in");
    }
    const auto index = scan_dataset(data_root);
    const auto ctx = sweep_context(cfg);
    const auto geom = frame_geometry(cfg, ctx);
    const auto train_entries = index.of(Split::train);
    const auto val_entries = index.of(Split::val);
    const auto train_set = load_patches(train_entries, geom);
    const auto val_set = load_patches(val_entries, geom);
    log("train: " + std::to_string(train_entries.size()) + " train / " + std::to_string(val_entries.size()) +
        " val frames, " + std::to_string(cfg.train.epochs) + " epoch(s)");
    WaveUnet<float> model(cfg.model, cfg.train.seed);
    nn::AdamState<float> adam;
    const auto result = train(model, adam, train_set, val_set, cfg.train, out);
    for (const auto& r : result.history) {
        log("epoch " + std::to_string(r.epoch) + " train_loss " + format_metric(r.train_loss) +
            (std::isnan(r.val_loss) ? std::string() : " val_loss " + format_metric(r.val_loss)));
    }
    io::write_text(out / "config.json", io::run_config_to_json(cfg));
    log("train: best epoch " + std::to_string(result.best_epoch));
    return kOk;
}

int cmd_infer(const Options& o, std::ostream& out_stream, std::ostream& err) {
    const auto cfg = load_config(o);
    const auto in = require_dir(o.in, "--in");
    const auto ckpt = require_file(o.checkpoint, "--checkpoint");
    if (o.out.empty()) throw UsageError("--out is required");
    const fs::path out = o.out;
    Log log(out, o.quiet, err);
    auto model = model_from_checkpoint(ckpt, cfg);
    const auto files = frame_files(in);
    const auto ctx = sweep_context(cfg);
    const auto background = load_background(in, cfg.dataset.sweep.n_samples);
    std::vector<FringeFrame> frames;
    for (const auto& f : files) frames.push_back(io::read_fringe(f));
    const auto result = infer_volume(model, frames, background, ctx.kgrid, cfg.dataset.interp);
    std::vector<std::pair<fs::path, Matrix<double>>> images;
    for (std::size_t i = 0; i < files.size(); ++i) {
        auto rel = fs::relative(files[i], in).replace_extension("");
        rel += ".network";
        images.emplace_back(rel, result.images[i].intensity_db);
    }
    export_images(out, images, cfg.metrics.range_db);
    io::write_manifest(out);
    const auto report = latency_csv(result.latency);
    io::write_text(out / "latency.log", report);
    if (!o.quiet) out_stream << report;
    log("infer: " + std::to_string(files.size()) + " frame(s)");
    return kOk;
}

int cmd_evaluate(const Options& o, std::ostream& out_stream, std::ostream& err) {
    const auto cfg = load_config(o);
    const auto in = require_dir(o.in, "--in");
    const auto ckpt = require_file(o.checkpoint, "--checkpoint");
    if (o.out.empty()) throw UsageError("--out is required");
    const fs::path out = o.out;
    Log log(out, o.quiet, err);
    auto model = model_from_checkpoint(ckpt, cfg);
    const auto ctx = sweep_context(cfg);
    const auto geom = frame_geometry(cfg, ctx);
    const auto entries = scan_dataset(in).of(Split::test);
    if (entries.empty()) throw UsageError("dataset " + in.string() + " has no test frames");
    std::vector<EvaluationSample> samples;
    std::map<std::size_t, double> volume_max;
    for (const auto& e : entries) {
        auto pair = load_pair(e);
        EvaluationSample s;
        s.id = e.id();
        s.network_db = infer_image(model, pair.input_db, geom).intensity_db;
        s.classic_db = load_classic(e);
        s.input_db = std::move(pair.input_db);
        s.ground_truth_db = std::move(pair.ground_truth_db);
        const double m = *std::max_element(s.ground_truth_db.values().begin(), s.ground_truth_db.values().end());
        auto [it, inserted] = volume_max.emplace(e.volume, m);
        if (!inserted) it->second = std::max(it->second, m);
        samples.push_back(std::move(s));
    }
    for (std::size_t i = 0; i < samples.size(); ++i) samples[i].reference_db = volume_max.at(entries[i].volume);
    const auto report = evaluate(samples, cfg.metrics);
    io::write_text(out / "metrics.csv", metrics_csv(report.records));
    io::write_text(out / "metrics_means.csv", means_csv(report.means));
    if (!o.quiet) out_stream << means_csv(report.means);
    log("evaluate: " + std::to_string(samples.size()) + " test frame(s)");
    return kOk;
}

int cmd_bench(const Options& o, std::ostream& out_stream, std::ostream& err) {
    const auto cfg = load_config(o);
    if (o.out.empty()) throw UsageError("--out is required");
    const fs::path out = o.out;
    Log log(out, o.quiet, err);
    auto model = o.checkpoint.empty() ? WaveUnet<float>(cfg.model, cfg.train.seed)
                                      : model_from_checkpoint(require_file(o.checkpoint, "--checkpoint"), cfg);
    const auto ctx = sweep_context(cfg);
    const auto& spec = cfg.dataset;
    std::vector<FringeFrame> frames;
    for (std::size_t f = 0; f < cfg.bench.frames; ++f) frames.push_back(frame_realizations(spec, ctx, 0, f, 1).front());
    log("bench: " + std::to_string(frames.size()) + " frame(s)");
    const auto result = infer_volume(model, frames, ctx.background, ctx.kgrid, cfg.dataset.interp);
    const auto report = latency_csv(result.latency);
    io::write_text(out / "bench.log", report);
    if (!o.quiet) out_stream << report;
    return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Swept-source OCT simulation, reconstruction and learned lambda-space reconstruction"};
    app.require_subcommand(1);
    Options o;
    auto add_common = [&o](CLI::App* sub) {
        sub->add_option("--config", o.config, "JSON run configuration")->required();
        sub->add_option("--out", o.out, "output directory")->required();
        sub->add_option("--seed", o.seed, "overrides the configured seed");
        sub->add_flag("--quiet", o.quiet, "no progress output");
    };
    auto* simulate = app.add_subcommand("simulate", "synthesize fringe volumes and the background");
    add_common(simulate);
    auto* reconstruct = app.add_subcommand("reconstruct", "lambda-space or classic reconstruction of FRG1 frames");
    add_common(reconstruct);
    reconstruct->add_option("--in", o.in, "directory of FRG1 frames with background.frg1")->required();
    reconstruct->add_option("--mode", o.mode, "lambda or classic")->check(CLI::IsMember({"lambda", "classic"}));
    auto* train_cmd = app.add_subcommand("train", "train the network (generates a dataset unless --in is given)");
    add_common(train_cmd);
    train_cmd->add_option("--in", o.in, "existing dataset directory");
    auto* infer = app.add_subcommand("infer", "network reconstruction of FRG1 frames with latency report");
    add_common(infer);
    infer->add_option("--in", o.in, "directory of FRG1 frames with background.frg1")->required();
    infer->add_option("--checkpoint", o.checkpoint, "WUN1 checkpoint")->required();
    auto* eval = app.add_subcommand("evaluate", "metrics of input, classic and network images on the test split");
    add_common(eval);
    eval->add_option("--in", o.in, "dataset directory")->required();
    eval->add_option("--checkpoint", o.checkpoint, "WUN1 checkpoint")->required();
    auto* bench = app.add_subcommand("bench", "classic vs network latency on a synthetic volume");
    add_common(bench);
    bench->add_option("--checkpoint", o.checkpoint, "WUN1 checkpoint (random weights when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(o, out, err);
        if (reconstruct->parsed()) return cmd_reconstruct(o, out, err);
        if (train_cmd->parsed()) return cmd_train(o, out, err);
        if (infer->parsed()) return cmd_infer(o, out, err);
        if (eval->parsed()) return cmd_evaluate(o, out, err);
        if (bench->parsed()) return cmd_bench(o, out, err);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const NumericError& e) {
        err << "error: " << e.what() << "\n";
        return kNumeric;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kData;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kData;
    }
    return kUsage;
}

}  // namespace ssoct::cli
