#include "ssoct/io/config.hpp"

#include <cstdint>
#include <set>
#include <type_traits>

#include <json.hpp>

#include "ssoct/error.hpp"
#include "ssoct/io/binary.hpp"

namespace ssoct::io {

using nlohmann::json;

namespace {

static_assert(std::is_same_v<std::uint64_t, std::size_t>, "seeds are parsed through the size_t reader");

// Reads one JSON object, remembering which keys were consumed so that the
// rest can be reported as unknown.
class Section {
public:
    Section(const json* node, std::string path) : node_(node), path_(std::move(path)) {
        if (node_ != nullptr && !node_->is_object()) fail_type(path_, "an object");
    }

    Section child(const char* key) {
        seen_.insert(key);
        const json* sub = find(key);
        return Section(sub, join(key));
    }

    void get(const char* key, double& out) {
        if (const json* v = take(key)) {
            if (!v->is_number()) fail_type(join(key), "a number");
            out = v->get<double>();
        }
    }

    void get(const char* key, std::size_t& out) {
        if (const json* v = take(key)) {
            if (!v->is_number_integer() || (v->is_number_integer() && !v->is_number_unsigned() && v->get<long long>() < 0)) {
                fail_type(join(key), "a non-negative integer");
            }
            out = v->get<std::size_t>();
        }
    }

    void get(const char* key, bool& out) {
        if (const json* v = take(key)) {
            if (!v->is_boolean()) fail_type(join(key), "a boolean");
            out = v->get<bool>();
        }
    }

    void get(const char* key, std::string& out) {
        if (const json* v = take(key)) {
            if (!v->is_string()) fail_type(join(key), "a string");
            out = v->get<std::string>();
        }
    }

    void finish() const {
        if (node_ == nullptr) return;
        for (const auto& [key, value] : node_->items()) {
            if (!seen_.count(key)) throw ConfigError("unknown config key '" + join(key.c_str()) + "'");
        }
    }

    std::string join(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

private:
    const json* find(const char* key) const {
        if (node_ == nullptr) return nullptr;
        const auto it = node_->find(key);
        return it == node_->end() ? nullptr : &*it;
    }

    const json* take(const char* key) {
        seen_.insert(key);
        return find(key);
    }

    [[noreturn]] static void fail_type(const std::string& path, const char* expected) {
        throw ConfigError("config key '" + path + "' must be " + expected);
    }

    const json* node_;
    std::string path_;
    std::set<std::string> seen_;
};

InterpMethod parse_interp(const std::string& name, const std::string& path) {
    if (name == "cubic_spline") return InterpMethod::cubic_spline;
    if (name == "linear") return InterpMethod::linear;
    throw ConfigError("config key '" + path + "' must be \"cubic_spline\" or \"linear\", got \"" + name + "\"");
}

std::string interp_name(InterpMethod m) { return m == InterpMethod::linear ? "linear" : "cubic_spline"; }

json sweep_json(const SweepConfig& s) {
    return {{"lambda_c", s.lambda_c},
            {"delta_lambda", s.delta_lambda},
            {"n_samples", s.n_samples},
            {"sweep_duration", s.sweep_duration},
            {"spectrum_fwhm", s.spectrum_fwhm}};
}

json phantom_json(const PhantomFamily& f) {
    return {{"min_layers", f.min_layers},
            {"max_layers", f.max_layers},
            {"top_fraction_min", f.top_fraction_min},
            {"bottom_fraction_max", f.bottom_fraction_max},
            {"thickness_fraction_min", f.thickness_fraction_min},
            {"thickness_fraction_max", f.thickness_fraction_max},
            {"scatterers_per_bin", f.scatterers_per_bin},
            {"reflectivity_min", f.reflectivity_min},
            {"reflectivity_max", f.reflectivity_max},
            {"interface_reflectivity", f.interface_reflectivity},
            {"undulation_fraction", f.undulation_fraction},
            {"undulation_period", f.undulation_period},
            {"reference_reflectivity", f.reference_reflectivity}};
}

json dataset_sections(const DatasetSpec& d) {
    return {{"seed", d.seed},
            {"sweep", sweep_json(d.sweep)},
            {"phantom", phantom_json(d.family)},
            {"noise", {{"speckle", d.noise.speckle}, {"detector_sigma", d.noise.detector_sigma}}},
            {"dataset",
             {{"n_volumes", d.n_volumes},
              {"frames_per_volume", d.frames_per_volume},
              {"n_alines", d.n_alines},
              {"gt_repeats", d.gt_repeats},
              {"autocorrelation", d.include_autocorrelation},
              {"interp", interp_name(d.interp)},
              {"fractions", {{"train", d.fractions.train}, {"val", d.fractions.val}, {"test", d.fractions.test}}}}}};
}

}  // namespace

void RunConfig::set_seed(std::uint64_t s) {
    seed = s;
    dataset.seed = s;
    train.seed = s;
}

void RunConfig::finalize() {
    set_seed(seed);
    dataset.validate();
    train.validate();
    if (dataset.sweep.n_samples % (2 * kPatchesPerImage) != 0) {
        throw ConfigError("sweep.n_samples must be divisible by " + std::to_string(2 * kPatchesPerImage) +
                          " so the image splits into equal patches");
    }
    model.patch_height = dataset.sweep.n_samples / 2 / kPatchesPerImage;
    model.patch_width = dataset.n_alines;
    model.validate();
    if (!(metrics.range_db > 0.0)) throw ConfigError("metrics.range_db must be > 0");
    if (metrics.ssim.window < 1 || !(metrics.ssim.sigma > 0.0)) throw ConfigError("metrics.ssim_* must be positive");
    if (bench.frames < 1) throw ConfigError("bench.frames must be >= 1");
}

RunConfig parse_run_config(std::string_view json_text, const std::string& origin) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": invalid JSON: " + e.what());
    }
    RunConfig cfg;
    Section top(&root, "");
    top.get("seed", cfg.seed);

    auto& sweep = cfg.dataset.sweep;
    Section s = top.child("sweep");
    s.get("lambda_c", sweep.lambda_c);
    s.get("delta_lambda", sweep.delta_lambda);
    s.get("n_samples", sweep.n_samples);
    s.get("sweep_duration", sweep.sweep_duration);
    s.get("spectrum_fwhm", sweep.spectrum_fwhm);
    s.finish();

    auto& fam = cfg.dataset.family;
    Section p = top.child("phantom");
    p.get("min_layers", fam.min_layers);
    p.get("max_layers", fam.max_layers);
    p.get("top_fraction_min", fam.top_fraction_min);
    p.get("bottom_fraction_max", fam.bottom_fraction_max);
    p.get("thickness_fraction_min", fam.thickness_fraction_min);
    p.get("thickness_fraction_max", fam.thickness_fraction_max);
    p.get("scatterers_per_bin", fam.scatterers_per_bin);
    p.get("reflectivity_min", fam.reflectivity_min);
    p.get("reflectivity_max", fam.reflectivity_max);
    p.get("interface_reflectivity", fam.interface_reflectivity);
    p.get("undulation_fraction", fam.undulation_fraction);
    p.get("undulation_period", fam.undulation_period);
    p.get("reference_reflectivity", fam.reference_reflectivity);
    p.finish();

    Section n = top.child("noise");
    n.get("speckle", cfg.dataset.noise.speckle);
    n.get("detector_sigma", cfg.dataset.noise.detector_sigma);
    n.finish();

    auto& ds = cfg.dataset;
    Section d = top.child("dataset");
    d.get("n_volumes", ds.n_volumes);
    d.get("frames_per_volume", ds.frames_per_volume);
    d.get("n_alines", ds.n_alines);
    d.get("gt_repeats", ds.gt_repeats);
    d.get("autocorrelation", ds.include_autocorrelation);
    std::string interp = interp_name(ds.interp);
    d.get("interp", interp);
    ds.interp = parse_interp(interp, d.join("interp"));
    Section fr = d.child("fractions");
    fr.get("train", ds.fractions.train);
    fr.get("val", ds.fractions.val);
    fr.get("test", ds.fractions.test);
    fr.finish();
    d.finish();

    Section m = top.child("model");
    m.get("levels", cfg.model.levels);
    m.get("base_channels", cfg.model.base_channels);
    m.finish();

    Section t = top.child("train");
    t.get("epochs", cfg.train.epochs);
    t.get("batch_size", cfg.train.batch_size);
    t.get("lr", cfg.train.lr);
    t.get("checkpoint_every", cfg.train.checkpoint_every);
    t.get("eval_every", cfg.train.eval_every);
    t.finish();

    Section me = top.child("metrics");
    me.get("range_db", cfg.metrics.range_db);
    me.get("ssim_window", cfg.metrics.ssim.window);
    me.get("ssim_sigma", cfg.metrics.ssim.sigma);
    me.finish();

    Section b = top.child("bench");
    b.get("frames", cfg.bench.frames);
    b.finish();

    top.finish();
    try {
        cfg.finalize();
    } catch (const ConfigError& e) {
        throw ConfigError(origin + ": " + e.what());
    } catch (const Error& e) {
        // Domain checks inside the component validators are configuration errors here.
        throw ConfigError(origin + ": " + e.what());
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    return parse_run_config(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()), path.string());
}

std::string run_config_to_json(const RunConfig& cfg) {
    json j = dataset_sections(cfg.dataset);
    j["seed"] = cfg.seed;
    j["model"] = {{"levels", cfg.model.levels}, {"base_channels", cfg.model.base_channels}};
    j["train"] = {{"epochs", cfg.train.epochs},
                  {"batch_size", cfg.train.batch_size},
                  {"lr", cfg.train.lr},
                  {"checkpoint_every", cfg.train.checkpoint_every},
                  {"eval_every", cfg.train.eval_every}};
    j["metrics"] = {{"range_db", cfg.metrics.range_db},
                    {"ssim_window", cfg.metrics.ssim.window},
                    {"ssim_sigma", cfg.metrics.ssim.sigma}};
    j["bench"] = {{"frames", cfg.bench.frames}};
    return j.dump(2) + "\n";
}

std::string dataset_spec_to_json(const DatasetSpec& spec) { return dataset_sections(spec).dump(2) + "\n"; }

}  // namespace ssoct::io
