#include "ssoct/checkpoint.hpp"

#include <cmath>
#include <limits>
#include <map>

#include <json.hpp>

#include "ssoct/error.hpp"

namespace ssoct {

using nlohmann::json;

namespace {

NamedArray snapshot(std::string name, const nn::Shape& shape, std::span<const float> values) {
    return {std::move(name), shape, std::vector<float>(values.begin(), values.end())};
}

json config_json(const Checkpoint& c) {
    return json{{"model",
                 {{"levels", c.config.levels},
                  {"base_channels", c.config.base_channels},
                  {"input_channels", c.config.input_channels},
                  {"output_channels", c.config.output_channels},
                  {"patch_height", c.config.patch_height},
                  {"patch_width", c.config.patch_width}}},
                {"epoch", c.epoch},
                // JSON has no infinity; null stands for "no validation yet".
                {"best_val_loss", std::isfinite(c.best_val_loss) ? json(c.best_val_loss) : json(nullptr)},
                {"adam",
                 {{"lr", c.adam_options.lr},
                  {"beta1", c.adam_options.beta1},
                  {"beta2", c.adam_options.beta2},
                  {"eps", c.adam_options.eps},
                  {"step", c.adam_step}}}};
}

void apply_config_json(const json& j, Checkpoint& c) {
    const auto& m = j.at("model");
    c.config.levels = m.at("levels").get<std::size_t>();
    c.config.base_channels = m.at("base_channels").get<std::size_t>();
    c.config.input_channels = m.at("input_channels").get<std::size_t>();
    c.config.output_channels = m.at("output_channels").get<std::size_t>();
    c.config.patch_height = m.at("patch_height").get<std::size_t>();
    c.config.patch_width = m.at("patch_width").get<std::size_t>();
    c.epoch = j.at("epoch").get<std::int64_t>();
    const auto& best = j.at("best_val_loss");
    c.best_val_loss = best.is_null() ? std::numeric_limits<double>::infinity() : best.get<double>();
    const auto& a = j.at("adam");
    c.adam_options.lr = a.at("lr").get<double>();
    c.adam_options.beta1 = a.at("beta1").get<double>();
    c.adam_options.beta2 = a.at("beta2").get<double>();
    c.adam_options.eps = a.at("eps").get<double>();
    c.adam_step = a.at("step").get<std::int64_t>();
}

const NamedArray& expect_tensor(const std::map<std::string, const NamedArray*>& by_name, const std::string& name,
                                const nn::Shape& shape) {
    const auto it = by_name.find(name);
    if (it == by_name.end()) throw DimensionError("checkpoint lacks tensor '" + name + "'");
    if (it->second->shape != shape) {
        throw DimensionError("checkpoint tensor '" + name + "' has shape " + nn::shape_string(it->second->shape) +
                             ", model expects " + nn::shape_string(shape));
    }
    return *it->second;
}

}  // namespace

Checkpoint capture_checkpoint(WaveUnet<float>& model, const nn::AdamState<float>* adam, std::int64_t epoch,
                              double best_val_loss) {
    Checkpoint c;
    c.config = model.config();
    c.epoch = epoch;
    c.best_val_loss = best_val_loss;
    const auto& params = model.named_parameters();
    for (const auto& [name, t] : params) c.tensors.push_back(snapshot(name, t.shape(), t.data()));
    for (const auto& [name, buf] : model.named_buffers()) c.tensors.push_back(snapshot(name, {buf->size()}, *buf));
    if (adam != nullptr) {
        c.adam_options = adam->options;
        c.adam_step = adam->step_count;
        if (!adam->first_moment.empty()) {
            for (std::size_t i = 0; i < params.size(); ++i) {
                c.tensors.push_back(snapshot("adam.m/" + params[i].first, params[i].second.shape(), adam->first_moment[i]));
                c.tensors.push_back(snapshot("adam.v/" + params[i].first, params[i].second.shape(), adam->second_moment[i]));
            }
        }
    }
    return c;
}

void restore_checkpoint(const Checkpoint& ckpt, WaveUnet<float>& model, nn::AdamState<float>* adam) {
    std::map<std::string, const NamedArray*> by_name;
    for (const auto& t : ckpt.tensors) by_name[t.name] = &t;
    const auto& params = model.named_parameters();
    // Validate everything before mutating the model.
    for (const auto& [name, t] : params) expect_tensor(by_name, name, t.shape());
    auto buffers = model.named_buffers();
    for (const auto& [name, buf] : buffers) expect_tensor(by_name, name, {buf->size()});
    const bool has_moments = by_name.count("adam.m/" + params.front().first) > 0;
    if (adam != nullptr && has_moments) {
        for (const auto& [name, t] : params) {
            expect_tensor(by_name, "adam.m/" + name, t.shape());
            expect_tensor(by_name, "adam.v/" + name, t.shape());
        }
    }

    for (const auto& [name, t] : params) {
        const auto& src = by_name.at(name)->values;
        auto dst = nn::Tensor<float>(t).data();
        std::copy(src.begin(), src.end(), dst.begin());
    }
    for (auto& [name, buf] : buffers) *buf = by_name.at(name)->values;
    if (adam != nullptr) {
        adam->options = ckpt.adam_options;
        adam->step_count = ckpt.adam_step;
        adam->first_moment.clear();
        adam->second_moment.clear();
        if (has_moments) {
            for (const auto& [name, t] : params) {
                adam->first_moment.push_back(by_name.at("adam.m/" + name)->values);
                adam->second_moment.push_back(by_name.at("adam.v/" + name)->values);
            }
        }
    }
}

io::Bytes encode_checkpoint(const Checkpoint& ckpt) {
    io::ByteWriter out;
    out.raw("WUN1");
    out.u16(kCheckpointVersion);
    const std::string blob = config_json(ckpt).dump();
    out.u32(static_cast<std::uint32_t>(blob.size()));
    out.raw(blob);
    out.u32(static_cast<std::uint32_t>(ckpt.tensors.size()));
    for (const auto& t : ckpt.tensors) {
        if (t.name.size() > std::numeric_limits<std::uint16_t>::max()) throw DimensionError("tensor name too long");
        if (t.shape.size() > std::numeric_limits<std::uint8_t>::max()) throw DimensionError("tensor rank too large");
        if (nn::shape_numel(t.shape) != t.values.size()) {
            throw DimensionError("tensor '" + t.name + "' payload does not match its shape");
        }
        out.u16(static_cast<std::uint16_t>(t.name.size()));
        out.raw(t.name);
        out.u8(static_cast<std::uint8_t>(t.shape.size()));
        for (const auto e : t.shape) out.u32(static_cast<std::uint32_t>(e));
        for (const float v : t.values) out.f32(v);
    }
    return out.take();
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes, const std::string& what) {
    io::ByteReader in(bytes, what);
    if (in.str(4) != "WUN1") in.fail("bad magic, expected WUN1");
    const auto version = in.u16();
    if (version != kCheckpointVersion) in.fail("unsupported checkpoint version " + std::to_string(version));
    const std::size_t blob_len = in.u32();
    const std::string blob = in.str(blob_len);
    Checkpoint c;
    try {
        apply_config_json(json::parse(blob), c);
    } catch (const json::exception& e) {
        in.fail(std::string("invalid config blob: ") + e.what());
    }
    const std::size_t count = in.u32();
    for (std::size_t i = 0; i < count; ++i) {
        NamedArray t;
        t.name = in.str(in.u16());
        const std::size_t rank = in.u8();
        std::size_t numel = 1;
        for (std::size_t r = 0; r < rank; ++r) {
            const std::size_t extent = in.u32();
            if (extent != 0 && numel > bytes.size() / extent) in.fail("tensor '" + t.name + "' extents exceed the file size");
            t.shape.push_back(extent);
            numel *= extent;
        }
        if (numel > in.remaining() / 4) in.fail("tensor '" + t.name + "' payload truncated");
        t.values.resize(numel);
        in.f32_array(t.values);
        c.tensors.push_back(std::move(t));
    }
    if (in.remaining() != 0) in.fail(std::to_string(in.remaining()) + " trailing bytes");
    return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    io::write_file(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    return decode_checkpoint(io::read_file(path), path.string());
}

}  // namespace ssoct
