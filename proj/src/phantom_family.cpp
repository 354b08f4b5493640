#include "ssoct/phantom_family.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ssoct/error.hpp"

namespace ssoct {

void PhantomFamily::validate() const {
    if (min_layers < 1 || max_layers < min_layers) throw ConfigError("phantom layer counts invalid");
    if (!(top_fraction_min >= 0.0 && bottom_fraction_max <= 1.0 && top_fraction_min < bottom_fraction_max)) {
        throw ConfigError("phantom depth fractions must satisfy 0 <= top < bottom <= 1");
    }
    if (!(thickness_fraction_min > 0.0 && thickness_fraction_max >= thickness_fraction_min)) {
        throw ConfigError("phantom thickness fractions invalid");
    }
    if (!(scatterers_per_bin >= 0.0)) throw ConfigError("phantom scatterer density must be >= 0");
    if (!(reflectivity_min >= 0.0 && reflectivity_max <= 1.0 && reflectivity_min <= reflectivity_max)) {
        throw ConfigError("phantom reflectivity range must lie in [0, 1]");
    }
    if (interface_reflectivity < 0.0 || interface_reflectivity > 1.0) {
        throw ConfigError("phantom interface reflectivity must lie in [0, 1]");
    }
    if (undulation_fraction < 0.0 || !(undulation_period > 0.0)) {
        throw ConfigError("phantom undulation parameters invalid");
    }
}

std::vector<Phantom> generate_scene(const PhantomFamily& family, const SweepConfig& sweep,
                                    std::size_t n_alines, std::mt19937_64& rng) {
    family.validate();
    sweep.validate();
    const double max_depth = max_imaging_depth(sweep);
    const double bin = max_depth / (static_cast<double>(sweep.n_samples) / 2.0);
    const double lo = family.top_fraction_min * max_depth;
    const double hi = family.bottom_fraction_max * max_depth;

    std::uniform_int_distribution<std::size_t> layer_count(family.min_layers, family.max_layers);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    struct Layer {
        double top, thickness, reflectivity, amplitude, phase0;
    };
    std::vector<Layer> layers(layer_count(rng));
    for (auto& layer : layers) {
        layer.thickness = max_depth * (family.thickness_fraction_min +
                                       unit(rng) * (family.thickness_fraction_max - family.thickness_fraction_min));
        layer.amplitude = family.undulation_fraction * max_depth * unit(rng);
        const double span = std::max(0.0, hi - lo - layer.thickness - 2.0 * layer.amplitude);
        layer.top = lo + layer.amplitude + unit(rng) * span;
        const double log_lo = std::log(std::max(family.reflectivity_min, 1e-300));
        const double log_hi = std::log(std::max(family.reflectivity_max, 1e-300));
        layer.reflectivity = family.reflectivity_min == family.reflectivity_max
                                 ? family.reflectivity_min
                                 : std::exp(log_lo + unit(rng) * (log_hi - log_lo));
        layer.phase0 = 2.0 * std::numbers::pi * unit(rng);
    }

    std::vector<Phantom> scene(n_alines);
    for (std::size_t col = 0; col < n_alines; ++col) {
        Phantom& p = scene[col];
        p.reference_reflectivity = family.reference_reflectivity;
        const double x = static_cast<double>(col) / static_cast<double>(std::max<std::size_t>(n_alines, 1));
        for (const auto& layer : layers) {
            const double top = std::clamp(
                layer.top + layer.amplitude * std::sin(2.0 * std::numbers::pi * x / family.undulation_period +
                                                       layer.phase0),
                0.0, max_depth * 0.999);
            const double bottom = std::min(top + layer.thickness, max_depth * 0.999);
            if (family.interface_reflectivity > 0.0) {
                p.reflectors.push_back({top, family.interface_reflectivity, 2.0 * std::numbers::pi * unit(rng)});
            }
            const auto count = static_cast<std::size_t>(std::lround((bottom - top) / bin * family.scatterers_per_bin));
            for (std::size_t s = 0; s < count; ++s) {
                const double depth = top + unit(rng) * (bottom - top);
                p.reflectors.push_back({depth, layer.reflectivity, 2.0 * std::numbers::pi * unit(rng)});
            }
        }
    }
    return scene;
}

}  // namespace ssoct
