#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "ssoct/forward_model.hpp"

namespace ssoct {

/// Random layered scenes. Each layer is an undulating band filled with
/// sub-resolution scatterers; depths are fractions of the maximum imaging depth
/// so the same family works for any sweep geometry.
struct PhantomFamily {
    std::size_t min_layers = 2;
    std::size_t max_layers = 4;
    double top_fraction_min = 0.05;
    double bottom_fraction_max = 0.9;
    double thickness_fraction_min = 0.03;
    double thickness_fraction_max = 0.15;
    double scatterers_per_bin = 2.0;
    double reflectivity_min = 1e-5;
    double reflectivity_max = 1e-3;
    double interface_reflectivity = 5e-3;  // specular reflector at each layer top, 0 disables
    double undulation_fraction = 0.05;     // peak boundary displacement
    double undulation_period = 1.0;        // in units of the B-scan width
    double reference_reflectivity = 1.0;

    void validate() const;
};

/// One phantom per A-line for a B-scan of n_alines columns.
std::vector<Phantom> generate_scene(const PhantomFamily& family, const SweepConfig& sweep,
                                    std::size_t n_alines, std::mt19937_64& rng);

}  // namespace ssoct
