#pragma once

#include <string>

#include <Eigen/Core>

#include "relight/geometry.hpp"

namespace relight {

struct SceneLoadReport {
    Scene scene;
    // Raw area-weighted L2 norm of each luminaire column before the loader
    // rescaled it to 1.
    Eigen::VectorXd luminaire_scales;
};

// Parses, validates, normalizes luminaires, and assembles the kernel once so
// cap and norm violations surface at load time. Throws std::runtime_error
// with the file path in the message on any failure.
SceneLoadReport load_scene_json(const std::string& path);

Scene load_scene(const std::string& path);

std::string scene_to_json(const Scene& scene);
void save_scene_json(const std::string& path, const Scene& scene);

}  // namespace relight
