#include "relight/scene_io.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "relight/radiosity.hpp"
#include "relight/textio.hpp"

namespace relight {

namespace {

using nlohmann::json;

Eigen::Vector3d vec3_field(const json& j, const char* key, int patch_index) {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_array() || it->size() != 3)
        throw std::runtime_error("patch " + std::to_string(patch_index) + ": '" + key +
                                 "' must be an array of 3 numbers");
    Eigen::Vector3d v;
    for (int k = 0; k < 3; ++k) v[k] = it->at(static_cast<std::size_t>(k)).get<double>();
    return v;
}

}  // namespace

SceneLoadReport load_scene_json(const std::string& path) {
    json doc;
    try {
        doc = json::parse(textio::read_text_file(path));
    } catch (const json::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    try {
        if (!doc.is_object()) throw std::runtime_error("top level must be an object");
        const auto patches_it = doc.find("patches");
        if (patches_it == doc.end() || !patches_it->is_array() || patches_it->empty())
            throw std::runtime_error("'patches' must be a non-empty array");

        std::vector<Patch> patches;
        patches.reserve(patches_it->size());
        int idx = 0;
        for (const auto& jp : *patches_it) {
            Patch p;
            p.center = vec3_field(jp, "center", idx);
            p.edge_u = vec3_field(jp, "edge_u", idx);
            p.edge_v = vec3_field(jp, "edge_v", idx);
            const auto alb = jp.find("albedo");
            if (alb == jp.end() || !alb->is_number())
                throw std::runtime_error("patch " + std::to_string(idx) + ": 'albedo' must be a number");
            p.albedo = alb->get<double>();
            patches.push_back(p);
            ++idx;
        }

        LuminaireModel lum;
        const int n = static_cast<int>(patches.size());
        if (const auto it = doc.find("luminaires"); it != doc.end()) {
            if (!it->is_array()) throw std::runtime_error("'luminaires' must be an array of arrays");
            lum.basis.resize(n, static_cast<Eigen::Index>(it->size()));
            Eigen::Index col = 0;
            for (const auto& jl : *it) {
                if (!jl.is_array() || static_cast<int>(jl.size()) != n)
                    throw std::runtime_error("luminaire " + std::to_string(col) +
                                             ": needs one emittance value per patch");
                for (int r = 0; r < n; ++r) lum.basis(r, col) = jl.at(static_cast<std::size_t>(r)).get<double>();
                ++col;
            }
        } else {
            lum.basis.resize(n, 0);
        }
        if (const auto it = doc.find("dirichlet_alpha"); it != doc.end())
            lum.dirichlet_alpha = it->get<double>();
        double cap = kDefaultKernelCap;
        if (const auto it = doc.find("kernel_cap"); it != doc.end()) cap = it->get<double>();

        // Luminaires are stored up to scale; canonical form is unit
        // area-weighted L2 norm per column.
        Eigen::VectorXd areas(n);
        for (int i = 0; i < n; ++i) areas[i] = patches[static_cast<std::size_t>(i)].area();
        Eigen::VectorXd scales(lum.basis.cols());
        for (Eigen::Index c = 0; c < lum.basis.cols(); ++c) {
            if ((lum.basis.col(c).array() < 0.0).any())
                throw std::runtime_error("luminaire " + std::to_string(c) + ": emittance must be non-negative");
            const double nrm = std::sqrt((lum.basis.col(c).array().square() * areas.array()).sum());
            if (!(nrm > 0.0))
                throw std::runtime_error("luminaire " + std::to_string(c) + ": zero field cannot be normalized");
            lum.basis.col(c) /= nrm;
            scales[c] = nrm;
        }

        Scene scene(std::move(patches), std::move(lum), cap);
        assemble_kernel(scene);  // surfaces cap and norm violations at load time
        return SceneLoadReport{std::move(scene), std::move(scales)};
    } catch (const json::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(path + ": " + e.what());
    } catch (const std::runtime_error& e) {
        if (std::string(e.what()).rfind(path, 0) == 0) throw;
        throw std::runtime_error(path + ": " + e.what());
    }
}

Scene load_scene(const std::string& path) { return load_scene_json(path).scene; }

std::string scene_to_json(const Scene& scene) {
    json doc;
    json jpatches = json::array();
    for (const Patch& p : scene.patches()) {
        json jp;
        jp["center"] = {p.center[0], p.center[1], p.center[2]};
        jp["edge_u"] = {p.edge_u[0], p.edge_u[1], p.edge_u[2]};
        jp["edge_v"] = {p.edge_v[0], p.edge_v[1], p.edge_v[2]};
        jp["albedo"] = p.albedo;
        jpatches.push_back(jp);
    }
    doc["patches"] = jpatches;
    json jlum = json::array();
    const Eigen::MatrixXd& basis = scene.luminaires().basis;
    for (Eigen::Index c = 0; c < basis.cols(); ++c) {
        json col = json::array();
        for (Eigen::Index r = 0; r < basis.rows(); ++r) col.push_back(basis(r, c));
        jlum.push_back(col);
    }
    doc["luminaires"] = jlum;
    doc["dirichlet_alpha"] = scene.luminaires().dirichlet_alpha;
    doc["kernel_cap"] = scene.kernel_cap();
    return doc.dump(2) + "\n";
}

void save_scene_json(const std::string& path, const Scene& scene) {
    textio::write_text_file(path, scene_to_json(scene));
}

}  // namespace relight
