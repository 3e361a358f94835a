#include "relight/radiosity.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "relight/parallel.hpp"
#include "relight/textio.hpp"

namespace relight {

double weighted_norm(const Eigen::VectorXd& f, const Eigen::VectorXd& areas, Norm kind) {
    if (f.size() != areas.size()) throw std::invalid_argument("weighted_norm: size mismatch");
    switch (kind) {
        case Norm::L1:
            return (f.array().abs() * areas.array()).sum();
        case Norm::L2:
            return std::sqrt((f.array().square() * areas.array()).sum());
        case Norm::LInf:
            return f.size() ? f.array().abs().maxCoeff() : 0.0;
    }
    throw std::invalid_argument("weighted_norm: unknown norm");
}

double weighted_norm(const Eigen::VectorXd& f, const Scene& scene, Norm kind) {
    return weighted_norm(f, scene.areas(), kind);
}

Eigen::MatrixXd kernel_entries(const Scene& scene, int n_threads) {
    const int n = scene.patch_count();
    const double cap = scene.kernel_cap();
    Eigen::MatrixXd entries = Eigen::MatrixXd::Zero(n, n);

    constexpr double pi = 3.14159265358979323846;

    struct CapHit {
        int i = -1, j = -1;
        double value = 0.0;
    };
    std::vector<CapHit> cap_hits(static_cast<std::size_t>(n));

    parallel_for(n, n_threads, [&](int i) {
        const Patch& pi_ = scene.patches()[static_cast<std::size_t>(i)];
        const Eigen::Vector3d ni = pi_.normal();
        for (int j = i + 1; j < n; ++j) {
            const Patch& pj = scene.patches()[static_cast<std::size_t>(j)];
            const Eigen::Vector3d d = pj.center - pi_.center;
            const double r2 = d.squaredNorm();
            if (r2 <= 0.0)
                throw std::invalid_argument("patches " + std::to_string(i) + " and " +
                                            std::to_string(j) + " share a center");
            const double inv_r = 1.0 / std::sqrt(r2);
            const double cos_i = std::max(ni.dot(d) * inv_r, 0.0);
            const double cos_j = std::max(-pj.normal().dot(d) * inv_r, 0.0);
            if (cos_i == 0.0 || cos_j == 0.0) continue;
            if (!visibility(scene, i, j)) continue;
            const double k = cos_i * cos_j / (pi * r2);
            const double kij = k * scene.areas()[j];
            const double kji = k * scene.areas()[i];
            if (k > cap || kij > cap || kji > cap) {
                CapHit& hit = cap_hits[static_cast<std::size_t>(i)];
                if (hit.i < 0 || k > hit.value) hit = CapHit{i, j, std::max(k, std::max(kij, kji))};
                continue;
            }
            entries(i, j) = kij;
            entries(j, i) = kji;
        }
    });

    for (const CapHit& hit : cap_hits) {
        if (hit.i >= 0)
            throw std::invalid_argument("kernel cap exceeded for patch pair (" + std::to_string(hit.i) +
                                        ", " + std::to_string(hit.j) + "): value " +
                                        textio::format_double(hit.value) + " > cap " +
                                        textio::format_double(cap));
    }
    return entries;
}

KernelMatrix assemble_kernel(const Scene& scene, int n_threads) {
    const int n = scene.patch_count();
    KernelMatrix out;
    out.entries = kernel_entries(scene, n_threads);

    // Operator norms of D_rho K. The sup-norm one is the largest
    // albedo-scaled row sum; by kernel symmetry (K_ij / A_j = K_ji / A_i) the
    // weighted-L1 one reduces to the largest entry of K * rho.
    const Eigen::VectorXd& rho = scene.albedos();
    out.norm_inf = n ? (rho.array() * out.entries.rowwise().sum().array()).maxCoeff() : 0.0;
    out.norm1 = n ? (out.entries * rho).maxCoeff() : 0.0;
    out.norm_l2_bound = std::sqrt(out.norm1 * out.norm_inf);

    if (out.norm_inf >= 1.0)
        throw std::invalid_argument("transport too strong: sup-norm of D_rho K is " +
                                    textio::format_double(out.norm_inf) + " >= 1");
    if (out.norm1 >= 1.0)
        throw std::invalid_argument("transport too strong: weighted L1 norm of D_rho K is " +
                                    textio::format_double(out.norm1) + " >= 1");
    if (out.norm_l2_bound > scene.max_albedo())
        throw std::invalid_argument("transport too strong: L2 bound " +
                                    textio::format_double(out.norm_l2_bound) +
                                    " exceeds max albedo " +
                                    textio::format_double(scene.max_albedo()));
    return out;
}

namespace {

void check_emittance(const Scene& scene, const Eigen::VectorXd& e) {
    if (e.size() != scene.patch_count())
        throw std::invalid_argument("emittance size must match patch count");
    if (!e.allFinite()) throw std::invalid_argument("emittance must be finite");
}

}  // namespace

NeumannResult solve_neumann(const Scene& scene, const KernelMatrix& kernel,
                            const Eigen::VectorXd& emittance, double tol, int max_bounces) {
    check_emittance(scene, emittance);
    if ((emittance.array() < 0.0).any())
        throw std::invalid_argument("bounce series needs non-negative emittance");
    if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (max_bounces < 1) throw std::invalid_argument("max_bounces must be at least 1");

    const Eigen::VectorXd& rho = scene.albedos();
    NeumannResult res;
    res.values = emittance;
    Eigen::VectorXd term = emittance;
    for (int m = 1; m <= max_bounces; ++m) {
        term = (rho.array() * (kernel.entries * term).array()).matrix();
        res.values += term;
        res.bounces = m;
        res.final_increment = weighted_norm(term, scene, Norm::L2);
        if (res.final_increment < tol) {
            res.converged = true;
            return res;
        }
    }
    res.converged = false;
    return res;
}

Eigen::VectorXd solve_direct(const Scene& scene, const KernelMatrix& kernel,
                             const Eigen::VectorXd& emittance) {
    check_emittance(scene, emittance);
    const int n = scene.patch_count();
    if (n > 2000) throw std::invalid_argument("direct solve supports at most 2000 patches");

    Eigen::MatrixXd m = -(scene.albedos().asDiagonal() * kernel.entries);
    m.diagonal().array() += 1.0;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
    const double rc = lu.rcond();
    if (rc < 1e-14)
        throw std::runtime_error("transport system near-singular: rcond = " + textio::format_double(rc));
    Eigen::VectorXd x = lu.solve(emittance);
    const double resid = (m * x - emittance).norm();
    if (resid > 1e-8 * emittance.norm())
        throw std::runtime_error("direct solve residual " + textio::format_double(resid) +
                                 " exceeds 1e-8 * |e|");
    return x;
}

void write_field_csv(const std::string& path, const Eigen::VectorXd& field) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(static_cast<std::size_t>(field.size()));
    for (Eigen::Index i = 0; i < field.size(); ++i)
        rows.push_back({std::to_string(i), textio::format_double(field[i])});
    textio::write_csv(path, {"patch_index", "value"}, rows);
}

Eigen::VectorXd read_field_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("patch_index,value", 0) != 0)
        throw std::runtime_error(path + ": expected 'patch_index,value' header");
    std::vector<double> vals;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected 'index,value'");
        const long idx = std::strtol(line.c_str(), nullptr, 10);
        if (idx != static_cast<long>(vals.size()))
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": patch indices must be 0,1,2,...");
        vals.push_back(std::strtod(line.c_str() + comma + 1, nullptr));
    }
    return Eigen::Map<const Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

}  // namespace relight
