#include "relight/conefit.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>
#include <json.hpp>

#include "relight/parallel.hpp"

namespace relight {

GeneratorSet::GeneratorSet(Eigen::MatrixXd generators) : generators_(std::move(generators)) {
    if (generators_.cols() < 1) throw std::invalid_argument("generator set must not be empty");
    if (generators_.rows() < 1) throw std::invalid_argument("generators must have positive length");
    if (!generators_.allFinite()) throw std::invalid_argument("generators must be finite");
    if ((generators_.array() < 0.0).any())
        throw std::invalid_argument("generators must be non-negative");
    for (Eigen::Index c = 0; c < generators_.cols(); ++c)
        if (generators_.col(c).maxCoeff() <= 0.0)
            throw std::invalid_argument("generator " + std::to_string(c) + " is identically zero");
}

Eigen::VectorXd normalize_shading(const Eigen::VectorXd& field) {
    if (field.size() == 0) throw std::invalid_argument("cannot normalize an empty field");
    if ((field.array() < 0.0).any())
        throw std::invalid_argument("shading fields must be non-negative");
    const double mean = field.mean();
    if (!(mean > 0.0)) throw std::invalid_argument("cannot normalize a zero-mean field");
    return field * (0.7 / mean);
}

namespace {

void check_target(const Eigen::VectorXd& target, const GeneratorSet& gens) {
    if (target.size() != gens.dim())
        throw std::invalid_argument("target length must match generator length");
    if (!target.allFinite()) throw std::invalid_argument("target must be finite");
}

}  // namespace

FitResult fit_approx(const Eigen::VectorXd& target, const GeneratorSet& gens, int n_gd) {
    check_target(target, gens);
    if (n_gd < 0) throw std::invalid_argument("n_gd must be non-negative");
    const Eigen::MatrixXd& g = gens.matrix();
    const Eigen::MatrixXd gram = g.transpose() * g;
    const Eigen::VectorXd c = g.transpose() * target;

    Eigen::VectorXd w =
        g.completeOrthogonalDecomposition().solve(target).cwiseMax(0.0);

    if (n_gd > 0) {
        const double l = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram).eigenvalues().maxCoeff();
        if (l > 0.0) {
            const double step = 1.0 / l;
            for (int s = 0; s < n_gd; ++s)
                w = (w - step * 2.0 * (gram * w - c)).cwiseMax(0.0);
        }
    }

    FitResult out;
    out.weights = w;
    out.residual_sq = (g * w - target).squaredNorm();
    out.steps_taken = n_gd;
    return out;
}

FitResult fit_exact(const Eigen::VectorXd& target, const GeneratorSet& gens) {
    check_target(target, gens);
    const Eigen::MatrixXd& g = gens.matrix();
    const Eigen::Index ng = g.cols();
    const Eigen::MatrixXd gram = g.transpose() * g;
    const Eigen::VectorXd c = g.transpose() * target;
    const double scale = std::max(1.0, c.size() ? c.array().abs().maxCoeff() : 0.0);
    const double enter_tol = 1e-10 * scale;

    Eigen::VectorXd w = Eigen::VectorXd::Zero(ng);
    std::vector<bool> passive(static_cast<std::size_t>(ng), false);
    const int cap = 10 * static_cast<int>(ng);
    int outer = 0;

    const auto solve_passive = [&](Eigen::VectorXd& z) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index i = 0; i < ng; ++i)
            if (passive[static_cast<std::size_t>(i)]) idx.push_back(i);
        Eigen::MatrixXd sub(g.rows(), static_cast<Eigen::Index>(idx.size()));
        for (std::size_t k = 0; k < idx.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = g.col(idx[k]);
        const Eigen::VectorXd zs = sub.colPivHouseholderQr().solve(target);
        z.setZero(ng);
        for (std::size_t k = 0; k < idx.size(); ++k) z[idx[k]] = zs[static_cast<Eigen::Index>(k)];
    };

    while (outer < cap) {
        const Eigen::VectorXd grad_half = c - gram * w;  // = G^T (t - G w)
        Eigen::Index best = -1;
        double best_val = enter_tol;
        for (Eigen::Index i = 0; i < ng; ++i)
            if (!passive[static_cast<std::size_t>(i)] && grad_half[i] > best_val) {
                best_val = grad_half[i];
                best = i;
            }
        if (best < 0) break;
        passive[static_cast<std::size_t>(best)] = true;
        ++outer;

        for (;;) {
            Eigen::VectorXd z;
            solve_passive(z);
            bool all_positive = true;
            double alpha = 1.0;
            for (Eigen::Index i = 0; i < ng; ++i) {
                if (!passive[static_cast<std::size_t>(i)] || z[i] > 0.0) continue;
                all_positive = false;
                const double denom = w[i] - z[i];
                if (denom > 0.0) alpha = std::min(alpha, w[i] / denom);
            }
            if (all_positive) {
                w = z;
                break;
            }
            w += alpha * (z - w);
            for (Eigen::Index i = 0; i < ng; ++i)
                if (passive[static_cast<std::size_t>(i)] && w[i] <= 1e-14 * scale) {
                    w[i] = 0.0;
                    passive[static_cast<std::size_t>(i)] = false;
                }
        }
    }
    if (outer >= cap)
        throw std::runtime_error("non-negative fit did not settle within " + std::to_string(cap) +
                                 " active-set iterations");

    // KKT certificate for the returned point.
    const Eigen::VectorXd grad = 2.0 * (gram * w - c);
    for (Eigen::Index i = 0; i < ng; ++i) {
        if (w[i] > 0.0 ? std::abs(grad[i]) > 1e-8 * scale : grad[i] < -1e-8 * scale)
            throw std::runtime_error("non-negative fit failed its optimality certificate");
    }

    FitResult out;
    out.weights = w;
    out.residual_sq = (g * w - target).squaredNorm();
    out.steps_taken = outer;
    return out;
}

double nearby_loss(const std::vector<Eigen::VectorXd>& targets, const GeneratorSet& gens, int n_gd,
                   int n_threads) {
    for (std::size_t i = 0; i < targets.size(); ++i)
        if (std::abs(targets[i].mean() - 0.7) > 1e-9)
            throw std::invalid_argument("target " + std::to_string(i) +
                                        " is not normalized to mean 0.7");
    std::vector<double> residuals(targets.size(), 0.0);
    parallel_for(static_cast<int>(targets.size()), n_threads, [&](int i) {
        residuals[static_cast<std::size_t>(i)] =
            fit_approx(targets[static_cast<std::size_t>(i)], gens, n_gd).residual_sq;
    });
    double total = 0.0;
    for (double r : residuals) total += r;
    return total;
}

double barrier_loss(const Eigen::VectorXd& relit_intensity, const Eigen::VectorXd& orig_intensity,
                    double epsilon) {
    if (relit_intensity.size() != orig_intensity.size() || relit_intensity.size() == 0)
        throw std::invalid_argument("intensity vectors must be non-empty and equal length");
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    const double mp = relit_intensity.mean();
    const double mq = orig_intensity.mean();
    if (!(mp > 0.0) || !(mq > 0.0)) throw std::invalid_argument("intensities need positive means");
    const Eigen::ArrayXd diff =
        (relit_intensity.array() / mp - orig_intensity.array() / mq).abs() + epsilon;
    return (-diff.log()).mean();
}

RangeLosses range_losses(const Eigen::VectorXd& relit) {
    if (relit.size() == 0) throw std::invalid_argument("relit field must be non-empty");
    RangeLosses out;
    out.under = (-relit.array()).max(0.0).square().mean();
    out.over = (relit.array() - 1.0).max(0.0).square().mean();
    return out;
}

double pixel_uniformity_loss(const Eigen::VectorXd& relit_max, const Eigen::VectorXd& shading_min) {
    if (relit_max.size() != shading_min.size() || relit_max.size() == 0)
        throw std::invalid_argument("fields must be non-empty and equal length");
    const Eigen::ArrayXd bright = -(0.95 - relit_max.array()).min(0.0);
    const Eigen::ArrayXd dark = (shading_min.array() - 0.05).max(0.0);
    return (bright + dark).mean();
}

std::string fit_result_to_json(const FitResult& fit) {
    nlohmann::json doc;
    doc["residual_sq"] = fit.residual_sq;
    doc["steps_taken"] = fit.steps_taken;
    doc["weights"] = std::vector<double>(fit.weights.data(), fit.weights.data() + fit.weights.size());
    return doc.dump(2) + "\n";
}

}  // namespace relight
