#include "vstab/metrics/metrics.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>

#include "vstab/stab/predictor.hpp"

namespace vstab::metrics {

namespace {

Eigen::Vector2d singular_values_2x2(const Eigen::Matrix2d& m) {
    const Eigen::JacobiSVD<Eigen::Matrix2d> svd(m);
    return svd.singularValues();  // descending
}

}  // namespace

double cropping_ratio(const std::vector<Homography>& hs, std::vector<double>* series) {
    if (hs.empty()) throw InvalidInputError("cropping_ratio: no homographies");
    if (series) series->clear();
    double acc = 0.0;
    for (const auto& h : hs) {
        const Eigen::Vector2d sv = singular_values_2x2(h.linear());
        const double sigma1 = sv(0);
        if (sigma1 <= 0.0) throw SingularMatrixError("cropping_ratio: zero singular value");
        const double tau = 1.0 / (sigma1 * sigma1);
        if (series) series->push_back(tau);
        acc += tau;
    }
    return acc / static_cast<double>(hs.size());
}

double distortion_score(const std::vector<Homography>& hs, std::vector<double>* series) {
    if (hs.empty()) throw InvalidInputError("distortion_score: no homographies");
    if (series) series->clear();
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& h : hs) {
        // Affine part: projective row replaced by (0, 0, 1). The polar
        // symmetric factor of its linear block carries the anisotropy; its
        // eigenvalues are the singular values.
        const AffineTransform a = affine_part(h);
        const Eigen::Vector2d sv = singular_values_2x2(a.linear());
        if (sv(1) <= 1e-12) throw SingularMatrixError("distortion_score: vanishing eigenvalue");
        const double ratio = sv(1) / sv(0);  // small / large, in (0, 1]
        if (series) series->push_back(ratio);
        worst = std::min(worst, ratio);
    }
    return worst;
}

std::vector<VertexTrajectory> vertex_trajectories(const FrameSequence& seq,
                                                  const StabilityConfig& cfg,
                                                  const TrajectoryConfig& traj_cfg,
                                                  int* fallback_pairs) {
    cfg.validate();
    validate_sequence(seq);
    if (seq.size() < 8)
        throw InvalidInputError("vertex_trajectories: need at least 8 frames for spectra");

    const Eigen::Index h = seq.front().height(), w = seq.front().width();
    const int rows = cfg.grid_rows, cols = cfg.grid_cols;

    // Cell centers of the rows x cols grid.
    std::vector<Vec2> vertices;
    vertices.reserve(static_cast<std::size_t>(rows * cols));
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            vertices.emplace_back((2.0 * c + 1.0) * static_cast<double>(w) / (2.0 * cols),
                                  (2.0 * r + 1.0) * static_cast<double>(h) / (2.0 * rows));

    std::vector<VertexTrajectory> trajectories(vertices.size());
    for (std::size_t v = 0; v < vertices.size(); ++v) trajectories[v].push_back(vertices[v]);

    int fallbacks = 0;
    std::vector<Vec2> current = vertices;
    for (std::size_t t = 0; t + 1 < seq.size(); ++t) {
        auto step = stab::estimate_pair_affine(seq[t], seq[t + 1], traj_cfg.detector,
                                               traj_cfg.matcher, traj_cfg.ransac);
        if (!step) {
            ++fallbacks;
            step = AffineTransform::identity();
        }
        for (std::size_t v = 0; v < current.size(); ++v) {
            current[v] = step->apply(current[v]);
            trajectories[v].push_back(current[v]);
        }
    }
    if (fallback_pairs) *fallback_pairs = fallbacks;
    return trajectories;
}

double stability_score(const std::vector<VertexTrajectory>& trajectories,
                       const StabilityConfig& cfg, std::vector<double>* per_vertex) {
    cfg.validate();
    if (trajectories.empty()) throw InvalidInputError("stability_score: no trajectories");
    const std::size_t n = trajectories.front().size();
    for (const auto& t : trajectories)
        if (t.size() != n) throw InvalidInputError("stability_score: trajectory lengths differ");
    if (static_cast<int>(n) <= 2 * cfg.band_high)
        throw InvalidInputError("stability_score: trajectories shorter than twice the band bound");

    if (per_vertex) per_vertex->clear();
    Eigen::FFT<double> fft;
    double total_score = 0.0;

    for (const auto& traj : trajectories) {
        double vertex_score = 0.0;
        for (int axis = 0; axis < 2; ++axis) {
            std::vector<double> signal(n);
            double mean = 0.0;
            for (std::size_t t = 0; t < n; ++t) {
                signal[t] = axis == 0 ? traj[t].x() : traj[t].y();
                mean += signal[t];
            }
            mean /= static_cast<double>(n);
            for (auto& s : signal) s -= mean;

            std::vector<std::complex<double>> spectrum;
            fft.fwd(spectrum, signal);

            // AC power only; the DC bin is ~0 after mean removal and is
            // excluded regardless. Mirrored bins of a real signal fold into
            // the band so a single in-band sinusoid scores exactly 1.
            double total = 0.0;
            for (std::size_t k = 1; k < n; ++k) total += std::norm(spectrum[k]);
            double band = 0.0;
            for (int k = cfg.band_low; k <= cfg.band_high; ++k) {
                band += std::norm(spectrum[static_cast<std::size_t>(k)]);
                band += std::norm(spectrum[n - static_cast<std::size_t>(k)]);
            }
            // A motionless axis is maximally stable.
            const double p = total <= 1e-12 ? 1.0 : band / total;
            vertex_score += 0.5 * p;
        }
        if (per_vertex) per_vertex->push_back(vertex_score);
        total_score += vertex_score;
    }
    return total_score / static_cast<double>(trajectories.size());
}

namespace {

MetricsReport finish_report(const std::vector<Homography>& hs, const FrameSequence& stabilized,
                            const EvalConfig& cfg, int pair_fallbacks) {
    MetricsReport report;
    report.cropping = cropping_ratio(hs, &report.cropping_series);
    report.distortion = distortion_score(hs, &report.distortion_series);
    int traj_fallbacks = 0;
    const auto trajectories =
        vertex_trajectories(stabilized, cfg.stability, cfg.trajectory, &traj_fallbacks);
    report.stability = stability_score(trajectories, cfg.stability, &report.per_vertex_stability);
    report.fallback_pairs = pair_fallbacks + traj_fallbacks;
    return report;
}

}  // namespace

MetricsReport evaluate(const FrameSequence& original, const FrameSequence& stabilized,
                       const EvalConfig& cfg) {
    validate_sequence(original);
    validate_sequence(stabilized);
    if (original.size() != stabilized.size())
        throw InvalidInputError("evaluate: sequence lengths differ (" +
                                std::to_string(original.size()) + " vs " +
                                std::to_string(stabilized.size()) + ")");

    std::vector<Homography> hs;
    hs.reserve(original.size());
    int fallbacks = 0;
    const std::size_t pairs = cfg.pair_mode == EvalConfig::PairMode::InputOutput
                                  ? original.size()
                                  : original.size() - 1;
    for (std::size_t i = 0; i < pairs; ++i) {
        const Frame& a =
            cfg.pair_mode == EvalConfig::PairMode::InputOutput ? original[i] : stabilized[i];
        const Frame& b = cfg.pair_mode == EvalConfig::PairMode::InputOutput ? stabilized[i]
                                                                            : stabilized[i + 1];
        auto affine = stab::estimate_pair_affine(a, b, cfg.trajectory.detector,
                                                 cfg.trajectory.matcher, cfg.trajectory.ransac);
        if (!affine) {
            ++fallbacks;
            affine = AffineTransform::identity();
        }
        try {
            hs.push_back(to_homography(*affine));
        } catch (const Error& e) {
            throw InvalidInputError("evaluate: frame " + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return finish_report(hs, stabilized, cfg, fallbacks);
}

MetricsReport evaluate_with_homographies(const std::vector<Homography>& hs,
                                         const FrameSequence& stabilized, const EvalConfig& cfg) {
    if (hs.empty()) throw InvalidInputError("evaluate_with_homographies: no homographies");
    return finish_report(hs, stabilized, cfg, 0);
}

}  // namespace vstab::metrics
