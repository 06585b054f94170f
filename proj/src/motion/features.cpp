#include "vstab/motion/features.hpp"

#include <algorithm>
#include <cmath>

namespace vstab::motion {

CorrespondenceSet::CorrespondenceSet(std::vector<Correspondence> items) : items_(std::move(items)) {
    for (const auto& c : items_)
        if (!c.source.allFinite() || !c.target.allFinite())
            throw InvalidInputError("Correspondence: non-finite coordinates");
}

void CorrespondenceSet::push_back(const Correspondence& c) {
    if (!c.source.allFinite() || !c.target.allFinite())
        throw InvalidInputError("Correspondence: non-finite coordinates");
    items_.push_back(c);
}

namespace {

// 3x3 box blur, edge-clamped. Two passes approximate a small Gaussian.
ImagePlane box3(const ImagePlane& in) {
    const Eigen::Index h = in.rows(), w = in.cols();
    ImagePlane tmp(h, w), out(h, w);
    for (Eigen::Index y = 0; y < h; ++y) {
        for (Eigen::Index x = 0; x < w; ++x) {
            const Eigen::Index x0 = std::max<Eigen::Index>(0, x - 1);
            const Eigen::Index x1 = std::min<Eigen::Index>(w - 1, x + 1);
            tmp(y, x) = (in(y, x0) + in(y, x) + in(y, x1)) / 3.0f;
        }
    }
    for (Eigen::Index y = 0; y < h; ++y) {
        const Eigen::Index y0 = std::max<Eigen::Index>(0, y - 1);
        const Eigen::Index y1 = std::min<Eigen::Index>(h - 1, y + 1);
        out.row(y) = (tmp.row(y0) + tmp.row(y) + tmp.row(y1)) / 3.0f;
    }
    return out;
}

}  // namespace

std::vector<Vec2> detect_features(const Frame& frame, int max_points) {
    DetectorConfig cfg;
    cfg.max_points = max_points;
    return detect_features(frame, cfg);
}

std::vector<Vec2> detect_features(const Frame& frame, const DetectorConfig& cfg) {
    const ImagePlane gray = to_gray(frame);
    const Eigen::Index h = gray.rows(), w = gray.cols();
    if (cfg.max_points <= 0 || h < 2 * cfg.margin + 3 || w < 2 * cfg.margin + 3) return {};

    // Central-difference gradients.
    ImagePlane ix = ImagePlane::Zero(h, w), iy = ImagePlane::Zero(h, w);
    ix.block(0, 1, h, w - 2) = 0.5f * (gray.rightCols(w - 2) - gray.leftCols(w - 2));
    iy.block(1, 0, h - 2, w) = 0.5f * (gray.bottomRows(h - 2) - gray.topRows(h - 2));

    // Structure tensor smoothed with two box passes (approx. 5x5 Gaussian).
    const ImagePlane sxx = box3(box3((ix * ix).eval()));
    const ImagePlane syy = box3(box3((iy * iy).eval()));
    const ImagePlane sxy = box3(box3((ix * iy).eval()));

    // Shi-Tomasi response: smaller eigenvalue of [[sxx, sxy], [sxy, syy]].
    const ImagePlane half_trace = 0.5f * (sxx + syy);
    const ImagePlane root = ((0.5f * (sxx - syy)).square() + sxy.square()).sqrt();
    const ImagePlane response = half_trace - root;

    const Eigen::Index m = cfg.margin;
    const float max_response = response.block(m, m, h - 2 * m, w - 2 * m).maxCoeff();
    if (max_response <= 0.0f) return {};
    const float threshold = static_cast<float>(cfg.relative_threshold) * max_response;

    struct Candidate {
        float score;
        Eigen::Index y, x;
    };
    std::vector<Candidate> candidates;
    for (Eigen::Index y = m; y < h - m; ++y) {
        for (Eigen::Index x = m; x < w - m; ++x) {
            const float r = response(y, x);
            if (r < threshold) continue;
            bool peak = true;
            for (Eigen::Index dy = -1; dy <= 1 && peak; ++dy)
                for (Eigen::Index dx = -1; dx <= 1; ++dx) {
                    if (dy == 0 && dx == 0) continue;
                    const float n = response(y + dy, x + dx);
                    // Strict on the earlier neighbor side breaks plateau ties
                    // deterministically toward smaller (y, x).
                    if (n > r || (n == r && (dy < 0 || (dy == 0 && dx < 0)))) {
                        peak = false;
                        break;
                    }
                }
            if (peak) candidates.push_back({r, y, x});
        }
    }

    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });
    if (static_cast<int>(candidates.size()) > cfg.max_points)
        candidates.resize(static_cast<std::size_t>(cfg.max_points));

    // Parabolic subpixel refinement on the response map.
    auto refine = [&](Eigen::Index c0, Eigen::Index cm, Eigen::Index cp, bool horizontal,
                      Eigen::Index fixed) -> double {
        const float rm = horizontal ? response(fixed, cm) : response(cm, fixed);
        const float r0 = horizontal ? response(fixed, c0) : response(c0, fixed);
        const float rp = horizontal ? response(fixed, cp) : response(cp, fixed);
        const double denom = static_cast<double>(rm) - 2.0 * r0 + rp;
        if (std::abs(denom) < 1e-12) return 0.0;
        const double off = 0.5 * (static_cast<double>(rm) - rp) / denom;
        return std::clamp(off, -0.5, 0.5);
    };

    std::vector<Vec2> points;
    points.reserve(candidates.size());
    for (const auto& c : candidates) {
        const double dx = refine(c.x, c.x - 1, c.x + 1, true, c.y);
        const double dy = refine(c.y, c.y - 1, c.y + 1, false, c.x);
        points.emplace_back(static_cast<double>(c.x) + dx, static_cast<double>(c.y) + dy);
    }
    return points;
}

namespace {

// Zero-mean, unit-norm grayscale patch; all-zero when the patch has no
// variance so its correlation with anything is 0.
Eigen::VectorXf extract_descriptor(const ImagePlane& gray, Eigen::Index cy, Eigen::Index cx,
                                   int radius) {
    const int side = 2 * radius + 1;
    Eigen::VectorXf d(side * side);
    int k = 0;
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx) d(k++) = gray(cy + dy, cx + dx);
    d.array() -= d.mean();
    const float norm = d.norm();
    if (norm < 1e-12f) return Eigen::VectorXf::Zero(side * side);
    return d / norm;
}

}  // namespace

CorrespondenceSet match_features(const std::vector<Vec2>& points_a, const Frame& frame_a,
                                 const std::vector<Vec2>& points_b, const Frame& frame_b,
                                 const MatcherConfig& cfg) {
    if (points_a.empty() || points_b.empty())
        throw InvalidInputError("match_features: empty point list");

    const ImagePlane gray_a = to_gray(frame_a);
    const ImagePlane gray_b = to_gray(frame_b);
    const int r = cfg.patch_radius;

    auto usable = [&](const Vec2& p, const ImagePlane& g) {
        const auto y = static_cast<Eigen::Index>(std::lround(p.y()));
        const auto x = static_cast<Eigen::Index>(std::lround(p.x()));
        return y >= r && x >= r && y < g.rows() - r && x < g.cols() - r;
    };

    struct Entry {
        Eigen::VectorXf desc;
        std::size_t index;
    };
    std::vector<Entry> da, db;
    for (std::size_t i = 0; i < points_a.size(); ++i) {
        if (!usable(points_a[i], gray_a)) continue;
        da.push_back({extract_descriptor(gray_a, std::lround(points_a[i].y()),
                                         std::lround(points_a[i].x()), r),
                      i});
    }
    for (std::size_t j = 0; j < points_b.size(); ++j) {
        if (!usable(points_b[j], gray_b)) continue;
        db.push_back({extract_descriptor(gray_b, std::lround(points_b[j].y()),
                                         std::lround(points_b[j].x()), r),
                      j});
    }
    if (da.empty() || db.empty()) return {};

    struct Candidate {
        double similarity;
        std::size_t a, b;  // indices into points_a / points_b
    };
    std::vector<Candidate> accepted;
    for (const auto& ea : da) {
        double best = -2.0, second = -2.0;
        std::size_t best_j = 0;
        for (const auto& eb : db) {
            const double s = static_cast<double>(ea.desc.dot(eb.desc));
            if (s > best) {
                second = best;
                best = s;
                best_j = eb.index;
            } else if (s > second) {
                second = s;
            }
        }
        if (best < cfg.min_correlation) continue;
        // Lowe ratio on correlation-derived distances; a lone candidate passes.
        if (db.size() > 1) {
            const double d1 = 1.0 - best, d2 = 1.0 - second;
            if (d2 <= 1e-12 || d1 / d2 > cfg.ratio) continue;
        }
        accepted.push_back({best, ea.index, best_j});
    }

    // Greedy one-to-one resolution, strongest correlation first.
    std::sort(accepted.begin(), accepted.end(), [](const Candidate& x, const Candidate& y) {
        if (x.similarity != y.similarity) return x.similarity > y.similarity;
        if (x.a != y.a) return x.a < y.a;
        return x.b < y.b;
    });
    std::vector<bool> used_a(points_a.size(), false), used_b(points_b.size(), false);
    std::vector<Correspondence> out;
    for (const auto& c : accepted) {
        if (used_a[c.a] || used_b[c.b]) continue;
        used_a[c.a] = true;
        used_b[c.b] = true;
        out.push_back({points_a[c.a], points_b[c.b]});
    }
    return CorrespondenceSet(std::move(out));
}

}  // namespace vstab::motion
