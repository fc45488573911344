#pragma once

#include "ambdispatch/gray_image.h"

#include <cstdint>
#include <string>
#include <vector>

namespace amb {

struct Point {
    int x = 0;
    int y = 0;

    auto operator<=>(const Point&) const = default;
};

/// Edge point set E. Points are kept sorted by (y, x) and unique.
struct EdgeMap {
    int width = 0;
    int height = 0;
    std::vector<Point> points;

    EdgeMap() = default;
    EdgeMap(int w, int h, std::vector<Point> pts);

    bool empty() const { return points.empty(); }
};

/// Pattern point set P, shifted so that min x = 0 and min y = 0.
class Pattern {
public:
    explicit Pattern(std::vector<Point> points);

    const std::vector<Point>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    int width() const { return width_; }   // bounding box, max x + 1
    int height() const { return height_; } // max y + 1

private:
    std::vector<Point> points_;
    int width_ = 0;
    int height_ = 0;
};

/// Exact non-negative rational, used for the per-point acceptance threshold.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    /// Accepts "2", "2.25" or "9/4".
    static Rational parse(const std::string& text);
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

struct MatchResult {
    Point best_translation;
    std::int64_t dissimilarity = 0;
    std::size_t pattern_size = 0;
    bool is_ambulance = false;

    /// dissimilarity / n
    double per_point() const;
};

// 3x3 median; border pixels take the (lower) median of their in-bounds neighbours.
GrayImage denoise(const GrayImage& img);

// Linear contrast stretch to [0, 255], rounding half up. Constant images pass through.
GrayImage normalize(const GrayImage& img);

// Sobel magnitude |Gx| + |Gy|; pixels with magnitude >= threshold become edge
// points. The one-pixel border is never an edge.
EdgeMap sobel_edges(const GrayImage& img, int threshold);

int city_block(Point p, Point q);

// Sum over pattern points of the city-block distance to the nearest edge point.
std::int64_t dissimilarity(const Pattern& pattern, const EdgeMap& edges, Point translation);

/// City-block distance to the nearest edge point for every cell.
struct DistanceField {
    int width = 0;
    int height = 0;
    std::vector<int> values;

    int at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

// Two-pass sequential transform; exact for the city-block metric.
DistanceField distance_field(const EdgeMap& edges);

// Exhaustive search over translations that keep the pattern inside the frame.
// Equal scores resolve to the smallest y, then the smallest x.
MatchResult match_pattern(const Pattern& pattern, const EdgeMap& edges);

bool classify(const MatchResult& result, const Rational& tau_per_point);

struct RecognitionParams {
    int sobel_threshold = 128;
    Rational tau_per_point{3, 10};
};

/// denoise -> normalize -> sobel_edges -> match_pattern -> classify.
/// A frame without edges raises NotRecognizable.
MatchResult recognize(const GrayImage& img, const Pattern& pattern, const RecognitionParams& params = {});

} // namespace amb
