#include "ambdispatch/recognition.h"

#include "ambdispatch/error.h"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdlib>
#include <limits>
#include <numeric>

namespace amb {

EdgeMap::EdgeMap(int w, int h, std::vector<Point> pts) : width(w), height(h), points(std::move(pts))
{
    for (const Point& p : points) {
        if (p.x < 0 || p.y < 0 || p.x >= width || p.y >= height)
            throw Error(ErrorCode::InvalidImage, "edge point outside the frame");
    }
    std::sort(points.begin(), points.end(),
              [](Point a, Point b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
    points.erase(std::unique(points.begin(), points.end()), points.end());
}

Pattern::Pattern(std::vector<Point> points) : points_(std::move(points))
{
    if (points_.empty())
        throw Error(ErrorCode::InvalidImage, "pattern must contain at least one point");
    int min_x = std::numeric_limits<int>::max();
    int min_y = std::numeric_limits<int>::max();
    for (const Point& p : points_) {
        min_x = std::min(min_x, p.x);
        min_y = std::min(min_y, p.y);
    }
    for (Point& p : points_) {
        p.x -= min_x;
        p.y -= min_y;
        width_ = std::max(width_, p.x + 1);
        height_ = std::max(height_, p.y + 1);
    }
    std::sort(points_.begin(), points_.end(),
              [](Point a, Point b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
    points_.erase(std::unique(points_.begin(), points_.end()), points_.end());
}

Rational Rational::parse(const std::string& text)
{
    auto bad = [&]() { return Error(ErrorCode::InvalidRequest, "not a non-negative rational: '" + text + "'"); };
    auto parse_int = [&](std::string_view s) {
        std::int64_t v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || v < 0)
            throw bad();
        return v;
    };

    Rational r;
    if (auto slash = text.find('/'); slash != std::string::npos) {
        r.num = parse_int(std::string_view(text).substr(0, slash));
        r.den = parse_int(std::string_view(text).substr(slash + 1));
        if (r.den == 0)
            throw bad();
    } else if (auto dot = text.find('.'); dot != std::string::npos) {
        std::string_view whole = std::string_view(text).substr(0, dot);
        std::string_view frac = std::string_view(text).substr(dot + 1);
        if (frac.empty() || frac.size() > 12)
            throw bad();
        r.den = 1;
        for (std::size_t i = 0; i < frac.size(); ++i)
            r.den *= 10;
        r.num = (whole.empty() ? 0 : parse_int(whole)) * r.den + parse_int(frac);
    } else {
        r.num = parse_int(text);
    }
    std::int64_t g = std::gcd(r.num, r.den);
    if (g > 1) {
        r.num /= g;
        r.den /= g;
    }
    return r;
}

double MatchResult::per_point() const
{
    return pattern_size == 0 ? 0.0 : static_cast<double>(dissimilarity) / static_cast<double>(pattern_size);
}

GrayImage denoise(const GrayImage& img)
{
    GrayImage out(img.width, img.height);
    std::array<std::uint8_t, 9> window{};
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            std::size_t k = 0;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    if (img.contains(x + dx, y + dy))
                        window[k++] = img.at(x + dx, y + dy);
                }
            }
            auto mid = window.begin() + static_cast<std::ptrdiff_t>((k - 1) / 2);
            std::nth_element(window.begin(), mid, window.begin() + static_cast<std::ptrdiff_t>(k));
            out.at(x, y) = *mid;
        }
    }
    return out;
}

GrayImage normalize(const GrayImage& img)
{
    if (img.pixels.empty())
        return img;
    auto [lo_it, hi_it] = std::minmax_element(img.pixels.begin(), img.pixels.end());
    int lo = *lo_it;
    int hi = *hi_it;
    if (lo == hi)
        return img;
    GrayImage out = img;
    int span = hi - lo;
    for (auto& p : out.pixels) {
        // round((p - lo) * 255 / span), halves rounded up
        int scaled = (2 * (p - lo) * 255 + span) / (2 * span);
        p = static_cast<std::uint8_t>(scaled);
    }
    return out;
}

EdgeMap sobel_edges(const GrayImage& img, int threshold)
{
    if (img.width < 3 || img.height < 3)
        throw Error(ErrorCode::ImageTooSmall, "Sobel needs at least a 3x3 image");
    std::vector<Point> pts;
    for (int y = 1; y < img.height - 1; ++y) {
        for (int x = 1; x < img.width - 1; ++x) {
            int gx = -img.at(x - 1, y - 1) + img.at(x + 1, y - 1)
                     - 2 * img.at(x - 1, y) + 2 * img.at(x + 1, y)
                     - img.at(x - 1, y + 1) + img.at(x + 1, y + 1);
            int gy = -img.at(x - 1, y - 1) - 2 * img.at(x, y - 1) - img.at(x + 1, y - 1)
                     + img.at(x - 1, y + 1) + 2 * img.at(x, y + 1) + img.at(x + 1, y + 1);
            if (std::abs(gx) + std::abs(gy) >= threshold)
                pts.push_back({x, y});
        }
    }
    return EdgeMap(img.width, img.height, std::move(pts));
}

int city_block(Point p, Point q) { return std::abs(p.x - q.x) + std::abs(p.y - q.y); }

std::int64_t dissimilarity(const Pattern& pattern, const EdgeMap& edges, Point translation)
{
    if (edges.empty())
        throw Error(ErrorCode::EmptyEdgeMap, "edge map has no points");
    std::int64_t total = 0;
    for (Point p : pattern.points()) {
        Point moved{p.x + translation.x, p.y + translation.y};
        int best = std::numeric_limits<int>::max();
        for (Point e : edges.points)
            best = std::min(best, city_block(moved, e));
        total += best;
    }
    return total;
}

DistanceField distance_field(const EdgeMap& edges)
{
    if (edges.empty())
        throw Error(ErrorCode::EmptyEdgeMap, "edge map has no points");
    const int w = edges.width;
    const int h = edges.height;
    // Any in-frame distance is below w + h, so this never overflows on +1.
    const int far = w + h;
    DistanceField f{w, h, std::vector<int>(static_cast<std::size_t>(w) * h, far)};
    auto cell = [&](int x, int y) -> int& { return f.values[static_cast<std::size_t>(y) * w + x]; };
    for (Point p : edges.points)
        cell(p.x, p.y) = 0;

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            int& d = cell(x, y);
            if (x > 0)
                d = std::min(d, cell(x - 1, y) + 1);
            if (y > 0)
                d = std::min(d, cell(x, y - 1) + 1);
        }
    }
    for (int y = h - 1; y >= 0; --y) {
        for (int x = w - 1; x >= 0; --x) {
            int& d = cell(x, y);
            if (x < w - 1)
                d = std::min(d, cell(x + 1, y) + 1);
            if (y < h - 1)
                d = std::min(d, cell(x, y + 1) + 1);
        }
    }
    return f;
}

MatchResult match_pattern(const Pattern& pattern, const EdgeMap& edges)
{
    if (edges.empty())
        throw Error(ErrorCode::EmptyEdgeMap, "edge map has no points");
    if (pattern.width() > edges.width || pattern.height() > edges.height)
        throw Error(ErrorCode::PatternTooLarge, "pattern bounding box exceeds the frame");

    DistanceField field = distance_field(edges);
    MatchResult best;
    best.pattern_size = pattern.size();
    best.dissimilarity = std::numeric_limits<std::int64_t>::max();
    for (int ty = 0; ty + pattern.height() <= edges.height; ++ty) {
        for (int tx = 0; tx + pattern.width() <= edges.width; ++tx) {
            std::int64_t d = 0;
            for (Point p : pattern.points()) {
                d += field.at(p.x + tx, p.y + ty);
                if (d >= best.dissimilarity)
                    break;
            }
            if (d < best.dissimilarity) {
                best.dissimilarity = d;
                best.best_translation = {tx, ty};
            }
        }
    }
    return best;
}

bool classify(const MatchResult& result, const Rational& tau_per_point)
{
    // D / n <= num / den  <=>  D * den <= num * n
    return static_cast<__int128>(result.dissimilarity) * tau_per_point.den <=
           static_cast<__int128>(tau_per_point.num) * static_cast<__int128>(result.pattern_size);
}

MatchResult recognize(const GrayImage& img, const Pattern& pattern, const RecognitionParams& params)
{
    EdgeMap edges = sobel_edges(normalize(denoise(img)), params.sobel_threshold);
    if (edges.empty())
        throw Error(ErrorCode::NotRecognizable, "frame produced an empty edge map");
    MatchResult r = match_pattern(pattern, edges);
    r.is_ambulance = classify(r, params.tau_per_point);
    return r;
}

} // namespace amb
