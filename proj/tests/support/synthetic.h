#pragma once

// Synthetic camera frames for recognition tests: a boxy vehicle seen from the
// front with an optional "AM" marking on the bonnet.

#include "ambdispatch/gray_image.h"
#include "ambdispatch/recognition.h"

#include <cstdint>
#include <vector>

namespace synth {

inline constexpr int kFrameWidth = 160;
inline constexpr int kFrameHeight = 120;

struct FrameSpec {
    int vehicle_x = 30;
    int vehicle_y = 20;
    bool glyph = true;
    double noise_fraction = 0.0; // salt-and-pepper
    std::uint64_t seed = 1;
};

struct Frame {
    amb::GrayImage image;
    amb::Point glyph_origin; // where the glyph box was (or would have been) drawn
};

Frame render_vehicle(const FrameSpec& spec);

/// Glyph alone on the body colour; `origin` receives the glyph box position.
amb::GrayImage render_glyph_reference(amb::Point& origin);

/// n edge points of the reference glyph, spread evenly along the (y, x) order.
/// `offset` receives the pattern's anchor relative to the glyph origin, so the
/// expected match for a frame is glyph_origin + offset.
std::vector<amb::Point> glyph_pattern(std::size_t n, amb::Point& offset);

/// Valid vehicle placements keep the whole body inside the frame.
int max_vehicle_x();
int max_vehicle_y();

} // namespace synth
