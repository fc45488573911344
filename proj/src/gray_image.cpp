#include "ambdispatch/gray_image.h"

#include "ambdispatch/error.h"

#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace amb {

GrayImage::GrayImage(int w, int h, std::uint8_t fill) : width(w), height(h)
{
    if (w < 0 || h < 0)
        throw Error(ErrorCode::InvalidImage, "negative image size");
    pixels.assign(static_cast<std::size_t>(w) * h, fill);
}

namespace {

int read_header_int(std::istream& in)
{
    for (;;) {
        int c = in.peek();
        if (c == '#') {
            std::string comment;
            std::getline(in, comment);
        } else if (c != EOF && std::isspace(c)) {
            in.get();
        } else {
            break;
        }
    }
    int value = -1;
    if (!(in >> value))
        throw Error(ErrorCode::InvalidImage, "malformed PGM header");
    return value;
}

} // namespace

GrayImage read_pgm(std::istream& in)
{
    char magic[2] = {};
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || magic[1] != '5')
        throw Error(ErrorCode::InvalidImage, "not a binary PGM (P5)");
    int w = read_header_int(in);
    int h = read_header_int(in);
    int maxval = read_header_int(in);
    if (w <= 0 || h <= 0)
        throw Error(ErrorCode::InvalidImage, "PGM dimensions must be positive");
    if (maxval != 255)
        throw Error(ErrorCode::InvalidImage, "only maxval 255 is supported");
    if (!std::isspace(in.get()))
        throw Error(ErrorCode::InvalidImage, "missing whitespace after PGM header");

    GrayImage img(w, h);
    in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.pixels.size()))
        throw Error(ErrorCode::InvalidImage, "truncated PGM pixel data");
    return img;
}

GrayImage read_pgm(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::InvalidImage, "cannot open '" + path.string() + "'");
    return read_pgm(in);
}

void write_pgm(std::ostream& out, const GrayImage& img)
{
    out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::InvalidImage, "cannot write '" + path.string() + "'");
    write_pgm(out, img);
}

} // namespace amb
