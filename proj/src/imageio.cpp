#include "vinpaint/imageio.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <vector>

namespace vinpaint::imageio {

namespace {

std::uint8_t to_byte(double v) {
    const double b = std::round(v * 255.0);
    return static_cast<std::uint8_t>(b < 0 ? 0 : (b > 255 ? 255 : b));
}

// Next whitespace-delimited unsigned value, skipping '#' comment lines.
std::size_t read_header_value(std::istream& in, const std::string& path) {
    for (;;) {
        const int c = in.peek();
        if (c == EOF) throw config_error("truncated image header in " + path);
        if (std::isspace(c)) {
            in.get();
        } else if (c == '#') {
            std::string skip;
            std::getline(in, skip);
        } else {
            break;
        }
    }
    std::size_t v = 0;
    if (!(in >> v)) throw config_error("malformed image header in " + path);
    return v;
}

void read_magic(std::istream& in, const std::string& path, const char* want) {
    std::string magic;
    if (!(in >> magic) || magic != want)
        throw config_error("not a " + std::string(want) + " file: " + path);
}

std::vector<std::uint8_t> read_payload(std::istream& in, const std::string& path,
                                       std::size_t count) {
    in.get(); // single whitespace after maxval
    std::vector<std::uint8_t> bytes(count);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(count));
    if (in.gcount() != static_cast<std::streamsize>(count))
        throw config_error("truncated image payload in " + path);
    return bytes;
}

} // namespace

template <typename T>
void save_ppm(const std::string& path, const Tensor<T>& frame) {
    if (frame.rank() != 3 || frame.extent(0) != 3)
        throw dim_error("save_ppm: expected [3, H, W], got " + shape_str(frame.shape()));
    const std::size_t h = frame.extent(1), w = frame.extent(2);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot write " + path);
    out << "P6\n" << w << " " << h << "\n255\n";
    std::vector<std::uint8_t> row(w * 3);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x)
            for (std::size_t c = 0; c < 3; ++c)
                row[x * 3 + c] =
                    to_byte((static_cast<double>(frame.data()[(c * h + y) * w + x]) + 1.0) / 2.0);
        out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
    if (!out) throw config_error("write failed for " + path);
}

template <typename T>
Tensor<T> load_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot read " + path);
    read_magic(in, path, "P6");
    const std::size_t w = read_header_value(in, path);
    const std::size_t h = read_header_value(in, path);
    const std::size_t maxval = read_header_value(in, path);
    if (maxval != 255) throw config_error("unsupported maxval in " + path);
    const auto bytes = read_payload(in, path, w * h * 3);
    Tensor<T> frame(Shape{3, h, w});
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            for (std::size_t c = 0; c < 3; ++c)
                frame.data()[(c * h + y) * w + x] =
                    static_cast<T>(bytes[(y * w + x) * 3 + c] / 255.0 * 2.0 - 1.0);
    return frame;
}

template <typename T>
void save_pgm(const std::string& path, const Tensor<T>& mask) {
    const T* src = mask.data();
    std::size_t h, w;
    if (mask.rank() == 2) {
        h = mask.extent(0);
        w = mask.extent(1);
    } else if (mask.rank() == 3 && mask.extent(0) == 1) {
        h = mask.extent(1);
        w = mask.extent(2);
    } else {
        throw dim_error("save_pgm: expected [H, W] or [1, H, W], got " + shape_str(mask.shape()));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot write " + path);
    out << "P5\n" << w << " " << h << "\n255\n";
    std::vector<std::uint8_t> bytes(h * w);
    for (std::size_t i = 0; i < h * w; ++i) bytes[i] = to_byte(static_cast<double>(src[i]));
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw config_error("write failed for " + path);
}

template <typename T>
Tensor<T> load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot read " + path);
    read_magic(in, path, "P5");
    const std::size_t w = read_header_value(in, path);
    const std::size_t h = read_header_value(in, path);
    const std::size_t maxval = read_header_value(in, path);
    if (maxval != 255) throw config_error("unsupported maxval in " + path);
    const auto bytes = read_payload(in, path, w * h);
    Tensor<T> mask(Shape{h, w});
    for (std::size_t i = 0; i < h * w; ++i) mask.data()[i] = static_cast<T>(bytes[i] / 255.0);
    return mask;
}

#define VINPAINT_IMAGEIO_INSTANTIATE(T)                                                           \
    template void save_ppm<T>(const std::string&, const Tensor<T>&);                              \
    template Tensor<T> load_ppm<T>(const std::string&);                                           \
    template void save_pgm<T>(const std::string&, const Tensor<T>&);                              \
    template Tensor<T> load_pgm<T>(const std::string&);

VINPAINT_IMAGEIO_INSTANTIATE(float)
VINPAINT_IMAGEIO_INSTANTIATE(double)

#undef VINPAINT_IMAGEIO_INSTANTIATE

} // namespace vinpaint::imageio
