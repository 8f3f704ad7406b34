#include "vinpaint/tensor.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace vinpaint {

std::size_t shape_numel(const Shape& s) {
    std::size_t n = 1;
    for (std::size_t e : s) n *= e;
    return n;
}

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << ',';
        os << s[i];
    }
    os << ']';
    return os.str();
}

bool shape_eq(const Shape& a, const Shape& b) { return a == b; }

template <typename T>
void ensure_finite(const Tensor<T>& t, const char* op) {
    const T* p = t.data();
    const std::size_t n = t.numel();
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(static_cast<double>(p[i])))
            throw numeric_error(std::string("non-finite value produced by ") + op +
                                " at flat index " + std::to_string(i));
    }
}

template void ensure_finite<float>(const Tensor<float>&, const char*);
template void ensure_finite<double>(const Tensor<double>&, const char*);

namespace {

constexpr unsigned char kMagic[4] = {0x54, 0x53, 0x52, 0x31}; // "TSR1"

template <typename T> constexpr unsigned char dtype_code();
template <> constexpr unsigned char dtype_code<float>() { return 0; }
template <> constexpr unsigned char dtype_code<double>() { return 1; }

void put_u64_le(std::ofstream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64_le(std::ifstream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

// Scalars are written little-endian; on big-endian hosts the bytes are
// swapped explicitly so the on-disk layout stays fixed.
bool host_is_le() {
    const std::uint16_t x = 1;
    return *reinterpret_cast<const unsigned char*>(&x) == 1;
}

template <typename T>
void write_payload(std::ofstream& os, const T* p, std::size_t n) {
    if (host_is_le()) {
        os.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(T)));
        return;
    }
    std::vector<unsigned char> buf(n * sizeof(T));
    for (std::size_t i = 0; i < n; ++i) {
        unsigned char tmp[sizeof(T)];
        std::memcpy(tmp, &p[i], sizeof(T));
        for (std::size_t b = 0; b < sizeof(T); ++b) buf[i * sizeof(T) + b] = tmp[sizeof(T) - 1 - b];
    }
    os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

template <typename T>
void read_payload(std::ifstream& is, T* p, std::size_t n) {
    is.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(T)));
    if (!host_is_le()) {
        for (std::size_t i = 0; i < n; ++i) {
            unsigned char tmp[sizeof(T)];
            std::memcpy(tmp, &p[i], sizeof(T));
            unsigned char rev[sizeof(T)];
            for (std::size_t b = 0; b < sizeof(T); ++b) rev[b] = tmp[sizeof(T) - 1 - b];
            std::memcpy(&p[i], rev, sizeof(T));
        }
    }
}

} // namespace

template <typename T>
void save_tsr(const std::string& path, const Tensor<T>& t) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw config_error("cannot open for writing: " + path);
    os.write(reinterpret_cast<const char*>(kMagic), 4);
    const unsigned char dt = dtype_code<T>();
    const unsigned char rank = static_cast<unsigned char>(t.rank());
    os.put(static_cast<char>(dt));
    os.put(static_cast<char>(rank));
    for (std::size_t a = 0; a < t.rank(); ++a) put_u64_le(os, t.extent(a));
    write_payload(os, t.data(), t.numel());
    if (!os) throw config_error("short write: " + path);
}

int tsr_dtype(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw config_error("cannot open: " + path);
    unsigned char hdr[5];
    is.read(reinterpret_cast<char*>(hdr), 5);
    if (!is || std::memcmp(hdr, kMagic, 4) != 0)
        throw config_error("not a TSR1 file: " + path);
    return hdr[4];
}

template <typename T>
Tensor<T> load_tsr(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw config_error("cannot open: " + path);
    unsigned char hdr[6];
    is.read(reinterpret_cast<char*>(hdr), 6);
    if (!is || std::memcmp(hdr, kMagic, 4) != 0)
        throw config_error("not a TSR1 file: " + path);
    const int dt = hdr[4];
    if (dt != 0 && dt != 1) throw config_error("unknown TSR1 dtype " + std::to_string(dt) + ": " + path);
    const int rank = hdr[5];
    Shape shape(static_cast<std::size_t>(rank));
    for (int a = 0; a < rank; ++a) shape[static_cast<std::size_t>(a)] = get_u64_le(is);
    if (!is) throw config_error("truncated TSR1 header: " + path);
    const std::size_t n = shape_numel(shape);
    Tensor<T> out(shape);
    if (dt == dtype_code<T>()) {
        read_payload(is, out.data(), n);
    } else if (dt == 0) {
        std::vector<float> tmp(n);
        read_payload(is, tmp.data(), n);
        for (std::size_t i = 0; i < n; ++i) out.data()[i] = static_cast<T>(tmp[i]);
    } else {
        std::vector<double> tmp(n);
        read_payload(is, tmp.data(), n);
        for (std::size_t i = 0; i < n; ++i) out.data()[i] = static_cast<T>(tmp[i]);
    }
    if (!is) throw config_error("truncated TSR1 payload: " + path);
    return out;
}

template void save_tsr<float>(const std::string&, const Tensor<float>&);
template void save_tsr<double>(const std::string&, const Tensor<double>&);
template Tensor<float> load_tsr<float>(const std::string&);
template Tensor<double> load_tsr<double>(const std::string&);

} // namespace vinpaint
