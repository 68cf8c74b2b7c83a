#include "lmpkit/tensor_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

namespace lmpkit {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t& pos) {
    if (pos + 4 > in.size()) throw IoError("LMPT1: truncated header");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[pos + i]) << (8 * i);
    pos += 4;
    return v;
}

}  // namespace

std::vector<std::uint8_t> encode_tensor(const Tensor& t) {
    if (t.rank() > std::numeric_limits<std::uint32_t>::max()) throw SizeError("rank too large");
    std::vector<std::uint8_t> out(std::begin(kTensorMagic), std::end(kTensorMagic));
    out.reserve(8 + 4 * (1 + t.rank() + t.size()));
    put_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) {
        if (d > std::numeric_limits<std::uint32_t>::max()) throw SizeError("dimension too large");
        put_u32(out, static_cast<std::uint32_t>(d));
    }
    for (double v : t.data()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    return out;
}

Tensor decode_tensor(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8 || !std::equal(std::begin(kTensorMagic), std::end(kTensorMagic),
                                        bytes.begin(),
                                        [](char a, std::uint8_t b) { return static_cast<std::uint8_t>(a) == b; })) {
        throw IoError("LMPT1: bad magic");
    }
    std::size_t pos = 8;
    const std::uint32_t rank = get_u32(bytes, pos);
    Shape shape(rank);
    for (auto& d : shape) d = get_u32(bytes, pos);
    const std::size_t n = shape_product(shape);
    if (bytes.size() - pos != 4 * n) {
        throw IoError("LMPT1: payload holds " + std::to_string(bytes.size() - pos) +
                      " bytes, shape " + shape_to_string(shape) + " needs " + std::to_string(4 * n));
    }
    std::vector<double> data(n);
    for (auto& v : data) v = static_cast<double>(std::bit_cast<float>(get_u32(bytes, pos)));
    return Tensor(std::move(shape), std::move(data));
}

void save_tensor(const std::filesystem::path& path, const Tensor& t) {
    const auto bytes = encode_tensor(t);
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw IoError("write failed: " + path.string());
}

Tensor load_tensor(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return decode_tensor(bytes);
}

}  // namespace lmpkit
