#include "maskopt/matrix_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "maskopt/error.hpp"

namespace maskopt {

namespace {

static_assert(std::numeric_limits<double>::is_iec559, "matrix files store IEEE-754 doubles");

constexpr std::size_t kHeaderBytes = 4 + 8 + 8;

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

std::uint64_t get_u64(const std::string& in, std::size_t offset) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
    }
    return v;
}

} // namespace

std::string encode_matrix(const DenseMatrix& m) {
    std::string out;
    out.reserve(kHeaderBytes + 8 * m.size());
    out.append(kMatrixMagic, 4);
    put_u64(out, m.rows());
    put_u64(out, m.cols());
    for (double v : m.data()) put_u64(out, std::bit_cast<std::uint64_t>(v));
    return out;
}

DenseMatrix decode_matrix(const std::string& bytes) {
    if (bytes.size() < kHeaderBytes) throw FormatError("matrix file shorter than its header");
    if (std::memcmp(bytes.data(), kMatrixMagic, 4) != 0) throw FormatError("bad magic, expected MXF1");
    const std::uint64_t rows = get_u64(bytes, 4);
    const std::uint64_t cols = get_u64(bytes, 12);
    const std::size_t payload = bytes.size() - kHeaderBytes;
    if (cols != 0 && rows > std::numeric_limits<std::uint64_t>::max() / 8 / cols) {
        throw FormatError("matrix header dimensions overflow");
    }
    const std::uint64_t count = rows * cols;
    if (payload < count * 8) {
        throw FormatError("truncated payload: header declares " + std::to_string(rows) + "x" +
                          std::to_string(cols) + " but file holds " + std::to_string(payload / 8) +
                          " values");
    }
    if (payload > count * 8) throw FormatError("trailing bytes after matrix payload");

    std::vector<double> data(count);
    for (std::size_t i = 0; i < count; ++i) {
        data[i] = std::bit_cast<double>(get_u64(bytes, kHeaderBytes + 8 * i));
    }
    DenseMatrix m(rows, cols, std::move(data));
    if (!m.all_finite()) throw FormatError("matrix payload contains non-finite values");
    return m;
}

DenseMatrix load_matrix(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open matrix file " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_matrix(bytes);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void save_matrix(const std::filesystem::path& path, const DenseMatrix& m) {
    if (!m.all_finite()) throw FormatError("refusing to save matrix with non-finite values");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open " + path.string() + " for writing");
    const std::string bytes = encode_matrix(m);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("failed writing " + path.string());
}

} // namespace maskopt
