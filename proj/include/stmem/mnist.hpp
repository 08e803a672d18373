#pragma once

// IDX container parser and MNIST dataset loader.
//
// IDX layout: big-endian magic (two zero bytes, element-type byte, rank
// byte), one big-endian u32 per dimension, then the payload. Only u8
// payloads of rank 1 (labels) and rank 3 (image stacks) are accepted.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <zlib.h>

namespace stmem {

enum class IdxErrorCode {
    BadMagic,         // leading bytes are not an IDX header
    UnsupportedType,  // valid header, but element type / rank we do not take
    Truncated,        // payload shorter than the dimensions promise
    SizeMismatch,     // payload longer than the dimensions promise
    DimOverflow,      // dimension product does not fit sane bounds
};

class IdxError : public std::runtime_error {
public:
    IdxError(IdxErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    IdxErrorCode code() const { return code_; }

private:
    IdxErrorCode code_;
};

enum class DataErrorCode { FileMissing, CountMismatch, InvalidLabel, BadImageShape };

class DataError : public std::runtime_error {
public:
    DataError(DataErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    DataErrorCode code() const { return code_; }

private:
    DataErrorCode code_;
};

struct IdxTensor {
    std::vector<uint32_t> dims;
    std::vector<uint8_t> data;  // row-major u8 payload
};

/// Parse an IDX byte buffer into a dimension-checked u8 tensor.
inline IdxTensor parse_idx(const std::vector<uint8_t>& bytes) {
    if (bytes.size() < 4) throw IdxError(IdxErrorCode::BadMagic, "IDX: header shorter than 4 bytes");
    if (bytes[0] != 0 || bytes[1] != 0) {
        throw IdxError(IdxErrorCode::BadMagic, "IDX: bad magic (leading bytes not zero)");
    }
    const uint8_t type = bytes[2];
    const uint8_t rank = bytes[3];
    if (type != 0x08) {
        throw IdxError(IdxErrorCode::UnsupportedType, "IDX: unsupported element type");
    }
    if (rank != 1 && rank != 3) {
        throw IdxError(IdxErrorCode::UnsupportedType,
                       "IDX: unsupported rank (expected 1 or 3)");
    }
    const size_t header = 4 + 4 * static_cast<size_t>(rank);
    if (bytes.size() < header) {
        throw IdxError(IdxErrorCode::Truncated, "IDX: truncated dimension header");
    }
    IdxTensor t;
    uint64_t total = 1;
    for (int d = 0; d < rank; ++d) {
        const size_t off = 4 + 4 * static_cast<size_t>(d);
        const uint32_t dim = (static_cast<uint32_t>(bytes[off]) << 24) |
                             (static_cast<uint32_t>(bytes[off + 1]) << 16) |
                             (static_cast<uint32_t>(bytes[off + 2]) << 8) |
                             static_cast<uint32_t>(bytes[off + 3]);
        t.dims.push_back(dim);
        total *= dim;
        if (total > (1ull << 32)) {
            throw IdxError(IdxErrorCode::DimOverflow, "IDX: dimension product too large");
        }
    }
    const uint64_t payload = bytes.size() - header;
    if (payload < total) throw IdxError(IdxErrorCode::Truncated, "IDX: truncated payload");
    if (payload > total) throw IdxError(IdxErrorCode::SizeMismatch, "IDX: trailing bytes");
    t.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header), bytes.end());
    return t;
}

/// Serialize a u8 tensor back to IDX bytes (round-trip partner of parse_idx).
inline void write_idx(std::ostream& out, const IdxTensor& t) {
    const uint8_t rank = static_cast<uint8_t>(t.dims.size());
    const uint8_t header[4] = {0, 0, 0x08, rank};
    out.write(reinterpret_cast<const char*>(header), 4);
    for (uint32_t dim : t.dims) {
        const uint8_t be[4] = {static_cast<uint8_t>(dim >> 24), static_cast<uint8_t>(dim >> 16),
                               static_cast<uint8_t>(dim >> 8), static_cast<uint8_t>(dim)};
        out.write(reinterpret_cast<const char*>(be), 4);
    }
    out.write(reinterpret_cast<const char*>(t.data.data()),
              static_cast<std::streamsize>(t.data.size()));
}

/// Read a file into memory, transparently gunzipping when the name ends .gz.
inline std::vector<uint8_t> read_file_bytes(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) {
        throw DataError(DataErrorCode::FileMissing, "missing file: " + path.string());
    }
    if (path.extension() == ".gz") {
        gzFile gz = gzopen(path.string().c_str(), "rb");
        if (!gz) throw DataError(DataErrorCode::FileMissing, "cannot open: " + path.string());
        std::vector<uint8_t> out;
        uint8_t buf[1 << 16];
        int n;
        while ((n = gzread(gz, buf, sizeof buf)) > 0) {
            out.insert(out.end(), buf, buf + n);
        }
        const bool bad = n < 0;
        gzclose(gz);
        if (bad) {
            throw IdxError(IdxErrorCode::Truncated, "gzip decode failed: " + path.string());
        }
        return out;
    }
    std::ifstream in(path, std::ios::binary);
    return std::vector<uint8_t>(std::istreambuf_iterator<char>(in),
                                std::istreambuf_iterator<char>());
}

enum class Split { Train, Test };

/// Normalized image/label pairs. Pixels are scaled by 1/255, no centering.
struct Dataset {
    std::vector<float> images;  // n x feature_dim, row-major, values in [0,1]
    std::vector<uint8_t> labels;
    size_t n = 0;
    size_t feature_dim = 0;
    Split split = Split::Train;

    const float* image(size_t i) const { return images.data() + i * feature_dim; }
};

namespace detail {

inline std::filesystem::path find_idx_file(const std::filesystem::path& dir,
                                           const std::string& stem) {
    for (const char* suffix : {"", ".gz"}) {
        const auto p = dir / (stem + suffix);
        if (std::filesystem::exists(p)) return p;
    }
    throw DataError(DataErrorCode::FileMissing,
                    "missing " + (dir / stem).string() + "[.gz]");
}

}  // namespace detail

/// Load one MNIST split from a directory holding the canonical IDX files
/// (train-images-idx3-ubyte etc.), optionally gzip-compressed.
inline Dataset load_dataset(const std::filesystem::path& dir, Split split) {
    const std::string prefix = split == Split::Train ? "train" : "t10k";
    const auto images_path = detail::find_idx_file(dir, prefix + "-images-idx3-ubyte");
    const auto labels_path = detail::find_idx_file(dir, prefix + "-labels-idx1-ubyte");

    const IdxTensor images = parse_idx(read_file_bytes(images_path));
    const IdxTensor labels = parse_idx(read_file_bytes(labels_path));
    if (images.dims.size() != 3) {
        throw DataError(DataErrorCode::BadImageShape,
                        images_path.string() + ": expected a rank-3 image stack");
    }
    if (labels.dims.size() != 1 || labels.dims[0] != images.dims[0]) {
        throw DataError(DataErrorCode::CountMismatch,
                        "image/label counts disagree in " + dir.string());
    }

    Dataset ds;
    ds.split = split;
    ds.n = images.dims[0];
    ds.feature_dim = static_cast<size_t>(images.dims[1]) * images.dims[2];
    ds.images.resize(ds.n * ds.feature_dim);
    constexpr float kScale = 1.0f / 255.0f;
    for (size_t i = 0; i < ds.images.size(); ++i) {
        ds.images[i] = static_cast<float>(images.data[i]) * kScale;
    }
    ds.labels = labels.data;
    for (uint8_t label : ds.labels) {
        if (label > 9) {
            throw DataError(DataErrorCode::InvalidLabel,
                            labels_path.string() + ": label out of range 0-9");
        }
    }
    return ds;
}

}  // namespace stmem
