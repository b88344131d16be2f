#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "swarm/mat.hpp"

namespace swarm::io {

using HeaderFields = std::vector<std::pair<std::string, std::string>>;

/// Parsed sidecar header: plain "key: value" lines.
struct Header {
    std::map<std::string, std::string> kv;

    bool has(const std::string& key) const { return kv.count(key) != 0; }
    const std::string& get(const std::string& key) const;
    int get_int(const std::string& key) const;
    double get_double(const std::string& key) const;
};

/// Writes <stem>.raw (row-major little-endian float32) and <stem>.hdr.
/// Both files are written atomically (temp + rename).
void write_mat(const std::string& stem, const Mat& m, const HeaderFields& extra_fields);

/// Reads <stem>.raw using dimensions from <stem>.hdr. The header is returned
/// through `header` when non-null. Dimensions come from width/height or
/// n_angles/n_detectors, whichever pair is present.
Mat read_mat(const std::string& stem, Header* header = nullptr);

/// 16-bit binary PGM, values linearly mapped from [lo, hi] (auto range when
/// lo >= hi) to [0, 65535].
void write_pgm16(const std::string& path, const Mat& m, double lo = 0.0, double hi = -1.0);

/// 8-bit binary PGM of a {0,1} matrix as {0,255}.
void write_pgm8_binary(const std::string& path, int rows, int cols, const unsigned char* data);

/// Three matrices side by side in one 16-bit PGM, shared gray scale.
void write_pgm16_triptych(const std::string& path, const Mat& a, const Mat& b, const Mat& c);

/// Atomic small-file write used for manifests, traces and logs.
void write_text_file(const std::string& path, const std::string& contents);

std::string read_text_file(const std::string& path);

} // namespace swarm::io
