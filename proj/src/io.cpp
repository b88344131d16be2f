#include "swarm/io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "swarm/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "raw file format assumes a little-endian host");

namespace swarm::io {

namespace fs = std::filesystem;

const std::string& Header::get(const std::string& key) const {
    auto it = kv.find(key);
    if (it == kv.end()) throw IoError("header: missing field '" + key + "'");
    return it->second;
}

int Header::get_int(const std::string& key) const {
    try {
        return std::stoi(get(key));
    } catch (const std::logic_error&) {
        throw IoError("header: field '" + key + "' is not an integer");
    }
}

double Header::get_double(const std::string& key) const {
    try {
        return std::stod(get(key));
    } catch (const std::logic_error&) {
        throw IoError("header: field '" + key + "' is not a number");
    }
}

namespace {

void atomic_write(const std::string& path, const void* data, size_t bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot open for writing: " + tmp);
        f.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
        if (!f) throw IoError("short write: " + tmp);
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("rename failed: " + path + " (" + ec.message() + ")");
}

void put_u16_be(std::string& out, uint16_t x) {
    out.push_back(static_cast<char>(x >> 8));
    out.push_back(static_cast<char>(x & 0xff));
}

} // namespace

void write_text_file(const std::string& path, const std::string& contents) {
    atomic_write(path, contents.data(), contents.size());
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_mat(const std::string& stem, const Mat& m, const HeaderFields& extra_fields) {
    if (m.empty()) throw ArgumentError("write_mat: empty matrix");
    std::vector<float> buf(m.size());
    for (size_t i = 0; i < m.size(); ++i) buf[i] = static_cast<float>(m.v[i]);
    atomic_write(stem + ".raw", buf.data(), buf.size() * sizeof(float));

    std::ostringstream hdr;
    bool have_dims = false;
    for (const auto& [k, v] : extra_fields) {
        hdr << k << ": " << v << "\n";
        if (k == "width" || k == "n_detectors") have_dims = true;
    }
    if (!have_dims) {
        hdr << "width: " << m.cols << "\n";
        hdr << "height: " << m.rows << "\n";
    }
    write_text_file(stem + ".hdr", hdr.str());
}

Mat read_mat(const std::string& stem, Header* header) {
    Header h;
    {
        std::istringstream in(read_text_file(stem + ".hdr"));
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            auto pos = line.find(':');
            if (pos == std::string::npos) throw IoError("malformed header line in " + stem + ".hdr: " + line);
            std::string key = line.substr(0, pos);
            std::string val = line.substr(pos + 1);
            while (!val.empty() && (val.front() == ' ' || val.front() == '\t')) val.erase(val.begin());
            while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
            h.kv[key] = val;
        }
    }
    int rows, cols;
    if (h.has("n_angles")) {
        rows = h.get_int("n_angles");
        cols = h.get_int("n_detectors");
    } else {
        rows = h.get_int("height");
        cols = h.get_int("width");
    }
    if (rows <= 0 || cols <= 0) throw IoError("bad dimensions in " + stem + ".hdr");

    std::ifstream f(stem + ".raw", std::ios::binary);
    if (!f) throw IoError("cannot open: " + stem + ".raw");
    std::vector<float> buf(static_cast<size_t>(rows) * cols);
    f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (f.gcount() != static_cast<std::streamsize>(buf.size() * sizeof(float)))
        throw IoError("truncated raw file: " + stem + ".raw");

    Mat m(rows, cols);
    for (size_t i = 0; i < buf.size(); ++i) m.v[i] = static_cast<double>(buf[i]);
    if (header) *header = std::move(h);
    return m;
}

void write_pgm16(const std::string& path, const Mat& m, double lo, double hi) {
    if (m.empty()) throw ArgumentError("write_pgm16: empty matrix");
    if (lo >= hi) {
        lo = m.v[0];
        hi = m.v[0];
        for (double x : m.v) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        if (hi <= lo) hi = lo + 1.0;
    }
    std::string out;
    out.reserve(32 + m.size() * 2);
    out += "P5\n" + std::to_string(m.cols) + " " + std::to_string(m.rows) + "\n65535\n";
    const double scale = 65535.0 / (hi - lo);
    for (double x : m.v) {
        double t = (x - lo) * scale;
        t = std::max(0.0, std::min(65535.0, t));
        put_u16_be(out, static_cast<uint16_t>(t + 0.5));
    }
    atomic_write(path, out.data(), out.size());
}

void write_pgm8_binary(const std::string& path, int rows, int cols, const unsigned char* data) {
    if (rows <= 0 || cols <= 0) throw ArgumentError("write_pgm8_binary: empty matrix");
    std::string out;
    out.reserve(32 + static_cast<size_t>(rows) * cols);
    out += "P5\n" + std::to_string(cols) + " " + std::to_string(rows) + "\n255\n";
    for (size_t i = 0; i < static_cast<size_t>(rows) * cols; ++i)
        out.push_back(static_cast<char>(data[i] ? 255 : 0));
    atomic_write(path, out.data(), out.size());
}

void write_pgm16_triptych(const std::string& path, const Mat& a, const Mat& b, const Mat& c) {
    if (!a.same_shape(b) || !a.same_shape(c))
        throw ArgumentError("write_pgm16_triptych: band shapes differ");
    Mat joined(a.rows, a.cols * 3);
    for (int r = 0; r < a.rows; ++r)
        for (int col = 0; col < a.cols; ++col) {
            joined.at(r, col) = a.at(r, col);
            joined.at(r, col + a.cols) = b.at(r, col);
            joined.at(r, col + 2 * a.cols) = c.at(r, col);
        }
    write_pgm16(path, joined);
}

} // namespace swarm::io
