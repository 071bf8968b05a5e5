#include "mfoe/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <png.h>
#include <sstream>

#include "mfoe/errors.hpp"

namespace mfoe {

namespace {

std::string lower_ext(const std::string& path) {
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos) return "";
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return ext;
}

int pgm_next_token(std::istream& in, std::string& tok) {
    tok.clear();
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') { // comment until end of line
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) return 1;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    return tok.empty() ? 0 : 1;
}

} // namespace

Image read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open image: " + path);
    std::string tok;
    if (!pgm_next_token(in, tok) || tok != "P5")
        throw ConfigError("unsupported PGM (expected binary P5): " + path);
    long vals[3];
    for (int i = 0; i < 3; ++i) {
        if (!pgm_next_token(in, tok)) throw ConfigError("truncated PGM header: " + path);
        try {
            vals[i] = std::stol(tok);
        } catch (...) {
            throw ConfigError("bad PGM header token \"" + tok + "\": " + path);
        }
    }
    const long w = vals[0], h = vals[1], maxval = vals[2];
    if (w < 1 || h < 1 || maxval < 1 || maxval > 65535)
        throw ConfigError("bad PGM dimensions: " + path);

    Image img(static_cast<int>(h), static_cast<int>(w));
    const std::size_t n = img.size();
    if (maxval < 256) {
        std::vector<std::uint8_t> buf(n);
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in.gcount()) != n)
            throw ConfigError("truncated PGM payload: " + path);
        for (std::size_t i = 0; i < n; ++i)
            img.data[i] = buf[i] / static_cast<double>(maxval);
    } else {
        std::vector<std::uint8_t> buf(2 * n);
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(2 * n));
        if (static_cast<std::size_t>(in.gcount()) != 2 * n)
            throw ConfigError("truncated PGM payload: " + path);
        for (std::size_t i = 0; i < n; ++i) {
            const unsigned v = (static_cast<unsigned>(buf[2 * i]) << 8) | buf[2 * i + 1];
            img.data[i] = v / static_cast<double>(maxval);
        }
    }
    return img;
}

void write_pgm16(const Image& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write image: " + path);
    out << "P5\n" << img.cols << " " << img.rows << "\n65535\n";
    std::vector<std::uint8_t> buf(2 * img.size());
    for (std::size_t i = 0; i < img.size(); ++i) {
        const double c = std::clamp(img.data[i], 0.0, 1.0);
        const unsigned v = static_cast<unsigned>(std::lround(c * 65535.0));
        buf[2 * i] = static_cast<std::uint8_t>(v >> 8);
        buf[2 * i + 1] = static_cast<std::uint8_t>(v & 0xff);
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw ConfigError("failed writing image: " + path);
}

Image read_png(const std::string& path) {
    FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) throw ConfigError("cannot open image: " + path);

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        std::fclose(fp);
        throw ConfigError("libpng initialization failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw ConfigError("failed decoding PNG: " + path);
    }
    png_init_io(png, fp);
    png_read_info(png, info);

    const png_uint_32 w = png_get_image_width(png, info);
    const png_uint_32 h = png_get_image_height(png, info);
    const int color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);

    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (color & PNG_COLOR_MASK_COLOR)
        png_set_rgb_to_gray_fixed(png, 1, -1, -1); // Rec.601 luminance
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const int out_depth = png_get_bit_depth(png, info);
    const double maxval = out_depth == 16 ? 65535.0 : 255.0;
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    std::vector<std::uint8_t> row(rowbytes);

    Image img(static_cast<int>(h), static_cast<int>(w));
    for (png_uint_32 y = 0; y < h; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (png_uint_32 x = 0; x < w; ++x) {
            unsigned v;
            if (out_depth == 16)
                v = (static_cast<unsigned>(row[2 * x]) << 8) | row[2 * x + 1];
            else
                v = row[x];
            img(static_cast<int>(y), static_cast<int>(x)) = v / maxval;
        }
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);
    return img;
}

Image read_image(const std::string& path) {
    const std::string ext = lower_ext(path);
    if (ext == "pgm") return read_pgm(path);
    if (ext == "png") return read_png(path);
    throw ConfigError("unsupported image format \"" + ext + "\": " + path);
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
    std::uint8_t b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    std::uint8_t b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& in, const std::string& path) {
    std::uint8_t b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (in.gcount() != 4) throw ConfigError("truncated array file: " + path);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::istream& in, const std::string& path) {
    std::uint8_t b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (in.gcount() != 8) throw ConfigError("truncated array file: " + path);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

} // namespace

void write_array(const std::string& path, const std::vector<std::uint64_t>& dims,
                 const std::vector<double>& data) {
    std::uint64_t total = 1;
    for (std::uint64_t d : dims) total *= d;
    if (total != data.size()) throw ConfigError("write_array: dims do not match data size");

    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write array: " + path);
    out.write("MFOE", 4);
    put_u32(out, 1); // version
    put_u32(out, 0); // dtype f64-le
    put_u32(out, static_cast<std::uint32_t>(dims.size()));
    for (std::uint64_t d : dims) put_u64(out, d);
    for (double v : data) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        put_u64(out, bits);
    }
    if (!out) throw ConfigError("failed writing array: " + path);
}

void write_array(const std::string& path, const Image& img) {
    write_array(path,
                {static_cast<std::uint64_t>(img.rows), static_cast<std::uint64_t>(img.cols)},
                img.data);
}

ArrayFile read_array(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open array: " + path);
    char magic[4];
    in.read(magic, 4);
    if (in.gcount() != 4 || std::memcmp(magic, "MFOE", 4) != 0)
        throw ConfigError("not an MFOE array file: " + path);
    if (get_u32(in, path) != 1) throw ConfigError("unsupported array version: " + path);
    if (get_u32(in, path) != 0) throw ConfigError("unsupported array dtype: " + path);
    const std::uint32_t rank = get_u32(in, path);
    if (rank > 8) throw ConfigError("array rank too large: " + path);

    ArrayFile a;
    std::uint64_t total = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
        a.dims.push_back(get_u64(in, path));
        total *= a.dims.back();
    }
    a.data.resize(total);
    for (std::uint64_t i = 0; i < total; ++i) {
        const std::uint64_t bits = get_u64(in, path);
        std::memcpy(&a.data[i], &bits, 8);
    }
    return a;
}

Image read_kernel_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open kernel file: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::vector<double> row;
        double v;
        while (ls >> v) row.push_back(v);
        if (!ls.eof())
            throw ConfigError("bad value in kernel file: " + path);
        if (!row.empty()) rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ConfigError("empty kernel file: " + path);
    const std::size_t cols = rows.front().size();
    for (const auto& r : rows)
        if (r.size() != cols) throw ConfigError("ragged rows in kernel file: " + path);

    Image k(static_cast<int>(rows.size()), static_cast<int>(cols));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols; ++j) k(static_cast<int>(i), static_cast<int>(j)) = rows[i][j];
    return k;
}

void write_kernel_text(const Image& kernel, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write kernel file: " + path);
    for (int i = 0; i < kernel.rows; ++i) {
        for (int j = 0; j < kernel.cols; ++j) {
            if (j) out << ' ';
            out << format_double(kernel(i, j));
        }
        out << '\n';
    }
}

std::string format_double(double v) {
    char buf[64];
    // shortest representation that round-trips
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        double back;
        if (std::sscanf(buf, "%lf", &back) == 1 && back == v) break;
    }
    return buf;
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace mfoe
