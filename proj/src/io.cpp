#include "kerrcat/io.hpp"

#include <zlib.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace kerrcat {

using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw SimError(ErrorKind::ConfigError, "cannot open for writing: " + path);
    }
    return f;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw SimError(ErrorKind::ConfigError, "cannot open for reading: " + path);
    }
    return f;
}

std::vector<double> parse_csv_row(const std::string& line, size_t expected,
                                  const std::string& path) {
    std::vector<double> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            out.push_back(std::stod(cell));
        } catch (const std::exception&) {
            throw SimError(ErrorKind::ConfigError, "malformed CSV number in " + path);
        }
    }
    if (out.size() != expected) {
        throw SimError(ErrorKind::ConfigError, "wrong CSV column count in " + path);
    }
    return out;
}

}  // namespace

std::vector<std::pair<double, double>> read_frequency_curve_csv(const std::string& path) {
    auto f = open_in(path);
    std::string line;
    if (!std::getline(f, line) || line.rfind("phi_ext_over_2pi,omega_s_ghz", 0) != 0) {
        throw SimError(ErrorKind::ConfigError,
                       "expected header 'phi_ext_over_2pi,omega_s_ghz' in " + path);
    }
    std::vector<std::pair<double, double>> out;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        auto row = parse_csv_row(line, 2, path);
        out.emplace_back(row[0], row[1]);
    }
    return out;
}

void write_frequency_curve_csv(const std::string& path,
                               const std::vector<std::pair<double, double>>& curve) {
    auto f = open_out(path);
    f << "phi_ext_over_2pi,omega_s_ghz\n";
    for (const auto& [phi, w] : curve) {
        f << format_double(phi) << ',' << format_double(w) << '\n';
    }
}

void write_flux_sweep_csv(const std::string& path, const std::vector<FluxPoint>& sweep) {
    auto f = open_out(path);
    f << "phi_ext_over_2pi,omega_s_ghz,g3_mhz,g4_mhz,ks_mhz,kqs_mhz,k_mhz\n";
    const double two_pi = 6.283185307179586476925286766559;
    for (const auto& p : sweep) {
        f << format_double(p.phi_ext / two_pi) << ',' << format_double(p.omega_s_ghz) << ','
          << format_double(p.g3_mhz) << ',' << format_double(p.g4_mhz) << ','
          << format_double(p.ks_mhz) << ',' << format_double(p.kqs_mhz) << ','
          << format_double(p.k_mhz) << '\n';
    }
}

void write_spectrum_csv(const std::string& path, const std::vector<double>& freq_mhz,
                        const std::vector<double>& p_excited) {
    if (freq_mhz.size() != p_excited.size()) {
        throw SimError(ErrorKind::ConfigError, "spectrum arrays have different lengths");
    }
    auto f = open_out(path);
    f << "freq_mhz,p_excited\n";
    for (size_t i = 0; i < freq_mhz.size(); ++i) {
        f << format_double(freq_mhz[i]) << ',' << format_double(p_excited[i]) << '\n';
    }
}

void write_wigner_csv(const std::string& csv_path, const std::string& sidecar_path,
                      const WignerGrid& grid) {
    auto f = open_out(csv_path);
    f << "re_gamma,im_gamma,w\n";
    for (int iy = 0; iy < grid.spec.ny; ++iy) {
        for (int ix = 0; ix < grid.spec.nx; ++ix) {
            f << format_double(grid.spec.re_at(ix)) << ',' << format_double(grid.spec.im_at(iy))
              << ',' << format_double(grid.values(iy, ix)) << '\n';
        }
    }
    json meta = {
        {"re_min", grid.spec.re_min}, {"re_max", grid.spec.re_max},
        {"im_min", grid.spec.im_min}, {"im_max", grid.spec.im_max},
        {"nx", grid.spec.nx},         {"ny", grid.spec.ny},
        {"convention", grid.convention},
    };
    auto s = open_out(sidecar_path);
    s << meta.dump(2) << '\n';
}

WignerGrid read_wigner_csv(const std::string& csv_path, const std::string& sidecar_path) {
    WignerGrid grid;
    {
        auto s = open_in(sidecar_path);
        json meta;
        try {
            s >> meta;
            grid.spec.re_min = meta.at("re_min").get<double>();
            grid.spec.re_max = meta.at("re_max").get<double>();
            grid.spec.im_min = meta.at("im_min").get<double>();
            grid.spec.im_max = meta.at("im_max").get<double>();
            grid.spec.nx = meta.at("nx").get<int>();
            grid.spec.ny = meta.at("ny").get<int>();
            grid.convention = meta.at("convention").get<std::string>();
        } catch (const json::exception& e) {
            throw SimError(ErrorKind::ConfigError,
                           "bad Wigner sidecar " + sidecar_path + ": " + e.what());
        }
    }
    grid.spec.validate();
    grid.values.resize(grid.spec.ny, grid.spec.nx);
    auto f = open_in(csv_path);
    std::string line;
    if (!std::getline(f, line) || line.rfind("re_gamma,im_gamma,w", 0) != 0) {
        throw SimError(ErrorKind::ConfigError, "expected header 're_gamma,im_gamma,w' in " + csv_path);
    }
    for (int iy = 0; iy < grid.spec.ny; ++iy) {
        for (int ix = 0; ix < grid.spec.nx; ++ix) {
            if (!std::getline(f, line)) {
                throw SimError(ErrorKind::ConfigError, "truncated Wigner CSV " + csv_path);
            }
            auto row = parse_csv_row(line, 3, csv_path);
            grid.values(iy, ix) = row[2];
        }
    }
    return grid;
}

// ---------------------------------------------------------------------------
// PNG encoding (8-bit RGB, filter 0, single IDAT)

namespace {

void put_u32(std::vector<unsigned char>& out, uint32_t v) {
    out.push_back((v >> 24) & 0xff);
    out.push_back((v >> 16) & 0xff);
    out.push_back((v >> 8) & 0xff);
    out.push_back(v & 0xff);
}

void put_chunk(std::ofstream& f, const char* tag, const std::vector<unsigned char>& data) {
    std::vector<unsigned char> head;
    put_u32(head, uint32_t(data.size()));
    f.write(reinterpret_cast<const char*>(head.data()), 4);
    f.write(tag, 4);
    if (!data.empty()) f.write(reinterpret_cast<const char*>(data.data()), std::streamsize(data.size()));
    uLong crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(tag), 4);
    if (!data.empty()) crc = crc32(crc, data.data(), uInt(data.size()));
    std::vector<unsigned char> tail;
    put_u32(tail, uint32_t(crc));
    f.write(reinterpret_cast<const char*>(tail.data()), 4);
}

}  // namespace

void write_png(const std::string& path, int width, int height,
               const std::vector<unsigned char>& rgb) {
    if (width <= 0 || height <= 0 || rgb.size() != size_t(width) * height * 3) {
        throw SimError(ErrorKind::ConfigError, "PNG buffer size does not match dimensions");
    }
    // raw scanlines with filter byte 0
    std::vector<unsigned char> raw;
    raw.reserve(size_t(height) * (size_t(width) * 3 + 1));
    for (int y = 0; y < height; ++y) {
        raw.push_back(0);
        const unsigned char* row = rgb.data() + size_t(y) * width * 3;
        raw.insert(raw.end(), row, row + size_t(width) * 3);
    }
    uLongf comp_size = compressBound(uLong(raw.size()));
    std::vector<unsigned char> comp(comp_size);
    if (compress2(comp.data(), &comp_size, raw.data(), uLong(raw.size()), 9) != Z_OK) {
        throw SimError(ErrorKind::ConfigError, "zlib compression failed while writing PNG");
    }
    comp.resize(comp_size);

    auto f = open_out(path);
    static const unsigned char sig[] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    f.write(reinterpret_cast<const char*>(sig), 8);
    std::vector<unsigned char> ihdr;
    put_u32(ihdr, uint32_t(width));
    put_u32(ihdr, uint32_t(height));
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(2);  // color type RGB
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    put_chunk(f, "IHDR", ihdr);
    put_chunk(f, "IDAT", comp);
    put_chunk(f, "IEND", {});
}

namespace {

// blue-white-red diverging map for t in [-1, 1]
void diverging_color(double t, unsigned char* px) {
    t = std::max(-1.0, std::min(1.0, t));
    double r, g, b;
    if (t >= 0.0) {
        r = 1.0;
        g = 1.0 - 0.75 * t;
        b = 1.0 - t;
    } else {
        r = 1.0 + t;
        g = 1.0 + 0.65 * t;
        b = 1.0;
    }
    px[0] = static_cast<unsigned char>(std::lround(255.0 * r));
    px[1] = static_cast<unsigned char>(std::lround(255.0 * g));
    px[2] = static_cast<unsigned char>(std::lround(255.0 * b));
}

}  // namespace

void write_wigner_heatmap_png(const std::string& path, const WignerGrid& grid, int scale) {
    scale = std::max(1, scale);
    int w = grid.spec.nx * scale, h = grid.spec.ny * scale;
    double vmax = std::max(grid.values.cwiseAbs().maxCoeff(), 1e-12);
    std::vector<unsigned char> rgb(size_t(w) * h * 3);
    for (int y = 0; y < h; ++y) {
        int iy = grid.spec.ny - 1 - y / scale;  // image rows top-down, im axis up
        for (int x = 0; x < w; ++x) {
            int ix = x / scale;
            diverging_color(grid.values(iy, ix) / vmax, &rgb[(size_t(y) * w + x) * 3]);
        }
    }
    write_png(path, w, h, rgb);
}

void write_line_plot_png(const std::string& path, const std::vector<LineSeries>& series,
                         int width, int height) {
    if (series.empty()) {
        throw SimError(ErrorKind::ConfigError, "line plot needs at least one series");
    }
    double x_lo = HUGE_VAL, x_hi = -HUGE_VAL, y_lo = HUGE_VAL, y_hi = -HUGE_VAL;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size() || s.x.empty()) {
            throw SimError(ErrorKind::ConfigError, "line series must be nonempty and matched");
        }
        for (size_t i = 0; i < s.x.size(); ++i) {
            x_lo = std::min(x_lo, s.x[i]);
            x_hi = std::max(x_hi, s.x[i]);
            y_lo = std::min(y_lo, s.y[i]);
            y_hi = std::max(y_hi, s.y[i]);
        }
    }
    if (x_hi <= x_lo) x_hi = x_lo + 1.0;
    if (y_hi <= y_lo) y_hi = y_lo + 1.0;
    double pad_y = 0.05 * (y_hi - y_lo);
    y_lo -= pad_y;
    y_hi += pad_y;

    const int margin = 40;
    std::vector<unsigned char> rgb(size_t(width) * height * 3, 255);
    auto set_px = [&](int x, int y, unsigned char r, unsigned char g, unsigned char b) {
        if (x < 0 || x >= width || y < 0 || y >= height) return;
        size_t i = (size_t(y) * width + x) * 3;
        rgb[i] = r;
        rgb[i + 1] = g;
        rgb[i + 2] = b;
    };
    // axes
    for (int x = margin; x < width - margin / 2; ++x) set_px(x, height - margin, 90, 90, 90);
    for (int y = margin / 2; y <= height - margin; ++y) set_px(margin, y, 90, 90, 90);

    auto to_px = [&](double x, double y, int* px, int* py) {
        *px = margin + int((x - x_lo) / (x_hi - x_lo) * (width - 1.5 * margin));
        *py = (height - margin) - int((y - y_lo) / (y_hi - y_lo) * (height - 1.5 * margin));
    };
    for (const auto& s : series) {
        int px_prev = 0, py_prev = 0;
        for (size_t i = 0; i < s.x.size(); ++i) {
            int px, py;
            to_px(s.x[i], s.y[i], &px, &py);
            if (i > 0) {
                // Bresenham-style segment
                int dx = std::abs(px - px_prev), dy = -std::abs(py - py_prev);
                int sx = px_prev < px ? 1 : -1, sy = py_prev < py ? 1 : -1;
                int err = dx + dy, cx = px_prev, cy = py_prev;
                while (true) {
                    set_px(cx, cy, s.r, s.g, s.b);
                    if (cx == px && cy == py) break;
                    int e2 = 2 * err;
                    if (e2 >= dy) { err += dy; cx += sx; }
                    if (e2 <= dx) { err += dx; cy += sy; }
                }
            }
            set_px(px, py, s.r, s.g, s.b);
            px_prev = px;
            py_prev = py;
        }
    }
    write_png(path, width, height, rgb);
}

}  // namespace kerrcat
