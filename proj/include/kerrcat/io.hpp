#pragma once

#include <string>
#include <vector>

#include "kerrcat/snail.hpp"
#include "kerrcat/tomography.hpp"

namespace kerrcat {

// All writers emit deterministic, locale-independent text (%.12g numbers).

std::string format_double(double v);

// flux curves: phi_ext_over_2pi,omega_s_ghz
std::vector<std::pair<double, double>> read_frequency_curve_csv(const std::string& path);
void write_frequency_curve_csv(const std::string& path,
                               const std::vector<std::pair<double, double>>& curve);

// sweep tables: phi_ext_over_2pi,omega_s_ghz,g3_mhz,g4_mhz,ks_mhz,kqs_mhz,k_mhz
void write_flux_sweep_csv(const std::string& path, const std::vector<FluxPoint>& sweep);

// spectroscopy: freq_mhz,p_excited
void write_spectrum_csv(const std::string& path, const std::vector<double>& freq_mhz,
                        const std::vector<double>& p_excited);

// Wigner grids: re_gamma,im_gamma,w plus a JSON metadata sidecar
void write_wigner_csv(const std::string& csv_path, const std::string& sidecar_path,
                      const WignerGrid& grid);
WignerGrid read_wigner_csv(const std::string& csv_path, const std::string& sidecar_path);

// Raster plots (8-bit RGB PNG, zlib-compressed in process).
void write_png(const std::string& path, int width, int height,
               const std::vector<unsigned char>& rgb);

// Heatmap with a symmetric diverging color scale centered at 0.
void write_wigner_heatmap_png(const std::string& path, const WignerGrid& grid,
                              int scale = 4);

// Simple line plot of one or more (x, y) series on shared axes.
struct LineSeries {
    std::vector<double> x, y;
    unsigned char r = 31, g = 119, b = 180;
};
void write_line_plot_png(const std::string& path, const std::vector<LineSeries>& series,
                         int width = 640, int height = 480);

}  // namespace kerrcat
