#include "kerrcat.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "kerrcat/io.hpp"
#include "kerrcat/protocols.hpp"
#include "kerrcat/runner.hpp"
#include "kerrcat/tomography.hpp"

namespace {

using namespace kerrcat;

constexpr double kTwoPi = 6.283185307179586476925286766559;

thread_local std::string g_last_message;
thread_local std::string g_last_kind;

int capture(const std::exception& e, const char* kind, int code) {
    g_last_message = e.what();
    g_last_kind = kind;
    return code;
}

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        fn();
        g_last_message.clear();
        g_last_kind.clear();
        return KC_OK;
    } catch (const SimError& e) {
        int code = (e.kind() == ErrorKind::ConfigError) ? KC_ERR_CONFIG : KC_ERR_NUMERIC;
        return capture(e, error_kind_name(e.kind()), code);
    } catch (const std::exception& e) {
        return capture(e, "Unknown", KC_ERR_NUMERIC);
    }
}

}  // namespace

struct kc_device {
    kerrcat::SnailDevice dev;
};

struct kc_state {
    kerrcat::QuantumState state;
};

struct kc_wigner {
    kerrcat::WignerGrid grid;
};

extern "C" {

const char* kc_last_error_message(void) { return g_last_message.c_str(); }
const char* kc_last_error_kind(void) { return g_last_kind.c_str(); }

int kc_run(const char* subcommand, const char* config_json, const char* out_dir,
           long long seed, int threads, char** report_json) {
    return guarded([&]() {
        if (!subcommand || !config_json || !out_dir) {
            throw SimError(ErrorKind::ConfigError, "null argument to kc_run");
        }
        nlohmann::json rep = run_command(subcommand, config_json, out_dir, seed, threads);
        if (report_json) {
            std::string text = rep.dump(2);
            *report_json = static_cast<char*>(std::malloc(text.size() + 1));
            std::memcpy(*report_json, text.c_str(), text.size() + 1);
        }
    });
}

void kc_string_free(char* s) { std::free(s); }

int kc_device_create(double beta, double ej_ghz, double ec_ghz, double el_ghz,
                     double chi_mhz, double kq_mhz, kc_device** out) {
    return guarded([&]() {
        if (!out) throw SimError(ErrorKind::ConfigError, "null output pointer");
        SnailDevice d;
        d.beta = beta;
        d.ej_ghz = ej_ghz;
        d.ec_ghz = ec_ghz;
        d.el_ghz = el_ghz;
        d.chi = ChiTable::constant(chi_mhz);
        d.kq_mhz = kq_mhz;
        d.validate();
        *out = new kc_device{d};
    });
}

int kc_device_create_anchored(double beta, double ej_ghz, double chi_mhz, double kq_mhz,
                              double anchor_phi_over_2pi, double anchor_omega_ghz,
                              kc_device** out) {
    return guarded([&]() {
        if (!out) throw SimError(ErrorKind::ConfigError, "null output pointer");
        SnailDevice base;
        base.beta = beta;
        base.ej_ghz = ej_ghz;
        base.chi = ChiTable::constant(chi_mhz);
        base.kq_mhz = kq_mhz;
        SnailDevice d = calibrate_anchored(base, anchor_phi_over_2pi * kTwoPi, anchor_omega_ghz);
        *out = new kc_device{d};
    });
}

void kc_device_free(kc_device* dev) { delete dev; }

int kc_device_get_energies(const kc_device* dev, double* ec_ghz, double* el_ghz) {
    return guarded([&]() {
        if (!dev) throw SimError(ErrorKind::ConfigError, "null device");
        if (ec_ghz) *ec_ghz = dev->dev.ec_ghz;
        if (el_ghz) *el_ghz = dev->dev.el_ghz;
    });
}

int kc_device_mode_parameters(const kc_device* dev, double phi_ext_over_2pi,
                              double* omega_s_ghz, double* g3_mhz, double* g4_mhz,
                              double* ks_mhz, double* kqs_mhz, double* k_mhz) {
    return guarded([&]() {
        if (!dev) throw SimError(ErrorKind::ConfigError, "null device");
        FluxPoint fp = mode_parameters(phi_ext_over_2pi * kTwoPi, dev->dev);
        if (omega_s_ghz) *omega_s_ghz = fp.omega_s_ghz;
        if (g3_mhz) *g3_mhz = fp.g3_mhz;
        if (g4_mhz) *g4_mhz = fp.g4_mhz;
        if (ks_mhz) *ks_mhz = fp.ks_mhz;
        if (kqs_mhz) *kqs_mhz = fp.kqs_mhz;
        if (k_mhz) *k_mhz = fp.k_mhz;
    });
}

int kc_device_kerr_free_flux(const kc_device* dev, double lo_over_2pi, double hi_over_2pi,
                             double* root_over_2pi) {
    return guarded([&]() {
        if (!dev || !root_over_2pi) throw SimError(ErrorKind::ConfigError, "null argument");
        *root_over_2pi = kerr_free_flux(dev->dev, lo_over_2pi * kTwoPi, hi_over_2pi * kTwoPi) / kTwoPi;
    });
}

int kc_generate_kerr_cat(double alpha_re, double alpha_im, double k_mhz, int m,
                         int resonator_dim, kc_state** out) {
    return guarded([&]() {
        if (!out) throw SimError(ErrorKind::ConfigError, "null output pointer");
        HilbertLayout lay{resonator_dim, 1};
        *out = new kc_state{generate_kerr_cat(Complex(alpha_re, alpha_im), k_mhz, m, lay)};
    });
}

int kc_generate_odd_even_cat(double alpha_re, double alpha_im, double chi_mhz, int odd,
                             int resonator_dim, kc_state** out) {
    return guarded([&]() {
        if (!out) throw SimError(ErrorKind::ConfigError, "null output pointer");
        HilbertLayout lay{resonator_dim, 2};
        *out = new kc_state{generate_odd_even_cat(Complex(alpha_re, alpha_im), chi_mhz,
                                                  odd ? CatBranch::odd : CatBranch::even, lay)};
    });
}

void kc_state_free(kc_state* s) { delete s; }

int kc_state_parity(const kc_state* s, double* parity) {
    return guarded([&]() {
        if (!s || !parity) throw SimError(ErrorKind::ConfigError, "null argument");
        *parity = s->state.expectation(parity_operator(s->state.layout()));
    });
}

int kc_state_fidelity(const kc_state* a, const kc_state* b, double* fidelity) {
    return guarded([&]() {
        if (!a || !b || !fidelity) throw SimError(ErrorKind::ConfigError, "null argument");
        *fidelity = fidelity_trace(a->state, b->state);
    });
}

int kc_wigner_exact(const kc_state* s, double half_extent, int n, int threads,
                    kc_wigner** out) {
    return guarded([&]() {
        if (!s || !out) throw SimError(ErrorKind::ConfigError, "null argument");
        QuantumState res = (s->state.layout().qubit_levels == 2) ? partial_trace_qubit(s->state)
                                                                 : s->state;
        *out = new kc_wigner{
            wigner_exact(res, WignerGridSpec::centered(half_extent, n), threads)};
    });
}

void kc_wigner_free(kc_wigner* w) { delete w; }

int kc_wigner_size(const kc_wigner* w, int* nx, int* ny) {
    return guarded([&]() {
        if (!w) throw SimError(ErrorKind::ConfigError, "null grid");
        if (nx) *nx = w->grid.spec.nx;
        if (ny) *ny = w->grid.spec.ny;
    });
}

int kc_wigner_value(const kc_wigner* w, int ix, int iy, double* re_gamma, double* im_gamma,
                    double* value) {
    return guarded([&]() {
        if (!w) throw SimError(ErrorKind::ConfigError, "null grid");
        if (ix < 0 || ix >= w->grid.spec.nx || iy < 0 || iy >= w->grid.spec.ny) {
            throw SimError(ErrorKind::ConfigError, "grid index out of range");
        }
        if (re_gamma) *re_gamma = w->grid.spec.re_at(ix);
        if (im_gamma) *im_gamma = w->grid.spec.im_at(iy);
        if (value) *value = w->grid.values(iy, ix);
    });
}

int kc_wigner_fidelity(const kc_wigner* a, const kc_wigner* b, double* fidelity) {
    return guarded([&]() {
        if (!a || !b || !fidelity) throw SimError(ErrorKind::ConfigError, "null argument");
        *fidelity = fidelity_wigner(a->grid, b->grid);
    });
}

int kc_wigner_write_csv(const kc_wigner* w, const char* csv_path, const char* sidecar_path) {
    return guarded([&]() {
        if (!w || !csv_path || !sidecar_path) {
            throw SimError(ErrorKind::ConfigError, "null argument");
        }
        write_wigner_csv(csv_path, sidecar_path, w->grid);
    });
}

}  // extern "C"
