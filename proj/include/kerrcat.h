/* kerrcat — C API for the Kerr-tunable SNAIL resonator simulator.
 *
 * All functions return 0 on success or a nonzero error code:
 *   2  configuration / input error
 *   3  numerical failure
 * The per-thread message for the last failure is available through
 * kc_last_error_message().  Returned strings and handles must be released
 * with the matching kc_*_free function.
 */
#ifndef KERRCAT_H
#define KERRCAT_H

#ifdef __cplusplus
extern "C" {
#endif

/* ------------------------------------------------------------------ errors */

#define KC_OK 0
#define KC_ERR_CONFIG 2
#define KC_ERR_NUMERIC 3

/* Message describing the most recent failure on this thread ("" if none). */
const char* kc_last_error_message(void);

/* Short machine-readable name of the failure kind (e.g. "NoSignChange"). */
const char* kc_last_error_kind(void);

/* ------------------------------------------------------------- subcommands */

/* Run one CLI-equivalent subcommand ("flux-sweep", "cat", "measure-kerr",
 * "preserve", "calibrate", "wigner", "fidelity") against a JSON config.
 * Artifacts are written under out_dir; the JSON report is returned through
 * *report_json (free with kc_string_free).  seed < 0 / threads <= 0 defer to
 * the config. */
int kc_run(const char* subcommand, const char* config_json, const char* out_dir,
           long long seed, int threads, char** report_json);

void kc_string_free(char* s);

/* ------------------------------------------------------------------ device */

typedef struct kc_device kc_device;

/* Device with explicit energies (GHz*h except chi/Kq in MHz). */
int kc_device_create(double beta, double ej_ghz, double ec_ghz, double el_ghz,
                     double chi_mhz, double kq_mhz, kc_device** out);

/* Device with EC and EL solved from the frequency + Kerr-free anchors. */
int kc_device_create_anchored(double beta, double ej_ghz, double chi_mhz, double kq_mhz,
                              double anchor_phi_over_2pi, double anchor_omega_ghz,
                              kc_device** out);

void kc_device_free(kc_device* dev);

int kc_device_get_energies(const kc_device* dev, double* ec_ghz, double* el_ghz);

/* Mode parameters at one external flux (phi_ext as a fraction of the flux
 * quantum).  Any output pointer may be NULL. */
int kc_device_mode_parameters(const kc_device* dev, double phi_ext_over_2pi,
                              double* omega_s_ghz, double* g3_mhz, double* g4_mhz,
                              double* ks_mhz, double* kqs_mhz, double* k_mhz);

/* Brent root of K(phi) on [lo, hi] (fractions of the flux quantum). */
int kc_device_kerr_free_flux(const kc_device* dev, double lo_over_2pi, double hi_over_2pi,
                             double* root_over_2pi);

/* ------------------------------------------------------------------ states */

typedef struct kc_state kc_state;

/* m-component Kerr cat: D(alpha) then Kerr evolution for (2pi/K)/m. */
int kc_generate_kerr_cat(double alpha_re, double alpha_im, double k_mhz, int m,
                         int resonator_dim, kc_state** out);

/* Ancilla-assisted cat; odd != 0 selects the odd branch. */
int kc_generate_odd_even_cat(double alpha_re, double alpha_im, double chi_mhz, int odd,
                             int resonator_dim, kc_state** out);

void kc_state_free(kc_state* s);

int kc_state_parity(const kc_state* s, double* parity);

int kc_state_fidelity(const kc_state* a, const kc_state* b, double* fidelity);

/* ------------------------------------------------------------------ wigner */

typedef struct kc_wigner kc_wigner;

/* Exact displaced-parity Wigner map on a centered square grid. */
int kc_wigner_exact(const kc_state* s, double half_extent, int n, int threads,
                    kc_wigner** out);

void kc_wigner_free(kc_wigner* w);

int kc_wigner_size(const kc_wigner* w, int* nx, int* ny);

int kc_wigner_value(const kc_wigner* w, int ix, int iy, double* re_gamma, double* im_gamma,
                    double* value);

/* F = pi * sum W1 W2 * cell_area; grids must match. */
int kc_wigner_fidelity(const kc_wigner* a, const kc_wigner* b, double* fidelity);

int kc_wigner_write_csv(const kc_wigner* w, const char* csv_path, const char* sidecar_path);

#ifdef __cplusplus
}
#endif

#endif /* KERRCAT_H */
