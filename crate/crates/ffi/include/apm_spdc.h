#ifndef APM_SPDC_H
#define APM_SPDC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ApmStatus {
  APM_STATUS_OK = 0,
  APM_STATUS_NULL_POINTER = 1,
  APM_STATUS_VALIDATION = 2,
  APM_STATUS_PHYSICS = 3,
  APM_STATUS_IO = 4,
  APM_STATUS_PANIC = 5,
} ApmStatus;

typedef enum ApmBranch {
  APM_BRANCH_ORDINARY = 0,
  APM_BRANCH_EXTRAORDINARY = 1,
} ApmBranch;

typedef enum ApmConvention {
  APM_CONVENTION_C_OVER_L = 0,
  APM_CONVENTION_TWO_C_OVER_L = 1,
  APM_CONVENTION_PI_C_OVER_L = 2,
  APM_CONVENTION_TWO_PI_C_OVER_L = 3,
  APM_CONVENTION_SQRT2_C_OVER_L = 4,
} ApmConvention;

typedef enum ApmMode {
  APM_MODE_FULL = 0,
  APM_MODE_LINEARIZED = 1,
  APM_MODE_CLOSED_FORM = 2,
} ApmMode;

typedef struct ApmJsa ApmJsa;

typedef struct ApmMaterial ApmMaterial;

typedef struct ApmRecipe ApmRecipe;

/**
 * Photon targets in SI units.
 */
typedef struct ApmTargets {
  double omega_s;
  double omega_i;
  double sigma_s;
  double sigma_i;
  enum ApmBranch pump;
  enum ApmBranch signal;
  enum ApmBranch idler;
} ApmTargets;

/**
 * Pump recipe in SI units; the angle is in radians.
 */
typedef struct ApmRecipeParams {
  double omega_p;
  double k_p;
  double n_p;
  double beta1_s;
  double beta1_i;
  double a;
  double b;
  double c;
  double theta;
} ApmRecipeParams;

typedef struct ApmSchmidt {
  double schmidt_number;
  double purity;
  double entropy;
  double pearson;
} ApmSchmidt;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *apm_last_error(void);

/**
 * The bundled BBO entry.
 */
enum ApmStatus apm_material_bbo(struct ApmMaterial **out);

/**
 * Loads `name` (or the first entry when NULL) from a database file.
 */
enum ApmStatus apm_material_load(const char *path, const char *name, struct ApmMaterial **out);

void apm_material_free(struct ApmMaterial *material);

enum ApmStatus apm_refractive_index(const struct ApmMaterial *material,
                                    enum ApmBranch b,
                                    double omega,
                                    double *out);

/**
 * Group slowness d(beta)/d(omega), s/m.
 */
enum ApmStatus apm_beta_prime(const struct ApmMaterial *material,
                              enum ApmBranch b,
                              double omega,
                              double *out);

/**
 * Targets from vacuum wavelengths and coherence lengths, all in metres.
 */
enum ApmStatus apm_targets_from_wavelengths(double lambda_s,
                                            double lambda_i,
                                            double coherence_s,
                                            double coherence_i,
                                            enum ApmConvention conv,
                                            enum ApmBranch pump,
                                            enum ApmBranch signal,
                                            enum ApmBranch idler,
                                            struct ApmTargets *out);

enum ApmStatus apm_design(const struct ApmMaterial *material,
                          const struct ApmTargets *targets,
                          struct ApmRecipe **out);

enum ApmStatus apm_recipe_params(const struct ApmRecipe *recipe, struct ApmRecipeParams *out);

/**
 * Engineered pump envelope at transverse wavenumber `k` (rad/m) and
 * frequency `omega` (rad/s); 1 at the peak.
 */
enum ApmStatus apm_pump_amplitude(const struct ApmRecipe *recipe,
                                  double k,
                                  double omega,
                                  double *out);

void apm_recipe_free(struct ApmRecipe *recipe);

/**
 * Joint spectral amplitude on a square grid of `grid_size` points per axis
 * spanning `span_sigma` bandwidths either side of each target center.
 */
enum ApmStatus apm_jsa_compute(const struct ApmRecipe *recipe,
                               const struct ApmMaterial *material,
                               enum ApmMode mode,
                               size_t grid_size,
                               double span_sigma,
                               struct ApmJsa **out);

/**
 * Rows follow the signal axis, columns the idler axis.
 */
enum ApmStatus apm_jsa_shape(const struct ApmJsa *jsa, size_t *rows, size_t *cols);

/**
 * Copies the row-major amplitude into `buf`, which must hold `rows*cols`
 * values.
 */
enum ApmStatus apm_jsa_values(const struct ApmJsa *jsa, double *buf, size_t len);

enum ApmStatus apm_jsa_schmidt(const struct ApmJsa *jsa, struct ApmSchmidt *out);

enum ApmStatus apm_jsa_write_csv(const struct ApmJsa *jsa, const char *path);

void apm_jsa_free(struct ApmJsa *jsa);

/**
 * `P_z / P_y` equalizing the two pathway amplitudes.
 */
enum ApmStatus apm_balance_power_ratio(double chi_y, double chi_z, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* APM_SPDC_H */
