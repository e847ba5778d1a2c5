#ifndef POROHOM_H
#define POROHOM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PorohomStatus {
  POROHOM_STATUS_OK = 0,
  POROHOM_STATUS_NULL_POINTER = 1,
  POROHOM_STATUS_INVALID_ARGUMENT = 2,
  POROHOM_STATUS_GEOMETRY = 3,
  POROHOM_STATUS_CONFIG = 4,
  POROHOM_STATUS_CONVERGENCE = 5,
  POROHOM_STATUS_CONSTRAINT = 6,
  POROHOM_STATUS_LOCATION = 7,
  POROHOM_STATUS_CONSISTENCY = 8,
  POROHOM_STATUS_UNSUPPORTED = 9,
  POROHOM_STATUS_PARSE = 10,
  POROHOM_STATUS_IO = 11,
  /**
   * A Rust panic was caught at the boundary.
   */
  POROHOM_STATUS_PANIC = 12,
} PorohomStatus;

/**
 * Outcome of the ε sweep, see [`porohom_report_verdict`].
 */
typedef enum PorohomVerdict {
  POROHOM_VERDICT_DECREASING = 0,
  POROHOM_VERDICT_NOT_DECREASING = 1,
  POROHOM_VERDICT_NOT_APPLICABLE = 2,
} PorohomVerdict;

/**
 * Periodic cell with an optional obstacle.
 */
typedef struct PorohomCell PorohomCell;

/**
 * Triangle mesh.
 */
typedef struct PorohomMesh PorohomMesh;

/**
 * Result of a convergence study.
 */
typedef struct PorohomReport PorohomReport;

/**
 * Homogenized tensor with its geometric coefficients.
 */
typedef struct PorohomTensor PorohomTensor;

/**
 * One row of the sweep.
 */
typedef struct PorohomEpsRecord {
  double eps;
  double h;
  size_t dofs;
  size_t nsteps;
  double error_l2_final;
  double rel_error_l2_final;
  double error_l2_timeavg;
  double rel_error_l2_timeavg;
  double max_l2_norm;
  double boundary_measure;
  double runtime;
} PorohomEpsRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * valid until the next call into the library from the same thread.
 */
const char *porohom_last_error(void);

/**
 * Static NUL-terminated version string.
 */
const char *porohom_version(void);

/**
 * Cell without obstacle.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum PorohomStatus porohom_cell_new_empty(struct PorohomCell **out);

/**
 * Cell with a centered square obstacle.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum PorohomStatus porohom_cell_new_square(double side, double clearance, struct PorohomCell **out);

/**
 * Cell with a centered regular `n`-gon of circumradius `r`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum PorohomStatus porohom_cell_new_ngon(size_t n,
                                         double r,
                                         double clearance,
                                         struct PorohomCell **out);

/**
 * Cell with an arbitrary simple counter-clockwise polygon given as
 * `n` interleaved coordinates `x0, y0, x1, y1, ...` (`2 n` doubles).
 *
 * # Safety
 * `xy` must point to `2 n` doubles and `out` must be valid.
 */
enum PorohomStatus porohom_cell_new_polygon(const double *xy,
                                            size_t n,
                                            double clearance,
                                            struct PorohomCell **out);

/**
 * Fluid fraction and obstacle perimeter of the cell.
 *
 * # Safety
 * All pointers must be valid.
 */
enum PorohomStatus porohom_cell_coefficients(const struct PorohomCell *cell,
                                             double *theta,
                                             double *sigma);

/**
 * # Safety
 * `cell` must come from a `porohom_cell_new_*` call (or be NULL) and not be
 * used afterwards.
 */
void porohom_cell_free(struct PorohomCell *cell);

/**
 * Periodic mesh of the cell with `m` subdivisions per side.
 *
 * # Safety
 * `cell` and `out` must be valid.
 */
enum PorohomStatus porohom_mesh_new_cell(const struct PorohomCell *cell,
                                         size_t m,
                                         struct PorohomMesh **out);

/**
 * Mesh of `(0, L)^2` perforated by one `eps`-scaled obstacle per cell.
 *
 * # Safety
 * `cell` and `out` must be valid.
 */
enum PorohomStatus porohom_mesh_new_perforated(double side_length,
                                               double eps,
                                               const struct PorohomCell *cell,
                                               size_t m,
                                               struct PorohomMesh **out);

/**
 * Vertex and triangle counts, largest triangle diameter and total area.
 *
 * # Safety
 * `mesh` must be valid; output pointers may be NULL to skip a value.
 */
enum PorohomStatus porohom_mesh_info(const struct PorohomMesh *mesh,
                                     size_t *num_vertices,
                                     size_t *num_triangles,
                                     double *h,
                                     double *area);

/**
 * Copies vertex coordinates (`2 * num_vertices` doubles) into `xy`.
 *
 * # Safety
 * `xy` must have room for `capacity` doubles.
 */
enum PorohomStatus porohom_mesh_vertices(const struct PorohomMesh *mesh,
                                         double *xy,
                                         size_t capacity);

/**
 * Copies triangle vertex indices (`3 * num_triangles` entries).
 *
 * # Safety
 * `tri` must have room for `capacity` entries.
 */
enum PorohomStatus porohom_mesh_triangles(const struct PorohomMesh *mesh,
                                          size_t *tri,
                                          size_t capacity);

/**
 * # Safety
 * `mesh` must come from a `porohom_mesh_new_*` call (or be NULL).
 */
void porohom_mesh_free(struct PorohomMesh *mesh);

/**
 * Solves the cell problems on an `m`-subdivided cell mesh.
 *
 * # Safety
 * `cell` and `out` must be valid.
 */
enum PorohomStatus porohom_tensor_compute(const struct PorohomCell *cell,
                                          size_t m,
                                          double cg_tol,
                                          struct PorohomTensor **out);

/**
 * `Q` in row-major order (`q11, q12, q21, q22`), plus `theta` and `sigma`.
 *
 * # Safety
 * `q` must have room for 4 doubles; `theta` and `sigma` may be NULL.
 */
enum PorohomStatus porohom_tensor_values(const struct PorohomTensor *tensor,
                                         double *q,
                                         double *theta,
                                         double *sigma);

/**
 * # Safety
 * `tensor` must come from [`porohom_tensor_compute`] (or be NULL).
 */
void porohom_tensor_free(struct PorohomTensor *tensor);

/**
 * Parses `config` and runs the ε sweep. When the study stops early the
 * partial report is still returned through `out` together with the
 * status of the failure; configuration errors return no report.
 *
 * # Safety
 * `config` must be a NUL-terminated string and `out` valid.
 */
enum PorohomStatus porohom_study_run(const char *config, struct PorohomReport **out);

/**
 * Number of ε records.
 *
 * # Safety
 * Pointers must be valid.
 */
enum PorohomStatus porohom_report_len(const struct PorohomReport *report, size_t *len);

/**
 * Record `index`, ordered by decreasing ε.
 *
 * # Safety
 * Pointers must be valid.
 */
enum PorohomStatus porohom_report_record(const struct PorohomReport *report,
                                         size_t index,
                                         struct PorohomEpsRecord *record);

/**
 * # Safety
 * Pointers must be valid.
 */
enum PorohomStatus porohom_report_verdict(const struct PorohomReport *report,
                                          enum PorohomVerdict *verdict);

/**
 * Writes the CSV outputs of the report into directory `dir`.
 *
 * # Safety
 * `report` must be valid and `dir` a NUL-terminated path.
 */
enum PorohomStatus porohom_report_write(const struct PorohomReport *report, const char *dir);

/**
 * # Safety
 * `report` must come from [`porohom_study_run`] (or be NULL).
 */
void porohom_report_free(struct PorohomReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POROHOM_H */
