#ifndef GRAPHKERN_H
#define GRAPHKERN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum GkStatus {
  GK_STATUS_OK = 0,
  GK_STATUS_NULL_POINTER = 1,
  GK_STATUS_INVALID_ARGUMENT = 2,
  // The graph is malformed (asymmetric, self loop, bad length, ...).
  GK_STATUS_INVALID_GRAPH = 3,
  // Dataset files are missing or malformed.
  GK_STATUS_DATA = 4,
  // Kernel or matrix computation failed.
  GK_STATUS_COMPUTE = 5,
  GK_STATUS_PANIC = 6,
} GkStatus;

// Node kernel used by the GraphHopper kernel.
typedef enum GkNodeKernel {
  GK_NODE_KERNEL_DIRAC = 0,
  GK_NODE_KERNEL_GAUSSIAN = 1,
  GK_NODE_KERNEL_PRODUCT = 2,
} GkNodeKernel;

// Graphs with class labels.
typedef struct GkDataset GkDataset;

// Dense symmetric Gram matrix.
typedef struct GkGram GkGram;

// Validated, immutable graph.
typedef struct GkGraph GkGraph;

// Graph under construction.
typedef struct GkGraphBuilder GkGraphBuilder;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// Valid until the next call into this library from the same thread.
const char *gk_last_error_message(void);

// New builder for a graph with `node_count` nodes and no edges.
struct GkGraphBuilder *gk_graph_builder_new(size_t node_count);

// Adds the undirected edge `{u, v}` with the given positive length.
enum GkStatus gk_graph_builder_add_edge(struct GkGraphBuilder *builder,
                                        size_t u,
                                        size_t v,
                                        double length);

// Sets one discrete label per node; `len` must equal the node count.
enum GkStatus gk_graph_builder_set_labels(struct GkGraphBuilder *builder,
                                          const int64_t *labels,
                                          size_t len);

// Sets attribute vectors from a row-major `node_count x dim` array.
enum GkStatus gk_graph_builder_set_attributes(struct GkGraphBuilder *builder,
                                              const double *data,
                                              size_t node_count,
                                              size_t dim);

// Validates the graph and consumes the builder. The builder is freed even
// on failure; on success `*out` receives a graph handle.
enum GkStatus gk_graph_builder_finish(struct GkGraphBuilder *builder, struct GkGraph **out_graph);

void gk_graph_builder_free(struct GkGraphBuilder *builder);

size_t gk_graph_node_count(const struct GkGraph *graph);

size_t gk_graph_edge_count(const struct GkGraph *graph);

void gk_graph_free(struct GkGraph *graph);

// GraphHopper kernel value with gap size `s`; `lambda` is ignored for Dirac.
enum GkStatus gk_graphhopper_kernel(const struct GkGraph *a,
                                    const struct GkGraph *b,
                                    size_t s,
                                    enum GkNodeKernel kind,
                                    double lambda,
                                    double *out_value);

// Empty dataset.
struct GkDataset *gk_dataset_new(void);

// Appends a copy of `graph` with class label `class_label`.
enum GkStatus gk_dataset_push(struct GkDataset *dataset,
                              const struct GkGraph *graph,
                              int64_t class_label);

// Loads the TU-format dataset `name` from `dir` (or `dir/name`).
enum GkStatus gk_dataset_load_tu(const char *dir, const char *name, struct GkDataset **out_dataset);

size_t gk_dataset_len(const struct GkDataset *dataset);

// Copies the class label of graph `index`.
enum GkStatus gk_dataset_class_label(const struct GkDataset *dataset,
                                     size_t index,
                                     int64_t *out_label);

void gk_dataset_free(struct GkDataset *dataset);

// Unnormalized GraphHopper Gram matrix of the dataset.
enum GkStatus gk_gram_compute_graphhopper(const struct GkDataset *dataset,
                                          size_t s,
                                          enum GkNodeKernel kind,
                                          double lambda,
                                          struct GkGram **out_gram);

// Unnormalized Weisfeiler-Lehman subtree Gram matrix with `h` iterations.
enum GkStatus gk_gram_compute_wl(const struct GkDataset *dataset,
                                 size_t h,
                                 struct GkGram **out_gram);

// New cosine-normalized matrix with a unit diagonal.
enum GkStatus gk_gram_normalize(const struct GkGram *gram, struct GkGram **out_gram);

size_t gk_gram_size(const struct GkGram *gram);

enum GkStatus gk_gram_get(const struct GkGram *gram, size_t i, size_t j, double *out_value);

// Copies the matrix row-major into `buffer`, which must hold `size * size` values.
enum GkStatus gk_gram_copy(const struct GkGram *gram, double *buffer, size_t len);

// Smallest eigenvalue, for positive-semidefiniteness checks.
enum GkStatus gk_gram_min_eigenvalue(const struct GkGram *gram, double *out_value);

void gk_gram_free(struct GkGram *gram);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRAPHKERN_H */
