#pragma once

// Uniform calling convention for compiled kernels. Generated adapter files
// define one KernelSet per (spec, backend); the registry collects them.

#include <string_view>
#include <vector>

namespace recursum::kernels {

struct KernelArgs {
    const double* scalars = nullptr;
    const double* const* seqs = nullptr;
    const int* seq_lens = nullptr;
};

using UnrolledFn = double (*)(const KernelArgs&);
using LayerFn = void (*)(const KernelArgs&, double* out);
using RuntimeFn = int (*)(const KernelArgs&, const int* idx, const int* bound, double* result);

struct UnrolledEntry {
    const int* tuple;
    UnrolledFn fn;
};

struct LayerEntry {
    const int* layer;
    int length;
    LayerFn fn;
};

struct KernelSet {
    const char* name;
    const char* backend;
    int arity;
    int n_scalars;
    int n_seqs;
    const int* min_seq_lens;  // n_seqs entries, or null
    const UnrolledEntry* unrolled;
    int n_unrolled;
    const LayerEntry* layers;
    int n_layers;
    int layer_width;  // descent indices per layer tuple
    RuntimeFn runtime;
};

/// All compiled kernel sets, in registry order.
std::vector<const KernelSet*> all_kernel_sets();
/// Null when nothing was compiled for (name, backend).
const KernelSet* find_kernel_set(std::string_view name, std::string_view backend);

}  // namespace recursum::kernels
