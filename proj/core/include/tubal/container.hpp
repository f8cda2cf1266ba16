#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tubal/tensor.hpp"

namespace tubal::io {

/// On-disk stack of equally-shaped tensors.
///
/// Layout (little-endian):
///   magic   "TBL1"   4 bytes
///   n1, n2, k        u32 each
///   count            u32
///   seed             u64 (0 if not applicable)
///   payload          count * n1 * n2 * k doubles, slice-major per tensor
struct TensorFile {
    std::vector<TubalTensor> tensors;
    std::uint64_t seed = 0;
};

void write_tensors(const std::string& path, const std::vector<TubalTensor>& tensors,
                   std::uint64_t seed);

TensorFile read_tensors(const std::string& path);

/// Solver checkpoint (t, U_t): one tensor, with the container's u64
/// metadata slot carrying the iteration counter.
struct Checkpoint {
    long t = 0;
    TubalTensor U;
};

void write_checkpoint(const std::string& path, long t, const TubalTensor& u);
Checkpoint read_checkpoint(const std::string& path);

}  // namespace tubal::io
