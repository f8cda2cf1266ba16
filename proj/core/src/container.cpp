#include "tubal/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace tubal::io {

namespace {

static_assert(std::endian::native == std::endian::little,
              "the TBL1 container writer assumes a little-endian host");

void put_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t get_u32(std::istream& in, const char* what) {
    std::uint32_t v = 0;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
        throw FormatError(std::string("truncated container header: ") + what);
    }
    return v;
}

std::uint64_t get_u64(std::istream& in, const char* what) {
    std::uint64_t v = 0;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
        throw FormatError(std::string("truncated container header: ") + what);
    }
    return v;
}

}  // namespace

void write_tensors(const std::string& path, const std::vector<TubalTensor>& tensors,
                   std::uint64_t seed) {
    if (tensors.empty()) throw FormatError("write_tensors: empty tensor list");
    const int n1 = tensors[0].n1(), n2 = tensors[0].n2(), k = tensors[0].k();
    if (n1 <= 0 || n2 <= 0) throw FormatError("write_tensors: degenerate tensor shape");
    for (const auto& t : tensors) {
        if (t.n1() != n1 || t.n2() != n2 || t.k() != k) {
            throw FormatError("write_tensors: tensors must share one shape");
        }
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open '" + path + "' for writing");
    out.write("TBL1", 4);
    put_u32(out, static_cast<std::uint32_t>(n1));
    put_u32(out, static_cast<std::uint32_t>(n2));
    put_u32(out, static_cast<std::uint32_t>(k));
    put_u32(out, static_cast<std::uint32_t>(tensors.size()));
    put_u64(out, seed);
    for (const auto& t : tensors) {
        out.write(reinterpret_cast<const char*>(t.data().data()),
                  static_cast<std::streamsize>(t.data().size() * sizeof(double)));
    }
    if (!out) throw FormatError("write failed for '" + path + "'");
}

TensorFile read_tensors(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path + "'");
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "TBL1", 4) != 0) {
        throw FormatError("'" + path + "' is not a TBL1 container");
    }
    const std::uint32_t n1 = get_u32(in, "n1");
    const std::uint32_t n2 = get_u32(in, "n2");
    const std::uint32_t k = get_u32(in, "k");
    const std::uint32_t count = get_u32(in, "count");
    const std::uint64_t seed = get_u64(in, "seed");
    if (n1 == 0 || n2 == 0 || k == 0 || count == 0) {
        throw FormatError("container header has zero dimension or count");
    }
    const size_t per = static_cast<size_t>(n1) * n2 * k;

    TensorFile f;
    f.seed = seed;
    f.tensors.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        std::vector<double> data(per);
        if (!in.read(reinterpret_cast<char*>(data.data()),
                     static_cast<std::streamsize>(per * sizeof(double)))) {
            throw FormatError("container payload shorter than header promises");
        }
        f.tensors.emplace_back(static_cast<int>(n1), static_cast<int>(n2),
                               static_cast<int>(k), std::move(data));
    }
    // Reject trailing bytes: the payload length must match exactly.
    char extra;
    if (in.read(&extra, 1)) {
        throw FormatError("container has trailing bytes beyond the declared payload");
    }
    return f;
}

void write_checkpoint(const std::string& path, long t, const TubalTensor& u) {
    if (t < 0) throw FormatError("write_checkpoint: negative iteration counter");
    write_tensors(path, {u}, static_cast<std::uint64_t>(t));
}

Checkpoint read_checkpoint(const std::string& path) {
    TensorFile f = read_tensors(path);
    if (f.tensors.size() != 1) {
        throw FormatError("checkpoint must hold exactly one tensor, found " +
                          std::to_string(f.tensors.size()));
    }
    Checkpoint c;
    c.t = static_cast<long>(f.seed);
    c.U = std::move(f.tensors[0]);
    return c;
}

}  // namespace tubal::io
