#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "gzsb/detail/binio.hpp"
#include "gzsb/error.hpp"
#include "gzsb/model.hpp"
#include "gzsb/types.hpp"

// Checkpoint file:
//   "GZSM" | u16 version=1 | u8 variant | u32 m | u32 n | u32 h1 | u32 h2
//   | f64 sem_scale | u64 count | count f64 parameters (flatten order)

namespace gzsb {

namespace detail {
constexpr std::uint16_t kCheckpointVersion = 1;
}

inline void save_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot write " + path.string());
    detail::put_magic(os, "GZSM");
    detail::put_u16(os, detail::kCheckpointVersion);
    os.put(static_cast<char>(params.variant));
    detail::put_u32(os, static_cast<std::uint32_t>(params.m));
    detail::put_u32(os, static_cast<std::uint32_t>(params.n));
    detail::put_u32(os, static_cast<std::uint32_t>(params.h1));
    detail::put_u32(os, static_cast<std::uint32_t>(params.h2));
    detail::put_f64(os, params.sem_scale);
    const std::vector<double> flat = flatten(params);
    detail::put_u64(os, flat.size());
    for (double v : flat) detail::put_f64(os, v);
    if (!os) throw DataError("write failed for " + path.string());
}

inline ModelParams load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("missing file " + path.string());
    const std::string name = path.filename().string();
    detail::expect_magic(is, "GZSM", name);
    const std::uint16_t version = detail::get_u16(is, name, "version");
    if (version != detail::kCheckpointVersion) {
        throw DataError(name + ": unsupported version " + std::to_string(version));
    }
    const int variant_tag = is.get();
    if (variant_tag != 0 && variant_tag != 1) {
        throw DataError(name + ": bad variant tag " + std::to_string(variant_tag));
    }
    ModelParams shape;
    shape.variant = static_cast<Variant>(variant_tag);
    shape.m = detail::get_u32(is, name, "m");
    shape.n = detail::get_u32(is, name, "n");
    shape.h1 = detail::get_u32(is, name, "h1");
    shape.h2 = detail::get_u32(is, name, "h2");
    shape.sem_scale = detail::get_f64(is, name, "sem_scale");
    if (shape.m == 0 || shape.n == 0) throw DataError(name + ": zero dimension in header");
    if (shape.variant == Variant::linear) {
        shape.w = Matrix(shape.m, shape.n);
    } else {
        if (shape.h1 == 0 || shape.h2 == 0) {
            throw DataError(name + ": zero hidden size in nonlinear header");
        }
        for (const auto& dims : detail::mlp_layer_dims(shape.m, shape.n, shape.h1, shape.h2)) {
            DenseLayer layer;
            layer.w = Matrix(dims.out, dims.in);
            layer.b.assign(dims.out, 0.0);
            shape.layers.push_back(std::move(layer));
        }
    }
    const std::uint64_t count = detail::get_u64(is, name, "count");
    if (count != param_count(shape)) {
        throw DataError(name + ": parameter count " + std::to_string(count) +
                        " does not match header dimensions (expected " +
                        std::to_string(param_count(shape)) + ")");
    }
    std::vector<double> flat(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        flat[i] = detail::get_f64(is, name, "parameters");
        if (!std::isfinite(flat[i])) {
            throw DataError(name + ": non-finite parameter at index " + std::to_string(i));
        }
    }
    return unflatten(flat, shape);
}

}  // namespace gzsb
