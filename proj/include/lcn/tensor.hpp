/*******************************************************************************
* Copyright 2026 The LCN Authors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*******************************************************************************/

#ifndef LCN_TENSOR_HPP
#define LCN_TENSOR_HPP

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <type_traits>
#include <variant>
#include <vector>

#include "lcn/error.hpp"

namespace lcn {

struct Dims {
    std::size_t b = 1, c = 1, h = 1, w = 1;

    std::size_t count() const { return b * c * h * w; }
    std::size_t plane() const { return h * w; }
    std::size_t sample() const { return c * h * w; }
    bool operator==(const Dims &) const = default;
};

enum class Dtype : std::uint8_t { real32 = 0, real64 = 1 };

template <typename T>
constexpr Dtype dtype_of() {
    static_assert(std::is_same_v<T, float> || std::is_same_v<T, double>,
            "unsupported element type");
    return std::is_same_v<T, float> ? Dtype::real32 : Dtype::real64;
}

// Dense (B, C, H, W) volume, row-major with W fastest.
template <typename T>
class Tensor {
    static_assert(std::is_arithmetic_v<T>, "Tensor element must be arithmetic");

public:
    using value_type = T;

    Tensor() = default;

    explicit Tensor(Dims dims, T fill = T(0)) : dims_(dims) {
        if (dims.b == 0 || dims.c == 0 || dims.h == 0 || dims.w == 0)
            throw DimError("all dims must be >= 1");
        elems_.assign(dims.count(), fill);
    }

    Tensor(Dims dims, std::vector<T> elems) : dims_(dims), elems_(std::move(elems)) {
        if (dims.b == 0 || dims.c == 0 || dims.h == 0 || dims.w == 0)
            throw DimError("all dims must be >= 1");
        if (elems_.size() != dims.count())
            throw ShapeError("element count does not match dims");
    }

    const Dims &dims() const { return dims_; }
    std::size_t size() const { return elems_.size(); }

    std::size_t index(std::size_t b, std::size_t c, std::size_t h, std::size_t w) const {
        return ((b * dims_.c + c) * dims_.h + h) * dims_.w + w;
    }

    T &operator()(std::size_t b, std::size_t c, std::size_t h, std::size_t w) {
        return elems_[index(b, c, h, w)];
    }
    const T &operator()(std::size_t b, std::size_t c, std::size_t h, std::size_t w) const {
        return elems_[index(b, c, h, w)];
    }

    T &operator[](std::size_t i) { return elems_[i]; }
    const T &operator[](std::size_t i) const { return elems_[i]; }

    std::span<T> data() { return elems_; }
    std::span<const T> data() const { return elems_; }

    // Contiguous (C, H, W) slice of one batch sample.
    std::span<const T> sample(std::size_t b) const {
        return data().subspan(b * dims_.sample(), dims_.sample());
    }
    std::span<T> sample(std::size_t b) {
        return data().subspan(b * dims_.sample(), dims_.sample());
    }

    bool operator==(const Tensor &) const = default;

private:
    Dims dims_ {};
    std::vector<T> elems_;
};

using Tensor4f = Tensor<float>;
using Tensor4 = Tensor<double>;

template <typename To, typename From>
Tensor<To> tensor_cast(const Tensor<From> &t) {
    std::vector<To> out(t.data().begin(), t.data().end());
    return Tensor<To>(t.dims(), std::move(out));
}

// A tensor as stored on disk: either dtype.
using AnyTensor = std::variant<Tensor4f, Tensor4>;

Dims dims_of(const AnyTensor &t);
Tensor4 to_real64(const AnyTensor &t);

// LCNT file format: "LCNT", version u8 = 1, dtype u8, four u32 dims (LE),
// then the payload as little-endian IEEE-754 in Tensor order.
inline constexpr std::size_t kLcntHeaderBytes = 22;

AnyTensor read_tensor(const std::filesystem::path &path);

template <typename T>
void write_tensor(const Tensor<T> &t, const std::filesystem::path &path);
void write_tensor(const AnyTensor &t, const std::filesystem::path &path);

template <typename T>
bool all_finite(const Tensor<T> &t);

enum class Distribution { uniform01, normal01 };

// xoshiro256** seeded through splitmix64. The stream for a given seed is
// identical on every platform; normal01 uses Box-Muller on that stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed);
    std::uint64_t next();
    double uniform();  // [0, 1)
    double normal();
    std::size_t below(std::size_t n);  // [0, n)

private:
    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

Tensor4 fill_random(Dims dims, std::uint64_t seed, Distribution dist);

} // namespace lcn

#endif
