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

#include "lcn/tensor.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

namespace lcn {

namespace {

static_assert(std::endian::native == std::endian::little,
        "LCNT I/O assumes a little-endian host");

constexpr std::array<char, 4> kMagic {'L', 'C', 'N', 'T'};
constexpr std::uint8_t kVersion = 1;

std::uint32_t load_u32(const unsigned char *p) {
    return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8)
            | (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24);
}

void store_u32(unsigned char *p, std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
        p[i] = static_cast<unsigned char>(v >> (8 * i));
}

template <typename T>
Tensor<T> decode_payload(Dims dims, const std::vector<unsigned char> &bytes) {
    std::vector<T> elems(dims.count());
    std::memcpy(elems.data(), bytes.data() + kLcntHeaderBytes,
            elems.size() * sizeof(T));
    for (std::size_t i = 0; i < elems.size(); ++i)
        if (!std::isfinite(elems[i]))
            throw DataError("non-finite element at flat index " + std::to_string(i));
    return Tensor<T>(dims, std::move(elems));
}

std::uint64_t splitmix64(std::uint64_t &state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

Dims dims_of(const AnyTensor &t) {
    return std::visit([](const auto &v) { return v.dims(); }, t);
}

Tensor4 to_real64(const AnyTensor &t) {
    return std::visit([](const auto &v) { return tensor_cast<double>(v); }, t);
}

template <typename T>
bool all_finite(const Tensor<T> &t) {
    for (T v : t.data())
        if (!std::isfinite(v)) return false;
    return true;
}

AnyTensor read_tensor(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
            std::istreambuf_iterator<char>());
    if (bytes.size() < kLcntHeaderBytes)
        throw TruncationError("file shorter than the LCNT header: " + path.string());
    if (std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0)
        throw FormatError("bad magic in " + path.string());
    if (bytes[4] != kVersion)
        throw FormatError("unsupported version " + std::to_string(bytes[4]));
    const std::uint8_t code = bytes[5];
    if (code > 1) throw UnsupportedDtype("dtype code " + std::to_string(code));

    const Dims dims {load_u32(&bytes[6]), load_u32(&bytes[10]),
            load_u32(&bytes[14]), load_u32(&bytes[18])};
    if (dims.b == 0 || dims.c == 0 || dims.h == 0 || dims.w == 0)
        throw FormatError("zero dimension in header");

    const std::size_t elem_size = code == 0 ? sizeof(float) : sizeof(double);
    const std::size_t expected = kLcntHeaderBytes + dims.count() * elem_size;
    if (bytes.size() < expected)
        throw TruncationError("payload holds " + std::to_string(bytes.size() - kLcntHeaderBytes)
                + " bytes, header declares " + std::to_string(expected - kLcntHeaderBytes));
    if (bytes.size() > expected)
        throw FormatError("trailing bytes after payload");

    if (code == 0) return decode_payload<float>(dims, bytes);
    return decode_payload<double>(dims, bytes);
}

template <typename T>
void write_tensor(const Tensor<T> &t, const std::filesystem::path &path) {
    if (!all_finite(t)) throw DataError("refusing to write non-finite tensor");
    const Dims &d = t.dims();
    std::vector<unsigned char> bytes(kLcntHeaderBytes + t.size() * sizeof(T));
    std::memcpy(bytes.data(), kMagic.data(), kMagic.size());
    bytes[4] = kVersion;
    bytes[5] = static_cast<std::uint8_t>(dtype_of<T>());
    const std::size_t extents[4] = {d.b, d.c, d.h, d.w};
    for (int i = 0; i < 4; ++i) {
        if (extents[i] > 0xffffffffu) throw DimError("dimension exceeds 32 bits");
        store_u32(&bytes[6 + 4 * i], static_cast<std::uint32_t>(extents[i]));
    }
    std::memcpy(bytes.data() + kLcntHeaderBytes, t.data().data(), t.size() * sizeof(T));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char *>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

void write_tensor(const AnyTensor &t, const std::filesystem::path &path) {
    std::visit([&](const auto &v) { write_tensor(v, path); }, t);
}

template void write_tensor<float>(const Tensor4f &, const std::filesystem::path &);
template void write_tensor<double>(const Tensor4 &, const std::filesystem::path &);
template bool all_finite<float>(const Tensor4f &);
template bool all_finite<double>(const Tensor4 &);

Rng::Rng(std::uint64_t seed) {
    std::uint64_t state = seed;
    for (auto &s : s_)
        s = splitmix64(state);
}

std::uint64_t Rng::next() {
    const std::uint64_t result = std::rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = std::rotl(s_[3], 45);
    return result;
}

double Rng::uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 == 0.0)
        u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

std::size_t Rng::below(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n));
}

Tensor4 fill_random(Dims dims, std::uint64_t seed, Distribution dist) {
    Tensor4 t(dims);
    Rng rng(seed);
    for (double &v : t.data())
        v = dist == Distribution::uniform01 ? rng.uniform() : rng.normal();
    return t;
}

} // namespace lcn
