// Copyright 2026 The wva-fisher Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

/// Philox4x32-10 counter-based generator (Salmon et al. 2011 construction).
/// Every draw is a pure function of (key, counter), so any shot of any
/// experiment can be regenerated without replaying the ones before it.

#include <array>
#include <cstdint>
#include <limits>

namespace wva {

class Philox4x32 {
  public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter c, Key k) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                k[0] += kW0;
                k[1] += kW1;
            }
            const std::uint64_t p0 = std::uint64_t{kM0} * c[0];
            const std::uint64_t p1 = std::uint64_t{kM1} * c[2];
            c = {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0], static_cast<std::uint32_t>(p1),
                 static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1], static_cast<std::uint32_t>(p0)};
        }
        return c;
    }

  private:
    static constexpr std::uint32_t kM0 = 0xD2511F53u;
    static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kW0 = 0x9E3779B9u;
    static constexpr std::uint32_t kW1 = 0xBB67AE85u;
};

/// Double in [0, 1) from the top 53 bits of a 64-bit word.
inline double unit_double(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (std::uint64_t{hi} << 32) | lo;
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Stream layout: key = seed; counter = (shot low, shot high, stream low,
/// stream high). Each shot gets one 128-bit block, i.e. two doubles.
class ShotStream {
  public:
    ShotStream(std::uint64_t seed, std::uint64_t stream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}, stream_(stream) {}

    std::array<double, 2> uniforms(std::uint64_t shot) const {
        const auto b = Philox4x32::block({static_cast<std::uint32_t>(shot), static_cast<std::uint32_t>(shot >> 32),
                                          static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                                         key_);
        return {unit_double(b[0], b[1]), unit_double(b[2], b[3])};
    }

  private:
    Philox4x32::Key key_;
    std::uint64_t stream_;
};

} // namespace wva
