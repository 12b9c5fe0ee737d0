// SPDX-License-Identifier: Apache-2.0
//! \file rbmwos/sampling.hpp
//! Counter-based random streams and uniform sampling on spheres.
#pragma once

#include <array>
#include <cstdint>
#include <limits>

#include <boost/random/normal_distribution.hpp>

#include "vec3.hpp"

namespace rbmwos
{

//---------------------------------------------------------------------------//
/*!
 * Philox4x64-10 block function (Salmon et al., SC'11).
 *
 * Maps a 256-bit counter and a 128-bit key to 256 pseudo-random bits.
 */
inline std::array<std::uint64_t, 4>
philox4x64(std::array<std::uint64_t, 4> ctr, std::array<std::uint64_t, 2> key)
{
    constexpr std::uint64_t m0 = 0xD2E7470EE14C6C93ULL;
    constexpr std::uint64_t m1 = 0xCA5A826395121157ULL;
    constexpr std::uint64_t w0 = 0x9E3779B97F4A7C15ULL;
    constexpr std::uint64_t w1 = 0xBB67AE8584CAA73BULL;
    for (int round = 0; round < 10; ++round)
    {
        if (round > 0)
        {
            key[0] += w0;
            key[1] += w1;
        }
        unsigned __int128 const p0 = static_cast<unsigned __int128>(m0) * ctr[0];
        unsigned __int128 const p1 = static_cast<unsigned __int128>(m1) * ctr[2];
        auto const hi0 = static_cast<std::uint64_t>(p0 >> 64);
        auto const lo0 = static_cast<std::uint64_t>(p0);
        auto const hi1 = static_cast<std::uint64_t>(p1 >> 64);
        auto const lo1 = static_cast<std::uint64_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

//! SplitMix64 finalizer, used to turn (seed, index) pairs into new seeds.
inline constexpr std::uint64_t splitmix64(std::uint64_t z)
{
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

//! Child seed for sub-experiment \p index (e.g. an evaluation point).
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index)
{
    return splitmix64(master ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

//---------------------------------------------------------------------------//
/*!
 * Random stream identified by (seed, stream id).
 *
 * The pair is used as a Philox key; the first counter block seeds a
 * xoshiro256++ generator that produces the stream itself. Any number of
 * streams can therefore be created independently, in any order, on any
 * thread. Satisfies UniformRandomBitGenerator.
 */
class RngStream
{
  public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t seed, std::uint64_t stream_id)
        : seed_(seed), stream_(stream_id), s_(philox4x64({0, 0, 0, 0}, {seed, stream_id}))
    {
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0)
            s_[0] = 0x9E3779B97F4A7C15ULL;
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()()
    {
        std::uint64_t const result = rotl(s_[0] + s_[3], 23) + s_[0];
        std::uint64_t const t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    //! Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    double normal() { return normal_(*this); }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_; }

  private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::array<std::uint64_t, 4> s_;
    boost::random::normal_distribution<double> normal_;

    static constexpr std::uint64_t rotl(std::uint64_t x, int k)
    {
        return (x << k) | (x >> (64 - k));
    }
};

//---------------------------------------------------------------------------//
/*!
 * Uniform direction on S^2 (Marsaglia 1972).
 *
 * Draw (u, v) uniformly in the unit disk by rejection from the square, then
 * map s = u^2 + v^2 to (2u sqrt(1-s), 2v sqrt(1-s), 1 - 2s). Exactly uniform
 * and needs on average 8/pi uniform pairs per point.
 */
inline Vec3 unit_sphere_sample(RngStream& rng)
{
    for (;;)
    {
        double const u = 2 * rng.uniform() - 1;
        double const v = 2 * rng.uniform() - 1;
        double const s = u * u + v * v;
        if (s < 1)
        {
            double const w = 2 * std::sqrt(1 - s);
            return {u * w, v * w, 1 - 2 * s};
        }
    }
}

//! Uniform direction from three normalized standard normals (reference sampler).
inline Vec3 unit_sphere_sample_gaussian(RngStream& rng)
{
    for (;;)
    {
        Vec3 const g{rng.normal(), rng.normal(), rng.normal()};
        double const n2 = norm_squared(g);
        if (n2 > 0)
            return g * (1.0 / std::sqrt(n2));
    }
}

//! Jump to a uniform point on the sphere of radius \p r about \p x.
inline Vec3 wos_jump(Vec3 const& x, double r, RngStream& rng)
{
    return x + r * unit_sphere_sample(rng);
}

}  // namespace rbmwos
