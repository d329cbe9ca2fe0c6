#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace lbm {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; a bijection on 64-bit words.
std::uint64_t mix64(std::uint64_t x);

/// Derives an independent child seed from a parent seed and a stream tag.
/// Child streams depend only on (parent, tag), never on call order, so
/// replicate- and node-level tasks can run in any order or thread.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t tag);
std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> tags);

/// Stream tags used across the library.
namespace stream {
inline constexpr std::uint64_t kCovariance = 0xC0FAull;
inline constexpr std::uint64_t kEta = 0xE7Aull;
inline constexpr std::uint64_t kNetworks = 0x4E7ull;
inline constexpr std::uint64_t kOffDiagonal = 0x0FFull;
inline constexpr std::uint64_t kCrossValidation = 0xC5ull;
inline constexpr std::uint64_t kReplicate = 0x4E9ull;
}  // namespace stream

}  // namespace lbm
