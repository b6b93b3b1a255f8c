// random.hpp: owned, seedable random streams with counter-based substreams.
#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace qmonty {

// Provenance of a stream: the master seed plus the (index, lane) counter
// that selected it. Two streams with equal ids produce identical draws.
struct StreamId {
    std::uint64_t master = 0;
    std::uint64_t index = 0;
    std::uint64_t lane = 0;

    friend bool operator==(const StreamId&, const StreamId&) = default;
};

// A random stream is owned by exactly one consumer; it can be moved but not
// copied, so two consumers can never silently replay the same draws.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed);
    explicit RandomStream(StreamId id);

    // Substream `index` of `master`, on an independent `lane`.
    static RandomStream substream(std::uint64_t master, std::uint64_t index,
                                  std::uint64_t lane = 0);

    RandomStream(RandomStream&&) noexcept = default;
    RandomStream& operator=(RandomStream&&) noexcept = default;
    RandomStream(const RandomStream&) = delete;
    RandomStream& operator=(const RandomStream&) = delete;

    const StreamId& id() const { return id_; }

    double uniform();               // [0, 1)
    double normal();                // standard Gaussian
    bool bernoulli(double p);
    std::size_t index(std::size_t n);  // uniform on {0, ..., n-1}
    // Draws an index with probability proportional to weights[i].
    std::size_t discrete(std::span<const double> weights);

private:
    StreamId id_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> gauss_{0.0, 1.0};
    std::uniform_real_distribution<double> unit_{0.0, 1.0};
};

// SplitMix64 finalizer; used to decorrelate substream seeds.
std::uint64_t mix64(std::uint64_t x);

} // namespace qmonty
