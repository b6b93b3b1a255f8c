#include "qmonty/random.hpp"

#include <numeric>
#include <stdexcept>

namespace qmonty {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

namespace {

std::uint64_t derive_seed(const StreamId& id) {
    std::uint64_t h = mix64(id.master);
    h = mix64(h ^ id.index);
    h = mix64(h ^ (id.lane * 0xd1b54a32d192ed03ULL));
    return h;
}

} // namespace

RandomStream::RandomStream(std::uint64_t seed)
    : RandomStream(StreamId{seed, 0, 0}) {}

RandomStream::RandomStream(StreamId id) : id_(id), engine_(derive_seed(id)) {}

RandomStream RandomStream::substream(std::uint64_t master, std::uint64_t index,
                                     std::uint64_t lane) {
    return RandomStream(StreamId{master, index, lane});
}

double RandomStream::uniform() { return unit_(engine_); }

double RandomStream::normal() { return gauss_(engine_); }

bool RandomStream::bernoulli(double p) { return uniform() < p; }

std::size_t RandomStream::index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("RandomStream::index: empty range");
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    return pick(engine_);
}

std::size_t RandomStream::discrete(std::span<const double> weights) {
    if (weights.empty()) throw std::invalid_argument("RandomStream::discrete: no weights");
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(total > 0.0)) throw std::invalid_argument("RandomStream::discrete: zero total weight");
    double u = uniform() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (u < weights[i]) return i;
        u -= weights[i];
    }
    // Rounding left u marginally above the last bucket; return the last
    // index that carries positive weight.
    for (std::size_t i = weights.size(); i-- > 0;) {
        if (weights[i] > 0.0) return i;
    }
    return weights.size() - 1;
}

} // namespace qmonty
