#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace clrwire {

// Counter-based deterministic RNG. Every stream is identified by (seed, stream id,
// counter); substreams are derived by hashing a name, so independent consumers can
// draw in any order without affecting each other. Same seed -> same bytes, always.
class Rng {
  public:
    explicit Rng(uint64_t seed, uint64_t stream = 0) : seed_(seed), stream_(stream) {}

    // Derived substream; `salt` distinguishes same-named siblings (e.g. a sample index).
    Rng sub(std::string_view name, uint64_t salt = 0) const {
        uint64_t h = fnv1a(name);
        return Rng(seed_, mix(stream_ ^ mix(h + salt * 0x9e3779b97f4a7c15ull)));
    }

    uint64_t next_u64() { return mix(seed_ ^ mix(stream_ ^ mix(counter_++ + 0x632be59bd9b4e019ull))); }

    // Uniform in [0, 1).
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Integer in [0, n).
    uint64_t below(uint64_t n) { return next_u64() % n; }
    int index(int n) { return int(below(uint64_t(n))); }

    // Standard normal via Box-Muller; pairs are consumed eagerly so draw order is
    // independent of caller interleaving.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    template <class It>
    void shuffle(It first, It last) {
        auto n = last - first;
        for (auto i = n - 1; i > 0; --i) {
            auto j = below(uint64_t(i + 1));
            std::swap(first[i], first[decltype(i)(j)]);
        }
    }

    static uint64_t fnv1a(std::string_view s) {
        uint64_t h = 0xcbf29ce484222325ull;
        for (char c : s) {
            h ^= uint64_t(uint8_t(c));
            h *= 0x100000001b3ull;
        }
        return h;
    }

    static uint64_t mix(uint64_t x) {  // splitmix64 finalizer
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

  private:
    uint64_t seed_;
    uint64_t stream_;
    uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace clrwire
