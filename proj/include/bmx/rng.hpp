#pragma once

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/student_t_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <cmath>
#include <cstdint>

namespace bmx {

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Counter-based generator. Output i is a hash of (key, i), so streams can be split
/// off by index and results do not depend on the order in which work is scheduled.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0) : key_(mix64(seed + 0x9e3779b97f4a7c15ULL)) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type{0}; }

    result_type operator()() {
        ++counter_;
        return mix64(key_ ^ mix64(counter_ * 0x9e3779b97f4a7c15ULL));
    }

    /// Independent child stream; the parent state is not advanced.
    Rng split(std::uint64_t stream) const {
        Rng child;
        child.key_ = mix64(key_ ^ mix64((stream + 1) * 0xd1b54a32d192ed03ULL + 0x632be59bd9b4e019ULL));
        return child;
    }

    std::uint64_t key() const { return key_; }

    /// Uniform on the open interval (0, 1).
    double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

    double normal(double mean = 0.0, double sd = 1.0) {
        boost::random::normal_distribution<double> d(mean, sd);
        return d(*this);
    }

    /// Gamma with shape and rate.
    double gamma(double shape, double rate) {
        boost::random::gamma_distribution<double> d(shape, 1.0 / rate);
        return d(*this);
    }

    double student_t(double df) {
        boost::random::student_t_distribution<double> d(df);
        return d(*this);
    }

    long poisson(double mean) {
        if (mean <= 0.0) return 0;
        if (mean > 1e7) return std::lround(normal(mean, std::sqrt(mean)));
        boost::random::poisson_distribution<long, double> d(mean);
        return d(*this);
    }

    std::size_t index(std::size_t n) {
        boost::random::uniform_int_distribution<std::size_t> d(0, n - 1);
        return d(*this);
    }

private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

}  // namespace bmx
