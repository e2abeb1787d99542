#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ym {

using Vec = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(std::span<const double> a) {
    double s = 0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
}

inline double dist(std::span<const double> a, std::span<const double> b) {
    double s = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline Vec scaled(std::span<const double> a, double c) {
    Vec r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
    return r;
}

inline Vec normalized(std::span<const double> a) {
    double n = norm(a);
    if (n == 0) throw std::domain_error("cannot normalize zero vector");
    return scaled(a, 1.0 / n);
}

// Neumaier compensated summation; deterministic and grouping-stable enough
// for the exactness claims made on power-of-two quadrature grids.
class StableSum {
public:
    void add(double v) {
        double t = s_ + v;
        if (std::abs(s_) >= std::abs(v))
            c_ += (s_ - t) + v;
        else
            c_ += (v - t) + s_;
        s_ = t;
    }
    double value() const { return s_ + c_; }

private:
    double s_ = 0, c_ = 0;
};

inline double stable_sum(std::span<const double> vals) {
    StableSum s;
    for (double v : vals) s.add(v);
    return s.value();
}

// Deterministic RNG wrapper so every sampled estimate is reproducible.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}
    double uniform(double a, double b) {
        return std::uniform_real_distribution<double>(a, b)(eng_);
    }
    double gauss() { return std::normal_distribution<double>(0, 1)(eng_); }
    int index(int n) { return std::uniform_int_distribution<int>(0, n - 1)(eng_); }
    // uniform on the open unit ball, by normalized gaussian times radius^{1/d}
    Vec ball(int d) {
        Vec v(d);
        double n2;
        do {
            for (auto& x : v) x = gauss();
            n2 = norm(v);
        } while (n2 == 0);
        double r = std::pow(uniform(0.0, 1.0), 1.0 / d);
        // keep strictly interior
        r = std::min(r, 1.0 - 1e-12);
        for (auto& x : v) x = x / n2 * r;
        return v;
    }
    Vec sphere(int d) {
        Vec v(d);
        double n2;
        do {
            for (auto& x : v) x = gauss();
            n2 = norm(v);
        } while (n2 == 0);
        for (auto& x : v) x /= n2;
        return v;
    }

private:
    std::mt19937_64 eng_;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::runtime_error(msg);
}

} // namespace ym
