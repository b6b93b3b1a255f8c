// Independent reference computations for the tests. Plain std::complex
// arrays and <random> only: nothing here calls into qmonty.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace oracle {

using C = std::complex<double>;
using V = std::array<C, 3>;
using M = std::array<std::array<C, 3>, 3>;

inline C dot(const V& a, const V& b) {  // Σ conj(a_i) b_i
    C s = 0;
    for (int i = 0; i < 3; ++i) s += std::conj(a[i]) * b[i];
    return s;
}

inline double norm(const V& a) { return std::sqrt(dot(a, a).real()); }

inline V unit(V a) {
    const double n = norm(a);
    for (auto& x : a) x /= n;
    return a;
}

// Vector orthogonal to a and b: conj of the formal cross product.
inline V perp(const V& a, const V& b) {
    return unit(V{std::conj(a[1] * b[2] - a[2] * b[1]), std::conj(a[2] * b[0] - a[0] * b[2]),
                  std::conj(a[0] * b[1] - a[1] * b[0])});
}

inline double overlap2(const V& a, const V& b) { return std::norm(dot(a, b)); }

// Invariant random unit vector from six independent Gaussians.
inline V haar(std::mt19937_64& g) {
    std::normal_distribution<double> n;
    V v;
    for (auto& x : v) x = C(n(g), n(g));
    return unit(v);
}

inline V real_unit(std::mt19937_64& g) {
    std::normal_distribution<double> n;
    V v;
    for (auto& x : v) x = C(n(g), 0.0);
    return unit(v);
}

// Closed-form win probabilities for a classical host with prize psi and a
// player at phi. Switch ends on the third axis of (phi, door).
inline double switch_win(const V& phi, const V& psi) { return 1.0 - overlap2(phi, psi); }
inline double stick_win(const V& phi, const V& psi) { return overlap2(phi, psi); }

// Monte Carlo mean of overlap2(phi, psi) for Haar psi (stick against Haar).
inline double haar_stick_mean(std::uint64_t n, std::uint64_t seed) {
    std::mt19937_64 g(seed);
    const V phi = unit(V{1.0, C(0.0, 1.0), 0.5});
    double s = 0;
    for (std::uint64_t i = 0; i < n; ++i) s += overlap2(phi, haar(g));
    return s / static_cast<double>(n);
}

// Angle player against Haar by quadrature of the exact single-game win
// probability |<p'|psi>|^2 after the door, averaged over sampled prizes.
inline double angle_win_mc(double theta, std::uint64_t n, std::uint64_t seed) {
    std::mt19937_64 g(seed);
    const V phi = unit(V{1.0, 1.0, 1.0});
    double s = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
        const V psi = haar(g);
        const V chi = perp(phi, psi);
        const V xi = perp(phi, chi);
        V pp;
        for (int k = 0; k < 3; ++k) pp[k] = std::cos(theta) * xi[k] + std::sin(theta) * phi[k];
        s += overlap2(unit(pp), psi);
    }
    return s / static_cast<double>(n);
}

// tr(rho p') for rho = p/3 + 2/3 (1 - p - q) and p' = cos θ ξ + sin θ φ:
// computed by explicit matrix products.
inline double conditional_trace(const V& phi, const V& chi, const V& pp) {
    const V xi = perp(phi, chi);
    M rho{};
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            rho[r][c] = phi[r] * std::conj(phi[c]) / 3.0 + 2.0 * xi[r] * std::conj(xi[c]) / 3.0;
    C s = 0;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) s += std::conj(pp[r]) * rho[r][c] * pp[c];
    return s.real();
}

// Exact switch and stick rates for a restarting host on the axes: the host
// aims at the prize with probability a whenever p misses it, and the game
// restarts; conditioning on completion gives the rates.
inline double restart_stick(double a) { return (1.0 / 3.0) / (1.0 / 3.0 + (2.0 / 3.0) * (1.0 - a)); }
inline double restart_switch(double a) { return 1.0 - restart_stick(a); }

// Binomial standard error.
inline double sigma(double w, double n) { return std::sqrt(w * (1.0 - w) / n); }

} // namespace oracle
