#pragma once
// Shared bits for the unit tests: seeded random inputs and comparison helpers.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "aif/gencoords.hpp"

namespace th {

inline double max_abs(const std::vector<double>& v) {
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// ||a - b||_inf <= tol * ||b||_inf
inline bool close_rel(const std::vector<double>& a, const std::vector<double>& b, double tol) {
    if (a.size() != b.size()) return false;
    double d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d <= tol * std::max(max_abs(b), 1e-300);
}

inline double central_diff(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2 * h);
}

inline std::vector<double> random_image(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> img(aif::kVisualLen);
    for (double& x : img) x = u(rng);
    return img;
}

}  // namespace th
