#include <cmath>
#include <numbers>

#include "morphevo/fitness.hpp"

namespace morphevo {

double sphere_benchmark(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) {
        s += (v - 0.5) * (v - 0.5);
    }
    return -s;
}

double rastrigin_benchmark(std::span<const double> x) {
    double s = 10.0 * static_cast<double>(x.size());
    for (double v : x) {
        const double z = 10.24 * (v - 0.5);
        s += z * z - 10.0 * std::cos(2.0 * std::numbers::pi * z);
    }
    return -s;
}

}  // namespace morphevo
