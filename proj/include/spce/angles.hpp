#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spce {

inline constexpr double k_pi = std::numbers::pi;
inline constexpr double k_two_pi = 2.0 * std::numbers::pi;

/// Reduce an angle to [0, 2*pi).
inline double reduce_angle(double radians) {
    double r = std::fmod(radians, k_two_pi);
    if (r < 0.0) r += k_two_pi;
    if (r >= k_two_pi) r = 0.0;  // fmod rounding at the seam
    return r;
}

inline double degrees_to_radians(double degrees) {
    return degrees * (std::numbers::pi / 180.0);
}

/// A measurement direction at a station, stored reduced modulo 2*pi.
class AnalyzerSetting {
public:
    AnalyzerSetting() = default;

    explicit AnalyzerSetting(double radians) {
        if (!std::isfinite(radians))
            throw std::invalid_argument("AnalyzerSetting: angle must be finite");
        radians_ = reduce_angle(radians);
    }

    static AnalyzerSetting from_degrees(double degrees) {
        return AnalyzerSetting(degrees_to_radians(degrees));
    }

    double radians() const noexcept { return radians_; }

private:
    double radians_ = 0.0;
};

}  // namespace spce
