#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>

namespace dtcbf {

/// A fixed-size actuator vector convertible to and from std::array.
template <class C>
concept ControlVector = requires(const C& c, const std::array<double, C::kDim>& a) {
    { C::kDim } -> std::convertible_to<std::size_t>;
    { c.to_array() } -> std::same_as<std::array<double, C::kDim>>;
    { C::from_array(a) } -> std::same_as<C>;
};

/// Axis-aligned actuator constraint set U.
template <ControlVector C>
struct ControlBox {
    C lower;
    C upper;

    bool contains(const C& u, double slack = 0.0) const
    {
        const auto x = u.to_array();
        const auto lo = lower.to_array();
        const auto hi = upper.to_array();
        for (std::size_t i = 0; i < C::kDim; ++i) {
            if (!(x[i] >= lo[i] - slack && x[i] <= hi[i] + slack)) return false;
        }
        return true;
    }

    C clamp(const C& u) const
    {
        auto x = u.to_array();
        const auto lo = lower.to_array();
        const auto hi = upper.to_array();
        for (std::size_t i = 0; i < C::kDim; ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
        return C::from_array(x);
    }
};

/// (1 - t) a + t b, componentwise. t = 0 and t = 1 return the endpoints exactly.
template <ControlVector C>
C lerp(const C& a, const C& b, double t)
{
    if (t == 0.0) return a;
    if (t == 1.0) return b;
    auto x = a.to_array();
    const auto y = b.to_array();
    for (std::size_t i = 0; i < C::kDim; ++i) x[i] = (1.0 - t) * x[i] + t * y[i];
    return C::from_array(x);
}

template <ControlVector C>
double squared_distance(const C& a, const C& b)
{
    const auto x = a.to_array();
    const auto y = b.to_array();
    double sum = 0.0;
    for (std::size_t i = 0; i < C::kDim; ++i) sum += (x[i] - y[i]) * (x[i] - y[i]);
    return sum;
}

template <ControlVector C>
double distance(const C& a, const C& b)
{
    return std::sqrt(squared_distance(a, b));
}

template <ControlVector C>
bool bit_equal(const C& a, const C& b)
{
    return a.to_array() == b.to_array();
}

}  // namespace dtcbf
