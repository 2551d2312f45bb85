#pragma once

#include <cmath>

namespace cpl {

// First-order forward-mode dual number. The operation set is exactly what
// the projection chain needs: +, -, *, /, negation, sin, cos. Division by a
// zero-valued dual is a precondition violation and follows IEEE semantics.
struct Dual {
    double value{0.0};
    double deriv{0.0};

    constexpr Dual() = default;
    constexpr Dual(double v) : value(v) {}
    constexpr Dual(double v, double d) : value(v), deriv(d) {}

    static constexpr Dual seeded(double v) { return Dual(v, 1.0); }
};

constexpr Dual operator-(Dual a) { return {-a.value, -a.deriv}; }

constexpr Dual operator+(Dual a, Dual b) { return {a.value + b.value, a.deriv + b.deriv}; }
constexpr Dual operator-(Dual a, Dual b) { return {a.value - b.value, a.deriv - b.deriv}; }
constexpr Dual operator*(Dual a, Dual b) {
    return {a.value * b.value, a.value * b.deriv + a.deriv * b.value};
}
constexpr Dual operator/(Dual a, Dual b) {
    return {a.value / b.value, (a.deriv * b.value - a.value * b.deriv) / (b.value * b.value)};
}

constexpr Dual operator+(Dual a, double b) { return {a.value + b, a.deriv}; }
constexpr Dual operator+(double a, Dual b) { return {a + b.value, b.deriv}; }
constexpr Dual operator-(Dual a, double b) { return {a.value - b, a.deriv}; }
constexpr Dual operator-(double a, Dual b) { return {a - b.value, -b.deriv}; }
constexpr Dual operator*(Dual a, double b) { return {a.value * b, a.deriv * b}; }
constexpr Dual operator*(double a, Dual b) { return {a * b.value, a * b.deriv}; }
constexpr Dual operator/(Dual a, double b) { return {a.value / b, a.deriv / b}; }
constexpr Dual operator/(double a, Dual b) {
    return {a / b.value, -(a / (b.value * b.value)) * b.deriv};
}

inline Dual sin(Dual a) { return {std::sin(a.value), a.deriv * std::cos(a.value)}; }
inline Dual cos(Dual a) { return {std::cos(a.value), -a.deriv * std::sin(a.value)}; }

constexpr double value_of(double x) { return x; }
constexpr double value_of(const Dual& x) { return x.value; }

} // namespace cpl
