#pragma once

#include "core.hpp"

#include <optional>
#include <sstream>

namespace hjhomog {

// Periodic scalar field with cached bounds.
template <int N>
struct ScalarField {
  std::function<double(const Vec<N>&)> eval;
  double sup_abs = 0.0;
  double min_value = 0.0;
  double max_value = 0.0;
  double lipschitz = 0.0;
  bool constant = true;
  std::string description = "0";

  double operator()(const Vec<N>& y) const { return eval(y); }

  static ScalarField constant_field(double a) {
    ScalarField f;
    f.eval = [a](const Vec<N>&) { return a; };
    f.sup_abs = std::abs(a);
    f.min_value = f.max_value = a;
    f.constant = true;
    std::ostringstream os;
    os << a;
    f.description = os.str();
    return f;
  }

  // offset + amplitude * trig(2 pi y[axis] + phase)
  static ScalarField harmonic(double offset, double amplitude, int axis, bool cosine,
                              double phase = 0.0) {
    ScalarField f;
    f.eval = [=](const Vec<N>& y) {
      double a = 2.0 * kPi * y[axis] + phase;
      return offset + amplitude * (cosine ? std::cos(a) : std::sin(a));
    };
    f.sup_abs = std::abs(offset) + std::abs(amplitude);
    f.min_value = offset - std::abs(amplitude);
    f.max_value = offset + std::abs(amplitude);
    f.lipschitz = 2.0 * kPi * std::abs(amplitude);
    f.constant = amplitude == 0.0;
    std::ostringstream os;
    os << offset << (amplitude < 0 ? "-" : "+") << std::abs(amplitude)
       << (cosine ? "cos" : "sin") << "(2pi y" << axis + 1 << (phase != 0 ? "+ph" : "") << ")";
    f.description = os.str();
    return f;
  }
};

// Initial datum u0 with the bounds the solvers need.
template <int N>
struct InitialData {
  std::function<double(const Vec<N>&)> eval;
  double lipschitz = 0.0;
  // Per-axis period (0 = not periodic along that axis).
  std::array<double, N> period{};
  std::array<bool, N> constant_along{};
  std::string description;

  double operator()(const Vec<N>& x) const { return eval(x); }

  static InitialData linear(const Vec<N>& slope, double offset) {
    InitialData u;
    u.eval = [slope, offset](const Vec<N>& x) { return slope.dot(x) + offset; };
    u.lipschitz = slope.norm();
    for (int i = 0; i < N; ++i) {
      u.period[i] = slope[i] == 0.0 ? 1.0 : 0.0;
      u.constant_along[i] = slope[i] == 0.0;
    }
    std::ostringstream os;
    os << "linear";
    for (int i = 0; i < N; ++i) os << (i ? "," : "(") << slope[i];
    os << ")+" << offset;
    u.description = os.str();
    return u;
  }

  // amplitude * sin(2 pi x[axis] / wavelength) + offset
  static InitialData sine(double amplitude, int axis, double wavelength = 1.0,
                          double offset = 0.0) {
    InitialData u;
    u.eval = [=](const Vec<N>& x) {
      return amplitude * std::sin(2.0 * kPi * x[axis] / wavelength) + offset;
    };
    u.lipschitz = 2.0 * kPi * std::abs(amplitude) / wavelength;
    for (int i = 0; i < N; ++i) {
      u.period[i] = i == axis ? wavelength : 1.0;
      u.constant_along[i] = i != axis;
    }
    std::ostringstream os;
    os << "sine(" << amplitude << ",axis" << axis + 1 << ",L" << wavelength << ")+" << offset;
    u.description = os.str();
    return u;
  }

  // weight * max(0, x[axis] - shift) + base
  static InitialData ramp(int axis, double weight = 1.0, double shift = 0.0) {
    InitialData u;
    u.eval = [=](const Vec<N>& x) { return weight * std::max(0.0, x[axis] - shift); };
    u.lipschitz = std::abs(weight);
    for (int i = 0; i < N; ++i) {
      u.period[i] = i == axis ? 0.0 : 1.0;
      u.constant_along[i] = i != axis;
    }
    u.description = "ramp";
    return u;
  }

  InitialData plus(const InitialData& other) const {
    InitialData u;
    auto a = eval;
    auto b = other.eval;
    u.eval = [a, b](const Vec<N>& x) { return a(x) + b(x); };
    u.lipschitz = lipschitz + other.lipschitz;
    for (int i = 0; i < N; ++i) {
      u.period[i] = (period[i] != 0.0 && period[i] == other.period[i]) ? period[i] : 0.0;
      u.constant_along[i] = constant_along[i] && other.constant_along[i];
    }
    u.description = description + "+" + other.description;
    return u;
  }

  InitialData shifted(double c) const {
    InitialData u = *this;
    auto a = eval;
    u.eval = [a, c](const Vec<N>& x) { return a(x) + c; };
    std::ostringstream os;
    os << description << "+" << c;
    u.description = os.str();
    return u;
  }
};

}  // namespace hjhomog
