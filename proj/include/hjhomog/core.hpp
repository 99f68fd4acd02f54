#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace hjhomog {

template <int N>
using Vec = Eigen::Matrix<double, N, 1>;

inline constexpr double kSentinel = 1e12;
inline constexpr double kPi = std::numbers::pi;

enum class ErrorCode {
  NotOnBoundary,
  ProjectionDiverged,
  EmptyBoundary,
  DegenerateObliqueness,
  StepTooLarge,
  CFLViolation,
  WindowTooSmall,
  GridMismatch,
  Unreachable,
  NoPath,
  BudgetExceeded,
  TableGap,
  ResolutionInsufficient,
  OutsideValidatedRegion,
  DegenerateAngle,
  CorruptHeader,
  VersionMismatch,
  InvalidConfig,
  Io,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::NotOnBoundary: return "NotOnBoundary";
    case ErrorCode::ProjectionDiverged: return "ProjectionDiverged";
    case ErrorCode::EmptyBoundary: return "EmptyBoundary";
    case ErrorCode::DegenerateObliqueness: return "DegenerateObliqueness";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::CFLViolation: return "CFLViolation";
    case ErrorCode::WindowTooSmall: return "WindowTooSmall";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::Unreachable: return "Unreachable";
    case ErrorCode::NoPath: return "NoPath";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::TableGap: return "TableGap";
    case ErrorCode::ResolutionInsufficient: return "ResolutionInsufficient";
    case ErrorCode::OutsideValidatedRegion: return "OutsideValidatedRegion";
    case ErrorCode::DegenerateAngle: return "DegenerateAngle";
    case ErrorCode::CorruptHeader: return "CorruptHeader";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Process exit status used by the command line front end.
inline int exit_status(ErrorCode c) {
  switch (c) {
    case ErrorCode::CorruptHeader:
    case ErrorCode::VersionMismatch:
    case ErrorCode::Io:
      return 4;
    case ErrorCode::ProjectionDiverged:
    case ErrorCode::StepTooLarge:
    case ErrorCode::Unreachable:
    case ErrorCode::NoPath:
    case ErrorCode::BudgetExceeded:
    case ErrorCode::TableGap:
    case ErrorCode::ResolutionInsufficient:
      return 3;
    default:
      return 2;
  }
}

inline bool is_infinite_cost(double v) { return v >= kSentinel / 2; }

template <int N>
Vec<N> round_lattice(const Vec<N>& x) {
  Vec<N> r;
  for (int i = 0; i < N; ++i) r[i] = std::round(x[i]);
  return r;
}

// Unit directions used for velocity nets and quadrature rays.
template <int N>
std::vector<Vec<N>> direction_net(int count) {
  std::vector<Vec<N>> dirs;
  if constexpr (N == 2) {
    for (int k = 0; k < count; ++k) {
      double a = 2.0 * kPi * k / count;
      dirs.push_back(Vec<N>(std::cos(a), std::sin(a)));
    }
  } else if constexpr (N == 3) {
    // Fibonacci sphere.
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < count; ++k) {
      double z = 1.0 - 2.0 * (k + 0.5) / count;
      double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      double a = golden * k;
      dirs.push_back(Vec<N>(r * std::cos(a), r * std::sin(a), z));
    }
  } else {
    for (int i = 0; i < N; ++i) {
      Vec<N> e = Vec<N>::Zero();
      e[i] = 1.0;
      dirs.push_back(e);
      dirs.push_back(-e);
    }
    for (int mask = 0; mask < (1 << N); ++mask) {
      Vec<N> d;
      for (int i = 0; i < N; ++i) d[i] = (mask >> i) & 1 ? 1.0 : -1.0;
      dirs.push_back(d.normalized());
    }
  }
  return dirs;
}

// Runs fn(begin, end) over [0, n) split into contiguous chunks.
inline void parallel_for(std::size_t n, int workers,
                         const std::function<void(std::size_t, std::size_t)>& fn) {
  if (workers <= 1 || n < 2048) {
    fn(0, n);
    return;
  }
  std::vector<std::jthread> pool;
  std::size_t chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    std::size_t b = w * chunk;
    std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
}

// Least-squares slope and intercept of log(y) against log(x).
struct LogLogFit {
  double slope = 0.0;
  double constant = 0.0;
};

inline LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  LogLogFit f;
  double den = n * sxx - sx * sx;
  if (n < 2 || den == 0.0) return f;
  f.slope = (n * sxy - sx * sy) / den;
  f.constant = std::exp((sy - f.slope * sx) / n);
  return f;
}

}  // namespace hjhomog
