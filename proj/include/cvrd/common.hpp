#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace cvrd {

using cplx = std::complex<double>;

// Bad user-supplied configuration (CLI maps this to exit code 2).
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values or other numeric breakdown (CLI maps this to exit code 3).
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

inline double db_to_amplitude(double db) { return std::pow(10.0, db / 20.0); }
inline double amplitude_to_db(double amp) { return 20.0 * std::log10(amp); }

}  // namespace cvrd
