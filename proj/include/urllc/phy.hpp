#pragma once

#include <cmath>
#include <stdexcept>

namespace urllc {

// Thermal-noise constants. Bandwidth defaults to the 20 MHz system bandwidth.
struct PhyConstants {
  double boltzmann = 1.38e-23;  // J/K
  double temperature_k = 290.0;
  double bandwidth_hz = 2.0e7;
};

// Log-distance path loss: p_tx / d^alpha.
inline double received_power(double distance_m, double alpha, double p_tx_w) {
  if (distance_m <= 0.0) {
    throw std::domain_error("received_power: distance must be positive");
  }
  return p_tx_w / std::pow(distance_m, alpha);
}

// kTB thermal noise.
inline double noise_power(const PhyConstants& c) {
  return c.boltzmann * c.temperature_k * c.bandwidth_hz;
}

inline double to_db(double linear) { return 10.0 * std::log10(linear); }
inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace urllc
