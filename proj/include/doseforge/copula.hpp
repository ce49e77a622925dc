#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "doseforge/errors.hpp"

namespace doseforge {

enum class CopulaFamily { Independence, Gaussian, Clayton, Gumbel, Frank, Joe };

CopulaFamily parse_copula_family(const std::string& name);
std::string to_string(CopulaFamily f);

struct CopulaSpec {
  CopulaFamily family = CopulaFamily::Independence;
  double param = 0.0;  // rho for Gaussian, theta for Archimedean families

  void validate() const;
};

// paired dependent uniforms on (0,1)^2
struct UVSample {
  Eigen::ArrayX2d uv;
  std::uint64_t seed = 0;

  Eigen::ArrayXd u() const { return uv.col(0); }
  Eigen::ArrayXd v() const { return uv.col(1); }
  Eigen::Index size() const { return uv.rows(); }
};

UVSample sample_copula(const CopulaSpec& spec, Eigen::Index n, std::uint64_t seed);

// population Kendall tau for the family at its parameter
double tau_analytic(const CopulaSpec& spec);

}  // namespace doseforge
