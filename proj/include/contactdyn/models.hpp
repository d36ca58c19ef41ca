#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "contactdyn/hamiltonian.hpp"

namespace contactdyn::models {

/// Catalogue of closed-form Hamiltonians with analytic gradients.
///   reeb               H = sum_i wp_i (c + k y^i) - 1
///   constant_velocity  H = c sum_i wp_i
///   quadratic          H = 1/2 sum_i wp_i^2
///   quadratic_field    H = 1/2 sum_i wp_i^2 (1 + a (y^i)^2)
///   harmonic           H = 1/2 sum_i (wp_i^2 + w^2 (y^i)^2)
///   darboux            H = 1
///   zero               H = 0
/// Unknown parameter names are rejected; missing ones take the defaults below.
Hamiltonian make(const std::string& name, std::size_t n, const std::map<std::string, double>& params = {});

std::vector<std::string> names();
/// Parameter names and defaults accepted by `name`.
std::map<std::string, double> defaults(const std::string& name);

}  // namespace contactdyn::models
