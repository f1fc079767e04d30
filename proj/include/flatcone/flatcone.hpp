#pragma once

// Flat conical metrics on the Riemann sphere: divisor algebra with real
// angle parameters, explicit multiplicative differentials, developing-map
// integration with branch tracking, monodromy, local singularity
// analysis, and the generalized Schwarz-Christoffel polygon solver.

#include "flatcone/divisor.hpp"
#include "flatcone/develop.hpp"
#include "flatcone/errors.hpp"
#include "flatcone/exact.hpp"
#include "flatcone/local.hpp"
#include "flatcone/path.hpp"
#include "flatcone/prym.hpp"
#include "flatcone/quadrature.hpp"
#include "flatcone/schwarz_christoffel.hpp"
