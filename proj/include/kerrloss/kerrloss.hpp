// kerrloss.hpp: umbrella header for the physics modules.

#pragma once

#include "kerrloss/analytic.hpp"
#include "kerrloss/correlated.hpp"
#include "kerrloss/error.hpp"
#include "kerrloss/fock.hpp"
#include "kerrloss/lindblad.hpp"
#include "kerrloss/observables.hpp"
#include "kerrloss/version.hpp"
