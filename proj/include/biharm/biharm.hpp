#pragma once

#include "biharm/error.hpp"
#include "biharm/params.hpp"
#include "biharm/quadrature.hpp"
#include "biharm/special_functions.hpp"
#include "biharm/closed_form.hpp"
#include "biharm/ode.hpp"
#include "biharm/orbits.hpp"
#include "biharm/banded.hpp"
#include "biharm/variational.hpp"
#include "biharm/weighted_identities.hpp"
#include "biharm/io.hpp"
