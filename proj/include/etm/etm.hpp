#pragma once

// Everything at once. Individual headers can be included on their own.
#include "counting.hpp"
#include "em.hpp"
#include "fixed_points.hpp"
#include "integrability.hpp"
#include "lattes.hpp"
#include "level.hpp"
#include "location.hpp"
#include "metric.hpp"
#include "model.hpp"
#include "potential.hpp"
#include "rational.hpp"
#include "rule.hpp"
#include "shift.hpp"
#include "thermo.hpp"
#include "validate.hpp"
#include "zeta.hpp"
