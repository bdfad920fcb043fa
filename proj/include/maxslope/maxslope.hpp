#pragma once

#include "maxslope/types.hpp"
#include "maxslope/interval.hpp"
#include "maxslope/parallel.hpp"
#include "maxslope/scalar_convex.hpp"
#include "maxslope/subdifferential.hpp"
#include "maxslope/solver.hpp"
#include "maxslope/models.hpp"
#include "maxslope/radial.hpp"
#include "maxslope/moreau.hpp"
#include "maxslope/quadrature.hpp"
#include "maxslope/trace.hpp"
#include "maxslope/banach_gs.hpp"
#include "maxslope/metric_gs.hpp"
#include "maxslope/mms_driver.hpp"
#include "maxslope/scenario.hpp"
#include "maxslope/report.hpp"
#include "maxslope/selftest.hpp"
