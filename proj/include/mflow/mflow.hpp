#pragma once

// Umbrella header for the m-distribution workflow toolkit.

#include "mflow/classifier.hpp"
#include "mflow/errors.hpp"
#include "mflow/learning.hpp"
#include "mflow/metrics.hpp"
#include "mflow/model.hpp"
#include "mflow/quadrature.hpp"
#include "mflow/regimes.hpp"
#include "mflow/report_io.hpp"
#include "mflow/rng.hpp"
#include "mflow/scenario.hpp"
#include "mflow/simulator.hpp"
