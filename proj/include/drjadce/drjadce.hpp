#pragma once

// Umbrella header for the library.

#include "drjadce/linalg.hpp"
#include "drjadce/random.hpp"
#include "drjadce/scenario.hpp"
#include "drjadce/rank_estimation.hpp"
#include "drjadce/dimension_reduction.hpp"
#include "drjadce/manifold.hpp"
#include "drjadce/objective.hpp"
#include "drjadce/trust_region.hpp"
#include "drjadce/metrics.hpp"
#include "drjadce/pipeline.hpp"
#include "drjadce/baselines.hpp"
#include "drjadce/experiment.hpp"
#include "drjadce/selftest.hpp"
