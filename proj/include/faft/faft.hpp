#pragma once

// Umbrella header: recursive factor-augmented forecast evaluation toolkit.

#include "faft/accum.hpp"
#include "faft/config.hpp"
#include "faft/core.hpp"
#include "faft/csv.hpp"
#include "faft/dgp.hpp"
#include "faft/errors.hpp"
#include "faft/forecast.hpp"
#include "faft/mc.hpp"
#include "faft/pca.hpp"
#include "faft/rng.hpp"
#include "faft/stats.hpp"
