#pragma once

#include "annotate.hpp"
#include "baselines.hpp"
#include "complex.hpp"
#include "connectivity.hpp"
#include "data.hpp"
#include "distances.hpp"
#include "experiment.hpp"
#include "geometry.hpp"
