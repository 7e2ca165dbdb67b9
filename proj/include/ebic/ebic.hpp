#pragma once

// Umbrella header for the whole library.

#include "ebic/bicluster.hpp"
#include "ebic/cbf.hpp"
#include "ebic/evolution.hpp"
#include "ebic/expansion.hpp"
#include "ebic/fitness.hpp"
#include "ebic/io.hpp"
#include "ebic/matrix.hpp"
#include "ebic/metrics.hpp"
#include "ebic/parallel.hpp"
#include "ebic/rng.hpp"
#include "ebic/synthgen.hpp"
