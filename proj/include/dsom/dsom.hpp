#pragma once

#include "dsom/bench.hpp"
#include "dsom/io.hpp"
#include "dsom/levenshtein.hpp"
#include "dsom/matrix.hpp"
#include "dsom/rng.hpp"
#include "dsom/topology.hpp"
#include "dsom/training.hpp"
#include "dsom/version.hpp"
