#pragma once

// Everything except io.hpp, which needs the vendored json header.

#include "rankscope/error.hpp"
#include "rankscope/matrix.hpp"
#include "rankscope/linalg.hpp"
#include "rankscope/tensor.hpp"
#include "rankscope/random.hpp"
#include "rankscope/parallel.hpp"
#include "rankscope/hurwitz_radon.hpp"
#include "rankscope/afr.hpp"
#include "rankscope/constructions.hpp"
#include "rankscope/canonical.hpp"
#include "rankscope/cp.hpp"
#include "rankscope/typical_rank.hpp"
