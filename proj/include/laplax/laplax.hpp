#pragma once

// Everything in one include.

#include "decompose.hpp"
#include "eliminate.hpp"
#include "error.hpp"
#include "generators.hpp"
#include "graph.hpp"
#include "gremban.hpp"
#include "lowstretch.hpp"
#include "matrix_market.hpp"
#include "oracles.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "solver.hpp"
#include "sparse.hpp"
#include "sparsify.hpp"
#include "stretch.hpp"
