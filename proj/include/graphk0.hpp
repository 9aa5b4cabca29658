#pragma once

#include "graphk0/numeric.hpp"
#include "graphk0/graph.hpp"
#include "graphk0/graph_io.hpp"
#include "graphk0/int_matrix.hpp"
#include "graphk0/smith.hpp"
#include "graphk0/rational_lp.hpp"
#include "graphk0/polyhedra.hpp"
#include "graphk0/feasibility.hpp"
#include "graphk0/ktheory.hpp"
#include "graphk0/traces.hpp"
#include "graphk0/report.hpp"
