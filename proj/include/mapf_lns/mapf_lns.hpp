#pragma once

#include "bench.hpp"
#include "conflicts.hpp"
#include "distance_field.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "init_solvers.hpp"
#include "instance.hpp"
#include "io/movingai.hpp"
#include "io/results.hpp"
#include "io/svg.hpp"
#include "lns.hpp"
#include "metrics.hpp"
#include "path.hpp"
#include "random.hpp"
#include "replan.hpp"
#include "reservation_table.hpp"
#include "spacetime_astar.hpp"
#include "strategies.hpp"
#include "synth.hpp"
