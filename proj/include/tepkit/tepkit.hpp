#pragma once

#include "tepkit/lp.hpp"
#include "tepkit/milp.hpp"
#include "tepkit/netmodel.hpp"
#include "tepkit/lopf.hpp"
#include "tepkit/heuristics.hpp"
#include "tepkit/bench.hpp"
