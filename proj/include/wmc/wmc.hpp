#pragma once

#include "wmc/benchmark.hpp"
#include "wmc/bdp.hpp"
#include "wmc/coordination.hpp"
#include "wmc/errors.hpp"
#include "wmc/generator.hpp"
#include "wmc/instance.hpp"
#include "wmc/lns.hpp"
#include "wmc/lns_operators.hpp"
#include "wmc/model.hpp"
#include "wmc/oracle.hpp"
#include "wmc/pattern.hpp"
#include "wmc/rng.hpp"
#include "wmc/solution.hpp"
