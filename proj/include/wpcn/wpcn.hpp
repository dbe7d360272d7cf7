#pragma once

#include "wpcn/error.hpp"
#include "wpcn/heuristics.hpp"
#include "wpcn/io.hpp"
#include "wpcn/model.hpp"
#include "wpcn/oracle.hpp"
#include "wpcn/sim.hpp"
#include "wpcn/specialfn.hpp"
#include "wpcn/stm.hpp"
#include "wpcn/ttm.hpp"
