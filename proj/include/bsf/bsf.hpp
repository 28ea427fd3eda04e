#pragma once

// Everything in one include.
#include "bsf/bench.hpp"
#include "bsf/bnp.hpp"
#include "bsf/duals.hpp"
#include "bsf/errors.hpp"
#include "bsf/graph.hpp"
#include "bsf/heuristics.hpp"
#include "bsf/instances.hpp"
#include "bsf/log.hpp"
#include "bsf/lp.hpp"
#include "bsf/max_flow.hpp"
#include "bsf/mip.hpp"
#include "bsf/models.hpp"
#include "bsf/mps.hpp"
#include "bsf/oracle.hpp"
#include "bsf/pricing.hpp"
#include "bsf/rng.hpp"
#include "bsf/rules.hpp"
