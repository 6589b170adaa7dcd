#pragma once

#include "ultratree/error.hpp"
#include "ultratree/taxa.hpp"
#include "ultratree/partition.hpp"
#include "ultratree/chain.hpp"
#include "ultratree/trees.hpp"
#include "ultratree/sampling.hpp"
#include "ultratree/newick.hpp"
#include "ultratree/gtp.hpp"
#include "ultratree/path.hpp"
#include "ultratree/tau_metric.hpp"
#include "ultratree/bhv_metric.hpp"
#include "ultratree/tau_oracle.hpp"
#include "ultratree/t_metric.hpp"
#include "ultratree/stats.hpp"
