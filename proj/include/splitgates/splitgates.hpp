#pragma once

#include "splitgates/csv.hpp"
#include "splitgates/dataset.hpp"
#include "splitgates/dgp.hpp"
#include "splitgates/gates.hpp"
#include "splitgates/grouping.hpp"
#include "splitgates/lasso.hpp"
#include "splitgates/learners.hpp"
#include "splitgates/manifest.hpp"
#include "splitgates/parallel.hpp"
#include "splitgates/rng.hpp"
#include "splitgates/serialize.hpp"
#include "splitgates/sim.hpp"
#include "splitgates/splits.hpp"
#include "splitgates/ssri.hpp"
#include "splitgates/stats.hpp"
#include "splitgates/svg.hpp"
