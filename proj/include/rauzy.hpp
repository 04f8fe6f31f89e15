#pragma once

#include "rauzy/arith.hpp"
#include "rauzy/catalog.hpp"
#include "rauzy/cone_analysis.hpp"
#include "rauzy/cone_matrix.hpp"
#include "rauzy/export.hpp"
#include "rauzy/iet.hpp"
#include "rauzy/path_builder.hpp"
#include "rauzy/permutation.hpp"
