#pragma once

// Umbrella header.

#include "lipreg/basis.hpp"
#include "lipreg/common.hpp"
#include "lipreg/config.hpp"
#include "lipreg/covdiag.hpp"
#include "lipreg/dataset.hpp"
#include "lipreg/entropylab.hpp"
#include "lipreg/estimators.hpp"
#include "lipreg/io.hpp"
#include "lipreg/measures.hpp"
#include "lipreg/multiindex.hpp"
#include "lipreg/parallel.hpp"
#include "lipreg/quadrature.hpp"
#include "lipreg/risklab.hpp"
#include "lipreg/rng.hpp"
#include "lipreg/runner.hpp"
#include "lipreg/stats.hpp"
#include "lipreg/targets.hpp"
