#pragma once

#include "cascade/cone.hpp"
#include "cascade/convergence.hpp"
#include "cascade/estimators.hpp"
#include "cascade/fits.hpp"
#include "cascade/io.hpp"
#include "cascade/kernels.hpp"
#include "cascade/market_data.hpp"
#include "cascade/measure.hpp"
#include "cascade/moments.hpp"
#include "cascade/params.hpp"
#include "cascade/rng.hpp"
#include "cascade/sampling.hpp"
#include "cascade/structure.hpp"
#include "cascade/version.hpp"
