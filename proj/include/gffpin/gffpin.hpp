#pragma once
// Umbrella header for the whole library.
#include "gffpin/analytics.hpp"
#include "gffpin/boxgreen.hpp"
#include "gffpin/common.hpp"
#include "gffpin/disorder.hpp"
#include "gffpin/experiments.hpp"
#include "gffpin/freeenergy.hpp"
#include "gffpin/frd.hpp"
#include "gffpin/green.hpp"
#include "gffpin/hierarchy.hpp"
#include "gffpin/io.hpp"
#include "gffpin/lattice.hpp"
#include "gffpin/mcmc.hpp"
#include "gffpin/normal.hpp"
#include "gffpin/partition.hpp"
#include "gffpin/quadrature.hpp"
#include "gffpin/rng.hpp"
#include "gffpin/solver.hpp"
#include "gffpin/stats.hpp"
#include "gffpin/telescoping.hpp"
