#pragma once
/// @file hd.hpp
/// @brief Umbrella header.

#include "hd/control.hpp"
#include "hd/dual.hpp"
#include "hd/fit.hpp"
#include "hd/hilbert.hpp"
#include "hd/oracle.hpp"
#include "hd/pde_laplace.hpp"
#include "hd/random.hpp"
#include "hd/run_log.hpp"
#include "hd/solvers.hpp"
