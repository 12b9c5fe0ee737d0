// SPDX-License-Identifier: Apache-2.0
//! \file rbmwos/rbmwos.hpp
//! Umbrella header.
#pragma once

#include "dirichlet.hpp"
#include "geometry.hpp"
#include "harness.hpp"
#include "lattice.hpp"
#include "local_time.hpp"
#include "neumann.hpp"
#include "parallel.hpp"
#include "rbm_path.hpp"
#include "sampling.hpp"
#include "vec3.hpp"
