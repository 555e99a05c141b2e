#pragma once

#include "axiom_harness.hpp"
#include "coincidence_solver.hpp"
#include "config.hpp"
#include "equivariant_map.hpp"
#include "errors.hpp"
#include "flat_space.hpp"
#include "homotopy.hpp"
#include "integer_lattice.hpp"
#include "invariants.hpp"
#include "orientation.hpp"
#include "rational.hpp"
#include "regularize.hpp"
#include "twisted_conjugacy.hpp"
