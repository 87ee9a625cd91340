#pragma once
// Umbrella header for the contraction laboratory.

#include "ctlab/core.hpp"
#include "ctlab/csv.hpp"
#include "ctlab/gauss_hermite.hpp"
#include "ctlab/grid_ot.hpp"
#include "ctlab/heatflow.hpp"
#include "ctlab/inequalities.hpp"
#include "ctlab/interpolation.hpp"
#include "ctlab/measures.hpp"
#include "ctlab/quadrature.hpp"
#include "ctlab/report.hpp"
#include "ctlab/rng.hpp"
#include "ctlab/rootfind.hpp"
#include "ctlab/specfile.hpp"
#include "ctlab/transport1d.hpp"
#include "ctlab/transport_map.hpp"
#include "ctlab/transport_radial.hpp"
#include "ctlab/verify.hpp"
