#pragma once

// Umbrella header.

#include "facetflow/boundary.hpp"
#include "facetflow/composites.hpp"
#include "facetflow/config.hpp"
#include "facetflow/diagnostics.hpp"
#include "facetflow/energy.hpp"
#include "facetflow/errors.hpp"
#include "facetflow/grid.hpp"
#include "facetflow/inequality.hpp"
#include "facetflow/io.hpp"
#include "facetflow/iteration.hpp"
#include "facetflow/mollifier.hpp"
#include "facetflow/quadrature.hpp"
#include "facetflow/regularity.hpp"
#include "facetflow/report.hpp"
#include "facetflow/solver.hpp"
#include "facetflow/structure.hpp"
#include "facetflow/truncation.hpp"
