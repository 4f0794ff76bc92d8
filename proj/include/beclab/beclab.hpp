#pragma once

#include "beclab/csvio.hpp"
#include "beclab/diagnostics.hpp"
#include "beclab/eikonal.hpp"
#include "beclab/errors.hpp"
#include "beclab/euler.hpp"
#include "beclab/gp.hpp"
#include "beclab/grid.hpp"
#include "beclab/kernel.hpp"
#include "beclab/neumann.hpp"
#include "beclab/pair_kernel.hpp"
#include "beclab/radial.hpp"
#include "beclab/regime.hpp"
#include "beclab/scattering.hpp"
#include "beclab/wavefield.hpp"
