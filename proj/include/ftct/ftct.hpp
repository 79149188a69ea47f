#pragma once

#include "ftct/angles.hpp"
#include "ftct/chart.hpp"
#include "ftct/config.hpp"
#include "ftct/dual.hpp"
#include "ftct/error.hpp"
#include "ftct/geometry.hpp"
#include "ftct/linalg.hpp"
#include "ftct/manifold.hpp"
#include "ftct/metrics.hpp"
#include "ftct/model_surface.hpp"
#include "ftct/norms.hpp"
#include "ftct/ode.hpp"
#include "ftct/revolution.hpp"
#include "ftct/surface_geometry.hpp"
#include "ftct/tct.hpp"
#include "ftct/variation.hpp"
