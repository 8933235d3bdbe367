#pragma once

#include "ppwave/error.hpp"
#include "ppwave/fourier.hpp"
#include "ppwave/model.hpp"
#include "ppwave/ode.hpp"
#include "ppwave/random.hpp"
#include "ppwave/hill.hpp"
#include "ppwave/curvature.hpp"
#include "ppwave/geodesic.hpp"
#include "ppwave/killing.hpp"
#include "ppwave/group.hpp"
#include "ppwave/holonomy.hpp"
#include "ppwave/config.hpp"
#include "ppwave/report.hpp"
#include "ppwave/suites.hpp"
