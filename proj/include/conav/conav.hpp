#pragma once

#include <conav/boundary_integral.hpp>
#include <conav/cache.hpp>
#include <conav/cauchy.hpp>
#include <conav/control_sim.hpp>
#include <conav/core.hpp>
#include <conav/geometry.hpp>
#include <conav/koebe.hpp>
#include <conav/navigation.hpp>
#include <conav/simply_connected.hpp>
#include <conav/spectral.hpp>
#include <conav/workspace_io.hpp>
