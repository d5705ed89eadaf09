#pragma once

// Umbrella header for the cfmimo simulation library.

#include "cfmimo/cb_amp.hpp"
#include "cfmimo/channel.hpp"
#include "cfmimo/config.hpp"
#include "cfmimo/decoupling.hpp"
#include "cfmimo/denoiser.hpp"
#include "cfmimo/detection.hpp"
#include "cfmimo/experiments.hpp"
#include "cfmimo/fixed_point.hpp"
#include "cfmimo/mmv.hpp"
#include "cfmimo/oracle.hpp"
#include "cfmimo/quadrature.hpp"
#include "cfmimo/rng.hpp"
#include "cfmimo/special_integrals.hpp"
#include "cfmimo/types.hpp"
