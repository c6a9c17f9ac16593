#pragma once

// Umbrella header: the whole library.

#include "vsrdoa/baselines.hpp"
#include "vsrdoa/bench.hpp"
#include "vsrdoa/errors.hpp"
#include "vsrdoa/gridless.hpp"
#include "vsrdoa/io.hpp"
#include "vsrdoa/linalg.hpp"
#include "vsrdoa/rng.hpp"
#include "vsrdoa/scene.hpp"
#include "vsrdoa/sdp.hpp"
#include "vsrdoa/vsr.hpp"
