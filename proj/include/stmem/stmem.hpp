#pragma once

// Umbrella header for the ST-MRAM approximate-storage simulator.

#include "stmem/config.hpp"
#include "stmem/device.hpp"
#include "stmem/energy_variability.hpp"
#include "stmem/experiment.hpp"
#include "stmem/fixed_point.hpp"
#include "stmem/gamma.hpp"
#include "stmem/mnist.hpp"
#include "stmem/network.hpp"
#include "stmem/profile.hpp"
#include "stmem/rng.hpp"
#include "stmem/switching.hpp"
#include "stmem/weight_store.hpp"
