#pragma once

// Umbrella header.
#include "realgym/campaign.hpp"
#include "realgym/config.hpp"
#include "realgym/core.hpp"
#include "realgym/dam.hpp"
#include "realgym/data_io.hpp"
#include "realgym/elevator.hpp"
#include "realgym/errors.hpp"
#include "realgym/microgrid.hpp"
#include "realgym/policies.hpp"
#include "realgym/rng.hpp"
#include "realgym/stats.hpp"
#include "realgym/tabular.hpp"
#include "realgym/trading.hpp"
