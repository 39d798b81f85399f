#pragma once

#include "icroute/baselines.hpp"
#include "icroute/core.hpp"
#include "icroute/engine.hpp"
#include "icroute/experiments.hpp"
#include "icroute/forwarding.hpp"
#include "icroute/metrics.hpp"
#include "icroute/radio.hpp"
#include "icroute/rng.hpp"
#include "icroute/scenario.hpp"
#include "icroute/sync.hpp"
#include "icroute/topology.hpp"
#include "icroute/workload.hpp"
