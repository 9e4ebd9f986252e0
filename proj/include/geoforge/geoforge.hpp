#pragma once

#include "geoforge/vec3.hpp"
#include "geoforge/rng.hpp"
#include "geoforge/grid.hpp"
#include "geoforge/processes.hpp"
#include "geoforge/history.hpp"
#include "geoforge/codec.hpp"
#include "geoforge/velocity.hpp"
#include "geoforge/flow.hpp"
#include "geoforge/observe.hpp"
#include "geoforge/formats.hpp"
#include "geoforge/history_json.hpp"
#include "geoforge/config.hpp"
#include "geoforge/parallel.hpp"
#include "geoforge/cli.hpp"
