#pragma once

#include "asgd/core.hpp"
#include "asgd/datagen.hpp"
#include "asgd/errors.hpp"
#include "asgd/ingest.hpp"
#include "asgd/losses.hpp"
#include "asgd/metrics.hpp"
#include "asgd/presets.hpp"
#include "asgd/schedule.hpp"
#include "asgd/stats.hpp"
#include "asgd/trainers.hpp"
#include "asgd/version.hpp"
