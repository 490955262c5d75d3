#pragma once

#include "goal/errors.hpp"
#include "goal/model.hpp"
#include "goal/solver.hpp"
#include "goal/weights.hpp"
#include "goal/estimators.hpp"
#include "goal/rng.hpp"
#include "goal/simgen.hpp"
#include "goal/scenario_config.hpp"
#include "goal/data_io.hpp"
#include "goal/harness.hpp"
#include "goal/report.hpp"
#include "goal/version.hpp"
