#pragma once

#include "drpi/controller.hpp"
#include "drpi/costs.hpp"
#include "drpi/errors.hpp"
#include "drpi/harness.hpp"
#include "drpi/models.hpp"
#include "drpi/oracles.hpp"
#include "drpi/random.hpp"
#include "drpi/rollout.hpp"
#include "drpi/solver.hpp"
#include "drpi/uncertainty.hpp"
